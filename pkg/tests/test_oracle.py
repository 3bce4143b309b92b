import numpy as np
import pytest

from bufrelay.model import (
    BufferState,
    ChannelRealization,
    HdReceive,
    Pair,
    SystemParams,
    best_boundary_power,
    power_bounds,
)
from bufrelay.oracle import exhaustive_select, grid_optimal_power, random_instance, verify
from bufrelay.schemes import SelectionContext, jpass_select

TAU_A_P10 = 6.044394119358453
PMIN_B = 1.4354692507258633
TAU_B = 3.009325166191749


def example_a():
    params = SystemParams(ps=10, pmax=10, r1=1, r2=1, n=2)
    return params, ChannelRealization.from_gains([1, 1], [1, 1], 0.1), BufferState.filled(2, 1e6)


def example_b():
    params = SystemParams(ps=100, pmax=20, r1=0.5, r2=0.1, n=2)
    return params, ChannelRealization.from_gains([1, 1], [0.05, 0.05], 10.0), BufferState.filled(2, 1e6)


def test_grid_example_a():
    p, tau = grid_optimal_power(*example_a(), 0, 1, grid_points=10_000)
    assert p == pytest.approx(10.0, abs=1e-12)
    assert tau == pytest.approx(TAU_A_P10, abs=1e-9)
    assert abs(tau - best_boundary_power(*example_a(), 0, 1)[1]) <= 1e-9


def test_grid_example_b_lower_endpoint():
    p, tau = grid_optimal_power(*example_b(), 0, 1, grid_points=10_000)
    assert p == pytest.approx(PMIN_B, abs=1e-12)
    assert tau == pytest.approx(TAU_B, abs=1e-9)


@pytest.mark.parametrize("seed", range(5))
def test_two_point_grid_is_boundary(seed):
    rng = np.random.default_rng(seed)
    params, chan, buffers = random_instance(rng, finite_share=0.0)
    for i in range(chan.n):
        for j in range(chan.n):
            if i == j or power_bounds(params, chan, buffers, i, j) is None:
                continue
            grid = grid_optimal_power(params, chan, buffers, i, j, grid_points=2)
            assert grid[1] == best_boundary_power(params, chan, buffers, i, j)[1]


def test_grid_rejects_bad_input():
    with pytest.raises(ValueError):
        grid_optimal_power(*example_a(), 0, 1, grid_points=1)
    params, chan, _ = example_a()
    assert grid_optimal_power(params, chan, BufferState.filled(2, 0.0), 0, 1) is None


def test_empty_feasible_set_falls_back():
    # an R-D target no power can meet
    params = SystemParams(ps=10, pmax=1, r1=1, r2=5, n=2)
    chan = ChannelRealization.from_gains([1, 1], [1, 1], 0.1)
    ctx = SelectionContext(params, chan, BufferState.filled(2, 1e6))
    a, b = jpass_select(ctx), exhaustive_select(ctx)
    assert isinstance(a, HdReceive) and a == b


def test_single_feasible_pair():
    params, chan, _ = example_a()
    ctx = SelectionContext(params, chan, BufferState(np.array([0.0, 1e6])))
    a, b = jpass_select(ctx), exhaustive_select(ctx)
    assert isinstance(a, Pair) and (a.rx, a.tx) == (0, 1)
    assert a == b


def test_random_contexts_agree():
    rng = np.random.default_rng(11)
    for _ in range(300):
        ctx = SelectionContext(*random_instance(rng, n=int(rng.integers(2, 7))))
        assert jpass_select(ctx).sum_rate == exhaustive_select(ctx).sum_rate


def test_verify_report():
    report = verify(instances=50, seed=3)
    assert report.ok
    assert report.boundary_checked > 0
    assert report.boundary_worst_gap <= 1e-9
