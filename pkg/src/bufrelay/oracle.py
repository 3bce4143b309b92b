"""Brute-force checks of the selection machinery.

Nothing here is used by the schemes. :func:`grid_optimal_power` searches
the power interval densely instead of trusting the endpoint argument, and
:func:`exhaustive_select` re-enumerates pairs and endpoints with plain loops.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .model import (
    BufferState,
    ChannelRealization,
    Decision,
    Pair,
    SystemParams,
    best_boundary_power,
    power_bounds,
    rate_rd,
    rate_sr,
    sum_throughput,
)
from .schemes import SelectionContext, hd_fallback, jpass_select

__all__ = [
    "grid_optimal_power",
    "exhaustive_select",
    "random_instance",
    "VerifyReport",
    "verify",
]


def grid_optimal_power(params, chan, buffers, i, j, grid_points: int = 1000) -> Optional[Tuple[float, float]]:
    """Best ``(power, tau)`` on a uniform grid spanning the feasible interval.

    The grid includes both endpoints. Returns None for an infeasible pair.
    """
    if grid_points < 2:
        raise ValueError("grid needs at least two points")
    interval = power_bounds(params, chan, buffers, i, j)
    if interval is None:
        return None
    p = np.linspace(interval.p_min, interval.p_max, grid_points)
    tau = rate_sr(params, chan.g2[i], chan.e2[i, j], p) + rate_rd(params, chan.h2[j], p)
    k = int(np.argmax(tau))
    return float(p[k]), float(tau[k])


def exhaustive_select(ctx: SelectionContext) -> Decision:
    """Loop over every ordered pair and both interval endpoints."""
    params, chan, buffers = ctx.params, ctx.chan, ctx.buffers
    best = None
    best_tau = -np.inf
    for i in range(chan.n):
        for j in range(chan.n):
            if i == j:
                continue
            interval = power_bounds(params, chan, buffers, i, j)
            if interval is None:
                continue
            for p in (interval.p_max, interval.p_min):
                tau = sum_throughput(params, chan, i, j, p)
                if tau > best_tau:
                    best_tau = tau
                    best = (i, j, p)
    if best is None:
        return hd_fallback(ctx)
    i, j, p = best
    return Pair(
        i,
        j,
        p,
        float(rate_sr(params, chan.g2[i], chan.e2[i, j], p)),
        float(rate_rd(params, chan.h2[j], p)),
    )


def random_instance(rng: np.random.Generator, n: Optional[int] = None,
                    pmax_db: Optional[float] = None, finite_share: float = 0.5):
    """Random ``(params, chan, buffers)`` for property checks.

    ``n`` is drawn from 2..8 and ``pmax_db`` from [0, 30] when omitted. Rates
    range over [0, 3]; about ``finite_share`` of instances use finite buffers
    with random fill levels.
    """
    if n is None:
        n = int(rng.integers(2, 9))
    if pmax_db is None:
        pmax_db = float(rng.uniform(0.0, 30.0))
    pmax = 10.0 ** (pmax_db / 10.0)
    ps = pmax * float(rng.choice([1.0, 10.0]))
    r1, r2 = rng.uniform(0.0, 3.0, size=2)
    if rng.random() < finite_share:
        qmax = float(rng.uniform(2.0, 40.0))
        q = rng.uniform(0.0, qmax, size=n)
    else:
        qmax = np.inf
        q = rng.uniform(0.0, 50.0, size=n)
    params = SystemParams(ps=ps, pmax=pmax, r1=float(r1), r2=float(r2), qmax=qmax, n=n)
    g2 = rng.exponential(size=n)
    h2 = rng.exponential(size=n)
    e2 = rng.exponential(size=(n, n))
    e2 = np.triu(e2, 1)
    e2 = e2 + e2.T
    return params, ChannelRealization(g2, h2, e2), BufferState(q)


@dataclass
class VerifyReport:
    instances: int
    boundary_checked: int
    boundary_worst_gap: float
    boundary_failures: int
    selection_mismatches: int

    @property
    def ok(self) -> bool:
        return self.boundary_failures == 0 and self.selection_mismatches == 0


def verify(instances: int = 1000, seed: int = 0, grid_points: int = 1000,
           n: Optional[int] = None, tol: float = 1e-9) -> VerifyReport:
    """Audit endpoint optimality and JPASS selection on random instances."""
    rng = np.random.default_rng(seed)
    checked = failures = mismatches = 0
    worst = -np.inf
    for _ in range(instances):
        params, chan, buffers = random_instance(rng, n=n)
        ctx = SelectionContext(params, chan, buffers)
        for i in range(chan.n):
            for j in range(chan.n):
                if i == j:
                    continue
                grid = grid_optimal_power(params, chan, buffers, i, j, grid_points)
                if grid is None:
                    continue
                _, tau_b = best_boundary_power(params, chan, buffers, i, j)
                gap = grid[1] - tau_b
                worst = max(worst, gap)
                checked += 1
                failures += gap > tol
        if jpass_select(ctx).sum_rate != exhaustive_select(ctx).sum_rate:
            mismatches += 1
    return VerifyReport(instances, checked, float(worst), failures, mismatches)
