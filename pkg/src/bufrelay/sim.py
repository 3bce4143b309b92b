"""Slotted Monte Carlo episodes.

Each slot draws fresh channels, lets a scheme decide from the channels it
knows, then applies the decision to the buffers under the true channels.
Buffers carry over between slots.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from .channel import ChannelStream, CsiErrorSpec, FadingSpec
from .model import (
    BufferState,
    ChannelRealization,
    Decision,
    EvalCounter,
    HdReceive,
    HdTransmit,
    Idle,
    Pair,
    SystemParams,
    power_bounds,
    rate_rd,
    rate_sr,
)
from .schemes import SchemeId, SelectionContext, select

__all__ = [
    "EpisodeConfig",
    "SlotMetrics",
    "RunMetrics",
    "DecisionError",
    "apply_decision",
    "run_episode",
    "run_episodes",
    "mmht",
    "MODES",
]

MODES = ("pair", "hd-rx", "hd-tx", "idle")

# relative slack when checking powers and rate floors
_REL_TOL = 1e-9


class DecisionError(RuntimeError):
    """A scheme returned a pair whose power violates its own constraints."""


@dataclass(frozen=True)
class EpisodeConfig:
    scheme: SchemeId
    params: SystemParams
    fading: Optional[FadingSpec] = None
    csi: Optional[CsiErrorSpec] = None
    slots: int = 50_000
    initial_fill: float = 0.0
    master_seed: int = 0
    trial: int = 0
    csi_outage: bool = False
    reset_each_slot: bool = False

    def __post_init__(self):
        object.__setattr__(self, "scheme", SchemeId(self.scheme))
        if self.fading is None:
            object.__setattr__(self, "fading", FadingSpec(self.params.n))
        if self.fading.n != self.params.n:
            raise ValueError("fading spec and system parameters disagree on n")
        if self.slots < 1:
            raise ValueError("an episode needs at least one slot")
        if not 0 <= self.initial_fill <= self.params.qmax:
            raise ValueError(
                f"initial fill {self.initial_fill} outside [0, {self.params.qmax}]"
            )
        if self.csi is not None:
            self.csi.check(self.fading)


@dataclass(frozen=True)
class SlotMetrics:
    realized_sr: float
    realized_rd: float
    mode: str
    evaluations: int = 0
    qos_violation: bool = False

    @property
    def sum(self) -> float:
        return self.realized_sr + self.realized_rd


@dataclass
class RunMetrics:
    """Averages over every slot of an episode, idle slots included."""

    slots: int
    mean_sr: float
    mean_rd: float
    std_sum: float
    mode_counts: Dict[str, int]
    evaluations: int
    comparisons: int
    qos_violations: int
    final_buffers: BufferState
    received: np.ndarray
    sent: np.ndarray

    @property
    def mean_sum(self) -> float:
        return self.mean_sr + self.mean_rd

    @property
    def mmht(self) -> float:
        return min(self.mean_sr, self.mean_rd)

    @property
    def stderr_sum(self) -> float:
        return self.std_sum / math.sqrt(self.slots)

    def frac(self, mode: str) -> float:
        return self.mode_counts.get(mode, 0) / self.slots

    @property
    def frac_pair(self) -> float:
        return self.frac("pair")

    @property
    def frac_hd(self) -> float:
        return self.frac("hd-rx") + self.frac("hd-tx")

    @property
    def frac_idle(self) -> float:
        return self.frac("idle")


def mmht(run: RunMetrics) -> float:
    """Minimum of the two mean hop throughputs."""
    return min(run.mean_sr, run.mean_rd)


def _check_pair(params, chan, buffers, d: Pair):
    interval = power_bounds(params, chan, buffers, d.rx, d.tx)
    if interval is None:
        raise DecisionError(f"pair ({d.rx}, {d.tx}) selected but infeasible")
    slack = _REL_TOL * max(1.0, interval.p_max)
    if not interval.p_min - slack <= d.power <= interval.p_max + slack:
        raise DecisionError(
            f"power {d.power} outside [{interval.p_min}, {interval.p_max}] "
            f"for pair ({d.rx}, {d.tx})"
        )


def _realize(decided, capacity, outage):
    if outage and decided > capacity:
        return 0.0
    return min(decided, capacity)


def apply_decision(
    params: SystemParams,
    true_chan: ChannelRealization,
    buffers: BufferState,
    decision: Decision,
    *,
    decision_chan: Optional[ChannelRealization] = None,
    outage: bool = False,
) -> Tuple[BufferState, SlotMetrics]:
    """Move bits according to ``decision`` and report what was delivered.

    With perfect CSI (``decision_chan`` omitted or identical to
    ``true_chan``) the decided rates are realized. Otherwise each hop
    realizes the smaller of its decided rate and its true capacity at the
    decided power, or nothing when ``outage`` is set and the decided rate
    exceeds capacity. Received bits are clipped to the free space and sent
    bits to the stored amount.

    Raises
    ------
    DecisionError
        If a constrained pair uses a power outside its feasible interval on
        the channels it was decided from.
    """
    perfect = decision_chan is None or decision_chan is true_chan
    if decision_chan is None:
        decision_chan = true_chan
    t = params.t
    q = buffers.stored.copy()

    if isinstance(decision, Pair) and decision.constrained:
        _check_pair(params, decision_chan, buffers, decision)

    sr = decision.rate_sr
    rd = decision.rate_rd
    if not perfect:
        if isinstance(decision, Pair):
            cap_sr = float(rate_sr(params, true_chan.g2[decision.rx],
                                   true_chan.e2[decision.rx, decision.tx], decision.power))
        elif isinstance(decision, HdReceive):
            cap_sr = float(rate_sr(params, true_chan.g2[decision.rx], 0.0, 0.0))
        if isinstance(decision, (Pair, HdTransmit)):
            cap_rd = float(rate_rd(params, true_chan.h2[decision.tx], decision.power))
        if isinstance(decision, (Pair, HdReceive)):
            sr = _realize(sr, cap_sr, outage)
        if isinstance(decision, (Pair, HdTransmit)):
            rd = _realize(rd, cap_rd, outage)

    qos = False
    if isinstance(decision, (Pair, HdReceive)):
        got = min(sr * t, float(params.qmax - q[decision.rx]))
        q[decision.rx] += got
        sr = got / t
        qos = qos or sr < params.r1 * (1 - _REL_TOL)
    if isinstance(decision, (Pair, HdTransmit)):
        sent = min(rd * t, float(q[decision.tx]))
        q[decision.tx] -= sent
        rd = sent / t
        qos = qos or rd < params.r2 * (1 - _REL_TOL)

    return BufferState(q), SlotMetrics(sr, rd, decision.mode, qos_violation=qos)


def run_episode(config: EpisodeConfig) -> RunMetrics:
    """Run one episode and average its slot metrics."""
    params = config.params
    n = params.n
    initial = BufferState.filled(n, config.initial_fill)
    buffers = initial
    stream = ChannelStream(config.fading, config.master_seed, config.trial, config.csi)
    counter = EvalCounter()
    sr_hist = np.empty(config.slots)
    rd_hist = np.empty(config.slots)
    modes = dict.fromkeys(MODES, 0)
    received = np.zeros(n)
    sent = np.zeros(n)
    qos = 0

    for slot, (true, est) in zip(range(config.slots), stream):
        if config.reset_each_slot:
            buffers = initial
        ctx = SelectionContext(params, est, buffers, true, slot % 2)
        decision = select(config.scheme, ctx, counter)
        before = buffers.stored
        buffers, m = apply_decision(
            params, true, buffers, decision, decision_chan=est, outage=config.csi_outage
        )
        delta = buffers.stored - before
        received += np.maximum(delta, 0.0)
        sent += np.maximum(-delta, 0.0)
        sr_hist[slot] = m.realized_sr
        rd_hist[slot] = m.realized_rd
        modes[m.mode] += 1
        qos += m.qos_violation

    mean_sr = math.fsum(sr_hist) / config.slots
    mean_rd = math.fsum(rd_hist) / config.slots
    sums = sr_hist + rd_hist
    return RunMetrics(
        slots=config.slots,
        mean_sr=mean_sr,
        mean_rd=mean_rd,
        std_sum=float(np.std(sums, ddof=1)) if config.slots > 1 else 0.0,
        mode_counts=modes,
        evaluations=counter.evaluations,
        comparisons=counter.comparisons,
        qos_violations=qos,
        final_buffers=buffers,
        received=received,
        sent=sent,
    )


def run_episodes(configs: Iterable[EpisodeConfig], workers: int = 1) -> List[RunMetrics]:
    """Run independent episodes, returning results in input order."""
    configs = list(configs)
    if workers <= 1 or len(configs) <= 1:
        return [run_episode(c) for c in configs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run_episode, configs))
