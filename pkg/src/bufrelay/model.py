"""System model of the two-hop buffered relay network.

All powers are linear (watts relative to the noise floor). Rates are in
bits/s/Hz and buffer contents in bits, so a rate ``r`` held for a slot of
duration ``t`` moves ``r * t`` bits.

Every formula here is written with numpy ufuncs so the same function serves
scalar arguments and broadcast arrays with bit-identical results. The
vectorised schemes and the scalar oracles rely on that.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

import numpy as np

__all__ = [
    "SystemParams",
    "ChannelRealization",
    "BufferState",
    "PowerInterval",
    "Pair",
    "HdReceive",
    "HdTransmit",
    "Idle",
    "Decision",
    "EvalCounter",
    "rate_sr",
    "rate_rd",
    "sinr_sr",
    "snr_rd",
    "power_bounds",
    "pair_bounds",
    "sum_throughput",
    "best_boundary_power",
    "constraint_slack",
]

INFINITE = math.inf

# 2**x overflows a double beyond this exponent; such constraints are inactive.
_EXP2_LIMIT = 1024.0


@dataclass(frozen=True)
class SystemParams:
    """Scalar constants of the per-slot optimisation problem.

    Parameters
    ----------
    ps : float
        Source transmit power.
    pmax : float
        Maximum transmit power of a relay.
    n0 : float
        Noise power at every node.
    r1, r2 : float
        Minimum rates of the source-relay and relay-destination hops.
    t : float
        Slot duration.
    qmax : float
        Buffer capacity in bits. ``math.inf`` selects the infinite-buffer
        mode, which removes the receive-side buffer constraint.
    n : int
        Number of relays.
    """

    ps: float
    pmax: float
    n0: float = 1.0
    r1: float = 1.0
    r2: float = 1.0
    t: float = 1.0
    qmax: float = INFINITE
    n: int = 2

    def __post_init__(self):
        if not self.ps > 0:
            raise ValueError(f"ps must be positive, got {self.ps}")
        if not self.pmax > 0:
            raise ValueError(f"pmax must be positive, got {self.pmax}")
        if not self.n0 > 0:
            raise ValueError(f"n0 must be positive, got {self.n0}")
        if self.r1 < 0 or self.r2 < 0:
            raise ValueError("minimum rates must be nonnegative")
        if not self.t > 0:
            raise ValueError(f"slot duration must be positive, got {self.t}")
        if not self.qmax > 0:
            raise ValueError(f"qmax must be positive, got {self.qmax}")
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"need at least two relays, got n={self.n}")

    @property
    def phi1(self) -> float:
        """SINR floor at the receiving relay, ``2**r1 - 1``."""
        return 2.0 ** self.r1 - 1.0

    @property
    def phi2(self) -> float:
        """SNR floor at the destination, ``2**r2 - 1``."""
        return 2.0 ** self.r2 - 1.0

    @property
    def infinite_buffer(self) -> bool:
        return math.isinf(self.qmax)


@dataclass(frozen=True)
class ChannelRealization:
    """Power gains of one slot.

    ``g2[i]`` is the source to relay ``i`` gain, ``h2[j]`` the relay ``j`` to
    destination gain and ``e2[i, j]`` the inter-relay gain. The inter-relay
    matrix is symmetric; its diagonal is never read.
    """

    g2: np.ndarray
    h2: np.ndarray
    e2: np.ndarray

    def __post_init__(self):
        n = len(self.g2)
        if self.h2.shape != (n,) or self.e2.shape != (n, n):
            raise ValueError(
                f"inconsistent shapes g2={self.g2.shape} h2={self.h2.shape} "
                f"e2={self.e2.shape}"
            )

    @property
    def n(self) -> int:
        return len(self.g2)

    @classmethod
    def from_gains(cls, g2, h2, e2) -> "ChannelRealization":
        """Build a realization from array-likes and check it.

        ``e2`` may be a full matrix or, for two relays, a scalar.
        """
        g2 = np.asarray(g2, dtype=float)
        h2 = np.asarray(h2, dtype=float)
        e2 = np.asarray(e2, dtype=float)
        if e2.ndim == 0:
            e2 = np.full((len(g2), len(g2)), float(e2))
            np.fill_diagonal(e2, 0.0)
        chan = cls(g2, h2, e2)
        chan.check()
        return chan

    def check(self):
        """Raise ``ValueError`` unless gains are finite, nonnegative, reciprocal."""
        for name in ("g2", "h2", "e2"):
            a = getattr(self, name)
            if not np.all(np.isfinite(a)) or np.any(a < 0):
                raise ValueError(f"{name} must be finite and nonnegative")
        off = ~np.eye(self.n, dtype=bool)
        if not np.array_equal(self.e2[off], self.e2.T[off]):
            raise ValueError("inter-relay gains must be symmetric")


@dataclass(frozen=True)
class BufferState:
    """Bits stored at each relay."""

    stored: np.ndarray

    @classmethod
    def filled(cls, n: int, bits: float) -> "BufferState":
        return cls(np.full(n, float(bits)))

    def check(self, qmax: float = INFINITE):
        q = self.stored
        if np.any(q < 0) or np.any(q > qmax):
            raise ValueError(f"buffer levels {q} outside [0, {qmax}]")

    def __len__(self):
        return len(self.stored)


@dataclass(frozen=True)
class PowerInterval:
    """Nonempty closed interval of admissible relay powers."""

    p_min: float
    p_max: float

    def __post_init__(self):
        if not self.p_min <= self.p_max:
            raise ValueError(f"empty interval [{self.p_min}, {self.p_max}]")

    def __contains__(self, p):
        return self.p_min <= p <= self.p_max


# Decisions ---------------------------------------------------------------


@dataclass(frozen=True)
class Pair:
    """Relay ``rx`` receives from the source while ``tx`` sends to the
    destination at ``power``.

    ``constrained`` is False for baselines that pick powers without honouring
    the QoS and buffer constraints; only constrained pairs are checked
    against the feasible power interval.
    """

    rx: int
    tx: int
    power: float
    rate_sr: float
    rate_rd: float
    constrained: bool = True

    mode = "pair"

    def __post_init__(self):
        if self.rx == self.tx:
            raise ValueError("receiving and transmitting relay must differ")

    @property
    def sum_rate(self) -> float:
        return self.rate_sr + self.rate_rd


@dataclass(frozen=True)
class HdReceive:
    rx: int
    rate_sr: float

    mode = "hd-rx"
    rate_rd = 0.0

    @property
    def sum_rate(self) -> float:
        return self.rate_sr


@dataclass(frozen=True)
class HdTransmit:
    tx: int
    power: float
    rate_rd: float

    mode = "hd-tx"
    rate_sr = 0.0

    @property
    def sum_rate(self) -> float:
        return self.rate_rd


@dataclass(frozen=True)
class Idle:
    mode = "idle"
    rate_sr = 0.0
    rate_rd = 0.0
    sum_rate = 0.0


Decision = Union[Pair, HdReceive, HdTransmit, Idle]


@dataclass
class EvalCounter:
    """Work counters owned by one worker.

    ``evaluations`` counts sum-throughput evaluations; ``comparisons`` counts
    candidate scores compared while selecting a pair.
    """

    evaluations: int = 0
    comparisons: int = 0

    def merge(self, other: "EvalCounter"):
        self.evaluations += other.evaluations
        self.comparisons += other.comparisons


# Rates -------------------------------------------------------------------


def sinr_sr(params: SystemParams, g2, e2, p):
    """SINR at the receiving relay with relay power ``p`` interfering."""
    return params.ps * g2 / (params.n0 + p * e2)


def snr_rd(params: SystemParams, h2, p):
    """SNR at the destination."""
    return p * h2 / params.n0


def rate_sr(params: SystemParams, g2, e2, p):
    """Source to relay rate, ``log2(1 + Ps g2 / (N0 + p e2))``."""
    return np.log2(1.0 + sinr_sr(params, g2, e2, p))


def rate_rd(params: SystemParams, h2, p):
    """Relay to destination rate, ``log2(1 + p h2 / N0)``."""
    return np.log2(1.0 + snr_rd(params, h2, p))


def sum_throughput(params, chan, i, j, p, counter: Optional[EvalCounter] = None):
    """Sum of both hop rates when ``i`` receives and ``j`` transmits at ``p``."""
    if i == j:
        raise ValueError("sum-throughput needs two distinct relays")
    if counter is not None:
        counter.evaluations += 1
    return float(
        rate_sr(params, chan.g2[i], chan.e2[i, j], p) + rate_rd(params, chan.h2[j], p)
    )


# Power bounds ------------------------------------------------------------


def _exp2m1(x):
    # 2**x - 1, with overflow mapped to inf (constraint inactive)
    with np.errstate(over="ignore"):
        return np.where(x > _EXP2_LIMIT, np.inf, np.exp2(np.minimum(x, _EXP2_LIMIT)) - 1.0)


def _bounds(params: SystemParams, g2, e2, h2, q_rx, q_tx):
    """Broadcasting kernel behind :func:`power_bounds` and :func:`pair_bounds`.

    Returns ``(lower, upper, ok)`` arrays. ``ok`` is False wherever no power
    satisfies all five constraints.
    """
    g2, e2, h2, q_rx, q_tx = np.broadcast_arrays(
        *(np.asarray(a, dtype=float) for a in (g2, e2, h2, q_rx, q_tx))
    )
    phi1, phi2 = params.phi1, params.phi2
    n0, t = params.n0, params.t
    sig = params.ps * g2
    pos_h = h2 > 0
    pos_e = e2 > 0
    h_safe = np.where(pos_h, h2, 1.0)
    e_safe = np.where(pos_e, e2, 1.0)

    # destination SNR floor
    lower = np.where(pos_h, phi2 * n0 / h_safe, 0.0)
    ok = pos_h | (phi2 == 0)

    # relay power cap and SINR floor at the receiving relay
    upper = np.full(g2.shape, float(params.pmax))
    if phi1 > 0:
        upper = np.where(pos_e, np.minimum(upper, (sig - phi1 * n0) / (phi1 * e_safe)), upper)
        ok = ok & (pos_e | (sig >= phi1 * n0))

    # receiving relay must have room for what it decodes
    if not params.infinite_buffer:
        room = (params.qmax - q_rx) / t
        has_room = room > 0
        grow = _exp2m1(np.where(has_room, room, 1.0))
        ok = ok & has_room
        with np.errstate(divide="ignore", invalid="ignore"):
            term = sig / (grow * e_safe) - n0 / e_safe
        lower = np.where(pos_e & has_room, np.maximum(lower, term), lower)
        # without interference the decoded rate is fixed and must fit as is
        ok = ok & (pos_e | (sig <= n0 * grow))

    # transmitting relay cannot send more than it stores
    ok = ok & (q_tx > 0)
    drain = n0 * _exp2m1(q_tx / t) / h_safe
    upper = np.where(pos_h, np.minimum(upper, drain), upper)

    lower = np.maximum(lower, 0.0)
    ok = ok & (lower <= upper)
    return lower, upper, ok


def power_bounds(
    params: SystemParams, chan: ChannelRealization, buffers: BufferState, rx: int, tx: int
) -> Optional[PowerInterval]:
    """Feasible relay powers for receiver ``rx`` and transmitter ``tx``.

    Returns ``None`` when no power satisfies the QoS, power and buffer
    constraints together.
    """
    n = chan.n
    if rx == tx or not (0 <= rx < n and 0 <= tx < n):
        raise IndexError(f"invalid relay pair ({rx}, {tx}) for n={n}")
    q = buffers.stored
    lo, hi, ok = _bounds(params, chan.g2[rx], chan.e2[rx, tx], chan.h2[tx], q[rx], q[tx])
    if not ok:
        return None
    return PowerInterval(float(lo), float(hi))


def pair_bounds(params: SystemParams, chan: ChannelRealization, buffers: BufferState):
    """Power bounds of every ordered pair at once.

    Returns ``(lower, upper, ok)`` as ``n x n`` arrays indexed ``[rx, tx]``;
    entries agree exactly with :func:`power_bounds`.
    """
    q = buffers.stored
    lo, hi, ok = _bounds(
        params, chan.g2[:, None], chan.e2, chan.h2[None, :], q[:, None], q[None, :]
    )
    ok = ok & ~np.eye(chan.n, dtype=bool)
    return lo, hi, ok


def best_boundary_power(
    params, chan, buffers, rx, tx, counter: Optional[EvalCounter] = None
) -> Optional[Tuple[float, float]]:
    """Best power of a single pair, taken from the two interval endpoints.

    The objective ``log2`` of a quadratic-over-linear function of the power
    is convex, so its maximum over an interval sits at an endpoint. Ties go
    to the upper endpoint.
    """
    interval = power_bounds(params, chan, buffers, rx, tx)
    if interval is None:
        return None
    tau_lo = sum_throughput(params, chan, rx, tx, interval.p_min, counter)
    tau_hi = sum_throughput(params, chan, rx, tx, interval.p_max, counter)
    if counter is not None:
        counter.comparisons += 1
    if tau_hi >= tau_lo:
        return interval.p_max, tau_hi
    return interval.p_min, tau_lo


def constraint_slack(params, chan, buffers, rx, tx, p):
    """Slack of each of the five constraints at power ``p``.

    Nonnegative entries mean satisfied. Order: destination SNR, relay SINR,
    power cap, transmit buffer, receive buffer (``inf`` for an infinite
    buffer).
    """
    q = buffers.stored
    r_sr = float(rate_sr(params, chan.g2[rx], chan.e2[rx, tx], p))
    r_rd = float(rate_rd(params, chan.h2[tx], p))
    return np.array(
        [
            float(snr_rd(params, chan.h2[tx], p)) - params.phi2,
            float(sinr_sr(params, chan.g2[rx], chan.e2[rx, tx], p)) - params.phi1,
            params.pmax - p,
            q[tx] - r_rd * params.t,
            params.qmax - (q[rx] + r_sr * params.t),
        ]
    )
