"""Per-slot relay selection policies.

Every policy has the signature ``select(ctx, counter=None) -> Decision`` and
decides from ``ctx.chan``, the channels known at the transmitter. The
proposed schemes are :func:`jpass_select` and :func:`rss_select`; the rest
are comparison baselines reconstructed from their one-line descriptions:

* ``mmrs`` picks the strongest source-relay and relay-destination links
  independently and lets the relay transmit at full power.
* ``ba-sor`` scores pairs by the smaller of the relay SINR and the
  destination SNR at full power.
* ``min-power`` meets the rate targets exactly with the smallest relay power.
* ``chd`` alternates receive and transmit slots through single relays.

Indices are 0-based. Ties are always resolved towards smaller relay indices
unless a function documents otherwise.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from .model import (
    BufferState,
    ChannelRealization,
    Decision,
    EvalCounter,
    HdReceive,
    HdTransmit,
    Idle,
    Pair,
    PowerInterval,
    SystemParams,
    _exp2m1,
    best_boundary_power,
    pair_bounds,
    rate_rd,
    rate_sr,
    sinr_sr,
    snr_rd,
    sum_throughput,
)

__all__ = [
    "SchemeId",
    "SelectionContext",
    "feasible_pairs",
    "jpass_select",
    "rss_select",
    "ratio_metric",
    "hd_fallback",
    "mmrs_select",
    "basor_select",
    "minpower_select",
    "chd_select",
    "select",
]


class SchemeId(str, enum.Enum):
    JPASS = "jpass"
    RSS = "rss"
    MMRS = "mmrs"
    BA_SOR = "ba-sor"
    MIN_POWER = "min-power"
    CHD = "chd"

    @classmethod
    def parse(cls, name: str) -> "SchemeId":
        try:
            return cls(name)
        except ValueError:
            allowed = ", ".join(s.value for s in cls)
            raise ValueError(f"unknown scheme {name!r}; allowed: {allowed}") from None


@dataclass(frozen=True)
class SelectionContext:
    """Everything a scheme may look at in one slot.

    ``chan`` holds the (possibly estimated) channels used to decide and
    ``true_chan`` the actual channels. ``chd_phase`` is 0 for a CHD receive
    slot and 1 for a transmit slot.
    """

    params: SystemParams
    chan: ChannelRealization
    buffers: BufferState
    true_chan: Optional[ChannelRealization] = None
    chd_phase: int = 0

    def __post_init__(self):
        if self.true_chan is None:
            object.__setattr__(self, "true_chan", self.chan)
        if self.true_chan.n != self.chan.n or len(self.buffers) != self.chan.n:
            raise ValueError("channels and buffers disagree on the number of relays")


# helpers -----------------------------------------------------------------


def _has_room(ctx) -> np.ndarray:
    return ctx.buffers.stored < ctx.params.qmax


def _has_data(ctx) -> np.ndarray:
    return ctx.buffers.stored > 0


def _drain_power(params: SystemParams, h2, q) -> np.ndarray:
    """Largest relay power whose rate does not exceed the stored bits."""
    h2 = np.asarray(h2, dtype=float)
    pos = h2 > 0
    cap = params.n0 * _exp2m1(np.asarray(q, dtype=float) / params.t) / np.where(pos, h2, 1.0)
    return np.where(pos, np.minimum(params.pmax, cap), params.pmax)


def _best_index(scores, mask) -> Optional[int]:
    """First index of the largest score among ``mask``; None if mask is empty."""
    if not mask.any():
        return None
    return int(np.argmax(np.where(mask, scores, -np.inf)))


def _ranked(scores, mask) -> List[int]:
    """Indices in ``mask`` sorted by decreasing score, ties by index."""
    idx = np.flatnonzero(mask)
    order = np.argsort(-scores[idx], kind="stable")
    return [int(k) for k in idx[order]]


def _pair(params, chan, rx, tx, power, constrained=True) -> Pair:
    return Pair(
        rx=rx,
        tx=tx,
        power=float(power),
        rate_sr=float(rate_sr(params, chan.g2[rx], chan.e2[rx, tx], power)),
        rate_rd=float(rate_rd(params, chan.h2[tx], power)),
        constrained=constrained,
    )


def _hd_receive(params, chan, rx) -> HdReceive:
    return HdReceive(rx=rx, rate_sr=float(rate_sr(params, chan.g2[rx], 0.0, 0.0)))


def _hd_transmit(params, chan, buffers, tx) -> HdTransmit:
    p = float(_drain_power(params, chan.h2[tx], buffers.stored[tx]))
    return HdTransmit(tx=tx, power=p, rate_rd=float(rate_rd(params, chan.h2[tx], p)))


# proposed schemes --------------------------------------------------------


def feasible_pairs(ctx: SelectionContext) -> List[Tuple[int, int, PowerInterval]]:
    """Ordered pairs ``(rx, tx, interval)`` that admit a feasible power."""
    lo, hi, ok = pair_bounds(ctx.params, ctx.chan, ctx.buffers)
    return [
        (int(i), int(j), PowerInterval(float(lo[i, j]), float(hi[i, j])))
        for i, j in zip(*np.nonzero(ok))
    ]


def jpass_select(ctx: SelectionContext, counter: Optional[EvalCounter] = None) -> Decision:
    """Joint power allocation and selection.

    Evaluates the sum-throughput of every feasible pair at both ends of its
    power interval and keeps the best. Ties prefer the smaller receiver
    index, then the smaller transmitter index, then the higher power. Falls
    back to half-duplex operation when no pair is feasible.
    """
    params, chan = ctx.params, ctx.chan
    lo, hi, ok = pair_bounds(params, chan, ctx.buffers)
    ii, jj = np.nonzero(ok)
    if len(ii) == 0:
        return hd_fallback(ctx, counter)

    g2, e2, h2 = chan.g2[ii], chan.e2[ii, jj], chan.h2[jj]
    p_lo, p_hi = lo[ii, jj], hi[ii, jj]
    sr_lo, rd_lo = rate_sr(params, g2, e2, p_lo), rate_rd(params, h2, p_lo)
    sr_hi, rd_hi = rate_sr(params, g2, e2, p_hi), rate_rd(params, h2, p_hi)
    tau_lo = sr_lo + rd_lo
    tau_hi = sr_hi + rd_hi
    if counter is not None:
        counter.evaluations += 2 * len(ii)
        counter.comparisons += 2 * len(ii)

    use_hi = tau_hi >= tau_lo
    k = int(np.argmax(np.where(use_hi, tau_hi, tau_lo)))
    if use_hi[k]:
        power, r_sr, r_rd = p_hi[k], sr_hi[k], rd_hi[k]
    else:
        power, r_sr, r_rd = p_lo[k], sr_lo[k], rd_lo[k]
    return Pair(int(ii[k]), int(jj[k]), float(power), float(r_sr), float(r_rd))


def ratio_metric(chan: ChannelRealization) -> np.ndarray:
    """``g2[rx] * h2[tx] / e2[rx, tx]`` for every ordered pair.

    Squared amplitudes rank pairs exactly as the amplitude ratio does. A
    zero inter-relay gain gives ``inf``; the diagonal is ``-inf``.
    """
    gh = chan.g2[:, None] * chan.h2[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        m = np.where(chan.e2 > 0, gh / chan.e2, np.inf)
    np.fill_diagonal(m, -np.inf)
    return m


def rss_select(ctx: SelectionContext, counter: Optional[EvalCounter] = None) -> Decision:
    """Ratio selection.

    Among feasible pairs, take the one maximising ``g2[rx] * h2[tx] /
    e2[rx, tx]`` and optimise only its power. A zero inter-relay gain ranks
    above any finite ratio; such pairs are ordered by ``g2 * h2``.
    """
    params, chan = ctx.params, ctx.chan
    _, _, ok = pair_bounds(params, chan, ctx.buffers)
    ii, jj = np.nonzero(ok)
    if len(ii) == 0:
        return hd_fallback(ctx, counter)

    gh = chan.g2[ii] * chan.h2[jj]
    metric = ratio_metric(chan)[ii, jj]
    if counter is not None:
        counter.comparisons += len(ii)
    top = metric == metric.max()
    if np.isinf(metric.max()):
        k = int(np.argmax(np.where(top, gh, -np.inf)))
    else:
        k = int(np.argmax(top))
    rx, tx = int(ii[k]), int(jj[k])

    power, _ = best_boundary_power(params, chan, ctx.buffers, rx, tx, counter)
    return _pair(params, chan, rx, tx, power)


def hd_fallback(ctx: SelectionContext, counter: Optional[EvalCounter] = None) -> Decision:
    """Conventional half-duplex slot used when no pair is feasible.

    The best receiver is the relay with the strongest interference-free
    source link whose buffer can absorb that rate; the best transmitter is
    the relay with data reaching the highest destination rate at the largest
    power its buffer allows. The larger rate wins and reception wins ties.
    Rate floors are not enforced here.
    """
    params, chan, q = ctx.params, ctx.chan, ctx.buffers.stored
    r_rx = rate_sr(params, chan.g2, 0.0, 0.0)
    rx_ok = q + r_rx * params.t <= params.qmax
    p_tx = _drain_power(params, chan.h2, q)
    r_tx = rate_rd(params, chan.h2, p_tx)
    tx_ok = q > 0

    i = _best_index(r_rx, rx_ok)
    j = _best_index(r_tx, tx_ok)
    if i is None and j is None:
        return Idle()
    if j is None or (i is not None and r_rx[i] >= r_tx[j]):
        return HdReceive(rx=i, rate_sr=float(r_rx[i]))
    return HdTransmit(tx=j, power=float(p_tx[j]), rate_rd=float(r_tx[j]))


# baselines ---------------------------------------------------------------


def mmrs_select(ctx: SelectionContext, counter: Optional[EvalCounter] = None) -> Decision:
    """Max-max selection at full power, blind to inter-relay interference.

    When one relay is best on both hops, the better of (best receiver,
    second transmitter) and (second receiver, best transmitter) is kept,
    judged by the sum-throughput including interference.
    """
    params, chan, buffers = ctx.params, ctx.chan, ctx.buffers
    rx_rank = _ranked(chan.g2, _has_room(ctx))
    tx_rank = _ranked(chan.h2, _has_data(ctx))
    if counter is not None:
        counter.comparisons += len(rx_rank) + len(tx_rank)
    if not rx_rank and not tx_rank:
        return Idle()
    if not tx_rank:
        return _hd_receive(params, chan, rx_rank[0])
    if not rx_rank:
        return _hd_transmit(params, chan, buffers, tx_rank[0])

    def candidate(rx, tx):
        p = _drain_power(params, chan.h2[tx], buffers.stored[tx])
        return _pair(params, chan, rx, tx, p, constrained=False)

    if rx_rank[0] != tx_rank[0]:
        return candidate(rx_rank[0], tx_rank[0])

    options = []
    if len(tx_rank) > 1:
        options.append(candidate(rx_rank[0], tx_rank[1]))
    if len(rx_rank) > 1:
        options.append(candidate(rx_rank[1], tx_rank[0]))
    if not options:
        return hd_fallback(ctx, counter)
    if counter is not None:
        counter.evaluations += len(options)
    best = options[0]
    for opt in options[1:]:
        if opt.sum_rate > best.sum_rate:
            best = opt
    return best


def basor_select(ctx: SelectionContext, counter: Optional[EvalCounter] = None) -> Decision:
    """Max-min selection over relay SINR and destination SNR at full power."""
    params, chan, buffers = ctx.params, ctx.chan, ctx.buffers
    n = chan.n
    mask = _has_room(ctx)[:, None] & _has_data(ctx)[None, :] & ~np.eye(n, dtype=bool)
    if not mask.any():
        return hd_fallback(ctx, counter)
    score = np.minimum(
        sinr_sr(params, chan.g2[:, None], chan.e2, params.pmax),
        snr_rd(params, chan.h2[None, :], params.pmax),
    )
    if counter is not None:
        counter.comparisons += int(mask.sum())
    k = int(np.argmax(np.where(mask, score, -np.inf)))
    rx, tx = divmod(k, n)
    p = _drain_power(params, chan.h2[tx], buffers.stored[tx])
    return _pair(params, chan, rx, tx, p, constrained=False)


def minpower_select(ctx: SelectionContext, counter: Optional[EvalCounter] = None) -> Decision:
    """Smallest relay power meeting both rate targets exactly.

    The relay transmits at the destination SNR floor and both hops carry
    exactly their target rates, so a slot never moves more than
    ``r1 + r2`` bits per unit time.
    """
    params, chan, q = ctx.params, ctx.chan, ctx.buffers.stored
    n = chan.n
    pos = chan.h2 > 0
    p_tx = np.where(pos, params.phi2 * params.n0 / np.where(pos, chan.h2, 1.0), np.inf)
    power = np.broadcast_to(p_tx[None, :], (n, n))
    with np.errstate(invalid="ignore"):
        sinr = sinr_sr(params, chan.g2[:, None], chan.e2, power)
    mask = (
        ~np.eye(n, dtype=bool)
        & (power <= params.pmax)
        & (sinr >= params.phi1)
        & (q[None, :] >= params.r2 * params.t)
        & (q[:, None] + params.r1 * params.t <= params.qmax)
    )
    if counter is not None:
        counter.comparisons += int(mask.sum())
    if not mask.any():
        d = hd_fallback(ctx, counter)
        if isinstance(d, HdReceive):
            return HdReceive(d.rx, min(params.r1, d.rate_sr))
        if isinstance(d, HdTransmit):
            return HdTransmit(d.tx, d.power, min(params.r2, d.rate_rd))
        return d
    k = int(np.argmin(np.where(mask, power, np.inf)))
    rx, tx = divmod(k, n)
    return Pair(rx, tx, float(p_tx[tx]), float(params.r1), float(params.r2), constrained=False)


def chd_select(ctx: SelectionContext, counter: Optional[EvalCounter] = None) -> Decision:
    """Two-slot half-duplex relaying.

    Even phases deliver to the relay with the best source link that has
    room; odd phases forward from the relay with the best destination rate
    among those holding data. Only one node transmits per slot.
    """
    params, chan = ctx.params, ctx.chan
    if ctx.chd_phase % 2 == 0:
        i = _best_index(chan.g2, _has_room(ctx))
        return Idle() if i is None else _hd_receive(params, chan, i)
    q = ctx.buffers.stored
    p_tx = _drain_power(params, chan.h2, q)
    j = _best_index(rate_rd(params, chan.h2, p_tx), _has_data(ctx))
    return Idle() if j is None else _hd_transmit(params, chan, ctx.buffers, j)


_SELECTORS: Dict[SchemeId, Callable[..., Decision]] = {
    SchemeId.JPASS: jpass_select,
    SchemeId.RSS: rss_select,
    SchemeId.MMRS: mmrs_select,
    SchemeId.BA_SOR: basor_select,
    SchemeId.MIN_POWER: minpower_select,
    SchemeId.CHD: chd_select,
}


def select(scheme, ctx: SelectionContext, counter: Optional[EvalCounter] = None) -> Decision:
    """Dispatch to the policy named by ``scheme`` (a :class:`SchemeId` or its value)."""
    return _SELECTORS[SchemeId(scheme)](ctx, counter)
