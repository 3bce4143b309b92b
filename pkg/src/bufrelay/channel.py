"""Rayleigh fading realizations and imperfect channel estimates.

Channels are drawn as circularly-symmetric complex Gaussians, so power gains
are exponential. Estimates follow ``h = h_hat + eta`` with ``h_hat`` and
``eta`` independent, zero mean, of variances ``sigma_h^2 - sigma_eta^2`` and
``sigma_eta^2``.

Random streams are numpy ``PCG64`` generators seeded from
``SeedSequence(master_seed, spawn_key=(trial,))``; the first child feeds the
fading, the second the estimation error. Draws happen in fixed blocks of
:data:`BLOCK` slots, so slot ``k`` of a trial sees the same channel however
long the episode is.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional, Tuple

import numpy as np

from .model import ChannelRealization

__all__ = [
    "FadingSpec",
    "CsiErrorSpec",
    "trial_streams",
    "sample_realization",
    "sample_block",
    "corrupt_csi",
    "corrupt_block",
    "ChannelStream",
    "BLOCK",
]

BLOCK = 4096


@dataclass(frozen=True)
class FadingSpec:
    """Mean power gains of the three link classes."""

    n: int
    mean_sr: float = 1.0
    mean_rd: float = 1.0
    mean_inter: float = 1.0

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"need at least two relays, got n={self.n}")
        if min(self.mean_sr, self.mean_rd, self.mean_inter) <= 0:
            raise ValueError("mean channel powers must be positive")

    @property
    def min_mean(self) -> float:
        return min(self.mean_sr, self.mean_rd, self.mean_inter)


@dataclass(frozen=True)
class CsiErrorSpec:
    """Estimation error variance, shared by every link."""

    sigma_eta_sq: float

    def __post_init__(self):
        if self.sigma_eta_sq < 0:
            raise ValueError("error variance must be nonnegative")

    def check(self, fading: FadingSpec):
        if self.sigma_eta_sq >= fading.min_mean:
            raise ValueError(
                f"sigma_eta_sq={self.sigma_eta_sq} must stay below the smallest "
                f"mean channel power {fading.min_mean}"
            )


def trial_streams(master_seed: int, trial: int = 0) -> Tuple[np.random.Generator, np.random.Generator]:
    """Independent (fading, estimation-error) generators of one trial."""
    seq = np.random.SeedSequence(master_seed, spawn_key=(trial,))
    fading, error = seq.spawn(2)
    return np.random.Generator(np.random.PCG64(fading)), np.random.Generator(np.random.PCG64(error))


def _cn_power(rng, mean, shape):
    # |x|^2 for x ~ CN(0, mean)
    re = rng.standard_normal(shape)
    im = rng.standard_normal(shape)
    return 0.5 * mean * (re * re + im * im)


def _mirror(upper, n):
    """Symmetric matrices from their strict upper triangles (last axis)."""
    iu = np.triu_indices(n, 1)
    out = np.zeros(upper.shape[:-1] + (n, n))
    out[..., iu[0], iu[1]] = upper
    out[..., iu[1], iu[0]] = upper
    return out


def sample_block(spec: FadingSpec, rng: np.random.Generator, size: int):
    """``size`` independent slots as arrays ``(g2, h2, e2)``.

    Shapes are ``(size, n)``, ``(size, n)`` and ``(size, n, n)``. The
    inter-relay gain is drawn once per unordered pair.
    """
    n = spec.n
    g2 = _cn_power(rng, spec.mean_sr, (size, n))
    h2 = _cn_power(rng, spec.mean_rd, (size, n))
    e2 = _mirror(_cn_power(rng, spec.mean_inter, (size, n * (n - 1) // 2)), n)
    return g2, h2, e2


def sample_realization(spec: FadingSpec, rng: np.random.Generator) -> ChannelRealization:
    """One slot of i.i.d. Rayleigh fading."""
    g2, h2, e2 = sample_block(spec, rng, 1)
    return ChannelRealization(g2[0], h2[0], e2[0])


def _estimate_power(rng, true_power, mean, sigma_eta_sq):
    """Draw |h_hat|^2 jointly with the given |h|^2.

    Conditioned on ``h``, the estimate is ``CN(a h, b)`` with
    ``a = var_hat / var_h`` and ``b = var_hat * sigma_eta_sq / var_h``.
    The phase of ``h`` is irrelevant to ``|h_hat|``, so ``h`` is taken real.
    """
    var_hat = mean - sigma_eta_sq
    a = var_hat / mean
    b = var_hat * sigma_eta_sq / mean
    scale = np.sqrt(0.5 * b)
    re = a * np.sqrt(true_power) + scale * rng.standard_normal(true_power.shape)
    im = scale * rng.standard_normal(true_power.shape)
    return re * re + im * im


def corrupt_block(g2, h2, e2, spec: CsiErrorSpec, fading: FadingSpec, rng: np.random.Generator):
    """Estimated gains for a block produced by :func:`sample_block`."""
    spec.check(fading)
    if spec.sigma_eta_sq == 0:
        return g2.copy(), h2.copy(), e2.copy()
    n = g2.shape[-1]
    iu = np.triu_indices(n, 1)
    s = spec.sigma_eta_sq
    g2_hat = _estimate_power(rng, g2, fading.mean_sr, s)
    h2_hat = _estimate_power(rng, h2, fading.mean_rd, s)
    e2_hat = _mirror(_estimate_power(rng, e2[..., iu[0], iu[1]], fading.mean_inter, s), n)
    return g2_hat, h2_hat, e2_hat


def corrupt_csi(
    true_chan: ChannelRealization, spec: CsiErrorSpec, fading: FadingSpec, rng: np.random.Generator
) -> ChannelRealization:
    """Channel estimate of one slot, correlated with ``true_chan``."""
    g2, h2, e2 = corrupt_block(
        true_chan.g2[None], true_chan.h2[None], true_chan.e2[None], spec, fading, rng
    )
    return ChannelRealization(g2[0], h2[0], e2[0])


class ChannelStream:
    """Iterator over ``(true, estimate)`` realizations of one trial.

    ``estimate`` is the same object as ``true`` when ``csi`` is None.
    """

    def __init__(self, fading: FadingSpec, master_seed: int, trial: int = 0,
                 csi: Optional[CsiErrorSpec] = None, block: int = BLOCK):
        if csi is not None:
            csi.check(fading)
        self.fading = fading
        self.csi = csi
        self.block = block
        self._rng, self._err_rng = trial_streams(master_seed, trial)

    def __iter__(self) -> Iterator[Tuple[ChannelRealization, ChannelRealization]]:
        while True:
            g2, h2, e2 = sample_block(self.fading, self._rng, self.block)
            if self.csi is not None:
                est = corrupt_block(g2, h2, e2, self.csi, self.fading, self._err_rng)
            for k in range(self.block):
                true = ChannelRealization(g2[k], h2[k], e2[k])
                if self.csi is None:
                    yield true, true
                else:
                    yield true, ChannelRealization(est[0][k], est[1][k], est[2][k])
