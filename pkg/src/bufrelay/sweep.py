"""Parameter sweeps producing figure-ready CSV rows."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, TextIO

from .channel import CsiErrorSpec, FadingSpec
from .model import SystemParams
from .schemes import SchemeId
from .sim import EpisodeConfig, RunMetrics, run_episodes

__all__ = [
    "AXES",
    "COLUMNS",
    "SweepTemplate",
    "SweepSpec",
    "db_to_linear",
    "run_sweep",
    "write_csv",
    "sweep_csv",
    "DEFAULT_FINITE_QMAX",
    "BACKLOG_FILL",
]

AXES = ("pmax_db", "n", "sigma_eta_sq")

COLUMNS = (
    "scheme", "axis", "axis_value", "pmax_db", "n", "r1", "r2", "qmax", "qs",
    "sigma_eta_sq", "slots", "seed", "mean_sum", "mean_sr", "mean_rd", "mmht",
    "frac_pair", "frac_hd", "frac_idle", "evals",
)

# finite-buffer default, in bits per unit slot duration
DEFAULT_FINITE_QMAX = 20.0
# initial fill for infinite buffers; large enough that the send constraint never binds
BACKLOG_FILL = 1e6


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


@dataclass(frozen=True)
class SweepTemplate:
    """Fixed settings of a sweep; the swept axis overrides one of them.

    Powers are in dB. With ``ps_follows_pmax`` the source power is
    ``ps_mult`` times the relay power cap, otherwise ``ps_db``. ``qs=None``
    picks half the buffer for finite buffers and :data:`BACKLOG_FILL`
    otherwise.
    """

    pmax_db: float = 21.0
    n: int = 6
    r1: float = 1.0
    r2: float = 1.0
    qmax: float = math.inf
    qs: Optional[float] = None
    sigma_eta_sq: float = 0.0
    slots: int = 50_000
    seed: int = 0
    ps_follows_pmax: bool = True
    ps_mult: float = 1.0
    ps_db: float = 21.0
    csi_outage: bool = False
    t: float = 1.0

    @property
    def initial_fill(self) -> float:
        if self.qs is not None:
            return self.qs
        return BACKLOG_FILL if math.isinf(self.qmax) else self.qmax / 2

    def episode(self, scheme) -> EpisodeConfig:
        pmax = db_to_linear(self.pmax_db)
        ps = self.ps_mult * pmax if self.ps_follows_pmax else db_to_linear(self.ps_db)
        params = SystemParams(ps=ps, pmax=pmax, r1=self.r1, r2=self.r2,
                              t=self.t, qmax=self.qmax, n=int(self.n))
        csi = CsiErrorSpec(self.sigma_eta_sq) if self.sigma_eta_sq > 0 else None
        return EpisodeConfig(
            scheme=scheme,
            params=params,
            fading=FadingSpec(int(self.n)),
            csi=csi,
            slots=self.slots,
            initial_fill=self.initial_fill,
            master_seed=self.seed,
            csi_outage=self.csi_outage,
        )


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    values: Sequence[float]
    template: SweepTemplate = field(default_factory=SweepTemplate)
    schemes: Sequence[str] = tuple(s.value for s in SchemeId)

    def __post_init__(self):
        if self.axis not in AXES:
            raise ValueError(f"unknown axis {self.axis!r}; allowed: {', '.join(AXES)}")
        if len(self.values) == 0:
            raise ValueError("sweep needs at least one value")
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise ValueError(f"sweep values must be strictly increasing: {list(self.values)}")
        for s in self.schemes:
            SchemeId.parse(s)
        if not self.schemes:
            raise ValueError("sweep needs at least one scheme")

    def points(self):
        """``(scheme, value, template)`` in output order: scheme-major."""
        for s in self.schemes:
            for v in self.values:
                yield SchemeId.parse(s), v, replace(self.template, **{self.axis: v})


def _g(x) -> str:
    return format(float(x), ".6g")


def _row(scheme, axis, value, tpl: SweepTemplate, run: RunMetrics) -> Dict[str, str]:
    return {
        "scheme": scheme.value,
        "axis": axis,
        "axis_value": str(int(value)) if axis == "n" else _g(value),
        "pmax_db": _g(tpl.pmax_db),
        "n": str(int(tpl.n)),
        "r1": _g(tpl.r1),
        "r2": _g(tpl.r2),
        "qmax": _g(tpl.qmax),
        "qs": _g(tpl.initial_fill),
        "sigma_eta_sq": _g(tpl.sigma_eta_sq),
        "slots": str(tpl.slots),
        "seed": str(tpl.seed),
        "mean_sum": _g(run.mean_sum),
        "mean_sr": _g(run.mean_sr),
        "mean_rd": _g(run.mean_rd),
        "mmht": _g(run.mmht),
        "frac_pair": _g(run.frac_pair),
        "frac_hd": _g(run.frac_hd),
        "frac_idle": _g(run.frac_idle),
        "evals": str(run.evaluations),
    }


def run_sweep(spec: SweepSpec, workers: int = 1) -> List[Dict[str, str]]:
    """Run every (scheme, value) point and return formatted CSV rows.

    Rows come back in :meth:`SweepSpec.points` order whatever the number of
    workers. All points share the template seed, so schemes are compared on
    the same channel draws.
    """
    points = list(spec.points())
    runs = run_episodes([tpl.episode(s) for s, _, tpl in points], workers=workers)
    return [_row(s, spec.axis, v, tpl, run) for (s, v, tpl), run in zip(points, runs)]


def write_csv(rows, fh: TextIO):
    writer = csv.DictWriter(fh, fieldnames=COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)


def sweep_csv(spec: SweepSpec, workers: int = 1) -> str:
    buf = io.StringIO()
    write_csv(run_sweep(spec, workers), buf)
    return buf.getvalue()
