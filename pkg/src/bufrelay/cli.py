"""Command line entry point.

``bufrelay [sweep] [options]`` writes sweep results as CSV;
``bufrelay verify`` audits the selection code against brute force.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import oracle
from .schemes import SchemeId
from .sweep import AXES, SweepSpec, SweepTemplate, write_csv, run_sweep


def parse_values(text: str, integer: bool = False):
    """``"21"``, ``"3,4,5"`` or an inclusive ``"a:b:step"`` range."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise argparse.ArgumentTypeError(f"range must be a:b:step, got {text!r}")
        a, b, step = (float(p) for p in parts)
        if step <= 0 or b < a:
            raise argparse.ArgumentTypeError(f"empty range {text!r}")
        count = int(math.floor((b - a) / step + 1e-9)) + 1
        vals = [a + k * step for k in range(count)]
    else:
        vals = [float(v) for v in text.split(",") if v.strip()]
    if not vals:
        raise argparse.ArgumentTypeError("no values given")
    if integer:
        if any(v != int(v) for v in vals):
            raise argparse.ArgumentTypeError(f"expected integers, got {text!r}")
        vals = [int(v) for v in vals]
    else:
        vals = [float(np.round(v, 12)) for v in vals]
    return vals


def _schemes(items):
    names = []
    for item in items or [",".join(s.value for s in SchemeId)]:
        names.extend(x.strip() for x in item.split(",") if x.strip())
    for name in names:
        SchemeId.parse(name)
    return names


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bufrelay", description=__doc__)
    sub = parser.add_subparsers(dest="command")

    sw = sub.add_parser("sweep", help="run a parameter sweep and write CSV")
    sw.add_argument("--scheme", action="append",
                    help="scheme names, comma separated or repeated "
                         f"({', '.join(s.value for s in SchemeId)}); default all")
    sw.add_argument("--n", default="6", help="relay count(s)")
    sw.add_argument("--pmax-db", default="21", help="relay power cap in dB, value, list or a:b:step")
    sw.add_argument("--sigma-eta-sq", default="0", help="CSI error variance(s)")
    sw.add_argument("--r1", type=float, default=1.0)
    sw.add_argument("--r2", type=float, default=1.0)
    sw.add_argument("--ps-follows-pmax", action=argparse.BooleanOptionalAction, default=True,
                    help="tie the source power to the relay cap (default on)")
    sw.add_argument("--ps-mult", type=float, default=1.0, help="source power as a multiple of pmax")
    sw.add_argument("--ps-db", type=float, default=21.0, help="source power when not tied to pmax")
    buf = sw.add_mutually_exclusive_group()
    buf.add_argument("--qmax", type=float, help="buffer size in bits")
    buf.add_argument("--infinite-buffer", action="store_true", help="unbounded buffers (default)")
    sw.add_argument("--qs", type=float, help="initial bits per relay")
    sw.add_argument("--slots", type=int, default=50_000)
    sw.add_argument("--seed", type=int, default=0)
    sw.add_argument("--csi-outage", action="store_true",
                    help="a hop decided above its true capacity delivers nothing")
    sw.add_argument("--workers", type=int, default=1)
    sw.add_argument("--out", default="-", help="output path, '-' for stdout")

    ver = sub.add_parser("verify", help="check endpoint optimality and JPASS against brute force")
    ver.add_argument("--instances", type=int, default=1000)
    ver.add_argument("--seed", type=int, default=0)
    ver.add_argument("--grid-points", type=int, default=1000)
    ver.add_argument("--n", type=int, help="fix the relay count (default random 2..8)")
    return parser


def _sweep_spec(args) -> SweepSpec:
    axes = {
        "pmax_db": parse_values(args.pmax_db),
        "n": parse_values(args.n, integer=True),
        "sigma_eta_sq": parse_values(args.sigma_eta_sq),
    }
    swept = [a for a in AXES if len(axes[a]) > 1]
    if len(swept) > 1:
        raise ValueError(f"only one axis may take several values, got {', '.join(swept)}")
    axis = swept[0] if swept else "pmax_db"
    fixed = {a: v[0] for a, v in axes.items() if a != axis}
    template = SweepTemplate(
        r1=args.r1,
        r2=args.r2,
        qmax=args.qmax if args.qmax is not None else math.inf,
        qs=args.qs,
        slots=args.slots,
        seed=args.seed,
        ps_follows_pmax=args.ps_follows_pmax,
        ps_mult=args.ps_mult,
        ps_db=args.ps_db,
        csi_outage=args.csi_outage,
        **fixed,
    )
    return SweepSpec(axis=axis, values=axes[axis], template=template,
                     schemes=_schemes(args.scheme))


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] not in ("sweep", "verify", "-h", "--help"):
        argv.insert(0, "sweep")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except argparse.ArgumentTypeError as exc:
        parser.error(str(exc))

    try:
        if args.command == "verify":
            report = oracle.verify(args.instances, args.seed, args.grid_points, args.n)
            print(f"instances: {report.instances}")
            print(f"pairs checked on the grid: {report.boundary_checked}")
            print(f"worst grid-over-endpoint gap: {report.boundary_worst_gap:.3e}")
            print(f"endpoint failures: {report.boundary_failures}")
            print(f"JPASS/exhaustive mismatches: {report.selection_mismatches}")
            print("OK" if report.ok else "FAILED")
            return 0 if report.ok else 1

        spec = _sweep_spec(args)
        rows = run_sweep(spec, workers=args.workers)
    except (ValueError, argparse.ArgumentTypeError) as exc:
        print(f"bufrelay: error: {exc}", file=sys.stderr)
        return 2

    if args.out == "-":
        write_csv(rows, sys.stdout)
    else:
        with open(args.out, "w", newline="") as fh:
            write_csv(rows, fh)
    return 0
