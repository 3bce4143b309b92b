"""
More relays, smaller buffers
============================

Rate targets of 3 bits at 15 dB make the constraints bite. Adding relays
gives the selector more pairs to choose from; shrinking the buffers
removes some of them.
"""

import sys

from bufrelay.sweep import DEFAULT_FINITE_QMAX, SweepSpec, SweepTemplate, run_sweep

slots = int(sys.argv[1]) if len(sys.argv) > 1 else 4000

tpl = SweepTemplate(pmax_db=15.0, r1=3.0, r2=3.0, slots=slots)
rows = run_sweep(SweepSpec("n", [2, 3, 4, 5, 6], tpl, ["jpass", "rss", "mmrs"]))

print(" n   jpass     rss    mmrs")
by_n = {}
for r in rows:
    by_n.setdefault(int(r["n"]), {})[r["scheme"]] = float(r["mean_sum"])
for n, v in by_n.items():
    print(f"{n:2d} {v['jpass']:7.3f} {v['rss']:7.3f} {v['mmrs']:7.3f}")

# %%
# Same sweep with 20-bit buffers that start half full. Relays that are
# full cannot receive and empty ones cannot send.
finite = SweepTemplate(pmax_db=15.0, r1=3.0, r2=3.0, slots=slots, qmax=DEFAULT_FINITE_QMAX)
rows = run_sweep(SweepSpec("n", [2, 4, 6], finite, ["jpass"]))
for r in rows:
    print(f"n={r['n']} finite buffers: {float(r['mean_sum']):.3f} "
          f"(pair slots {float(r['frac_pair']):.0%}, half duplex {float(r['frac_hd']):.0%})")
