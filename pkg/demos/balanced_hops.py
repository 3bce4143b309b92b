"""
Hop balance
===========

A buffered relay can only forward what it received, so the smaller of the
two hop throughputs (MMHT) is what the destination sees in the long run.
With unbounded buffers a scheme may keep favouring one hop forever.
"""

import sys

from bufrelay.sim import run_episode
from bufrelay.sweep import DEFAULT_FINITE_QMAX, SweepTemplate

slots = int(sys.argv[1]) if len(sys.argv) > 1 else 5000

print("Pmax dB  buffers    scheme   S-R    R-D    MMHT")
for db in (9.0, 15.0, 21.0):
    for label, qmax in (("infinite", float("inf")), ("finite", DEFAULT_FINITE_QMAX)):
        tpl = SweepTemplate(pmax_db=db, n=3, slots=slots, qmax=qmax)
        for scheme in ("jpass", "mmrs"):
            m = run_episode(tpl.episode(scheme))
            print(f"{db:7.0f}  {label:9s} {scheme:7s} {m.mean_sr:6.3f} {m.mean_rd:6.3f} {m.mmht:6.3f}")
