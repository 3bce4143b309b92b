"""
Deciding on noisy channel estimates
===================================

Schemes pick the pair and power from estimated gains; bits move at the
rate the true channel supports. ``csi_outage`` switches from "deliver what
the channel allows" to "deliver nothing if the decided rate was too high".
"""

import sys

from bufrelay.sim import run_episode
from bufrelay.sweep import SweepTemplate

slots = int(sys.argv[1]) if len(sys.argv) > 1 else 5000
sigmas = (0.0, 0.05, 0.1, 0.2, 0.3)

for outage in (False, True):
    print("outage model" if outage else "capacity-clipped model")
    for scheme in ("jpass", "rss"):
        vals = []
        for s in sigmas:
            tpl = SweepTemplate(pmax_db=15.0, n=3, r1=2.0, r2=2.0, slots=slots,
                                sigma_eta_sq=s, csi_outage=outage)
            vals.append(run_episode(tpl.episode(scheme)).mean_sum)
        print(f"  {scheme:6s}" + "".join(f"  s2={s:<4g} {v:6.3f}" for s, v in zip(sigmas, vals)))
