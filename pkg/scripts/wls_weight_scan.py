"""How the estimator/residual correlation tracks relative regret as the weights move away from BLUE.

    python3 scripts/wls_weight_scan.py [--reps 200000] [--seed 1]
"""
import argparse

import numpy as np

from learnunc.foundations import RandomStream
from learnunc.wls import HeteroDesign, WeightVector, closed_form, corr_n2, mc_verify

p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
p.add_argument("--reps", type=int, default=200_000)
p.add_argument("--seed", type=int, default=1)
p.add_argument("--mc-every", type=int, default=4, help="MC check every k-th weight ratio")
args = p.parse_args()

design = HeteroDesign([1.0, 1.0], [1.0, 4.0])
print(f"{'w2/w1':>8} {'RR':>10} {'rho2':>10} {'MC rho2':>10} {'se':>8}")
for k, ratio in enumerate(np.geomspace(1 / 16, 16, 17)):
    w = WeightVector([1.0, ratio])
    cf = closed_form(design, w)
    mc, se = "", ""
    if k % args.mc_every == 0:
        rep = [r for r in mc_verify(design, w, reps=args.reps, stream=RandomStream(args.seed).derive(str(k)))
               if r.name == "wls-rho2-vs-rr"][0]
        mc, se = f"{rep.lhs:.5f}", f"{rep.mc_se:.5f}"
    print(f"{ratio:8.4f} {cf.rr:10.6f} {corr_n2(design, w):10.6f} {mc:>10} {se:>8}")
