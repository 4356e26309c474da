"""Bias decay and the remainder constant for the variance MLE along n.

    python3 scripts/theorem2_decay.py [--reps 200000] [--n 10,30,100,300]
"""
import argparse

from learnunc.core import mle_variance, verify_theorem2
from learnunc.foundations import RandomStream

p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
p.add_argument("--reps", type=int, default=200_000)
p.add_argument("--seed", type=int, default=10)
p.add_argument("--n", default="10,30,100,300")
p.add_argument("--assessor", default="pair-minus-s2")
args = p.parse_args()

rep = verify_theorem2(mle_variance(tuple(int(v) for v in args.n.split(","))), args.reps,
                      RandomStream(args.seed), args.assessor)
print(f"{'n':>5} {'state':<12} {'bias':>10} {'rho2':>8} {'RR':>8} {'bound':>8} pass")
for t in rep.per_iota:
    for rec in t.records:
        print(f"{rec.iota:>5} {rec.state:<12} {rec.detail['learner_bias']:10.5f} {rec.rho2.value:8.4f} "
              f"{rec.rr.value:8.4f} {rec.bound:8.5f} {rec.check().passed}")
print("bias slope vs n:", {s: round(v, 3) for s, v in rep.learner_slope_vs_iota.items()})
print("K per n:", [round(k, 3) for k in rep.k_values], f"spread {rep.k_ratio:.2f}")
