"""Correlation of S^2/n with the squared error of the mean when sigma^2 varies across replications.

Prints the closed form over (n, gamma^2) and MC spot checks with two-point priors.

    python3 scripts/joint_correlation_scan.py [--reps 200000]
"""
import argparse
import math

from learnunc.foundations import RandomStream
from learnunc.normal_lab import PriorSpec, joint_corr_formula, joint_corr_mc

p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
p.add_argument("--reps", type=int, default=200_000)
p.add_argument("--seed", type=int, default=4)
args = p.parse_args()

gammas = [0.0, 0.25, 1.0, 2.0, 8.0, 64.0, math.inf]
ns = [2, 5, 10, 100]
print("n \\ gamma2 " + " ".join(f"{g:>8}" for g in gammas))
for n in ns:
    print(f"{n:>10} " + " ".join(f"{joint_corr_formula(n, g):8.5f}" for g in gammas))
print(f"ceiling 1/sqrt(3) = {1 / math.sqrt(3):.5f}\n")

print(f"{'n':>4} {'gamma2':>7} {'formula':>9} {'MC':>9} {'se':>7} {'z':>6}")
stream = RandomStream(args.seed)
for n in (2, 5):
    for g in (0.0, 1.0, 2.0, 8.0):
        est = joint_corr_mc(PriorSpec.two_point_for_gamma2(g), n, args.reps, stream.derive(f"{n}/{g}"))
        f = joint_corr_formula(n, g)
        print(f"{n:>4} {g:>7} {f:9.5f} {est.value:9.5f} {est.std_error:7.4f} {est.zscore(f):6.2f}")
