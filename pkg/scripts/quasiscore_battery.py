"""Jacobian-symmetry classification of the built-in score fields.

    python3 scripts/quasiscore_battery.py [--probes 64] [--fd-step 1e-4]
"""
import argparse

from learnunc.foundations import RandomStream
from learnunc.quasiscore import classify_battery, example_gradient, rotation_field, symmetry_check

p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
p.add_argument("--probes", type=int, default=64)
p.add_argument("--fd-step", type=float, default=1e-4)
p.add_argument("--seed", type=int, default=0)
args = p.parse_args()

stream = RandomStream(args.seed)
reports = classify_battery(args.probes, args.fd_step, stream)
reports += [symmetry_check(f(), args.probes, args.fd_step, stream.derive(f().name))
            for f in (rotation_field, example_gradient)]
print(f"{'field':<30} {'max asym':>10} {'tol':>8} {'class':<11} verdict")
for r in reports:
    print(f"{r.field:<30} {r.max_asymmetry:10.3e} {r.tol:8.1e} {r.classification:<11} {r.verdict}")
