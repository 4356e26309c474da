"""Assessor relevance against relative regret for every built-in scenario.

    python3 scripts/theorem_battery.py [--reps 200000] [--seed 42] [--scenarios wls-ols,wls-noisy]
"""
import argparse

from learnunc.core import battery, verify_theorem1
from learnunc.foundations import RandomStream

p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
p.add_argument("--reps", type=int, default=200_000)
p.add_argument("--seed", type=int, default=42)
p.add_argument("--scenarios", help="comma-separated subset")
args = p.parse_args()

names = args.scenarios.split(",") if args.scenarios else None
print(f"{'scenario':<22} {'state':<22} {'assessor':<14} {'rho2':>8} {'RR':>8} {'slack':>9} {'equal':>6} pass")
for sc in battery(names):
    for rec in verify_theorem1(sc, args.reps, RandomStream(args.seed)).records:
        chk = rec.check()
        print(f"{sc.name:<22} {rec.state:<22} {rec.assessor:<14} {rec.rho2.value:8.4f} {rec.rr.value:8.4f} "
              f"{rec.slack:9.2e} {str(rec.equality):>6} {chk.passed}")
