"""Uncertainty quantities for each built-in wave function.

    python3 scripts/quantum_battery.py [--points 2048] [--hbar 1]
"""
import argparse
import math

from learnunc.quantum import analyse, battery_states, wigner_summary

p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
p.add_argument("--points", type=int, default=2048)
p.add_argument("--hbar", type=float, default=1.0)
p.add_argument("--no-wigner", action="store_true")
args = p.parse_args()

print(f"{'state':<20} {'dx*dp':>8} {'|cov_xp|':>9} {'Re cov':>8} {'C2Vx-Jp':>9} {'Vx*Jx':>8} {'min W':>8} all pass")
for label, psi in battery_states(args.hbar, args.points).items():
    q = analyse(psi)
    min_w = "" if args.no_wigner else f"{wigner_summary(psi).min_w:8.4f}"
    print(f"{label:<20} {math.sqrt(q.vx * q.vp_psi):8.5f} {abs(q.cov_xp):9.5f} {q.cov_xp.real:8.4f} "
          f"{q.stam_margins[0]:9.2e} {q.vx * q.jx:8.5f} {min_w:>8} {all(c.passed for c in q.checks)}")
