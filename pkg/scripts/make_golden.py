"""Regenerate the golden report fixture used by the CLI regression test.

Run after an intentional change in check output:

    python3 scripts/make_golden.py
"""
from pathlib import Path

from learnunc.cli import load_config_file, main

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"

if __name__ == "__main__":
    load_config_file(FIXTURES / "golden_config.json")  # fail early on a bad config
    code = main(["run", "--config", str(FIXTURES / "golden_config.json"), "--out",
                 str(FIXTURES / "golden_report.json"), "-q"])
    print(f"wrote {FIXTURES / 'golden_report.json'} (exit {code})")
