"""Command-line front end: run suites and write one JSON (or CSV) report.

Exit codes: 0 when every check passes, 1 when any check fails, 2 on a
usage or configuration error.  Everything under the report's ``run`` key
(timestamps, worker count, output path) is excluded from the
reproducibility contract; the rest is byte-identical for identical configs.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import fnmatch
import io
import json
import logging
import os
import platform
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .errors import LearnUncError, UsageError
from .foundations import RandomStream
from .report import CheckReport, encode_value
from .suites import SUITES, SuiteSettings, run_suite

log = logging.getLogger("learnunc")

SEED_ENV = "LEARNUNC_SEED"
DEFAULT_SEED = 42
FORMATS = ("json", "csv")
SCHEMA_ID = "learnunc-report"
SCHEMA_VERSION = 1
EXPORT_WIGNER_POINTS = 256
CSV_COLUMNS = ("suite", "task", "name", "kind", "relation", "lhs", "rhs", "margin", "tolerance", "mc_se",
               "pass", "provenance")


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return DEFAULT_SEED
    try:
        return int(raw, 0)
    except ValueError:
        raise UsageError(f"{SEED_ENV}={raw!r} is not an integer") from None


@dataclass
class RunConfig:
    seed: int = DEFAULT_SEED
    reps: int = 200_000
    grid_points: int = 2048
    grid_span: float | None = None  # None: each state picks its own domain
    hbar: float = 1.0
    tol_overrides: dict = field(default_factory=dict)
    suites: list = field(default_factory=lambda: list(SUITES))
    out_path: str = "-"
    format: str = "json"
    workers: int = 1
    export_dir: str | None = None
    export_state: str = "chirped-beta=0.25"

    def validate(self) -> RunConfig:
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise UsageError("seed must be an unsigned 64-bit integer")
        if int(self.reps) != self.reps or self.reps < 100:
            raise UsageError("reps must be an integer >= 100")
        if int(self.grid_points) != self.grid_points or self.grid_points < 64:
            raise UsageError("grid_points must be an integer >= 64")
        if self.grid_span is not None and not self.grid_span > 0:
            raise UsageError("grid_span must be positive")
        if not self.hbar > 0:
            raise UsageError("hbar must be positive")
        if self.format not in FORMATS:
            raise UsageError(f"format must be one of {FORMATS}")
        if int(self.workers) != self.workers or self.workers < 1:
            raise UsageError("workers must be a positive integer")
        if not isinstance(self.tol_overrides, dict) or not all(
                isinstance(v, (int, float)) and v >= 0 for v in self.tol_overrides.values()):
            raise UsageError("tol_overrides maps check-name patterns to nonnegative tolerances")
        suites = list(dict.fromkeys(self.suites))
        unknown = [s for s in suites if s not in SUITES]
        if unknown or not suites:
            raise UsageError(f"unknown suites {unknown}; valid suites: {', '.join(SUITES)}")
        self.suites = suites
        return self

    @property
    def settings(self) -> SuiteSettings:
        return SuiteSettings(int(self.reps), int(self.grid_points), self.grid_span, float(self.hbar),
                             int(self.workers))

    def recorded(self) -> dict:
        """Config as it appears in the report: everything that affects results."""
        n = int(self.grid_points)
        return {"seed": self.seed, "reps": int(self.reps), "grid_points": n,
                "grid_points_power_of_two": n & (n - 1) == 0, "grid_span": self.grid_span,
                "hbar": float(self.hbar), "tol_overrides": dict(self.tol_overrides),
                "suites": list(self.suites), "format": self.format}


CONFIG_KEYS = {f.name for f in dataclasses.fields(RunConfig)}


def load_config_file(path) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError("config file must hold a JSON object")
    data = {k.replace("-", "_"): v for k, v in data.items()}
    unknown = sorted(set(data) - CONFIG_KEYS)
    if unknown:
        raise UsageError(f"unknown config keys {unknown}")
    return data


def make_config(file_values: dict | None = None, **flags) -> RunConfig:
    """Defaults, then the seed env var, then the config file, then flags (None flags are ignored)."""
    values = {"seed": _default_seed()}
    values.update(file_values or {})
    values.update({k: v for k, v in flags.items() if v is not None})
    if isinstance(values.get("suites"), str):
        values["suites"] = [s.strip() for s in values["suites"].split(",") if s.strip()]
    try:
        config = RunConfig(**values)
    except TypeError as exc:
        raise UsageError(str(exc)) from None
    return config.validate()


# ---------------------------------------------------------------- execution


def _override(entry: dict, patterns: dict) -> dict:
    r: CheckReport = entry["report"]
    full = f"{entry['suite']}/{entry['task']}/{r.name}"
    for pat, tol in patterns.items():
        if fnmatch.fnmatchcase(full, pat) or fnmatch.fnmatchcase(r.name, pat):
            detail = {**r.detail, "tolerance_override": {"pattern": pat, "original": r.tolerance}}
            return {**entry, "report": dataclasses.replace(r, tolerance=float(tol), detail=detail)}
    return entry


def execute(config: RunConfig) -> list[dict]:
    """Run the selected suites (concurrently when workers > 1) and return entries in suite order."""
    root = RandomStream(config.seed)
    settings = config.settings

    def one(name):
        t0 = time.perf_counter()
        out = run_suite(name, settings, root)
        log.info("suite %s: %d checks in %.1f s", name, len(out), time.perf_counter() - t0)
        return out

    if config.workers > 1 and len(config.suites) > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as ex:
            parts = list(ex.map(one, config.suites))
    else:
        parts = [one(s) for s in config.suites]
    return [_override(e, config.tol_overrides) for part in parts for e in part]


def _summary(entries, suites):
    per = {s: {"checks": 0, "failed": 0} for s in suites}
    for e in entries:
        per[e["suite"]]["checks"] += 1
        per[e["suite"]]["failed"] += not e["report"].passed
    failed = sum(v["failed"] for v in per.values())
    return {"checks": len(entries), "passed": len(entries) - failed, "failed": failed, "suites": per}


def build_report(config: RunConfig, entries: list[dict], started: datetime, finished: datetime) -> dict:
    return {
        "schema": SCHEMA_ID,
        "schema_version": SCHEMA_VERSION,
        "tool": {"name": "learnunc", "version": __version__},
        "environment": {"python": platform.python_version(), "numpy": np.__version__,
                        "scipy": scipy.__version__},
        "config": config.recorded(),
        "summary": _summary(entries, config.suites),
        "checks": [{"suite": e["suite"], "task": e["task"], **e["report"].to_dict()} for e in entries],
        "run": {"started_at": started.isoformat(), "finished_at": finished.isoformat(),
                "elapsed_seconds": (finished - started).total_seconds(), "workers": config.workers,
                "out_path": config.out_path},
    }


def dumps_json(report: dict) -> str:
    return json.dumps(encode_value(report), sort_keys=True, indent=1, allow_nan=False) + "\n"


def strip_volatile(report: dict) -> dict:
    return {k: v for k, v in report.items() if k != "run"}


def _csv_number(v):
    if isinstance(v, dict) and set(v) == {"re", "im"}:
        return repr(complex(float(v["re"]), float(v["im"])))
    return "" if v is None else str(v) if isinstance(v, str) else repr(v)


def dumps_csv(report: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for c in report["checks"]:
        w.writerow([c["suite"], c["task"], c["name"], c["kind"], c["relation"],
                    *(_csv_number(c[k]) for k in ("lhs", "rhs", "margin", "tolerance", "mc_se")),
                    "true" if c["pass"] else "false", c["provenance"]])
    return buf.getvalue()


def export_grids(config: RunConfig, directory) -> list[Path]:
    """|psi|^2, |phi|^2 and W for one battery state as CSV files."""
    from .quantum import battery_states, momentum_transform, wigner

    half = None if config.grid_span is None else config.grid_span / 2
    states = battery_states(config.hbar, config.grid_points, half)
    if config.export_state not in states:
        raise UsageError(f"unknown export state {config.export_state!r}; choose from {sorted(states)}")
    psi = states[config.export_state]
    phi = momentum_transform(psi)
    small = battery_states(config.hbar, min(config.grid_points, EXPORT_WIGNER_POINTS), half)[config.export_state]
    w = wigner(small)
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    paths = [d / "position_density.csv", d / "momentum_density.csv", d / "wigner.csv"]
    np.savetxt(paths[0], np.column_stack([psi.x, psi.density().values]), delimiter=",", header="x,density",
               comments="", fmt="%.17g")
    np.savetxt(paths[1], np.column_stack([phi.p, phi.density().values]), delimiter=",", header="p,density",
               comments="", fmt="%.17g")
    xx, pp = np.meshgrid(w.x, w.p, indexing="ij")
    np.savetxt(paths[2], np.column_stack([xx.ravel(), pp.ravel(), w.w.ravel()]), delimiter=",",
               header="x,p,w", comments="", fmt="%.17g")
    return paths


def run(config: RunConfig) -> int:
    """Execute, write the report, return the exit code."""
    started = datetime.now(timezone.utc)
    entries = execute(config)
    report = build_report(config, entries, started, datetime.now(timezone.utc))
    text = dumps_json(report) if config.format == "json" else dumps_csv(report)
    if config.out_path == "-":
        sys.stdout.write(text)
    else:
        try:
            Path(config.out_path).write_text(text)
        except OSError as exc:
            raise UsageError(f"cannot write report to {config.out_path}: {exc}") from None
    if config.export_dir:
        export_grids(config, config.export_dir)
    s = report["summary"]
    log.info("%d checks, %d failed", s["checks"], s["failed"])
    for c in report["checks"]:
        if not c["pass"]:
            log.warning("FAIL %s/%s/%s", c["suite"], c["task"], c["name"])
    return 0 if s["failed"] == 0 else 1


# ---------------------------------------------------------------- argv


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="learnunc", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run check suites and write a report")
    r.add_argument("--config", help="JSON file with RunConfig fields; flags override it")
    r.add_argument("--suites", help=f"comma-separated subset of: {','.join(SUITES)}")
    r.add_argument("--seed", type=lambda s: int(s, 0), help=f"root seed (default ${SEED_ENV} or {DEFAULT_SEED})")
    r.add_argument("--reps", type=int)
    r.add_argument("--grid-points", type=int)
    r.add_argument("--grid-span", type=float, help="full width of the position grid")
    r.add_argument("--hbar", type=float)
    r.add_argument("--tol", action="append", metavar="PATTERN=TOL",
                   help="override the tolerance of checks whose name matches PATTERN (repeatable)")
    r.add_argument("--format", choices=FORMATS)
    r.add_argument("--out", dest="out_path", help="output file, '-' for stdout")
    r.add_argument("--workers", type=int)
    r.add_argument("--export-dir", help="also write |psi|^2, |phi|^2 and W as CSV here")
    r.add_argument("--export-state")
    r.add_argument("-q", "--quiet", action="store_true")
    sub.add_parser("suites", help="list suites and their tasks")
    return p


def _parse_tols(items):
    if not items:
        return None
    out = {}
    for item in items:
        pat, sep, val = item.rpartition("=")
        try:
            out[pat] = float(val)
        except ValueError:
            sep = ""
        if not sep or not pat:
            raise UsageError(f"--tol expects PATTERN=TOL, got {item!r}")
    return out


def main(argv=None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors itself
        return 0 if exc.code == 0 else 2
    if args.command == "suites":
        for name, tasks in SUITES.items():
            print(f"{name}: {', '.join(t for t, _ in tasks)}")
        return 0
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s",
                        stream=sys.stderr)
    try:
        file_values = load_config_file(args.config) if args.config else None
        tols = _parse_tols(args.tol)
        if tols is not None and file_values and "tol_overrides" in file_values:
            tols = {**file_values["tol_overrides"], **tols}
        config = make_config(file_values, suites=args.suites, seed=args.seed, reps=args.reps,
                             grid_points=args.grid_points, grid_span=args.grid_span, hbar=args.hbar,
                             tol_overrides=tols, format=args.format, out_path=args.out_path,
                             workers=args.workers, export_dir=args.export_dir, export_state=args.export_state)
        return run(config)
    except LearnUncError as exc:
        print(f"learnunc: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
