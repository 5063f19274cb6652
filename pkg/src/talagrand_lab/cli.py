"""Command line runner: ``talagrand-lab run|list|calibrate``.

Config files are flat key-value sections::

    [scenario.small-cube]
    suite = theorem1-product-cube
    N = 4,6
    functions = 10

The suite defaults to the scenario id when that id names a builtin.
Exit codes: 0 all verdicts pass, 1 some verdict fails, 2 config or model error.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import re
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .kernels import BACKEND
from .report import InequalityReport, estimates_to_csv, reports_to_csv, summarize
from .scenarios import SUITES, ParamError, parse_param

OUT_ENV = "TALAGRAND_LAB_OUT"
DEFAULT_OUT = "talagrand-lab-out"
SUMMARY_COLUMNS = ("scenario", "suite", "seed", "status", "count", "failures", "max_ratio", "wall_time")

EXIT_PASS, EXIT_FAIL, EXIT_ERROR = 0, 1, 2
MAX_PRINTED_FAILURES = 5

_HEADER = re.compile(r"^\[scenario\.([A-Za-z0-9][A-Za-z0-9_.-]*)\]$")


class ConfigError(ValueError):
    """Malformed config; ``messages`` holds one line-numbered diagnostic per problem."""

    def __init__(self, messages: list[str]):
        super().__init__("\n".join(messages))
        self.messages = messages


@dataclass
class Scenario:
    id: str
    suite: str
    params: dict
    line: int = 0
    seed: int = 0


@dataclass
class RunReport:
    scenario: str
    suite: str
    seed: int
    params: dict
    reports: list = field(default_factory=list)
    estimates: list = field(default_factory=list)
    wall_time: float = 0.0
    error: str | None = None
    version: str = __version__
    backend: str = BACKEND

    @property
    def status(self) -> str:
        if self.error is not None:
            return "error"
        return "pass" if all(r.passed for r in self.reports) else "fail"

    def summary(self) -> dict:
        s = summarize(self.reports)
        s["max_ratio"] = s["max_ratio"] if math.isfinite(s["max_ratio"]) else None
        return s

    def to_json(self) -> dict:
        return {
            "scenario": self.scenario,
            "suite": self.suite,
            "seed": self.seed,
            "version": self.version,
            "backend": self.backend,
            "wall_time": self.wall_time,
            "status": self.status,
            "error": self.error,
            "params": {k: list(v) if isinstance(v, (tuple, list)) else v for k, v in self.params.items()},
            "summary": self.summary(),
            "reports": [r.to_record() for r in self.reports],
            "estimates": [e.to_record() for e in self.estimates],
        }


# ---------------------------------------------------------------------------
# config


def parse_config(text: str, source: str = "<config>") -> list[Scenario]:
    """Parse a config; every problem is collected before raising :class:`ConfigError`."""
    errors: list[str] = []
    scenarios: list[Scenario] = []
    raw: dict[str, dict] = {}
    current = None
    for lineno, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if not s or s.startswith(("#", ";")):
            continue
        where = f"{source}:{lineno}"
        if s.startswith("["):
            m = _HEADER.match(s)
            if not m:
                errors.append(f"{where}: expected a '[scenario.<id>]' header, got {s!r}")
                current = None
                continue
            sid = m.group(1)
            if sid in raw:
                errors.append(f"{where}: duplicate scenario id {sid!r}")
                current = None
                continue
            current = sid
            raw[sid] = {"line": lineno, "items": []}
            continue
        if "=" not in s:
            errors.append(f"{where}: expected 'key = value', got {s!r}")
            continue
        if current is None:
            errors.append(f"{where}: key outside a scenario section")
            continue
        key, value = (t.strip() for t in s.split("=", 1))
        raw[current]["items"].append((lineno, key, value))

    for sid, sec in raw.items():
        suite_id, items = sid, []
        for lineno, key, value in sec["items"]:
            if key == "suite":
                suite_id = value
            else:
                items.append((lineno, key, value))
        where = f"{source}:{sec['line']}"
        if suite_id not in SUITES:
            errors.append(f"{where}: unknown scenario {suite_id!r} for [scenario.{sid}]; see 'talagrand-lab list'")
            continue
        suite_def = SUITES[suite_id]
        params = suite_def.defaults()
        seen = set()
        for lineno, key, value in items:
            where = f"{source}:{lineno}"
            if key not in suite_def.params:
                known = ", ".join(sorted(suite_def.params)) or "none"
                errors.append(f"{where}: unknown key {key!r} for suite {suite_id!r} (known: {known})")
                continue
            p = suite_def.params[key]
            if key in seen and p.kind != "lines":
                errors.append(f"{where}: duplicate key {key!r}")
                continue
            seen.add(key)
            try:
                v = parse_param(p, value)
            except ParamError as exc:
                errors.append(f"{where}: {key}: {exc}")
                continue
            if p.kind == "lines":
                params[key].append(v)
            else:
                params[key] = v
        scenarios.append(Scenario(sid, suite_id, params, sec["line"]))
    if not raw and not errors:
        errors.append(f"{source}: no [scenario.<id>] sections")
    if errors:
        raise ConfigError(errors)
    return scenarios


def load_config(path) -> list[Scenario]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError([f"{path}: cannot read config: {exc.strerror or exc}"]) from None
    return parse_config(text, str(path))


def scenario_seed(global_seed: int, scenario_id: str) -> int:
    """Independent 64-bit stream per scenario: a hash of the global seed and the id."""
    h = hashlib.blake2b(f"{global_seed}:{scenario_id}".encode(), digest_size=8)
    return int.from_bytes(h.digest(), "little")


# ---------------------------------------------------------------------------
# execution


def execute(sc: Scenario) -> RunReport:
    """Run one scenario; model errors are captured in the report rather than raised."""
    rr = RunReport(sc.id, sc.suite, sc.seed, sc.params)
    start = time.perf_counter()
    try:
        reports, estimates = SUITES[sc.suite].run(dict(sc.params), sc.seed)
        rr.reports = [r for r in reports if isinstance(r, InequalityReport)]
        rr.estimates = list(estimates)
    except Exception as exc:  # reported as exit 2
        rr.error = f"{type(exc).__name__}: {exc}"
    rr.wall_time = time.perf_counter() - start
    return rr


def run_scenarios(scenarios: list[Scenario], seed: int = 0, jobs: int = 1) -> list[RunReport]:
    """Results in config order, whatever order the workers finish in."""
    for sc in scenarios:
        sc.seed = scenario_seed(seed, sc.id)
    if jobs <= 1 or len(scenarios) <= 1:
        return [execute(sc) for sc in scenarios]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(execute, scenarios))


def write_reports(results: list[RunReport], out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for rr in results:
        (out / f"{rr.scenario}.json").write_text(json.dumps(rr.to_json(), indent=2) + "\n")
        (out / f"{rr.scenario}.csv").write_text(reports_to_csv(rr.reports))
        (out / f"{rr.scenario}.estimates.csv").write_text(estimates_to_csv(rr.estimates))
        s = rr.summary()
        rows.append({
            "scenario": rr.scenario,
            "suite": rr.suite,
            "seed": rr.seed,
            "status": rr.status,
            "count": s["count"],
            "failures": s["failures"],
            "max_ratio": "inf" if s["max_ratio"] is None else s["max_ratio"],
            "wall_time": f"{rr.wall_time:.3f}",
        })
    with open(out / "summary.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=SUMMARY_COLUMNS, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)


def exit_code(results: list[RunReport]) -> int:
    if any(rr.status == "error" for rr in results):
        return EXIT_ERROR
    if any(rr.status == "fail" for rr in results):
        return EXIT_FAIL
    return EXIT_PASS


def _print_result(rr: RunReport, stream) -> None:
    s = rr.summary()
    if rr.status == "error":
        print(f"ERROR {rr.scenario}: {rr.error}", file=stream)
        return
    mr = "inf" if s["max_ratio"] is None else f"{s['max_ratio']:.4g}"
    print(f"{rr.status.upper():5s} {rr.scenario}: {s['count']} reports, {s['failures']} failures, max ratio {mr} ({rr.wall_time:.1f}s)", file=stream)
    failing = [r for r in rr.reports if not r.passed]
    for r in failing[:MAX_PRINTED_FAILURES]:
        print(f"      fail {r.id} [{r.model}] lhs={r.lhs:.6g} rhs={r.rhs:.6g} C={r.constant:.6g}", file=stream)
    if len(failing) > MAX_PRINTED_FAILURES:
        print(f"      ... {len(failing) - MAX_PRINTED_FAILURES} more failing rows in the CSV report", file=stream)


# ---------------------------------------------------------------------------
# commands


def cmd_run(args) -> int:
    try:
        scenarios = load_config(args.config)
    except ConfigError as exc:
        for m in exc.messages:
            print(m, file=sys.stderr)
        return EXIT_ERROR
    if args.jobs < 1:
        print("--jobs must be at least 1", file=sys.stderr)
        return EXIT_ERROR
    out = Path(args.out or os.environ.get(OUT_ENV) or DEFAULT_OUT)
    results = run_scenarios(scenarios, args.seed, args.jobs)
    write_reports(results, out)
    for rr in results:
        _print_result(rr, sys.stdout)
    code = exit_code(results)
    print(f"reports written to {out} (exit {code})")
    return code


def cmd_list(args) -> int:
    width = max(len(k) for k in SUITES)
    for sid, s in SUITES.items():
        print(f"{sid:<{width}}  {s.description}")
    return EXIT_PASS


def cmd_calibrate(args) -> int:
    from .calibration import CORPORA, calibrate, frozen_table, write_frozen

    if args.constant_id not in CORPORA:
        print(f"unknown constant {args.constant_id!r}; known: {', '.join(CORPORA)}", file=sys.stderr)
        return EXIT_ERROR
    result = calibrate(args.constant_id, args.corpus_seed)
    print(result.to_json())
    frozen = frozen_table().get(args.constant_id)
    if frozen and int(frozen["corpus_seed"]) == args.corpus_seed:
        same = float(frozen["value"]) == result.value
        print(f"frozen value {frozen['value']} {'reproduced' if same else 'NOT reproduced'}", file=sys.stderr)
    if args.write:
        write_frozen(result)
        print(f"stored {args.constant_id} = {result.value}", file=sys.stderr)
    return EXIT_PASS


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("expected an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="talagrand-lab", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({BACKEND} kernels)")
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run the scenarios of a config file")
    r.add_argument("config")
    r.add_argument("--out", help=f"report directory (default ${OUT_ENV} or ./{DEFAULT_OUT})")
    r.add_argument("--seed", type=_u64, default=0, help="global seed, split per scenario by id")
    r.add_argument("--jobs", type=int, default=1, help="worker processes")
    r.set_defaults(func=cmd_run)

    ls = sub.add_parser("list", help="list builtin scenarios")
    ls.set_defaults(func=cmd_list)

    c = sub.add_parser("calibrate", help="recompute a calibrated constant from its corpus")
    c.add_argument("constant_id")
    c.add_argument("--corpus-seed", type=_u64, required=True)
    c.add_argument("--write", action="store_true", help="store the result as the frozen value")
    c.set_defaults(func=cmd_calibrate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
