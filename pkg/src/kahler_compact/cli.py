"""Command-line front end.

    kcompact verify   --beta B --suite S [--corpus FILE] [--seed N] [--tol NAME=VALUE ...]
    kcompact profile  --beta B --r LO:HI:N [--format csv|json]
    kcompact regimes  --beta B1,B2,...

Reports are JSON (profiles may be CSV). Without ``--output`` they go to
stdout, or to ``$KCOMPACT_OUTPUT_DIR/<command>.<format>`` when that variable
is set. Exit status: 0 when every check passes, 1 when any fails, 2 for a
bad configuration.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import json
import math
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema

from . import einstein as ein
from . import potentials as pots
from . import suites as su
from .errors import ExpressionError, GeometryError

OUTPUT_DIR_ENV = "KCOMPACT_OUTPUT_DIR"
SCHEMA_VERSION = "1"
EXIT_OK, EXIT_FAILED, EXIT_CONFIG = 0, 1, 2


class ConfigError(Exception):
    pass


def load_schema(name: str) -> dict:
    return json.loads(resources.files("kahler_compact.data").joinpath(name).read_text())


@dataclass
class RunConfig:
    command: str
    beta: list[float] = field(default_factory=lambda: [1.0])
    suites: list[str] = field(default_factory=list)
    r_range: list | None = None
    points: int = 10
    tolerances: dict[str, float] = field(default_factory=dict)
    seed: int = 0
    corpus: str | None = None
    output: str | None = None
    format: str = "json"
    timestamp: bool = True

    def as_dict(self) -> dict:
        d = asdict(self)
        if d["r_range"] is None:
            del d["r_range"]
        return d

    def validate(self) -> None:
        try:
            jsonschema.validate(self.as_dict(), load_schema("config_schema.json"))
        except jsonschema.ValidationError as exc:
            where = ".".join(str(p) for p in exc.absolute_path) or "config"
            raise ConfigError(f"{where}: {exc.message}") from None
        if self.format == "csv" and self.command != "profile":
            raise ConfigError("format: csv is only available for profile tables")
        if self.command == "profile":
            if self.r_range is None:
                raise ConfigError("r_range: required for profile")
            if not self.r_range[0] < self.r_range[1]:
                raise ConfigError("r_range: lower end must be below upper end")
        unknown = set(self.tolerances) - set(su.default_tolerances())
        if unknown:
            raise ConfigError(f"tolerances: unknown check name(s) {sorted(unknown)}")


# --- argument parsing -------------------------------------------------------------


def _beta_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad beta list {text!r}") from None


def _r_range(text: str) -> list:
    parts = text.split(":")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except (ValueError, IndexError):
        raise argparse.ArgumentTypeError("expected LO:HI:N") from None
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected LO:HI:N")
    return [lo, hi, n]


def _tolerance(text: str) -> tuple[str, float]:
    name, sep, value = text.partition("=")
    try:
        return name.strip(), float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected NAME=VALUE, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kcompact", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, default_format="json", formats=("json",)):
        p.add_argument("--beta", type=_beta_list, default=[1.0], help="cone parameter(s), comma separated")
        p.add_argument("--output", default=None, help="report path (default: stdout or $%s)" % OUTPUT_DIR_ENV)
        p.add_argument("--format", choices=("json", "csv"), default=default_format)
        p.add_argument("--no-timestamp", action="store_true", help="omit timestamp and timing fields")
        p.add_argument("--seed", type=int, default=0)

    v = sub.add_parser("verify", help="run verification suites")
    common(v)
    v.add_argument("--suite", choices=su.SUITES + ("all",), default="all")
    v.add_argument("--corpus", default=None, help="potential corpus file (default: bundled corpus)")
    v.add_argument("--tol", type=_tolerance, action="append", default=[], metavar="NAME=VALUE")
    v.add_argument("--points", type=int, default=10, help="sample points per check")

    p = sub.add_parser("profile", help="tabulate r, V, R_hat, u, z")
    common(p)
    p.add_argument("--r", type=_r_range, required=True, metavar="LO:HI:N")

    r = sub.add_parser("regimes", help="classify Einstein regimes")
    common(r)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(
        command=args.command,
        beta=list(args.beta),
        seed=args.seed,
        output=args.output,
        format=args.format,
        timestamp=not args.no_timestamp,
    )
    if args.command == "verify":
        cfg.suites = list(su.SUITES) if args.suite == "all" else [args.suite]
        cfg.corpus = args.corpus
        cfg.tolerances = dict(args.tol)
        cfg.points = args.points
    elif args.command == "profile":
        cfg.r_range = list(args.r)
    return cfg


# --- running ----------------------------------------------------------------------


def _clean(x):
    """JSON-safe numbers: non-finite floats become null."""
    if isinstance(x, float) and not math.isfinite(x):
        return None
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    return x


def run(cfg: RunConfig) -> dict:
    """Execute a validated configuration and return the report document."""
    cfg.validate()
    started = time.perf_counter()
    report: dict = {"schema_version": SCHEMA_VERSION, "command": cfg.command, "config": cfg.as_dict(), "seed": cfg.seed}
    checks: list[dict] = []
    if cfg.command == "verify":
        try:
            corpus = pots.load_corpus(cfg.corpus)
        except (OSError, ExpressionError) as exc:
            raise ConfigError(f"corpus: {exc}") from None
        for i, beta in enumerate(cfg.beta):
            for c in su.run_suites(cfg.suites, beta, cfg.seed + i, corpus, cfg.tolerances, cfg.points):
                d = c.as_dict()
                d["beta"] = beta
                checks.append(d)
        report["checks"] = checks
    elif cfg.command == "profile":
        lo, hi, n = cfg.r_range
        step = (hi - lo) / (n - 1)
        rs = [lo + k * step for k in range(n)]
        report["profiles"] = []
        for beta in cfg.beta:
            rows = su.profile_table(beta, rs)
            cols = list(rows[0])
            report["profiles"].append({"beta": beta, "columns": cols, "rows": [[row[c] for c in cols] for row in rows]})
    else:
        regimes = [ein.regime_report(b) for b in cfg.beta]
        report["regimes"] = [r.as_dict() for r in regimes]
        for r in regimes:
            if r.sign_change is not None:
                checks.append(
                    {
                        "suite": "einstein",
                        "name": "zero_locus_sign_change",
                        "beta": r.beta,
                        "defect": 0.0 if r.sign_change else 1.0,
                        "tolerance": 0.5,
                        "passed": bool(r.sign_change),
                        "diagnostic": "",
                    }
                )
        report["checks"] = checks
    failed = sum(not c["passed"] for c in checks)
    report["summary"] = {"total": len(checks), "failed": failed, "passed": failed == 0}
    if cfg.timestamp:
        report["timestamp"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
        report["timing"] = {"seconds": round(time.perf_counter() - started, 3)}
    return _clean(report)


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2, sort_keys=False, allow_nan=False) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    profiles = report.get("profiles", [])
    writer.writerow(["beta", *profiles[0]["columns"]] if profiles else ["beta"])
    for prof in profiles:
        for row in prof["rows"]:
            writer.writerow([repr(float(prof["beta"])), *(repr(float(v)) for v in row)])
    return buf.getvalue()


def _destination(cfg: RunConfig) -> Path | None:
    if cfg.output:
        return Path(cfg.output)
    env = os.environ.get(OUTPUT_DIR_ENV)
    if env:
        return Path(env) / f"{cfg.command}.{cfg.format}"
    return None


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_CONFIG
    cfg = config_from_args(args)
    try:
        report = run(cfg)
    except ConfigError as exc:
        print(f"kcompact: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except GeometryError as exc:
        print(f"kcompact: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILED
    text = render(report, cfg.format)
    dest = _destination(cfg)
    if dest is None:
        sys.stdout.write(text)
    else:
        dest.parent.mkdir(parents=True, exist_ok=True)
        dest.write_text(text)
    summary = report["summary"]
    if summary["total"]:
        for c in report.get("checks", []):
            if not c["passed"]:
                print(f"FAIL {c['suite']}/{c['name']} beta={c['beta']:g}: {c['defect']} > {c['tolerance']} {c['diagnostic']}".rstrip(), file=sys.stderr)
        print(f"kcompact: {summary['total'] - summary['failed']}/{summary['total']} checks passed", file=sys.stderr)
    return EXIT_OK if summary["passed"] else EXIT_FAILED


if __name__ == "__main__":
    raise SystemExit(main())
