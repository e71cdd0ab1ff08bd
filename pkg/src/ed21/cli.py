"""``ed21`` command line: simulate, fieldmap, validate, convert.

Exit codes: 0 success, 1 validation failure, 2 configuration error,
3 numerical failure (the last good trace is still written).
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import platform
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from . import config as cfgmod
from .config import ConfigError
from .dynamics import NumericalError, simulate
from .fields import FieldEvaluationError, FieldQuery, field_with_error
from .geometry import FieldStrength
from .helium import FilmState, em_to_film, film_to_em
from .ledger import LedgerError, balance_residuals, write_ledger_csv
from .worldline import DomainError, RootError, read_csv, write_csv

log = logging.getLogger("ed21")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

FIELD_COLUMNS = ["x0", "x1", "x2", "E1", "E2", "H", "quad_error", "error"]
FILM_COLUMNS = ["x0", "x1", "x2", "v1", "v2", "rho"]


# ------------------------------------------------------------ manifests


def _versions() -> dict[str, str]:
    return {"ed21": __version__, "numpy": np.__version__, "python": platform.python_version()}


def _write_json(path: Path, data: dict) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def _manifest(out: Path, rc: cfgmod.RunConfig, command: str, status: str,
              outputs: dict[str, str], wall: float, extra: dict | None = None) -> None:
    """Run manifest plus a separate timing file, so manifests rerun byte-identical."""
    data = {"command": command, "status": status, "config_hash": rc.digest,
            "versions": _versions(), "outputs": outputs}
    if extra:
        data.update(extra)
    name = rc.output("manifest")
    _write_json(out / name, data)
    _write_json(out / (Path(name).stem + ".timing.json"), {"wall_time_s": round(wall, 3)})


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load(args) -> cfgmod.RunConfig:
    if args.config is None:
        raise ConfigError("--config is required")
    return cfgmod.load(args.config)


# ------------------------------------------------------------- commands


def cmd_simulate(args) -> int:
    t0 = time.perf_counter()
    rc = _load(args)
    sim = cfgmod.sim_config(rc)
    out = _out_dir(args)
    trace_name, ledger_name = rc.output("trace"), rc.output("ledger")
    step = max(1, sim.steps // 20)

    def progress(n, total):
        if n % step == 0 or n == total:
            log.info("step %d / %d", n, total)

    try:
        trace = simulate(sim, progress)
    except NumericalError as exc:
        log.error("numerical failure: %s", exc)
        partial = getattr(exc, "trace", None)
        outputs = {}
        if partial is not None and len(partial):
            partial.to_csv(out / trace_name)
            outputs["trace"] = trace_name
        _manifest(out, rc, "simulate", "numerical_failure", outputs,
                  time.perf_counter() - t0, {"error": str(exc)})
        return EXIT_NUMERIC
    trace.to_csv(out / trace_name)
    outputs = {"trace": trace_name}
    try:
        write_ledger_csv(out / ledger_name, balance_residuals(trace))
        outputs["ledger"] = ledger_name
    except LedgerError as exc:
        log.error("ledger failed: %s", exc)
        _manifest(out, rc, "simulate", "numerical_failure", outputs,
                  time.perf_counter() - t0, {"error": str(exc)})
        return EXIT_NUMERIC
    _manifest(out, rc, "simulate", "ok", outputs, time.perf_counter() - t0,
              {"steps": sim.steps})
    return EXIT_OK


def _field_row(spec: cfgmod.FieldMapSpec, x: np.ndarray) -> list[float]:
    q = FieldQuery(x, spec.charge, spec.direction, spec.quad_tol, spec.truncate)
    try:
        f, err = field_with_error(spec.worldline, q)
    except (FieldEvaluationError, DomainError, RootError, ValueError) as exc:
        log.warning("field point %s: %s", x.tolist(), exc)
        return [*x, math.nan, math.nan, math.nan, math.nan, 1.0]
    return [*x, f.e1, f.e2, f.h, err, 0.0]


def cmd_fieldmap(args) -> int:
    t0 = time.perf_counter()
    rc = _load(args)
    spec = cfgmod.fieldmap_spec(rc)
    out = _out_dir(args)
    pts = spec.points()
    threads = max(1, int(args.threads or 1))
    with ThreadPoolExecutor(max_workers=threads) as pool:
        rows = list(pool.map(lambda x: _field_row(spec, x), pts))
    name = rc.output("field")
    write_csv(out / name, FIELD_COLUMNS, np.array(rows, float).reshape(-1, len(FIELD_COLUMNS)))
    flagged = int(sum(r[-1] for r in rows))
    _manifest(out, rc, "fieldmap", "ok", {"field": name}, time.perf_counter() - t0,
              {"points": len(rows), "flagged_points": flagged})
    return EXIT_OK


def cmd_validate(args) -> int:
    from . import validate

    t0 = time.perf_counter()
    rc = _load(args) if args.config is not None else None
    suite = cfgmod.validate_suite(rc, args.suite)
    checks = validate.run(suite)
    for c in checks:
        print(c.line())
    report = validate.report(checks, suite)
    if args.out is not None:
        out = _out_dir(args)
        _write_json(out / "validate_report.json", report)
    ok = report["passed"]
    print(f"{'PASS' if ok else 'FAIL'}: {sum(c.passed for c in checks)}/{len(checks)} checks "
          f"in {time.perf_counter() - t0:.1f} s")
    return EXIT_OK if ok else EXIT_FAIL


def _nan_row(n: int) -> list[float]:
    return [math.nan] * n


def field_rows_to_film(cols: list[str], data: np.ndarray, p) -> np.ndarray:
    idx = {c: i for i, c in enumerate(cols)}
    need = ["x0", "x1", "x2", "E1", "E2", "H"]
    missing = [c for c in need if c not in idx]
    if missing:
        raise ConfigError(f"field CSV lacks columns {missing}")
    rows = []
    for r in data:
        vals = [r[idx[c]] for c in need]
        if not all(math.isfinite(v) for v in vals[3:]):
            rows.append(vals[:3] + _nan_row(3))
            continue
        fs = em_to_film(FieldStrength(*vals[3:]), p=p)
        rows.append(vals[:3] + [fs.v1, fs.v2, fs.rho])
    return np.array(rows, float).reshape(-1, len(FILM_COLUMNS))


def film_rows_to_field(cols: list[str], data: np.ndarray, p) -> np.ndarray:
    idx = {c: i for i, c in enumerate(cols)}
    missing = [c for c in FILM_COLUMNS if c not in idx]
    if missing:
        raise ConfigError(f"film CSV lacks columns {missing}")
    rows = []
    for r in data:
        vals = [r[idx[c]] for c in FILM_COLUMNS]
        if not all(math.isfinite(v) for v in vals[3:]):
            rows.append(vals[:3] + _nan_row(4) + [1.0])
            continue
        f = film_to_em(FilmState(v1=vals[3], v2=vals[4], rho=vals[5]), p).field
        rows.append(vals[:3] + [f.e1, f.e2, f.h, math.nan, 0.0])
    return np.array(rows, float).reshape(-1, len(FIELD_COLUMNS))


def cmd_convert(args) -> int:
    t0 = time.perf_counter()
    rc = _load(args)
    conv = rc.section("convert", required=False)
    src = args.input or conv.get("input")
    if not src:
        raise ConfigError("no input CSV: set [convert] input or pass --input")
    direction = (args.direction or conv.get("direction", "field_to_film")).strip()
    if direction not in ("field_to_film", "film_to_field"):
        raise ConfigError(f"unknown conversion direction {direction!r}")
    p = cfgmod.film_parameters(rc)
    src_path = Path(src) if args.input else rc.path(src)
    try:
        cols, data = read_csv(src_path)
    except (OSError, ValueError, StopIteration) as exc:
        raise ConfigError(f"cannot read {src_path}: {exc}") from None
    out = _out_dir(args)
    if direction == "field_to_film":
        name, columns, rows = rc.output("film"), FILM_COLUMNS, field_rows_to_film(cols, data, p)
    else:
        name, columns, rows = rc.output("field"), FIELD_COLUMNS, film_rows_to_field(cols, data, p)
    write_csv(out / name, columns, rows)
    _manifest(out, rc, "convert", "ok", {direction.split("_")[-1]: name},
              time.perf_counter() - t0, {"c_eff": p.c_eff, "rho_bar": p.rho_bar})
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "fieldmap": cmd_fieldmap, "validate": cmd_validate,
            "convert": cmd_convert}


# --------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="scenario file (INI format)")
    common.add_argument("--out", default=None, help="output directory (default: .)")
    common.add_argument("--threads", type=int, default=None,
                        help="worker threads for fieldmap")
    common.add_argument("--seed", type=int, default=None,
                        help="reserved; the core uses no randomness")
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = argparse.ArgumentParser(prog="ed21", parents=[common],
                                     description="Radiation reaction in 2+1 electrodynamics")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="integrate the dressed particle")
    sub.add_parser("fieldmap", parents=[common], help="field of a prescribed worldline on a grid")
    v = sub.add_parser("validate", parents=[common], help="run built-in validation suites")
    v.add_argument("--suite", default=None, choices=cfgmod.SUITES)
    c = sub.add_parser("convert", parents=[common], help="field CSV <-> helium film CSV")
    c.add_argument("--input", default=None)
    c.add_argument("--direction", default=None, choices=("field_to_film", "film_to_field"))
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    if args.threads is not None and args.command != "fieldmap":
        log.warning("--threads only affects fieldmap")
    if args.out is None and args.command != "validate":
        args.out = "."
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
