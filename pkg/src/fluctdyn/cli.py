"""Command-line front end: scenario runs, sweeps, and verification suites.

Outputs are built for scripts and CI: a fixed-schema CSV per run, a JSON
report, and a manifest listing every emitted file.  Identical config plus
seed yields byte-identical files (shortest round-trip float formatting,
fixed column order, writes go to a temp file and are renamed into place).

Exit codes: 0 success; 1 verification failure; 2 malformed config or
arguments; 3 scenario invariant failure; 4 unhandled numeric degeneracy.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor

from . import __version__, verify
from .fluctuation import DegenerateDispersionError
from .scenarios import ConfigError, ScenarioConfig, ScenarioReport, run_scenario

CSV_COLUMNS = (
    "t",
    "mu",
    "sigma",
    "mu_dot",
    "sigma_dot",
    "sigma_v",
    "v2_mean",
    "lhs_sq_sum",
    "rhs_v2",
    "residual_r2",
    "cs_residual",
    "tight",
    "degenerate",
    "norm_defect",
)

EXIT_OK = 0
EXIT_VERIFY_FAIL = 1
EXIT_CONFIG = 2
EXIT_INVARIANT = 3
EXIT_DEGENERATE = 4

OUTDIR_ENV = "FLUCTDYN_OUTDIR"


def _fmt(x: float) -> str:
    # repr of a Python float is the shortest string that round-trips.
    return repr(float(x))


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp_", suffix=".part")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _jsonable(obj):
    if isinstance(obj, float):
        if math.isnan(obj):
            return None
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return obj
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def series_csv(report: ScenarioReport) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for r in report.reports:
        if r.degenerate:
            sigma_dot = lhs = residual = ""
        else:
            sigma_dot = _fmt(r.sigma_dot)
            lhs = _fmt(r.mu_dot**2 + r.sigma_dot**2)
            residual = _fmt(r.residual_r2)
        lines.append(
            ",".join(
                (
                    _fmt(r.t),
                    _fmt(r.mu),
                    _fmt(r.sigma),
                    _fmt(r.mu_dot),
                    sigma_dot,
                    _fmt(r.sigma_v),
                    _fmt(r.v2_mean),
                    lhs,
                    _fmt(r.v2_mean),
                    residual,
                    _fmt(r.cs_residual),
                    "1" if r.tight else "0",
                    "1" if r.degenerate else "0",
                    _fmt(r.norm_defect),
                )
            )
        )
    return "\n".join(lines) + "\n"


def _config_echo(cfg: ScenarioConfig, report: ScenarioReport) -> dict:
    return {
        "name": cfg.name,
        "params": cfg.params,
        "params_resolved": report.pieces.params_echo,
        "grid": {"t0": cfg.grid.t0, "t1": cfg.grid.t1, "n_steps": cfg.grid.n_steps},
        "method": cfg.method,
        "tolerances": cfg.tolerances,
        "seed": cfg.seed,
    }


def report_json(report: ScenarioReport) -> str:
    payload = {
        "version": __version__,
        "config": _config_echo(report.config, report),
        "summary": {
            "n_points": len(report.reports),
            "tight_fraction": report.tight_fraction,
            "min_residual_r2": report.min_residual,
            "min_cs_residual": report.min_cs_residual,
            "max_norm_defect": report.max_norm_defect,
            "max_overlay_deviation": report.overlay_dev,
            "tail_mass_top_levels": report.tail_mass,
            "degenerate_points": sum(1 for r in report.reports if r.degenerate),
        },
        "flags": report.flags,
        "warnings": report.warnings,
        "failed": report.failed,
    }
    return json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n"


def _load_config(path: str) -> ScenarioConfig:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError("<file>", f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"invalid JSON in {path}: {exc}") from None
    return ScenarioConfig.from_dict(raw)


def _outdir(args) -> str:
    out = args.output_dir or os.environ.get(OUTDIR_ENV) or "."
    os.makedirs(out, exist_ok=True)
    return out


def _emit_run(report: ScenarioReport, outdir: str, stem: str, config_path: str) -> list[str]:
    series_path = os.path.join(outdir, f"{stem}_series.csv")
    report_path = os.path.join(outdir, f"{stem}_report.json")
    _atomic_write(series_path, series_csv(report))
    _atomic_write(report_path, report_json(report))
    emitted = [series_path, report_path]
    manifest = {
        "version": __version__,
        "config_path": os.path.abspath(config_path),
        "output_dir": os.path.abspath(outdir),
        "files": [os.path.abspath(p) for p in emitted],
        "flags": report.flags,
        "warnings": report.warnings,
        "failed": report.failed,
        "tolerances": report.config.tolerances,
    }
    manifest_path = os.path.join(outdir, f"{stem}_manifest.json")
    _atomic_write(manifest_path, json.dumps(_jsonable(manifest), indent=2, sort_keys=True) + "\n")
    emitted.append(manifest_path)
    return emitted


def cmd_run(args) -> int:
    try:
        cfg = _load_config(args.config)
    except ConfigError as exc:
        print(f"config error at {exc.path}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    outdir = _outdir(args)
    try:
        report = run_scenario(cfg)
    except DegenerateDispersionError as exc:
        print(f"numeric degeneracy: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    stem = args.name or cfg.name
    emitted = _emit_run(report, outdir, stem, args.config)
    for path in emitted:
        print(path)
    if report.failed:
        print(f"invariant flags: {report.flags}", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


def cmd_verify(args) -> int:
    names = list(verify.SUITES) if args.suite == "all" else [args.suite]
    results = verify.run_suites(names, seed=args.seed)
    passed = sum(1 for r in results if r.passed)
    payload = {
        "version": __version__,
        "seed": args.seed,
        "suites": names,
        "checks": [r.as_dict() for r in results],
        "passed": passed,
        "failed": len(results) - passed,
    }
    text = json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n"
    if args.output:
        _atomic_write(args.output, text)
        print(args.output)
    else:
        print(text, end="")
    return EXIT_OK if passed == len(results) else EXIT_VERIFY_FAIL


def _set_by_path(raw: dict, path: str, value) -> None:
    keys = path.split(".")
    node = raw
    for key in keys[:-1]:
        if not isinstance(node, dict) or key not in node:
            node[key] = {}
        node = node[key]
    node[keys[-1]] = value


def _parse_value(token: str):
    try:
        return json.loads(token)
    except json.JSONDecodeError:
        return token


def cmd_sweep(args) -> int:
    if not args.values:
        print("sweep needs a non-empty --values list", file=sys.stderr)
        return EXIT_CONFIG
    try:
        with open(args.config) as fh:
            raw_base = json.load(fh)
        base_cfg = ScenarioConfig.from_dict(raw_base)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as exc:
        print(f"config error at {exc.path}: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    values = [_parse_value(v) for v in args.values]
    configs = []
    for value in values:
        raw = json.loads(json.dumps(raw_base))
        _set_by_path(raw, args.param, value)
        try:
            configs.append(ScenarioConfig.from_dict(raw))
        except ConfigError as exc:
            print(f"config error at {exc.path} for {args.param}={value}: {exc}", file=sys.stderr)
            return EXIT_CONFIG

    outdir = _outdir(args)
    try:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            reports = list(pool.map(run_scenario, configs))
    except DegenerateDispersionError as exc:
        print(f"numeric degeneracy: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE

    emitted = []
    param_token = args.param.replace(".", "_")
    summary_lines = [",".join(("value", "min_residual", "tight_fraction", "max_norm_defect"))]
    any_failed = False
    for value, report in zip(values, reports):
        stem = f"{base_cfg.name}_{param_token}_{value}"
        emitted.extend(_emit_run(report, outdir, stem, args.config))
        any_failed = any_failed or report.failed
        min_res = report.min_residual
        summary_lines.append(
            ",".join(
                (
                    json.dumps(value),
                    "" if (isinstance(min_res, float) and math.isnan(min_res)) else _fmt(min_res),
                    _fmt(report.tight_fraction),
                    _fmt(report.max_norm_defect),
                )
            )
        )
    summary_path = os.path.join(outdir, f"{base_cfg.name}_{param_token}_sweep.csv")
    _atomic_write(summary_path, "\n".join(summary_lines) + "\n")
    emitted.append(summary_path)
    for path in emitted:
        print(path)
    return EXIT_INVARIANT if any_failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fluctdyn",
        description="Simulate unitary dynamics and verify observable rate bounds.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario from a JSON config")
    p_run.add_argument("--config", required=True, help="path to the scenario JSON")
    p_run.add_argument("--output-dir", default=None, help=f"output directory (default ${OUTDIR_ENV} or .)")
    p_run.add_argument("--name", default=None, help="basename for emitted files (default: scenario name)")
    p_run.set_defaults(func=cmd_run)

    p_verify = sub.add_parser("verify", help="run the seeded property suites")
    p_verify.add_argument(
        "suite", choices=sorted(verify.SUITES) + ["all"], help="which suite to run"
    )
    p_verify.add_argument("--seed", type=int, default=verify.DEFAULT_SEED)
    p_verify.add_argument("--output", default=None, help="write the JSON result here instead of stdout")
    p_verify.set_defaults(func=cmd_verify)

    p_sweep = sub.add_parser("sweep", help="re-run a config over a list of parameter values")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--param", required=True, help="dotted path into the config, e.g. params.s")
    p_sweep.add_argument("--values", nargs="*", default=[], help="values (JSON literals)")
    p_sweep.add_argument("--output-dir", default=None)
    p_sweep.add_argument("--jobs", type=int, default=4)
    p_sweep.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
