"""Command-line entry point.

Exit codes: 0 success, 1 numerical failure (divergence, singular stage,
failed audit or verification), 2 configuration or usage error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from collections.abc import Sequence
from dataclasses import replace
from pathlib import Path

import anyio
import numpy as np

from hyperrelax._errors import (
    ConfigError,
    HyperRelaxError,
    NonFiniteStateError,
    StageSolveError,
)
from hyperrelax._internal import output
from hyperrelax._internal.config_parser import load_config
from hyperrelax._version import __version__
from hyperrelax.experiments import (
    PRESETS,
    converge_tau,
    error_growth,
    preset,
    run_simulation,
)
from hyperrelax.grid import fields_to_csv
from hyperrelax.imex import audit_tableau
from hyperrelax.models import available_models
from hyperrelax.residuals import KINDS, reports_to_csv, verify_kind
from hyperrelax.sbp import audit_operators
from hyperrelax.types import StudyConfig

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_CONFIG = 2


def _add_study_options(parser: argparse.ArgumentParser) -> None:
    source = parser.add_mutually_exclusive_group()
    source.add_argument("--config", type=Path, help="TOML study file")
    source.add_argument("--preset", choices=PRESETS, help="built-in experiment")
    parser.add_argument(
        "--published", action="store_true", help="published settings instead of desk scale"
    )
    parser.add_argument("--output-dir", type=Path, help="override [output] dir")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hyperrelax",
        description="Hyperbolic approximations of higher-order PDEs: runs, studies and audits.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="integrate a single model")
    _add_study_options(run)
    run.add_argument("--model", help=f"model name ({', '.join(available_models())})")
    run.add_argument("--T", dest="t_final", type=float, help="final time")
    run.add_argument("--tau", type=float, help="relaxation parameter of a hyperbolization")
    run.add_argument("--n", type=int, help="grid points")
    run.add_argument("--order", type=int, help="upwind operator order")
    run.add_argument("--dt", type=float, help="time step")
    run.add_argument("--relaxation", action="store_true", help="relax every step")

    converge = sub.add_parser("converge-tau", help="tau-convergence study")
    _add_study_options(converge)

    growth = sub.add_parser("error-growth", help="solitary-wave error growth study")
    _add_study_options(growth)

    verify = sub.add_parser("verify-residuals", help="check the manufactured-solution identities")
    verify.add_argument("--kind", choices=(*KINDS, "all"), default="all")
    verify.add_argument("--m", type=int, help="order for odd_m / even_m")
    verify.add_argument("--mu", type=float, default=0.0, help="damping for odd_m")
    verify.add_argument("--profiles", type=int, default=50, help="random profiles per kind")
    verify.add_argument("--seed", type=int, default=0)
    verify.add_argument("--output-dir", type=Path, help="write residuals.csv here")

    operators = sub.add_parser("check-operators", help="audit the upwind SBP operators")
    operators.add_argument("--order", type=int, default=7)
    operators.add_argument("--n", type=int, default=256)

    sub.add_parser("check-imex", help="audit the IMEX tableau")
    return parser


def _study_config(args: argparse.Namespace) -> StudyConfig:
    if args.config is not None:
        cfg = load_config(args.config)
    elif args.preset is not None:
        cfg = preset(args.preset, published=args.published)
    else:
        raise ConfigError("give --config or --preset")
    if args.output_dir is not None:
        cfg = replace(cfg, output_dir=args.output_dir)
    return cfg


def _preset_for_model(name: str, published: bool) -> StudyConfig:
    for candidate in PRESETS:
        cfg = preset(candidate, published)
        if name in (cfg.limit_model, cfg.hyper_model):
            return cfg
    raise ConfigError(f"No preset uses {name!r}; give --config for this model")


def _cmd_run(args: argparse.Namespace) -> int:
    if args.config is None and args.preset is None:
        if args.model is None:
            raise ConfigError("run needs --model, --config or --preset")
        cfg = _preset_for_model(args.model, args.published)
        if args.output_dir is not None:
            cfg = replace(cfg, output_dir=args.output_dir)
    else:
        cfg = _study_config(args)
    changes: dict[str, object] = {}
    if args.t_final is not None:
        changes.update(t_final=args.t_final, traversals=None)
    for key in ("n", "order", "dt"):
        if getattr(args, key) is not None:
            changes[key] = getattr(args, key)
    if args.relaxation:
        changes["relaxation"] = True
    cfg = replace(cfg, **changes)

    model, series = run_simulation(cfg, args.model, args.tau)
    assert series.final_state is not None
    columns = {f"q{j}": series.final_state.data[j] for j in range(model.field_count)}
    stem = f"{cfg.name}_{model.name}"
    output.write_outputs(
        cfg.output_dir,
        {
            f"{stem}_final.csv": fields_to_csv(model.grid, columns),
            f"{stem}_series.csv": series.to_csv(),
        },
    )
    print(f"{model.name}: {series.steps} steps to t={series.final_time:.17g}")
    return EXIT_OK


def _cmd_converge(args: argparse.Namespace) -> int:
    cfg = _study_config(args)
    result = anyio.run(converge_tau, cfg)
    files = {}
    if "csv" in cfg.formats:
        files[f"{cfg.name}_convergence.csv"] = output.convergence_csv(result)
    if "svg" in cfg.formats:
        files[f"{cfg.name}_convergence.svg"] = output.convergence_svg(
            result, f"{cfg.hyper_model} -> {cfg.limit_model}"
        )
    output.write_outputs(cfg.output_dir, files)
    sys.stdout.write(output.convergence_csv(result))
    if any(row.diverged for row in result.rows):
        return EXIT_NUMERICAL
    return EXIT_OK


def _cmd_growth(args: argparse.Namespace) -> int:
    cfg = _study_config(args)
    report = anyio.run(error_growth, cfg)
    files = {}
    for series in report.series:
        slug = series.label.replace(" ", "_").replace("=", "")
        if "csv" in cfg.formats:
            files[f"{cfg.name}_growth_{slug}.csv"] = output.growth_csv(series)
    if "svg" in cfg.formats:
        files[f"{cfg.name}_growth.svg"] = output.growth_svg(report.series, cfg.hyper_model)
    output.write_outputs(cfg.output_dir, files)
    for series in report.series:
        exponent = "n/a" if series.exponent is None else f"{series.exponent:.3f}"
        print(f"{series.label:<24} exponent {exponent}")
    if any(series.exponent is None for series in report.series):
        return EXIT_NUMERICAL
    return EXIT_OK


def _cmd_verify(args: argparse.Namespace) -> int:
    rng = np.random.default_rng(args.seed)
    kinds = KINDS if args.kind == "all" else (args.kind,)
    reports = []
    passed = True
    for kind in kinds:
        options: dict[str, object] = {}
        if kind in ("odd_m", "even_m"):
            if args.m is not None:
                options["m"] = args.m
            if kind == "odd_m":
                options["mu"] = args.mu
        kind_reports, study = verify_kind(kind, rng, profiles=args.profiles, **options)
        reports += kind_reports
        failed = [r for r in kind_reports if not r.passed]
        passed = passed and not failed
        worst = max(c.relative for r in kind_reports for c in r.checks)
        slopes = ", ".join("exact" if s is None else f"{s:.3f}" for s in study.slopes)
        residual = "exact" if study.residual_slope is None else f"{study.residual_slope:.3f}"
        status = "pass" if not failed else f"FAIL ({len(failed)} reports)"
        print(
            f"{kind:<9} {status}: worst relative mismatch {worst:.2e}; "
            f"deviation slopes [{slopes}]; residual slope {residual}"
        )
    if args.output_dir is not None:
        output.write_outputs(args.output_dir, {"residuals.csv": reports_to_csv(reports)})
    return EXIT_OK if passed else EXIT_NUMERICAL


def _cmd_operators(args: argparse.Namespace) -> int:
    audit = audit_operators(args.order, args.n)
    print(audit.summary())
    return EXIT_OK if audit.passed else EXIT_NUMERICAL


def _cmd_imex(args: argparse.Namespace) -> int:
    audit = audit_tableau()
    print(audit.summary())
    return EXIT_OK if audit.passed else EXIT_NUMERICAL


def _configure_logging(verbose: int) -> None:
    level = logging.WARNING if verbose == 0 else logging.INFO if verbose == 1 else logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def main(argv: Sequence[str] | None = None) -> int:
    """Run the command line and return the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    _configure_logging(args.verbose)

    command = args.command
    try:
        if command == "run":
            return _cmd_run(args)
        elif command == "converge-tau":
            return _cmd_converge(args)
        elif command == "error-growth":
            return _cmd_growth(args)
        elif command == "verify-residuals":
            return _cmd_verify(args)
        elif command == "check-operators":
            return _cmd_operators(args)
        elif command == "check-imex":
            return _cmd_imex(args)
        else:
            parser.error(f"unknown command {command!r}")
    except (NonFiniteStateError, StageSolveError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except HyperRelaxError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except SystemExit as e:
        return int(e.code or 0)
    return EXIT_CONFIG
