# src/interface/cli.py
"""Command-line entry point: mediate, fit, simulate and parse."""

import argparse
import logging
import sys
from typing import List, Optional, Sequence

from src import __version__
from src.config import AnalysisDefaults, load_defaults
from src.data.loader import Dataset, LoadOptions, compute_moments, load_csv
from src.errors import DataIoError, ParameterError, PathMedError
from src.interface.report import (
    AnalysisReport,
    interval_entry,
    mediation_section,
    model_section,
    pathfit_section,
    render_report,
)
from src.mediation.analysis import (
    causal_steps,
    check_assumptions,
    decompose_effects,
    fit_mediation,
    sample_size_advisory,
    triangle_roles,
)
from src.mediation.inference import (
    CiMethod,
    bootstrap_ci,
    exact_se,
    normal_ci,
    product_distribution_ci,
    sobel_se,
    z_test,
)
from src.model.dsl import classify_roles, read_model_file, render_model, validate_against_columns
from src.pathfit.estimator import fit_ml, fit_null_model
from src.pathfit.indices import compute_indices, index_verdicts
from src.simulation.montecarlo import SimulationDesign, run_study
from src.stats.distributions import check_alpha, check_level

logger = logging.getLogger(__name__)

CI_CHOICES = ("normal", "bootstrap", "product", "all")
STOCHASTIC = (CiMethod.BOOTSTRAP, CiMethod.PRODUCT)

EPILOG = """\
exit codes:
  0  success
  1  analysis error (rank deficiency, non-convergence, ...)
  2  usage error (bad option, missing --seed for a stochastic interval)
  3  input error (unreadable file, missing column, model syntax)
"""


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument("--format", choices=("json", "text"), default="json", help="report format (default: json)")
    parser.add_argument("--out", metavar="PATH", help="write the report here instead of stdout")
    noise = parser.add_mutually_exclusive_group()
    noise.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    noise.add_argument("--quiet", action="store_true", help="only warnings and errors on stderr")


def build_parser(defaults: AnalysisDefaults) -> argparse.ArgumentParser:
    """Argument parser with defaults shown in --help."""
    parser = argparse.ArgumentParser(
        prog="pathmed",
        description="Single-mediator analysis and recursive path-model fitting.",
        epilog=EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    med = sub.add_parser(
        "mediate",
        help="causal steps, mediated effect and confidence limits for X -> M -> Y",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    med.add_argument("--data", required=True, help="CSV file with a header row")
    med.add_argument("--x", required=True, help="independent variable column")
    med.add_argument("--m", required=True, help="mediator column")
    med.add_argument("--y", required=True, help="outcome column")
    med.add_argument("--alpha", type=float, default=defaults.alpha, help="significance level")
    med.add_argument("--ci", choices=CI_CHOICES, default="normal", help="interval method(s)")
    med.add_argument("--boot-reps", type=int, default=defaults.boot_reps, help="bootstrap resamples")
    med.add_argument("--draws", type=int, default=defaults.draws, help="product-distribution draws")
    med.add_argument("--seed", type=int, default=None, help="required for bootstrap/product intervals")
    med.add_argument("--level", type=float, default=defaults.level, help="confidence level")
    med.add_argument("--workers", type=int, default=defaults.workers, help="processes for resampling")
    _add_common(med)

    fit = sub.add_parser(
        "fit",
        help="maximum-likelihood fit of a recursive path model with fit indices",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    fit.add_argument("--data", required=True, help="CSV file with a header row")
    fit.add_argument("--model", required=True, help="model file (.path)")
    _add_common(fit)

    sim = sub.add_parser(
        "simulate",
        help="seeded replication study of mediated-effect estimators",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    sim.add_argument("--design", required=True, help="design file (.json); must include a seed")
    sim.add_argument("--workers", type=int, default=defaults.workers, help="processes for replications")
    _add_common(sim)

    parse = sub.add_parser("parse", help="validate a model file and print variable roles")
    parse.add_argument("--model", required=True, help="model file (.path)")
    _add_common(parse)
    return parser


def _methods(choice: str) -> List[CiMethod]:
    if choice == "all":
        return [CiMethod.NORMAL, CiMethod.BOOTSTRAP, CiMethod.PRODUCT]
    return [CiMethod(choice)]


def _check_workers(workers: int):
    if workers < 1:
        raise ParameterError(f"--workers must be at least 1, got {workers}")


def _load_options(defaults: AnalysisDefaults) -> LoadOptions:
    return LoadOptions(delimiter=defaults.delimiter, missing_markers=defaults.missing_markers)


def cmd_mediate(args, defaults: AnalysisDefaults) -> AnalysisReport:
    """Fit the triangle, run the tests and build the requested intervals."""
    check_alpha(args.alpha)
    check_level(args.level)
    _check_workers(args.workers)
    methods = _methods(args.ci)
    if args.seed is None and any(m in STOCHASTIC for m in methods):
        raise ParameterError(f"--ci {args.ci} draws random numbers; pass an explicit --seed")

    data = load_csv(args.data, _load_options(defaults))
    fit = fit_mediation(data, args.x, args.m, args.y, rank_tol=defaults.rank_tol)
    dec = decompose_effects(fit)
    verdict = causal_steps(fit, alpha=args.alpha, tol=defaults.consistency_tol)
    assumptions = check_assumptions(fit, data, alpha=args.alpha)
    advisories = sample_size_advisory(triangle_roles(fit), fit.n)

    se = sobel_se(fit)
    sobel = {"estimate": dec.indirect_product, "se": se, "exact_se": exact_se(fit), "z": None, "p": None}
    if se > 0:
        test = z_test(dec.indirect_product, se)
        sobel.update(z=test.z, p=test.p)
    else:
        logger.warning("Standard error of the mediated effect is zero; z-test skipped")

    intervals = []
    for method in methods:
        if method is CiMethod.NORMAL:
            ci = normal_ci(dec.indirect_product, se, args.level)
        elif method is CiMethod.BOOTSTRAP:
            ci = bootstrap_ci(
                data, args.x, args.m, args.y,
                B=args.boot_reps, seed=args.seed, level=args.level, workers=args.workers,
            )
        else:
            ci = product_distribution_ci(fit, draws=args.draws, seed=args.seed, level=args.level)
        intervals.append(interval_entry(ci))

    return AnalysisReport(
        command="mediate",
        inputs={"data": str(args.data), "n": data.n, "rows_dropped": data.rows_dropped},
        settings={
            "alpha": args.alpha,
            "level": args.level,
            "ci": [m.value for m in methods],
            "boot_reps": args.boot_reps if CiMethod.BOOTSTRAP in methods else None,
            "draws": args.draws if CiMethod.PRODUCT in methods else None,
            "seed": args.seed,
        },
        sections={
            "mediation": mediation_section(fit, data, dec, verdict, assumptions, advisories),
            "inference": {"sobel": sobel, "intervals": intervals},
        },
    )


def cmd_fit(args, defaults: AnalysisDefaults) -> AnalysisReport:
    """Fit a path model by ML and attach fit indices and verdicts."""
    spec = read_model_file(args.model)
    data = load_csv(args.data, _load_options(defaults))
    validate_against_columns(spec, data.columns)
    subset = Dataset(spec.variables, data.select(spec.variables), source=data.source)
    moments = compute_moments(subset, strict=defaults.strict_moments)
    result = fit_ml(
        spec, moments, max_iter=defaults.max_iter, grad_tol=defaults.grad_tol, ftol=defaults.ftol
    )
    null_stats = fit_null_model(result.moments)
    indices = compute_indices(result.statistics, null_stats, result.moments, result.implied)
    roles = classify_roles(spec)
    advisories = sample_size_advisory(roles, data.n)
    section = pathfit_section(result, null_stats, indices, index_verdicts(indices))
    section["advisories"] = advisories
    return AnalysisReport(
        command="fit",
        inputs={
            "data": str(args.data),
            "model": str(args.model),
            "n": data.n,
            "rows_dropped": data.rows_dropped,
        },
        settings={"max_iter": defaults.max_iter, "grad_tol": defaults.grad_tol},
        sections={
            "model": model_section(spec, roles, render_model(spec)),
            "pathfit": section,
        },
    )


def cmd_simulate(args, defaults: AnalysisDefaults) -> AnalysisReport:
    """Run a replication study from a design file."""
    _check_workers(args.workers)
    design = SimulationDesign.from_json(args.design)
    report = run_study(design, workers=args.workers)
    return AnalysisReport(
        command="simulate",
        inputs={"design": str(args.design)},
        settings={"seed": design.seed},
        sections={"simulation": report.as_dict()},
    )


def cmd_parse(args, defaults: AnalysisDefaults) -> AnalysisReport:
    """Parse a model file and report roles and canonical text."""
    spec = read_model_file(args.model)
    return AnalysisReport(
        command="parse",
        inputs={"model": str(args.model)},
        sections={"model": model_section(spec, classify_roles(spec), render_model(spec))},
    )


COMMANDS = {
    "mediate": cmd_mediate,
    "fit": cmd_fit,
    "simulate": cmd_simulate,
    "parse": cmd_parse,
}


def _emit(text: str, out: Optional[str]):
    if out is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    try:
        with open(out, "w", encoding="utf-8") as f:
            f.write(text)
    except OSError as e:
        raise DataIoError(f"cannot write report to {out}: {e}") from e
    logger.info(f"Report written to {out}")


def run_cli(argv: Optional[Sequence[str]] = None) -> int:
    """Run one subcommand and return its exit code."""
    defaults = load_defaults()
    parser = build_parser(defaults)
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)
    elif args.quiet:
        logging.getLogger().setLevel(logging.WARNING)

    try:
        report = COMMANDS[args.command](args, defaults)
        _emit(render_report(report, args.format), args.out)
    except PathMedError as e:
        logger.error(f"{type(e).__name__}: {e}", exc_info=logger.isEnabledFor(logging.DEBUG))
        return e.exit_code
    except Exception as e:
        logger.error(f"Unexpected error in {args.command}: {e}", exc_info=True)
        return 1
    return 0
