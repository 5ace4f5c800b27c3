"""Command-line entry point for FairMetric."""

import argparse
import json
import sys
from collections.abc import Callable
from pathlib import Path
from typing import Any, Literal

import pandas as pd
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from src.config import get_settings
from src.errors import FairnessError, ParameterDomainError
from src.measures.alpha import factorize, pareto_lambda_max, reward_ratio, tradeoff_objective
from src.measures.bounds import (
    MAX_BRUTE_FORCE_USERS,
    BoxConstraint,
    beta_monotonicity_sweep,
    box_brute_force_minimum,
    box_lower_bound,
    starvation_bounds,
    threshold_self_check,
)
from src.measures.core import (
    fairness,
    fairness_general,
    fairness_homogeneous,
    fairness_one_sided_limits,
    homogeneous_pareto_preserving,
    jain_generalized,
)
from src.measures.majorization import order_preservation
from src.models.tradeoff import SolverOptions
from src.services.artifacts import ArtifactWriter, load_region, parse_allocations
from src.services.solver import TradeoffSolver, pareto_flag
from src.services.suites import SUITES, SuiteRunner
from src.utils.grids import parse_grid, prepare_beta_grid


def setup_logging(log_level: str, log_file: str | None = None) -> None:
    """Configure loguru logging.

    Args:
        log_level: Logging level string.
        log_file: Optional rotating log file.
    """
    logger.remove()
    logger.add(
        sys.stderr,
        level=log_level.upper(),
        format="<green>{time:YYYY-MM-DD HH:mm:ss}</green> | <level>{level: <8}</level> | <cyan>{name}</cyan>:<cyan>{function}</cyan>:<cyan>{line}</cyan> - <level>{message}</level>",
    )
    if log_file:
        logger.add(
            log_file,
            level=log_level.upper(),
            rotation="1 day",
            retention="7 days",
            compression="zip",
        )


class RunConfig(BaseModel):
    """One CLI invocation."""

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    subcommand: Literal["measure", "sweep", "jain", "tradeoff", "ratio", "bounds", "verify", "curve"]
    input_path: Path | None = None
    output_path: str | None = None
    beta: float | None = None
    beta_grid: str | None = None
    lam: float | None = Field(default=None, alias="lambda", ge=0)
    lambda_grid: str | None = None
    alpha_grid: str = "0:0.16:8"
    r: float = 1.0
    lambda_inv: float | None = None
    x_min: float | None = Field(default=None, gt=0)
    x_max: float | None = Field(default=None, gt=0)
    suites: list[str] = Field(default_factory=lambda: ["all"])
    seed: int | None = None
    tol: float | None = Field(default=None, gt=0)

    def require(self, *names: str) -> None:
        """Fail with the first missing parameter."""
        for name in names:
            if getattr(self, name) is None:
                raise ParameterDomainError(name, f"required by '{self.subcommand}'")


def _vectors(config: RunConfig):
    config.require("input_path")
    return [vector for _, vector in parse_allocations(config.input_path)]


def _measure(config: RunConfig, writer: ArtifactWriter) -> int:
    config.require("beta")
    vectors = _vectors(config)
    rows = []
    for x in vectors:
        row: dict[str, Any] = {"label": x.label, "n": x.n, "total": x.total, "beta": config.beta, "r": config.r}
        if config.beta == 1 and config.r == 1:
            left, right = fairness_one_sided_limits(x)
            row.update(f=None, limit_from_below=left, limit_from_above=right)
        elif config.r == 1:
            row["f"] = fairness(x, config.beta).value
        else:
            row["f"] = fairness_general(x, config.beta, config.r).value
        if config.lambda_inv is not None and config.beta not in (0, 1):
            row["F"] = fairness_homogeneous(x, config.beta, config.lambda_inv)
            row["pareto_preserving"] = homogeneous_pareto_preserving(config.beta, config.lambda_inv)
        rows.append(row)
    if config.beta == 1:
        logger.warning("beta = 1 is discontinuous; reporting both one-sided limits")
    writer.write_json({"measure": rows})
    return 0


def _sweep(config: RunConfig, writer: ArtifactWriter) -> int:
    config.require("beta_grid")
    vectors = _vectors(config)
    grid = prepare_beta_grid(sorted(parse_grid(config.beta_grid, "beta_grid")))
    sweeps = [beta_monotonicity_sweep(x, grid.betas) for x in vectors]

    frame = pd.DataFrame({"beta": grid.betas})
    for sweep in sweeps:
        frame[sweep.label] = sweep.values
        if not sweep.passed:
            logger.warning(f"[SWEEP] {sweep.label}: f is not monotone at grid indices {sweep.violations}")

    violations = order_preservation(vectors, {sweep.label: sweep.values for sweep in sweeps})
    for fairer, less_fair, index in violations:
        logger.warning(f"[SWEEP] {fairer} majorizes {less_fair} but f is lower at beta = {grid.betas[index]}")
    logger.info(f"[SWEEP] {len(vectors)} vectors over {len(grid.betas)} betas, {len(violations)} order violations")
    writer.write_frame(frame)
    return 0


def _jain(config: RunConfig, writer: ArtifactWriter) -> int:
    beta = -1.0 if config.beta is None else config.beta
    vectors = _vectors(config)
    writer.write_json({"beta": beta, "jain": {x.label: jain_generalized(x, beta) for x in vectors}})
    return 0


def _tradeoff(config: RunConfig, writer: ArtifactWriter) -> int:
    config.require("beta", "lam")
    vectors = _vectors(config)
    rows = []
    for x in vectors:
        parts = factorize(x, config.beta)
        rows.append(
            {
                "label": x.label,
                "phi": tradeoff_objective(x, config.beta, config.lam),
                "fairness_component": parts.fairness_component,
                "efficiency_component": parts.efficiency_component,
                "utility": parts.product,
            }
        )
    writer.write_json(
        {
            "beta": config.beta,
            "lambda": config.lam,
            "pareto_lambda_max": pareto_lambda_max(config.beta),
            "pareto_flag": pareto_flag(config.beta, config.lam),
            "allocations": rows,
        }
    )
    return 0


def _ratio(config: RunConfig, writer: ArtifactWriter) -> int:
    vectors = _vectors(config)
    alphas = parse_grid(config.alpha_grid, "alpha_grid")
    if any(alpha < 0 for alpha in alphas):
        raise ParameterDomainError("alpha_grid", "alpha must be non-negative")
    frame = pd.DataFrame({"alpha": alphas})
    for x in vectors:
        frame[x.label] = [reward_ratio(x, alpha).ratio for alpha in alphas]
    writer.write_frame(frame)
    return 0


def _bounds(config: RunConfig, writer: ArtifactWriter) -> int:
    config.require("beta")
    vectors = _vectors(config)
    box = None
    if config.x_min is not None or config.x_max is not None:
        config.require("x_min", "x_max")
        box = BoxConstraint(x_min=config.x_min, x_max=config.x_max)

    rows = []
    for x in vectors:
        row: dict[str, Any] = {"label": x.label, "starvation": starvation_bounds(x, config.beta)}
        if not x.has_zero and config.beta != 0:
            row["threshold"] = threshold_self_check(x, config.beta)
        if box is not None and config.beta != 0:
            row["box"] = box_lower_bound(box, config.beta, x.n)
            if x.n <= MAX_BRUTE_FORCE_USERS:
                row["box_brute_force_minimum"] = box_brute_force_minimum(box, config.beta, x.n)
        rows.append(row)
    writer.write_json({"beta": config.beta, "bounds": rows})
    return 0


def _curve(config: RunConfig, writer: ArtifactWriter) -> int:
    config.require("input_path", "beta", "lambda_grid")
    region = load_region(config.input_path)
    lambdas = parse_grid(config.lambda_grid, "lambda_grid")
    settings = get_settings()
    options = SolverOptions.from_settings(settings, seed=settings.default_seed if config.seed is None else config.seed)
    points = TradeoffSolver(options).tradeoff_curve(region, config.beta, lambdas)

    frame = pd.DataFrame(
        {
            "lambda": [point.lam for point in points],
            "fairness": [point.fairness for point in points],
            "throughput": [point.throughput for point in points],
            "pareto_flag": [point.pareto_flag.value for point in points],
        }
    )
    writer.write_frame(frame)
    allocations = {
        "beta": config.beta,
        "names": region.names,
        "points": [
            {"lambda": point.lam, "allocation": point.allocation, "phi": point.phi, "oracle_phi": point.oracle_phi}
            for point in points
        ],
    }
    sibling = writer.sibling(".allocations.json")
    if sibling is not None:
        writer.write_json(allocations, sibling)
    return 0


def _verify(config: RunConfig, writer: ArtifactWriter) -> int:
    settings = get_settings()
    unknown = [suite for suite in config.suites if suite != "all" and suite not in SUITES]
    if unknown:
        raise ParameterDomainError("suite", f"unknown suite(s) {', '.join(unknown)}")
    seed = settings.default_seed if config.seed is None else config.seed
    tol = settings.default_tol if config.tol is None else config.tol
    report = SuiteRunner(settings).run_sync(config.suites, seed, tol)
    writer.write_json(report.to_dict())
    for failure in report.failures:
        logger.error(f"[VERIFY] {failure.suite}.{failure.name} failed (beta = {failure.beta}) {failure.detail}")
    return 0 if report.passed else 1


HANDLERS: dict[str, Callable[[RunConfig, ArtifactWriter], int]] = {
    "measure": _measure,
    "sweep": _sweep,
    "jain": _jain,
    "tradeoff": _tradeoff,
    "ratio": _ratio,
    "bounds": _bounds,
    "verify": _verify,
    "curve": _curve,
}


def error_payload(error: Exception) -> dict[str, Any]:
    """Machine-readable description of a failure."""
    payload: dict[str, Any] = {"error": type(error).__name__, "message": str(error)}
    if isinstance(error, ValidationError):
        first = error.errors()[0]
        payload["message"] = first["msg"]
        payload["parameter"] = ".".join(str(part) for part in first["loc"])
    for attribute in ("parameter", "location"):
        if hasattr(error, attribute):
            payload[attribute] = getattr(error, attribute)
    return payload


def _report_error(error: Exception) -> int:
    logger.error(f"{type(error).__name__}: {error}")
    sys.stderr.write(json.dumps(error_payload(error)) + "\n")
    return 2


def run(config: RunConfig) -> int:
    """Execute one subcommand and write its artifacts.

    Returns:
        0 on success, 1 when verification fails, 2 on an error.
    """
    logger.info(f"Running '{config.subcommand}'")
    writer = ArtifactWriter(config.output_path)
    try:
        status = HANDLERS[config.subcommand](config, writer)
    except (FairnessError, ValidationError, OSError) as e:
        return _report_error(e)
    logger.info(f"'{config.subcommand}' finished with status {status}")
    return status


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subparser per subcommand."""
    parser = argparse.ArgumentParser(prog="fairmetric", description="Axiomatic fairness measures for allocation vectors")
    subparsers = parser.add_subparsers(dest="subcommand", required=True)

    def add(name: str, help_text: str) -> argparse.ArgumentParser:
        sub = subparsers.add_parser(name, help=help_text)
        sub.add_argument("--output", dest="output_path", default=None, help="Output file (default stdout)")
        return sub

    measure = add("measure", "Evaluate f_beta (or f_beta,r) for every allocation")
    measure.add_argument("--input", dest="input_path", required=True)
    measure.add_argument("--beta", type=float, required=True)
    measure.add_argument("--r", type=float, default=1.0)
    measure.add_argument("--lambda-inv", dest="lambda_inv", type=float, default=None)

    sweep = add("sweep", "CSV of f over a beta grid, one column per allocation")
    sweep.add_argument("--input", dest="input_path", required=True)
    sweep.add_argument("--beta-grid", dest="beta_grid", required=True, help="start:step:stop or comma list")

    jain = add("jain", "Generalized Jain's index (beta <= 1)")
    jain.add_argument("--input", dest="input_path", required=True)
    jain.add_argument("--beta", type=float, default=None, help="Default -1")

    tradeoff = add("tradeoff", "Tradeoff objective and factorization")
    tradeoff.add_argument("--input", dest="input_path", required=True)
    tradeoff.add_argument("--beta", type=float, required=True)
    tradeoff.add_argument("--lambda", dest="lam", type=float, required=True)

    ratio = add("ratio", "CSV of the reward ratio over an alpha grid")
    ratio.add_argument("--input", dest="input_path", required=True)
    ratio.add_argument("--alpha-grid", dest="alpha_grid", default="0:0.16:8")

    bounds = add("bounds", "Starvation, threshold and box bounds")
    bounds.add_argument("--input", dest="input_path", required=True)
    bounds.add_argument("--beta", type=float, required=True)
    bounds.add_argument("--x-min", dest="x_min", type=float, default=None)
    bounds.add_argument("--x-max", dest="x_max", type=float, default=None)

    curve = add("curve", "Fairness-throughput curve over a feasible region")
    curve.add_argument("--region", dest="input_path", required=True, help="JSON with A, b and optional names")
    curve.add_argument("--beta", type=float, required=True)
    curve.add_argument("--lambda-grid", dest="lambda_grid", default="0,0.25,0.5,0.75,1,1.25,1.5,2,3,5,10")
    curve.add_argument("--seed", type=int, default=None)

    verify = add("verify", "Run the numerical property suites")
    verify.add_argument("--suite", dest="suites", action="append", choices=[*SUITES, "all"], default=None)
    verify.add_argument("--seed", type=int, default=None)
    verify.add_argument("--tol", type=float, default=None)

    return parser


GRID_FLAGS = ("--beta-grid", "--alpha-grid", "--lambda-grid")


def attach_grid_values(argv: list[str]) -> list[str]:
    """Join grid flags with their value, so -10:0.25:5 is not read as an option."""
    joined: list[str] = []
    tokens = iter(argv)
    for token in tokens:
        if token in GRID_FLAGS:
            value = next(tokens, None)
            joined.append(token if value is None else f"{token}={value}")
        else:
            joined.append(token)
    return joined


def parse_config(argv: list[str] | None = None) -> RunConfig:
    """Parse command-line arguments into a validated RunConfig."""
    argv = sys.argv[1:] if argv is None else argv
    namespace = vars(build_parser().parse_args(attach_grid_values(argv)))
    if namespace.get("suites") is None:
        namespace.pop("suites", None)
    # Validate by alias so errors name the flag
    if "lam" in namespace:
        namespace["lambda"] = namespace.pop("lam")
    return RunConfig(**namespace)


def main(argv: list[str] | None = None) -> None:
    """Entry point."""
    settings = get_settings()
    setup_logging(settings.log_level, settings.log_file)
    try:
        config = parse_config(argv)
    except ValidationError as e:
        sys.exit(_report_error(e))
    sys.exit(run(config))


if __name__ == "__main__":
    main()
