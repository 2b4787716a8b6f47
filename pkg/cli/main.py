"""
Command-line surface for the POVM probability-domain toolkit
Validates POVMs, maps states to probabilities, measures domain dimension, simulates and classifies counts
"""
import argparse
import json
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

from pydantic import BaseModel, Field, ValidationError, field_validator

from config import CLI_CONFIG, DEFAULT_TOL, DOMAIN_CONFIG, ESTIMATION_CONFIG
from models.domain import (
    ProbabilityDomain,
    extreme_point_dimension,
    extreme_point_sample,
    figure_table,
    subspace_dimension,
)
from models.errors import EXIT_INPUT, EXIT_OK, EXIT_VALIDATION, PovmDomainError
from models.estimation import classify, simulate_counts
from models.povm import validate
from utils.logger import set_level, setup_logger
from utils.serialization import counts_payload, dumps, load_counts, load_povm, load_state, verdict_payload

logger = setup_logger(__name__)


class RunConfig(BaseModel):
    """Validated command invocation"""

    command: str
    povm: Optional[str] = None
    state: Optional[Path] = None
    counts: Optional[Path] = None
    seed: int = Field(default=CLI_CONFIG["seed"], ge=0)
    tol: float = Field(default=DEFAULT_TOL, gt=0)
    shots: int = Field(default=CLI_CONFIG["shots"], ge=1)
    k: float = Field(default=ESTIMATION_CONFIG["k"], gt=0)
    budget: int = Field(default=ESTIMATION_CONFIG["budget"], ge=1)
    samples: int = Field(default=DOMAIN_CONFIG["samples"], ge=2)
    grid: Tuple[int, int] = CLI_CONFIG["grid"]
    output: Optional[Path] = None

    @field_validator("grid", mode="before")
    @classmethod
    def parse_grid(cls, value):
        if isinstance(value, str):
            theta, _, phi = value.lower().partition("x")
            value = (int(theta), int(phi))
        if value[0] < 1 or value[1] < 1:
            raise ValueError("grid sizes must be positive")
        return value


CommandResult = Tuple[str, int]


def cmd_validate(config: RunConfig) -> CommandResult:
    """Print the validation report; exit 3 when it is not ok"""
    povm = load_povm(config.povm)
    report = validate(povm, config.tol)
    if not report.ok:
        logger.warning(f"POVM failed validation: {'; '.join(report.violations)}")
    return dumps(report.to_dict()), EXIT_OK if report.ok else EXIT_VALIDATION


def cmd_map(config: RunConfig) -> CommandResult:
    """Print the probability point of a state"""
    rho = load_state(config.state, config.tol)
    povm = load_povm(config.povm)
    domain = ProbabilityDomain(povm, config.tol)
    return dumps(domain.probabilities(rho)), EXIT_OK


def cmd_dimension(config: RunConfig) -> CommandResult:
    """Rank of M against the affine dimension of sampled pure-state images"""
    povm = load_povm(config.povm)
    domain = ProbabilityDomain(povm, config.tol)
    points = extreme_point_sample(povm, config.samples, config.seed)
    sampled = subspace_dimension(points, config.tol)
    if sampled != domain.effective_dimension:
        logger.warning(f"Sampled dimension {sampled} differs from rank of M {domain.effective_dimension}")
    report = {
        "d": povm.dim,
        "outcomes": povm.n_outcomes,
        "parameter_dimension": domain.parameter_dimension,
        "effective_dimension": domain.effective_dimension,
        "sampled_dimension": sampled,
        "samples": config.samples,
        "informationally_complete": not domain.non_unique,
        "redundant_outcomes": domain.redundant_outcomes,
        "extreme_point_dimension": extreme_point_dimension(povm.dim),
    }
    return dumps(report), EXIT_OK


def cmd_sample(config: RunConfig) -> CommandResult:
    """Simulate shot counts of a state"""
    rho = load_state(config.state, config.tol)
    povm = load_povm(config.povm)
    record = simulate_counts(rho, povm, config.shots, config.seed)
    return dumps(counts_payload(record)), EXIT_OK


def cmd_estimate(config: RunConfig) -> CommandResult:
    """Classify a count record and print the verdict with its estimate"""
    record = load_counts(config.counts)
    povm = load_povm(config.povm)
    verdict = classify(record, povm, k=config.k, budget=config.budget, seed=config.seed, tol=config.tol)
    payload = verdict_payload(verdict)
    payload["frequencies"] = record.frequencies.tolist()
    payload["k"] = config.k
    return dumps(payload), EXIT_OK


def cmd_figure(config: RunConfig) -> CommandResult:
    """CSV of pure-state images on a Bloch angle grid"""
    povm = load_povm(config.povm)
    table = figure_table(povm, *config.grid)
    return table.to_csv(index=False, float_format=CLI_CONFIG["float_format"]), EXIT_OK


COMMANDS: Dict[str, Callable[[RunConfig], CommandResult]] = {
    "validate-povm": cmd_validate,
    "map-state": cmd_map,
    "domain-dim": cmd_dimension,
    "sample-counts": cmd_sample,
    "estimate": cmd_estimate,
    "figure": cmd_figure,
}


class _Parser(argparse.ArgumentParser):
    """Report usage errors with the input exit code instead of argparse's 2"""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _common_options() -> argparse.ArgumentParser:
    """Options accepted after the subcommand too; SUPPRESS keeps the root values when absent"""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--log-level", default=argparse.SUPPRESS, help="DEBUG, INFO, WARNING or ERROR")
    common.add_argument("--tol", type=float, default=argparse.SUPPRESS, help="numerical tolerance")
    common.add_argument("-o", "--output", type=Path, default=argparse.SUPPRESS, help="write output to a file")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="povm-domain",
        description="Convex probability domain of generalized quantum measurements",
    )
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR")
    parser.add_argument("--tol", type=float, default=DEFAULT_TOL, help="numerical tolerance")
    parser.add_argument("-o", "--output", type=Path, default=None, help="write output to a file")
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common_options()

    p = sub.add_parser("validate-povm", parents=[common], help="check Hermiticity, positivity and completeness")
    p.add_argument("povm", help="POVM file or builtin name")

    p = sub.add_parser("map-state", parents=[common], help="probabilities tr(rho A_mu) of a state")
    p.add_argument("state", type=Path)
    p.add_argument("povm")

    p = sub.add_parser("domain-dim", parents=[common], help="effective and sampled dimension of the domain")
    p.add_argument("povm")
    p.add_argument("--samples", type=int, default=DOMAIN_CONFIG["samples"])
    p.add_argument("--seed", type=int, default=CLI_CONFIG["seed"])

    p = sub.add_parser("sample-counts", parents=[common], help="simulate shot counts")
    p.add_argument("state", type=Path)
    p.add_argument("povm")
    p.add_argument("--shots", type=int, default=CLI_CONFIG["shots"])
    p.add_argument("--seed", type=int, default=CLI_CONFIG["seed"])

    p = sub.add_parser("estimate", parents=[common], help="classify observed counts")
    p.add_argument("counts", type=Path)
    p.add_argument("povm")
    p.add_argument("--k", type=float, default=ESTIMATION_CONFIG["k"])
    p.add_argument("--budget", type=int, default=ESTIMATION_CONFIG["budget"])
    p.add_argument("--seed", type=int, default=CLI_CONFIG["seed"])

    p = sub.add_parser("figure", parents=[common], help="plot-ready pure-state images of a 4-outcome qubit POVM")
    p.add_argument("povm")
    p.add_argument("--grid", default="{}x{}".format(*CLI_CONFIG["grid"]), help="THETAxPHI")

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Run one command and return its exit code"""
    args = build_parser().parse_args(argv)
    options = {key: value for key, value in vars(args).items() if value is not None and key != "log_level"}
    try:
        if args.log_level:
            set_level(args.log_level)
        config = RunConfig(**options)
        logger.info(f"Running {config.command}")
        text, code = COMMANDS[config.command](config)
        if not text.endswith("\n"):
            text += "\n"
        if config.output is not None:
            config.output.write_text(text)
            logger.info(f"Wrote {config.output}")
        else:
            sys.stdout.write(text)
    except PovmDomainError as e:
        logger.error(f"{args.command} failed: {e}")
        print(dumps({"error": type(e).__name__, "message": str(e)}))
        return e.exit_code
    except (ValidationError, json.JSONDecodeError, OSError, ValueError) as e:
        logger.error(f"Invalid input: {e}")
        print(dumps({"error": type(e).__name__, "message": str(e)}))
        return EXIT_INPUT

    return code


if __name__ == "__main__":
    sys.exit(main())
