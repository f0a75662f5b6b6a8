"""The ``lpir`` command line tool.

Every command prints its results to stdout, as CSV for tables meant for
plotting and as JSON for reports, and its diagnostics to stderr. The exit
code is 0 on success, 1 for an I/O failure, 2 for a usage error and 3
when an audit or verification fails.
"""

##############################################################################
# Python compatibility hackage.
from __future__ import annotations

##############################################################################
# Python imports.
import csv
import json
import logging
import math
import sys
from argparse import ArgumentParser, Namespace
from contextlib import contextmanager
from typing import Any, Callable, Final, Iterator, Optional, Sequence, TextIO

##############################################################################
# NumPy imports.
import numpy as np

##############################################################################
# Local imports.
from . import __version__
from .allocation import allocation_for, expand_to_full, scheme_names
from .audit import exact_download_cost, measure_leakage, monte_carlo_cost, verify_correctness
from .core import SchemeParams, new_params
from .optimizer import kkt_certificate, solve_p2, verify_prop1
from .protocol import code_table
from .tradeoff import cost_tsc, cost_ub, exponent_scaling, sweep, theorem1_bounds
from .types import GuardExceeded, InvalidParameters, LPError, PermutationScope

##############################################################################
LOG: Final = logging.getLogger(__name__)
"""The logger for this module."""

EXIT_OK: Final[int] = 0
"""Exit code for success."""

EXIT_IO: Final[int] = 1
"""Exit code for a failure to read or write a file."""

EXIT_USAGE: Final[int] = 2
"""Exit code for bad arguments."""

EXIT_FAILED: Final[int] = 3
"""Exit code for a failed audit or verification."""

LEAKAGE_TOLERANCE: Final[float] = 1e-9
"""How far the measured leakage may exceed the target."""

CLOSED_FORM_TOLERANCE: Final[float] = 1e-8
"""How close the solver must get to the closed-form cost."""

Z_LIMIT: Final[float] = 4.0
"""The largest z-score a simulation may have and still pass."""

ANALYTIC_COSTS: Final[dict[str, Callable[[SchemeParams], float]]] = {
    "tsc": cost_tsc,
    "samy": cost_ub,
}
"""The closed-form download cost of each allocation scheme."""


##############################################################################
def _epsilon(args: Namespace, value: float) -> float:
    """Convert an epsilon argument to nats.

    Args:
        args: The command line arguments.
        value: The value as given.

    Returns:
        The value in nats.
    """
    return value * math.log(2) if args.bits else value


##############################################################################
def _params(args: Namespace) -> SchemeParams:
    """Get the scheme parameters from the arguments."""
    return new_params(args.n, args.k, _epsilon(args, getattr(args, "eps", 0.0)))


##############################################################################
@contextmanager
def _output(args: Namespace) -> Iterator[TextIO]:
    """Open the destination for a command's output.

    Args:
        args: The command line arguments.

    Yields:
        The file named by ``--out``, or stdout.
    """
    if getattr(args, "out", None):
        with open(args.out, "w", encoding="utf-8", newline="") as out:
            yield out
    else:
        yield sys.stdout


##############################################################################
def _report(args: Namespace, params: Optional[dict[str, Any]], results: dict[str, Any]) -> None:
    """Write a JSON run report.

    Args:
        args: The command line arguments.
        params: The scheme parameters to echo.
        results: The results of the command.
    """
    arguments = {
        name: value for name, value in sorted(vars(args).items()) if name != "handler"
    }
    with _output(args) as out:
        json.dump(
            {
                "command": {"name": args.command, "arguments": arguments},
                "params": params,
                "results": results,
                "version": __version__,
                "seed": getattr(args, "seed", None),
            },
            out,
            indent=2,
        )
        out.write("\n")


##############################################################################
def _csv(args: Namespace, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> None:
    """Write a CSV table, with floats to six decimal places.

    Args:
        args: The command line arguments.
        header: The column names.
        rows: The rows of the table.
    """
    with _output(args) as out:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(
            [f"{value:.6f}" if isinstance(value, float) else value for value in row]
            for row in rows
        )


##############################################################################
SWEEP_HEADER: Final = ("epsilon", "d_tsc", "d_ub", "d_lb", "gap_tsc_lb", "gap_ub_lb")
"""The columns of a tradeoff sweep."""


##############################################################################
def cmd_tradeoff(args: Namespace) -> int:
    """Sweep the three download costs over a uniform grid of epsilon."""
    if args.steps < 1:
        raise InvalidParameters(f"--steps must be >= 1 (got {args.steps})")
    if args.eps_max < args.eps_min:
        raise InvalidParameters("--eps-max must not be below --eps-min")
    params = _params(args)
    grid = np.linspace(
        _epsilon(args, args.eps_min), _epsilon(args, args.eps_max), args.steps
    )
    points = sweep(params, (float(epsilon) for epsilon in grid))
    rows = [
        (point.epsilon, point.d_tsc, point.d_ub, point.d_lb, point.gap_tsc_lb, point.gap_ub_lb)
        for point in points
    ]
    if args.format == "csv":
        _csv(args, SWEEP_HEADER, rows)
    else:
        _report(
            args,
            {"n": params.n_servers, "k": params.n_messages},
            {"points": [dict(zip(SWEEP_HEADER, row)) for row in rows]},
        )
    return EXIT_OK


##############################################################################
def cmd_exponent(args: Namespace) -> int:
    """Work out the leakage exponents needed for a download cost."""
    params = new_params(args.n, args.k)
    bounds = theorem1_bounds(params, args.d)
    _report(
        args,
        {"n": params.n_servers, "k": params.n_messages, "d": args.d},
        bounds._asdict()
        | {
            "tsc_upper_ok": bounds.tsc_upper_ok,
            "ub_upper_ok": bounds.ub_upper_ok,
            "ub_lower_ok": bounds.ub_lower_ok,
        },
    )
    return EXIT_OK


##############################################################################
def cmd_audit(args: Namespace) -> int:
    """Audit the leakage, cost and correctness of an allocation scheme."""
    params = _params(args)
    correctness = verify_correctness(params, args.scope, args.seed)
    full = expand_to_full(params, allocation_for(args.scheme, params))
    leakage = measure_leakage(params, full)
    passed = (
        leakage.empirical_epsilon <= params.epsilon + LEAKAGE_TOLERANCE and correctness.ok
    )
    _report(
        args,
        params.as_dict(),
        leakage.as_dict()
        | {
            "download_cost": exact_download_cost(params, full),
            "correct": correctness.ok,
            "cases": correctness.cases,
            "passed": passed,
        },
    )
    if not passed:
        LOG.error("Audit failed for %s", args.scheme)
    return EXIT_OK if passed else EXIT_FAILED


##############################################################################
def cmd_simulate(args: Namespace) -> int:
    """Estimate the download cost by simulating retrievals."""
    if args.trials < 1:
        raise InvalidParameters(f"--trials must be >= 1 (got {args.trials})")
    params = _params(args)
    estimate = monte_carlo_cost(
        params,
        allocation_for(args.scheme, params),
        args.message_index,
        args.trials,
        args.seed,
    )
    analytic = ANALYTIC_COSTS[args.scheme](params)
    z_score: Optional[float]
    if estimate.trials < 2:
        LOG.warning("A single trial has no standard error; not scoring it")
        z_score = None
    elif estimate.std_error > 0:
        z_score = (estimate.mean - analytic) / estimate.std_error
    else:
        z_score = 0.0 if math.isclose(estimate.mean, analytic, abs_tol=1e-12) else math.inf
    _report(
        args,
        params.as_dict(),
        estimate._asdict() | {"analytic": analytic, "z_score": z_score},
    )
    return EXIT_OK if z_score is None or abs(z_score) <= Z_LIMIT else EXIT_FAILED


##############################################################################
def cmd_verify(args: Namespace) -> int:
    """Check the optimal cost against the solver and the KKT certificate."""
    params = _params(args)
    closed_form = cost_tsc(params)
    try:
        p2_value, _ = solve_p2(params)
    except LPError as error:
        LOG.error("Reduced problem failed to solve: %s", error)
        return EXIT_FAILED
    certificate = kkt_certificate(params)
    results: dict[str, Any] = {
        "closed_form": closed_form,
        "p2_value": p2_value,
        "p1_value": None,
        "kkt_max_residual": certificate.max_residual,
        "kkt_ok": certificate.ok,
    }
    passed = abs(p2_value - closed_form) <= CLOSED_FORM_TOLERANCE and certificate.ok
    if not args.skip_p1:
        try:
            check = verify_prop1(params)
        except GuardExceeded as error:
            LOG.warning("Skipping the full problem: %s", error)
        except LPError as error:
            LOG.error("Full problem failed to solve: %s", error)
            passed = False
        else:
            results["p1_value"] = check.p1_value
            passed = passed and check.agree
    results["passed"] = passed
    _report(args, params.as_dict(), results)
    return EXIT_OK if passed else EXIT_FAILED


##############################################################################
def cmd_table(args: Namespace) -> int:
    """Print the symbolic code table for one message."""
    params = new_params(args.n, args.k)
    rows = code_table(params, args.message_index, args.scope)
    header = ["f", "pi"]
    for server in range(1, params.n_servers + 1):
        header.extend((f"q{server}", f"a{server}"))
    _csv(
        args,
        header,
        [
            [str(row.key.f), str(row.key.pi)]
            + [cell for pair in zip(row.queries, row.answers) for cell in pair]
            for row in rows
        ],
    )
    return EXIT_OK


##############################################################################
SCALING_HEADER: Final = (
    "k",
    "alpha",
    "d",
    "eps_tsc",
    "eps_ub",
    "tsc_upper",
    "ub_lower",
    "ub_upper",
)
"""The columns of an exponent scaling table."""


##############################################################################
def cmd_scaling(args: Namespace) -> int:
    """Follow the leakage exponents over a range of K at a fixed alpha."""
    if args.k_max < args.k_min:
        raise InvalidParameters("--k-max must not be below --k-min")
    _csv(
        args,
        SCALING_HEADER,
        [
            (
                n_messages,
                bounds.alpha,
                bounds.cost,
                bounds.eps_tsc,
                bounds.eps_ub,
                bounds.tsc_upper,
                bounds.ub_lower,
                bounds.ub_upper,
            )
            for n_messages, bounds in exponent_scaling(
                args.n, args.alpha, range(args.k_min, args.k_max + 1)
            )
        ],
    )
    return EXIT_OK


##############################################################################
def build_parser() -> ArgumentParser:
    """Build the command line parser.

    Returns:
        The parser.
    """
    parser = ArgumentParser(
        prog="lpir",
        description="Leaky private information retrieval with the permuted TSC code.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "-v",
        "--verbose",
        action="count",
        default=0,
        help="Log more detail to stderr (repeat for debug output)",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    def _command(name: str, handler: Callable[[Namespace], int], text: str) -> ArgumentParser:
        command = commands.add_parser(name, help=text, description=text)
        command.set_defaults(handler=handler)
        command.add_argument("--n", type=int, required=True, help="The number of servers")
        if name != "scaling":
            command.add_argument("--k", type=int, required=True, help="The number of messages")
        if name in ("tradeoff", "audit", "simulate", "verify"):
            command.add_argument(
                "--bits", action="store_true", help="Epsilon values are in bits, not nats"
            )
        if name in ("audit", "simulate", "verify"):
            command.add_argument("--eps", type=float, default=0.0, help="The leakage exponent")
        if name in ("tradeoff", "table", "scaling"):
            command.add_argument("--out", help="Write to this file rather than stdout")
        return command

    tradeoff = _command("tradeoff", cmd_tradeoff, "Sweep the download costs over epsilon")
    tradeoff.add_argument("--eps-min", type=float, default=0.0)
    tradeoff.add_argument("--eps-max", type=float, default=10.0)
    tradeoff.add_argument("--steps", type=int, default=101)
    tradeoff.add_argument("--format", choices=("csv", "json"), default="csv")

    exponent = _command("exponent", cmd_exponent, "Leakage exponents for a download cost")
    exponent.add_argument("--d", type=float, required=True, help="The download cost")

    audit = _command("audit", cmd_audit, "Audit an allocation scheme exhaustively")
    audit.add_argument("--scheme", choices=scheme_names(), default="tsc")
    audit.add_argument(
        "--scope",
        choices=[scope.value for scope in PermutationScope],
        default=PermutationScope.ALL.value,
        help="The permutations to check decoding over",
    )
    audit.add_argument("--seed", type=int, default=0, help="Seed for the message store")

    simulate = _command("simulate", cmd_simulate, "Estimate the download cost by simulation")
    simulate.add_argument("--scheme", choices=scheme_names(), default="tsc")
    simulate.add_argument("--trials", type=int, default=100_000)
    simulate.add_argument("--seed", type=int, default=0)
    simulate.add_argument("--message-index", type=int, default=1)

    verify = _command("verify", cmd_verify, "Check the optimum with the solver and KKT")
    verify.add_argument("--skip-p1", action="store_true", help="Don't solve the full problem")

    table = _command("table", cmd_table, "Print the symbolic code table")
    table.add_argument("--message-index", type=int, default=1)
    table.add_argument(
        "--scope",
        choices=[scope.value for scope in PermutationScope],
        default=PermutationScope.CYCLIC.value,
    )

    scaling = _command("scaling", cmd_scaling, "Exponents over K at a fixed alpha")
    scaling.add_argument("--alpha", type=float, required=True)
    scaling.add_argument("--k-min", type=int, default=3)
    scaling.add_argument("--k-max", type=int, default=64)

    return parser


##############################################################################
def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run the command line tool.

    Args:
        argv: The arguments, or ``None`` to use ``sys.argv``.

    Returns:
        The exit code.
    """
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exit_request:
        return EXIT_USAGE if exit_request.code else EXIT_OK
    logging.basicConfig(
        level=(logging.WARNING, logging.INFO, logging.DEBUG)[min(args.verbose, 2)],
        format="%(levelname)s:%(name)s:%(message)s",
        stream=sys.stderr,
    )
    try:
        return args.handler(args)
    except (InvalidParameters, GuardExceeded) as error:
        print(f"lpir {args.command}: error: {error}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as error:
        print(f"lpir {args.command}: error: {error}", file=sys.stderr)
        return EXIT_IO


### cli.py ends here
