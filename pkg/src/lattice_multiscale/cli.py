"""
Command-line interface for lattice-multiscale

Subcommands:
    reduce     run the multiscale reduction of a model
    verdict    reduce and run the compatibility chain
    dim        dimension of a graded space P_n^(r)
    basis      monomial basis of P_n^(r)
    flows      render a hierarchy flow K_j
    selfcheck  run the exact oracle suite

Exit codes: 0 success / consistent, 1 obstructed or failed self-check,
2 engine error, 64 invalid arguments. Reports go to stdout, logs to stderr.
"""

import argparse
import json
import logging
import sys
import time
from typing import List, Optional

from .config import get_settings
from .errors import EngineError, ParseError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_OBSTRUCTED = 1
EXIT_ENGINE_ERROR = 2
EXIT_USAGE = 64

MODELS = ("dnls", "al")
ORDERS = (5, 7, 9)


class CliParser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors exit with code 64."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _sign(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected +1 or -1, got {text!r}") from None
    if value not in (1, -1):
        raise argparse.ArgumentTypeError(f"expected +1 or -1, got {text!r}")
    return value


def _positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return value


def build_parser() -> CliParser:
    parser = CliParser(
        prog="lattice-multiscale",
        description="Exact multiscale reduction of lattice NLS models and integrability tests",
    )
    parser.add_argument(
        "--log-level",
        default=None,
        help="Logging level on stderr (default: settings, WARNING)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    model_flags = CliParser(add_help=False)
    model_flags.add_argument("--model", choices=MODELS, default="dnls", type=str.lower)
    model_flags.add_argument(
        "--c-sign", type=_sign, default=1, help="Branch of the speed (+1 or -1)"
    )
    model_flags.add_argument("--sigma", type=_sign, default=1, help="Sign of the nonlinearity")

    reduce_cmd = sub.add_parser("reduce", parents=[model_flags], help="Run the reduction")
    reduce_cmd.add_argument("--order", type=int, choices=ORDERS, default=None)
    reduce_cmd.add_argument("--format", choices=("text", "json"), default="text")

    verdict_cmd = sub.add_parser("verdict", parents=[model_flags], help="Integrability verdict")
    verdict_cmd.add_argument("--order", type=int, choices=ORDERS, default=None)
    verdict_cmd.add_argument("--format", choices=("text", "json"), default="json")
    verdict_cmd.add_argument(
        "--include-linear",
        action="store_true",
        help="Let the f^(t3)/g^(t3) ansatz use linear monomials",
    )

    for name, helptext in (("dim", "Dimension of P_n^(r)"), ("basis", "Basis of P_n^(r)")):
        cmd = sub.add_parser(name, help=helptext)
        cmd.add_argument("--n", type=_positive, required=True)
        cmd.add_argument("--r", type=_positive, default=1)
        cmd.add_argument("--nonlinear", action="store_true", help="Total exponent >= 2 only")
        cmd.add_argument("--format", choices=("text", "json"), default="text")

    flows_cmd = sub.add_parser("flows", parents=[model_flags], help="Render a hierarchy flow")
    flows_cmd.add_argument("--j", type=int, choices=(2, 3, 4), required=True)
    flows_cmd.add_argument("--a", default=None, help="Dispersion coefficient, e.g. '(3-h^2)/24'")
    flows_cmd.add_argument("--gamma", default=None, help="Nonlinear coefficient (default -3/4)")
    flows_cmd.add_argument("--b", default=None, help="Multiplier b_j (default 1, b_2 = a)")
    flows_cmd.add_argument("--format", choices=("text", "json"), default="text")

    check_cmd = sub.add_parser("selfcheck", help="Run the exact oracle suite")
    check_cmd.add_argument("--seed", type=int, default=None)
    check_cmd.add_argument("--trials", type=_positive, default=None)
    check_cmd.add_argument("--format", choices=("text", "json"), default="text")
    return parser


def _emit(text: str) -> None:
    sys.stdout.write(text.rstrip("\n") + "\n")
    sys.stdout.flush()


def _params(args):
    from .coeff import SignParams

    return SignParams(sigma=args.sigma, c_sign=args.c_sign)


def cmd_reduce(args) -> int:
    from .pipeline import reduce
    from .report import build_report, render_text, to_json

    order = args.order or get_settings().default_order
    rs = reduce(args.model, order, _params(args))
    if args.format == "json":
        _emit(to_json(build_report(rs)))
    else:
        _emit(render_text(rs))
    return EXIT_OK


def cmd_verdict(args) -> int:
    from .compat import Verdict, verdict
    from .report import build_report, render_text, to_json

    order = args.order or get_settings().default_order
    result = verdict(args.model, order, _params(args), include_linear=args.include_linear)
    if args.format == "json":
        _emit(to_json(build_report(result.reduced, result)))
    else:
        _emit(render_text(result.reduced, result))
    return EXIT_OBSTRUCTED if result.verdict == Verdict.OBSTRUCTED else EXIT_OK


def cmd_dim(args) -> int:
    from .graded import dim

    value = dim(args.n, args.r, args.nonlinear)
    if args.format == "json":
        _emit(json.dumps({"n": args.n, "r": args.r, "nonlinear": args.nonlinear, "dim": value}))
    else:
        _emit(str(value))
    return EXIT_OK


def cmd_basis(args) -> int:
    from .graded import basis

    labels = list(basis(args.n, args.r, args.nonlinear).labels())
    if args.format == "json":
        _emit(json.dumps({"n": args.n, "r": args.r, "nonlinear": args.nonlinear, "basis": labels}))
    else:
        _emit("\n".join(labels))
    return EXIT_OK


def cmd_flows(args) -> int:
    from . import coeff, kdv

    if args.a is not None:
        a = coeff.parse(args.a)
        gamma = coeff.parse(args.gamma) if args.gamma is not None else kdv.DEFAULT_GAMMA
        b = coeff.parse(args.b) if args.b is not None else (a if args.j == 2 else coeff.ONE)
        value = kdv.flow(args.j, b, a, gamma)
    else:
        from .pipeline import reduce

        rs = reduce(args.model, 2 * args.j + 1, _params(args))
        value = rs.flow(args.j)
    if args.format == "json":
        _emit(json.dumps({"j": args.j, "flow": value.render()}))
    else:
        _emit(f"K_{args.j} = {value.render()}")
    return EXIT_OK


def cmd_selfcheck(args) -> int:
    from .oracle import run_selfcheck

    result = run_selfcheck(seed=args.seed, trials=args.trials)
    if args.format == "json":
        payload = {
            "seed": result.seed,
            "trials": result.trials,
            "passed": result.passed,
            "checks": {name: ok for name, ok in result.checks},
        }
        _emit(json.dumps(payload, indent=2))
    else:
        lines = [f"{'ok  ' if ok else 'FAIL'} {name}" for name, ok in result.checks]
        lines.append(f"seed {result.seed}: {'all checks passed' if result.passed else 'FAILED'}")
        _emit("\n".join(lines))
    return EXIT_OK if result.passed else EXIT_OBSTRUCTED


COMMANDS = {
    "reduce": cmd_reduce,
    "verdict": cmd_verdict,
    "dim": cmd_dim,
    "basis": cmd_basis,
    "flows": cmd_flows,
    "selfcheck": cmd_selfcheck,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Entry point of the lattice-multiscale command."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE

    level = (args.log_level or get_settings().log_level).upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
    )

    start = time.perf_counter()
    try:
        code = COMMANDS[args.command](args)
    except ParseError as e:
        logger.error(f"{args.command}: {e}")
        return EXIT_USAGE
    except EngineError as e:
        logger.error(f"{args.command} failed: {type(e).__name__}: {e}", exc_info=True)
        return EXIT_ENGINE_ERROR
    except ValueError as e:
        logger.error(f"{args.command}: invalid input: {e}")
        return EXIT_USAGE
    logger.info(f"{args.command} finished in {time.perf_counter() - start:.2f}s (exit {code})")
    return code


if __name__ == "__main__":
    sys.exit(main())
