"""Command-line front end.

``pid-maxent run FILE`` decomposes a distribution file (``-`` reads stdin)
and prints the result as JSON on stdout. ``gate`` and ``random`` write test
distributions in either file format, so the two can be piped together::

    pid-maxent gate copy --sizes 3,3,3 | pid-maxent run -

Exit codes: 0 when every program ends Optimal or Inaccurate (or the repair
recovers the values), 1 for bad input or flags, 2 when a solve fails.
Diagnostics go to stderr so stdout stays pure JSON.
"""
from __future__ import annotations

import argparse
import contextlib
import json
import sys

from . import distributions as D
from .errors import InfeasibleSpec, InputError, PidError, SolverFailed
from .finer import fine_decompose
from .pipeline import pid, run_modes
from .solver import Tolerances

__all__ = ["main", "build_parser", "TOLERANCE_FLAGS"]

TOLERANCE_FLAGS = ("feastol", "abstol", "reltol", "feastol_inacc", "abstol_inacc",
                   "reltol_inacc", "max_iter")


class _Parser(argparse.ArgumentParser):
    # usage errors are input errors: exit 1, keeping 2 for solver failures
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _sizes(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(s) for s in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pid-maxent", description="Maximum-entropy partial information decomposition.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="decompose a distribution file")
    run.add_argument("input", help="distribution file, or - for stdin")
    run.add_argument("--format", choices=("tsv", "json"), default=None,
                     help="input format (default: sniffed from the content)")
    run.add_argument("--parallel", action="store_true", help="solve the programs concurrently")
    run.add_argument("--output-level", type=int, default=0, choices=range(4), metavar="{0,1,2,3}",
                     help="diagnostics written to stderr: 0 none, 1 stats, 2 timings, 3 iterations")
    run.add_argument("--fine", action="store_true", help="also recover all eighteen lattice atoms")
    for name in TOLERANCE_FLAGS:
        run.add_argument(f"--{name}", type=int if name == "max_iter" else float, default=None,
                         help=f"solver tolerance (default {getattr(Tolerances(), name)})")

    g = sub.add_parser("gate", help="write a named test distribution")
    g.add_argument("name", help="xor-duplicate, xor-loses, xor-multicoal, and-duplicate or copy")
    g.add_argument("--sizes", type=_sizes, default=None, help="copy gate alphabet sizes, e.g. 3,3,3")
    g.add_argument("--format", choices=("tsv", "json"), default="tsv")

    r = sub.add_parser("random", help="write a distribution drawn uniformly from the simplex")
    r.add_argument("--sizes", type=_sizes, default=(2, 2, 2, 2), help="alphabet sizes, target first")
    r.add_argument("--seed", type=int, default=None)
    r.add_argument("--format", choices=("tsv", "json"), default="tsv")
    return parser


def _emit(dist, fmt, out):
    out.write(D.to_json(dist) if fmt == "json" else D.to_tsv(dist))


def _read_input(path: str, fmt) -> D.JointDistribution:
    if path == "-":
        text = sys.stdin.read()
    else:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise InputError(f"cannot read {path}: {exc.strerror}") from None
    return D.read_distribution(text, fmt)


def _run(args, out, err) -> int:
    tol = Tolerances().updated(**{k: getattr(args, k) for k in TOLERANCE_FLAGS})
    dist = _read_input(args.input, args.format)
    atoms = None
    if args.fine:
        fine = fine_decompose(dist, tol, parallel=args.parallel)
        result, atoms = fine.pid, fine.as_dict()
    else:
        result = pid(dist, tol, parallel=args.parallel)
    payload = result.as_dict()
    if atoms is not None:
        payload["atoms"] = atoms
    out.write(json.dumps(payload, indent=2) + "\n")
    if result.repaired:
        err.write("warning: a solve failed; values were repaired to satisfy the sum identities\n")
    if args.output_level:
        err.write(run_modes(result, args.output_level) + "\n")
    return 0


def main(argv=None, *, stdout=None, stderr=None) -> int:
    """Entry point; returns the process exit code."""
    out = stdout or sys.stdout
    err = stderr or sys.stderr
    parser = build_parser()
    try:
        # usage errors and --help go to the caller's streams
        with contextlib.redirect_stderr(err), contextlib.redirect_stdout(out):
            args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "run":
            return _run(args, out, err)
        if args.command == "gate":
            params = {"sizes": args.sizes} if args.sizes is not None else {}
            _emit(D.gate(args.name, **params), args.format, out)
        else:
            _emit(D.random_simplex(args.sizes, args.seed), args.format, out)
        return 0
    except SolverFailed as exc:
        err.write(f"{exc}\n")
        return 2
    except (InputError, InfeasibleSpec) as exc:
        err.write(f"{exc}\n")
        return 1
    except PidError as exc:
        err.write(f"{exc}\n")
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
