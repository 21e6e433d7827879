"""Command-line interface: solve, drift, sweep, bench and list."""

from __future__ import annotations

import argparse
import inspect
import sys
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .benchmarks import get_case, length_parameter, run_all
from .discretize import CHEBYSHEV, SINC, DiscretizationPlan, resolve_plan
from .eigen import relative_drift, solve, sweep
from .errors import InvalidArgument, NotApplicableError, NotFound, SLError
from .problems import FACTORIES, bessel_generalized, get_problem
from .report import RunRecord, emit_decay_csv, record_from_spectrum, write_decay_csv

EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2
METHODS = {"cheb": CHEBYSHEV, "sinc": SINC}


class UsageError(Exception):
    pass


def _floats(text: str, count: int, what: str):
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"{what} must be {count} comma-separated numbers, got {text!r}") from None
    if len(vals) != count:
        raise UsageError(f"{what} must be {count} comma-separated numbers, got {text!r}")
    return vals


def _default_plan(name: str, method: str) -> DiscretizationPlan:
    for run in get_case(name).runs:
        if run.plan.method == method:
            return run.plan
    return DiscretizationPlan(method=method, n=128, h=0.1 if method == SINC else None)


def _build_plan(name: str, args) -> DiscretizationPlan:
    method = METHODS[args.method]
    base = _default_plan(name, method)
    domain = tuple(_floats(args.domain, 2, "--domain")) if getattr(args, "domain", None) else base.domain
    h = args.h if args.h is not None else base.h
    if method == CHEBYSHEV and args.h is not None:
        raise UsageError("--h only applies to --method sinc")
    return DiscretizationPlan(method=method, n=args.n or base.n, h=h, domain=domain,
                              bc_strategy_left=base.bc_strategy_left, bc_strategy_right=base.bc_strategy_right)


def _problem_params(name: str, args) -> dict:
    params = dict(get_case(name).params)
    if getattr(args, "eps", None) is not None:
        if "eps" not in inspect.signature(FACTORIES[name]).parameters:
            raise UsageError(f"problem {name} has no eps parameter")
        params["eps"] = args.eps
    return params


def _emit(text: str, out: Optional[str]):
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def cmd_solve(args) -> int:
    params = _problem_params(args.problem, args)
    problem = get_problem(args.problem, **params)
    plan = _build_plan(args.problem, args)
    spectrum = solve(problem, plan, count=args.count)
    record = record_from_spectrum(problem.name, resolve_plan(problem, plan).as_dict(), spectrum, params)
    if args.format == "csv":
        if args.out:
            emit_decay_csv(record, args.out)
        else:
            write_decay_csv(record, sys.stdout)
    else:
        _emit(record.to_json(), args.out)
    return EXIT_OK


def cmd_drift(args) -> int:
    name = args.problem
    v1, v2 = _floats(args.values, 2, "--values")
    params = dict(get_case(name).params)
    plan = _default_plan(name, CHEBYSHEV)
    spectra = []
    for v in (v1, v2):
        if args.alpha == "n":
            if v != int(v):
                raise UsageError("--alpha n needs integer values")
            spectra.append(solve(get_problem(name, **params), DiscretizationPlan(n=int(v), domain=plan.domain),
                                 count=args.count))
        else:
            key = length_parameter(name)
            spectra.append(solve(get_problem(name, **{**params, key: v}), DiscretizationPlan(n=args.n or plan.n),
                                 count=args.count))
    report = relative_drift(spectra[0], spectra[1], args.alpha, v1, v2, args.threshold)
    record = RunRecord(problem=name, plan=plan.as_dict(), drift=report.as_dict(), params=params)
    _emit(record.to_json(), args.out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    if args.problem != "bessel_generalized":
        raise UsageError("sweep is only defined for bessel_generalized")
    start, stop, steps = _floats(args.tau_grid, 3, "--tau-grid")
    if steps != int(steps) or steps < 2:
        raise UsageError("--tau-grid STEPS must be an integer >= 2")
    taus = np.linspace(start, stop, int(steps))
    nu = args.nu
    plan = DiscretizationPlan(n=args.n)
    result = sweep(lambda t: bessel_generalized(t, nu), taus, plan, args.count, max_workers=args.workers)
    record = RunRecord(problem=args.problem, plan=plan.as_dict(), sweep=result.as_dict(), params={"nu": nu})
    _emit(record.to_json(), args.out)
    return EXIT_OK if not result.failures else EXIT_FAILURE


def cmd_bench(args) -> int:
    cards = run_all(args.filter, max_workers=args.workers)
    for card in cards:
        status = "PASS" if card.passed else "FAIL"
        print(f"{status} {card.name} max_err={card.max_error():.3g} time={card.wall_time:.2f}s", file=sys.stderr)
    record = RunRecord(problem="*", bench=[c.as_dict() for c in cards], params={"filter": args.filter})
    _emit(record.to_json(), args.out)
    return EXIT_OK if cards and all(c.passed for c in cards) else EXIT_FAILURE


def cmd_list(args) -> int:
    for name in FACTORIES:
        print(name)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="slcolloc", description="Spectral collocation for singular Sturm-Liouville problems")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="compute eigenvalues of a built-in problem")
    p.add_argument("problem", choices=list(FACTORIES))
    p.add_argument("--method", choices=list(METHODS), default="cheb")
    p.add_argument("--n", type=int, help="number of collocation nodes")
    p.add_argument("--h", type=float, help="sinc step size")
    p.add_argument("--eps", type=float, help="problem regularization/truncation parameter")
    p.add_argument("--domain", help="computational interval A,B")
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--out")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("drift", help="relative drift between two resolutions or truncations")
    p.add_argument("problem", choices=list(FACTORIES))
    p.add_argument("--alpha", choices=("n", "length"), required=True)
    p.add_argument("--values", required=True, help="V1,V2")
    p.add_argument("--threshold", type=float, default=1e-10)
    p.add_argument("--count", type=int, default=32)
    p.add_argument("--n", type=int, help="resolution when varying the length")
    p.add_argument("--out")
    p.set_defaults(func=cmd_drift)

    p = sub.add_parser("sweep", help="track eigenvalues over the singular point location")
    p.add_argument("problem", choices=["bessel_generalized"])
    p.add_argument("--tau-grid", required=True, help="START,STOP,STEPS")
    p.add_argument("--nu", type=float, default=1.0 / 3.0)
    p.add_argument("--n", type=int, default=512)
    p.add_argument("--count", type=int, default=4)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("bench", help="score the reference benchmarks")
    p.add_argument("--filter", help="only problems carrying this tag")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("list", help="list built-in problems")
    p.set_defaults(func=cmd_list)
    return parser


LIST_OPTIONS = ("--tau-grid", "--domain", "--values")


def _glue_lists(argv):
    """Attach comma-separated values that start with '-' to their option (argparse reads them as flags)."""
    out, it = [], iter(argv)
    for tok in it:
        if tok in LIST_OPTIONS:
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parser.parse_args(_glue_lists(argv))
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, InvalidArgument, NotFound, NotApplicableError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SLError, OSError, np.linalg.LinAlgError) as exc:
        print(f"failure: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
