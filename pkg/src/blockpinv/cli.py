"""Command-line driver: ``blockpinv <command> ...`` prints one JSON report.

Exit codes: 0 success, 1 input or validation error, 2 numerical failure
(loss of definiteness, conditioning, violated preconditions, rejected
candidate, or methods that disagree).
"""

from __future__ import annotations

import argparse
import itertools
import os
import sys
import time
import warnings
from dataclasses import asdict

import numpy as np

from . import __version__
from ._config import Tolerances
from .block1x2 import METHODS_1X2, wpinv_1x2_thm32, wpinv_1x2_unified
from .block2x2 import METHODS_2X2, Partition2x2, pinv_2x2_general, pinv_2x2_positive, pinv_2x2_special, wpinv_2x2
from .exceptions import NumericalError, PreconditionError, ValidationError
from .golden import GOLDEN_ATOL, compare_trace, example_partition
from .io import dumps, load_matrix, load_problem, matrix_to_json
from .linalg import as_weight, pinv, rel_diff
from .mp import is_13_inverse, verify_penrose, weighted_pinv_oracle
from .reweight import reweight_pinv

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    """Argument errors become validation errors (exit 1) instead of ``SystemExit(2)``."""

    def error(self, message):
        raise ValidationError(message, field="argv")


class _Failure(Exception):
    """A completed computation whose outcome is a numerical failure."""


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="blockpinv", description="Weighted Moore-Penrose inverses of block matrices.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--rank-rtol", type=float, help="relative singular-value cutoff")
    common.add_argument("--num-tol", type=float, help="bound on Penrose residuals")
    common.add_argument("--cmp-tol", type=float, help="bound on method-to-method differences")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    def add(name, help_, file=True):
        p = sub.add_parser(name, help=help_, parents=[common])
        if file:
            p.add_argument("file", help="problem file (JSON)")
        return p

    add("pinv", "unweighted Moore-Penrose inverse of the assembled matrix")
    add("wpinv", "weighted Moore-Penrose inverse by the reference oracle")
    p = add("wpinv-1x2", "weighted inverse of a 1x2 block row")
    p.add_argument("--method", choices=sorted(METHODS_1X2))
    p.add_argument("--n3", help="matrix file with the auxiliary weight for --method unified")
    p = add("wpinv-2x2", "(weighted) inverse of a 2x2 block matrix")
    p.add_argument("--method", choices=METHODS_2X2)
    p.add_argument("--trace", action="store_true", help="include every intermediate of the weighted pipeline")
    p = add("verify", "weighted Penrose residuals of a candidate inverse")
    p.add_argument("--candidate", required=True, help="matrix file or a previous report")
    add("compare", "run every applicable method and the oracle; report pairwise differences")
    add("example-sec5", "replay the built-in 4x4 worked example against its exact values", file=False)
    return parser


# ----------------------------------------------------------------------------
# helpers

def _tolerances(args, problem=None) -> Tolerances:
    tols = Tolerances.from_env(os.environ)
    if problem is not None:
        tols = problem.tolerances(tols)
    return tols.with_overrides(rank_rtol=args.rank_rtol, num_tol=args.num_tol, cmp_tol=args.cmp_tol)


def _residual_report(A, X, M, N, tols):
    res = verify_penrose(A, X, M, N, tols)
    return {**res.as_dict(), "max": res.max, "ok": res.ok(tols.num_tol)}


def _inputs(problem):
    return {name: matrix_to_json(name, value) for name, value in problem.matrices.items()}


def _method_of(args, problem, choices):
    method = args.method or problem.options.get("method")
    if method is None:
        raise ValidationError("--method is required (or options.method in the file)", field="method")
    if method not in choices:
        raise ValidationError(f"method {method!r} not in {', '.join(choices)}", field="method")
    return method


def _diff_entry(a, b, Xa, Xb):
    return {"a": a, "b": b, "max_abs_diff": float(np.max(np.abs(Xa - Xb))) if Xa.size else 0.0,
            "rel_fro_diff": rel_diff(Xa, Xb)}


# ----------------------------------------------------------------------------
# commands; each returns the report body

def _cmd_pinv(args, report):
    problem = load_problem(args.file)
    tols = _tolerances(args, problem)
    A, _, _ = problem.assembled()
    X = pinv(A, tols.rank_rtol)
    report.update(inputs=_inputs(problem), method={"name": "svd", "weights": "identity"},
                  result=matrix_to_json("X", X), residuals=_residual_report(A, X, None, None, tols))
    return tols


def _cmd_wpinv(args, report):
    problem = load_problem(args.file)
    tols = _tolerances(args, problem)
    A, M, N = problem.assembled()
    X = weighted_pinv_oracle(A, M, N, tols=tols)
    report.update(inputs=_inputs(problem), method={"name": "oracle"},
                  result=matrix_to_json("X", X), residuals=_residual_report(A, X, M, N, tols))
    return tols


def _cmd_wpinv_1x2(args, report):
    problem = load_problem(args.file)
    tols = _tolerances(args, problem)
    method = _method_of(args, problem, tuple(METHODS_1X2))
    part = problem.partition1x2(tols)
    report.update(inputs=_inputs(problem))
    meta = {"name": method}
    if method == "unified":
        N3 = problem.matrices.get("N3")
        if args.n3:
            _, N3 = load_matrix(args.n3)
        N3 = None if N3 is None else as_weight(N3, part.q, "N3", tols)
        meta["N3"] = "S(N)" if N3 is None else "given"
        X = wpinv_1x2_unified(part, N3).X
    else:
        if args.n3:
            raise ValidationError("--n3 applies to --method unified only", field="n3")
        X = METHODS_1X2[method](part).X
    if method == "thm32":
        AC = wpinv_1x2_thm32(part).X
        AC_op = np.hstack([part.A, part.C])
        meta["AC_pinv"] = matrix_to_json("(A,C)^dag", AC)
        meta["AC_residuals"] = _residual_report(AC_op, AC, part.M, part.N, tols)
    report.update(method=meta, result=matrix_to_json("X", X),
                  residuals=_residual_report(part.AB, X, part.M, part.N, tols))
    return tols


def _cmd_wpinv_2x2(args, report):
    problem = load_problem(args.file)
    tols = _tolerances(args, problem)
    method = _method_of(args, problem, METHODS_2X2)
    part = problem.partition2x2(tols)
    report.update(inputs=_inputs(problem))
    meta = {"name": method, "split": [part.k1, part.h1]}
    M = N = None
    if method == "weighted":
        X, trace = wpinv_2x2(part)
        M, N = part.Mw, part.Nw
        if args.trace:
            report["trace"] = {k: matrix_to_json(k, v) for k, v in trace.as_dict().items()}
    else:
        if part.weighted:
            raise ValidationError(f"method {method!r} computes the unweighted inverse; "
                                  "remove the weights or use --method weighted", field="method")
        if method == "special":
            X = pinv_2x2_special(part)
        elif method == "positive":
            X, X13 = pinv_2x2_positive(part)
            ok, (r1, r3) = is_13_inverse(part.A, X13, tols)
            meta["inv13"] = matrix_to_json("A^(1,3)", X13)
            meta["inv13_residuals"] = {"r1": r1, "r3": r3, "ok": ok}
        else:
            X = pinv_2x2_general(part)
    report.update(method=meta, result=matrix_to_json("X", X),
                  residuals=_residual_report(part.A, X, M, N, tols))
    return tols


def _cmd_verify(args, report):
    problem = load_problem(args.file)
    tols = _tolerances(args, problem)
    A, M, N = problem.assembled()
    name, X = load_matrix(args.candidate)
    if X.shape != A.shape[::-1]:
        raise ValidationError(f"candidate is {X.shape[0]}x{X.shape[1]}; expected "
                              f"{A.shape[1]}x{A.shape[0]}", field="candidate")
    residuals = _residual_report(A, X, M, N, tols)
    report.update(inputs=_inputs(problem), method={"name": "verify", "candidate": name},
                  result=matrix_to_json(name, X), residuals=residuals, accepted=residuals["ok"])
    if not residuals["ok"]:
        raise _Failure(f"candidate violates the Penrose equations (max residual {residuals['max']:.3e})")
    return tols


def _compare_runs(problem, tols):
    """``{target: {method: callable}}`` for every method applicable to the problem."""
    A, M, N = problem.assembled()
    weighted = M is not None or N is not None
    target = "A^dag_MN" if weighted else "A^dag"
    runs = {target: {"oracle": lambda: weighted_pinv_oracle(A, M, N, tols=tols)}}
    if not weighted:
        runs[target]["svd"] = lambda: pinv(A, tols.rank_rtol)
    if problem.kind == "weighted":
        runs[target]["reweight"] = lambda: reweight_pinv(A, M, None, N, tols=tols)
    elif problem.kind == "part1x2":
        part = problem.partition1x2(tols)
        for name, fn in METHODS_1X2.items():
            runs[target][name] = (lambda fn=fn: fn(part).X)
        runs[target]["unified[N3=I]"] = lambda: wpinv_1x2_unified(part, as_weight(None, part.q)).X
        if "N3" in problem.matrices:
            runs[target]["unified[N3]"] = lambda: wpinv_1x2_unified(part, problem.matrices["N3"]).X
    elif problem.kind == "part2x2":
        part = problem.partition2x2(tols)
        runs[target]["weighted"] = lambda: wpinv_2x2(part)[0]
        # the unweighted representations target A^dag, compared among themselves
        plain = Partition2x2(part.A11, part.A12, part.A21, part.A22, tols=tols)
        if weighted:
            runs["A^dag"] = {"svd": lambda: pinv(A, tols.rank_rtol)}
        group = runs["A^dag"] if weighted else runs[target]
        group["general"] = lambda: pinv_2x2_general(plain)
        group["special"] = lambda: pinv_2x2_special(plain)
        group["positive"] = lambda: pinv_2x2_positive(plain)[0]
    return runs


def _cmd_compare(args, report):
    problem = load_problem(args.file)
    tols = _tolerances(args, problem)
    report.update(inputs=_inputs(problem))
    groups, worst = {}, 0.0
    for target, methods in _compare_runs(problem, tols).items():
        results, skipped = {}, {}
        for name, fn in methods.items():
            try:
                results[name] = fn()
            except (ValidationError, PreconditionError) as exc:
                # a representation whose hypotheses the input does not meet
                skipped[name] = str(exc)
        pairs = [_diff_entry(a, b, results[a], results[b]) for a, b in itertools.combinations(results, 2)]
        group_max = max((d["rel_fro_diff"] for d in pairs), default=0.0)
        worst = max(worst, group_max)
        groups[target] = {
            "methods": list(results),
            "skipped": skipped,
            "results": {name: matrix_to_json(name, X) for name, X in results.items()},
            "pairwise": pairs,
            "max_rel_fro_diff": group_max,
        }
    agree = worst <= tols.cmp_tol
    report.update(method={"name": "compare"}, groups=groups, max_rel_fro_diff=worst, agree=agree)
    if not agree:
        raise _Failure(f"methods disagree (max relative difference {worst:.3e} > cmp_tol {tols.cmp_tol:g})")
    return tols


def _cmd_example(args, report):
    tols = _tolerances(args)
    part = example_partition(tols)
    X, trace = wpinv_2x2(part)
    checks = compare_trace(trace)
    report.update(
        inputs={name: matrix_to_json(name, v) for name, v in
                (("A11", part.A11), ("A12", part.A12), ("A21", part.A21), ("A22", part.A22),
                 ("M", part.Mw.value), ("N", part.Nw.value))},
        method={"name": "weighted", "golden_atol": GOLDEN_ATOL},
        result=matrix_to_json("A^dag_MN", X),
        residuals=_residual_report(part.A, X, part.Mw, part.Nw, tols),
        trace={k: matrix_to_json(k, v) for k, v in trace.as_dict().items()},
        golden={name: {"max_abs_err": err, "ok": ok} for name, (err, ok) in checks.items()},
    )
    failed = [name for name, (_, ok) in checks.items() if not ok]
    report["golden_ok"] = not failed
    if failed:
        raise _Failure(f"intermediates differ from the exact values: {', '.join(failed)}")
    return tols


COMMANDS = {
    "pinv": _cmd_pinv,
    "wpinv": _cmd_wpinv,
    "wpinv-1x2": _cmd_wpinv_1x2,
    "wpinv-2x2": _cmd_wpinv_2x2,
    "verify": _cmd_verify,
    "compare": _cmd_compare,
    "example-sec5": _cmd_example,
}


def _error(kind, exc, **extra):
    out = {"type": kind, "message": str(exc)}
    out.update({k: v for k, v in extra.items() if v is not None})
    return out


def run_command(argv=None, stdout=None) -> int:
    """Run one command, print its JSON report, and return the exit code."""
    stdout = sys.stdout if stdout is None else stdout
    argv = sys.argv[1:] if argv is None else list(argv)
    report: dict = {"command": None, "status": "ok"}
    start = time.perf_counter()
    code = EXIT_OK
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            args = build_parser().parse_args(argv)
            report["command"] = args.command
            tols = COMMANDS[args.command](args, report)
            report["tolerances"] = asdict(tols)
        except PreconditionError as exc:
            code = EXIT_NUMERIC
            report["error"] = _error("PreconditionError", exc, stage=exc.stage, residuals=exc.residuals)
        except NumericalError as exc:
            code = EXIT_NUMERIC
            report["error"] = _error("NumericalError", exc, stage=exc.stage)
        except _Failure as exc:
            code = EXIT_NUMERIC
            report["error"] = _error("Failure", exc)
        except ValidationError as exc:
            code = EXIT_INPUT
            report["error"] = _error("ValidationError", exc, field=exc.field)
        except ValueError as exc:
            # malformed tolerance flags or environment overrides
            code = EXIT_INPUT
            report["error"] = _error("ValidationError", exc)
    if caught:
        report["warnings"] = [str(w.message) for w in caught]
    report["status"] = "ok" if code == EXIT_OK else "error"
    report["exit_code"] = code
    report["timing"] = {"seconds": time.perf_counter() - start}
    stdout.write(dumps(report))
    if code != EXIT_OK:
        print(f"blockpinv: {report['error']['message']}", file=sys.stderr)
    return code


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()
