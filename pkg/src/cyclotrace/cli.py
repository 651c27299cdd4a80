"""Command-line surface: trace, verify, table, selftest.

Exit codes are the machine contract: 0 ok, 1 mismatch, 2 hypothesis
violated, 3 invalid input, 4 no convergence.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

from .arith import is_square
from .bqf import hypothesis_check
from .errors import (
    CyclotraceError,
    HypothesisViolated,
    NoConvergence,
    SquareDiscriminant,
    UnsupportedK,
)
from .special_forms import rhs_trace
from .analytic import TraceReport, lhs_geodesic, lhs_latticesum

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_HYPOTHESIS = 2
EXIT_INPUT = 3
EXIT_NO_CONVERGENCE = 4

CSV_HEADER = "k,D,d,method,value,error_estimate,hypothesis_ok,seconds"


@dataclass
class RunConfig:
    k: int
    d: int = -4
    D: int | None = None
    Dmax: int | None = None
    methods: tuple[str, ...] = ("exact",)
    tol: float = 1e-6
    out: str | None = None
    as_json: bool = False
    threads: int | None = None

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("k must be >= 2")
        if self.d >= 0 or self.d % 4 not in (0, 1):
            raise ValueError("d must be a negative discriminant")

    @property
    def thread_count(self) -> int:
        if self.threads:
            return self.threads
        env = os.environ.get("CYCLOTRACE_THREADS")
        if env:
            return max(1, int(env))
        return os.cpu_count() or 1


def _check_D(D: int) -> None:
    if D <= 0 or D % 4 not in (0, 1) or is_square(D):
        raise ValueError(f"D = {D} must be a positive non-square discriminant")


def _applicable(methods: tuple[str, ...], k: int, d: int) -> list[str]:
    out = []
    for m in methods:
        if m == "exact" and (k not in (2, 4) or d != -4):
            continue
        out.append(m)
    return out


def compute_trace(method: str, k: int, D: int, d: int, tol: float) -> TraceReport:
    if method == "exact":
        if k not in (2, 4) or d != -4:
            raise ValueError("exact method requires k in {2, 4} and d = -4")
        t0 = time.time()
        value = rhs_trace(k, D)
        return TraceReport(
            k=k, D=D, d=d, method="exact", value=value, error_estimate=0.0,
            hypothesis_ok=True, seconds=time.time() - t0,
        )
    if method == "geodesic":
        return lhs_geodesic(k, D, d, tol=tol)
    if method == "latticesum":
        return lhs_latticesum(k, D, d, tol=tol)
    raise ValueError(f"unknown method {method}")


def _fmt_value(v) -> str:
    if isinstance(v, Fraction):
        return str(v)
    return "%.12e" % float(v)


def _row_fields(r: TraceReport) -> dict:
    return {
        "k": str(r.k),
        "D": str(r.D),
        "d": str(r.d),
        "method": r.method,
        "value": _fmt_value(r.value) if r.value is not None else "",
        "error_estimate": "%.12e" % r.error_estimate if r.value is not None else "",
        "hypothesis_ok": "true" if r.hypothesis_ok else "false",
        "seconds": "%.12e" % r.seconds,
    }


def cmd_trace(cfg: RunConfig) -> int:
    _check_D(cfg.D)
    method = cfg.methods[0]
    report = compute_trace(method, cfg.k, cfg.D, cfg.d, cfg.tol)
    print(_fmt_value(report.value) if method == "exact" else "%.12e" % report.value)
    print(
        f"method={report.method} error_estimate={report.error_estimate:.3e} "
        f"hypothesis_ok={'true' if report.hypothesis_ok else 'false'} "
        f"seconds={report.seconds:.3f}"
    )
    return EXIT_OK


# the numeric methods cannot usefully be driven below these relative
# computation targets; the comparison bound still follows the requested
# tolerance, so an unreachable request reports a mismatch rather than
# grinding forever
_COMPUTE_FLOOR = {"geodesic": 2e-7, "latticesum": 5e-6}


def cmd_verify(cfg: RunConfig) -> int:
    _check_D(cfg.D)
    methods = _applicable(("exact", "geodesic", "latticesum"), cfg.k, cfg.d)
    reports = []
    scale = 1.0
    for m in methods:
        tol_m = max(cfg.tol, _COMPUTE_FLOOR.get(m, 0.0)) * scale / 2
        r = compute_trace(m, cfg.k, cfg.D, cfg.d, tol_m)
        reports.append(r)
        scale = max(scale, 1.0 + abs(float(r.value)))
    print(f"k={cfg.k} D={cfg.D} d={cfg.d}")
    for r in reports:
        print(f"  {r.method:<10} {_fmt_value(r.value):>24}  (err {r.error_estimate:.2e}, {r.seconds:.2f}s)")
    ok = True
    for i in range(len(reports)):
        for j in range(i + 1, len(reports)):
            a, b = float(reports[i].value), float(reports[j].value)
            delta = abs(a - b)
            bound = cfg.tol * (1.0 + max(abs(a), abs(b)))
            state = "ok" if delta <= bound else "MISMATCH"
            print(
                f"  |{reports[i].method} - {reports[j].method}| = {delta:.3e} "
                f"(tolerance {bound:.3e}) {state}"
            )
            ok = ok and delta <= bound
    return EXIT_OK if ok else EXIT_MISMATCH


def _admissible_range(dmin: int, dmax: int) -> list[int]:
    return [
        D
        for D in range(dmin, dmax + 1)
        if D % 4 in (0, 1) and not is_square(D)
    ]


def cmd_table(cfg: RunConfig) -> int:
    if cfg.Dmax is None:
        raise ValueError("table needs --Dmax")
    methods = _applicable(cfg.methods, cfg.k, cfg.d)
    if not methods:
        raise ValueError("no applicable method (exact needs even k and d = -4)")
    Ds = _admissible_range(5, cfg.Dmax)
    jobs = [(D, m) for D in Ds for m in methods]

    def run(job):
        D, m = job
        t0 = time.time()
        if not hypothesis_check(D, cfg.d):
            return TraceReport(
                k=cfg.k, D=D, d=cfg.d, method=m, value=None, error_estimate=0.0,
                hypothesis_ok=False, seconds=time.time() - t0,
            )
        return compute_trace(m, cfg.k, D, cfg.d, cfg.tol)

    if cfg.thread_count > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=cfg.thread_count) as pool:
            reports = list(pool.map(run, jobs))
    else:
        reports = [run(j) for j in jobs]

    rows = [_row_fields(r) for r in reports]
    if cfg.as_json:
        payload = json.dumps(rows, indent=2)
    else:
        lines = [CSV_HEADER]
        for row in rows:
            lines.append(",".join(row[col] for col in CSV_HEADER.split(",")))
        payload = "\n".join(lines) + "\n"
    if cfg.out:
        try:
            with open(cfg.out, "w") as fh:
                fh.write(payload)
        except OSError as e:
            print(f"cannot write {cfg.out}: {e}", file=sys.stderr)
            return EXIT_INPUT
    else:
        sys.stdout.write(payload)
    return EXIT_OK


def cmd_selftest(cfg: RunConfig) -> int:
    from . import selftest

    passed, failed = selftest.run()
    print(f"selftest: {passed} passed, {failed} failed")
    return EXIT_OK if failed == 0 else EXIT_MISMATCH


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="cyclotrace",
        description=(
            "Traces of geodesic cycle integrals of meromorphic modular forms, "
            "computed exactly and by two independent numerical methods."
        ),
    )
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, need_D=True):
        sp.add_argument("--k", type=int, required=True, help="weight parameter, k >= 2")
        if need_D:
            sp.add_argument("--D", type=int, required=True,
                            help="positive non-square discriminant")
        sp.add_argument("--d", type=int, default=-4,
                        help="negative discriminant of the CM class (default -4)")
        sp.add_argument("--tol", type=float, default=1e-6, help="tolerance")
        sp.add_argument("--threads", type=int, default=None,
                        help="worker threads (default: CYCLOTRACE_THREADS or all cores)")

    sp = sub.add_parser("trace", help="compute one trace by one method")
    common(sp)
    sp.add_argument("--method", default="exact",
                    choices=("exact", "geodesic", "latticesum"))

    sp = sub.add_parser("verify", help="run all applicable methods and compare")
    common(sp)

    sp = sub.add_parser("table", help="batch traces over a discriminant range")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--Dmax", type=int, required=True)
    sp.add_argument("--d", type=int, default=-4)
    sp.add_argument("--tol", type=float, default=1e-6)
    sp.add_argument("--threads", type=int, default=None)
    sp.add_argument("--method", default="exact",
                    choices=("exact", "geodesic", "latticesum", "all"))
    sp.add_argument("--out", default=None, help="output path (default stdout)")
    sp.add_argument("--json", action="store_true", help="emit JSON instead of CSV")

    sp = sub.add_parser("selftest", help="run the built-in invariant suite")
    sp.add_argument("--k", type=int, default=2)
    sp.add_argument("--tol", type=float, default=1e-6)

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "trace":
            cfg = RunConfig(k=args.k, d=args.d, D=args.D, methods=(args.method,),
                            tol=args.tol, threads=args.threads)
            return cmd_trace(cfg)
        if args.command == "verify":
            cfg = RunConfig(k=args.k, d=args.d, D=args.D, tol=args.tol,
                            threads=args.threads)
            return cmd_verify(cfg)
        if args.command == "table":
            methods = ("exact", "geodesic", "latticesum") if args.method == "all" else (args.method,)
            cfg = RunConfig(k=args.k, d=args.d, Dmax=args.Dmax, methods=methods,
                            tol=args.tol, out=args.out, as_json=args.json,
                            threads=args.threads)
            return cmd_table(cfg)
        if args.command == "selftest":
            return cmd_selftest(RunConfig(k=args.k, tol=args.tol))
        return EXIT_INPUT
    except HypothesisViolated as e:
        print(f"hypothesis violated: {e}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except NoConvergence as e:
        print(f"no convergence: {e}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    except (ValueError, SquareDiscriminant, UnsupportedK) as e:
        print(f"invalid input: {e}", file=sys.stderr)
        return EXIT_INPUT
    except CyclotraceError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
