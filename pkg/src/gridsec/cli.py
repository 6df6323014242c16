"""Command-line front end and batch index computation.

Subcommands:

  solve      index of one meter (lp, milp, exhaustive, or bounds)
  attack     witness attack vector for one meter, as JSON
  verify-tu  test the flow constraint matrix for total unimodularity
  bench      all unprotected flow meters, optionally cross-checked
             between methods, emitted as CSV or JSON

Exit codes: 0 success, 1 usage, 2 parse or validation failure,
3 infeasible target, 4 internal mismatch (methods disagree or an exact
invariant broke).
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .errors import (
    GridsecError,
    InfeasibleIndex,
    IntegralityError,
    MethodUnavailable,
    ParseError,
)
from .grid import parse_case
from .oracle import exhaustive_min_support, milp_solve
from .security import reduce_to_tu, security_index, security_index_bounds
from .tumin import verify_tu

BATCH_METHODS = ("lp", "milp", "exhaustive")
CSV_HEADER = "meter,index,method,seconds"


@dataclass(frozen=True)
class MeterEntry:
    meter: int
    method: str
    index: int | None        # None marks an infeasible target
    seconds: float


@dataclass(frozen=True)
class BatchReport:
    case: str
    entries: tuple[MeterEntry, ...]
    mismatches: tuple[int, ...]   # meters whose methods disagree, ascending

    @property
    def totals(self) -> dict[str, float]:
        """Wall-clock seconds summed per method."""
        out: dict[str, float] = {}
        for e in self.entries:
            out[e.method] = out.get(e.method, 0.0) + e.seconds
        return out

    @property
    def sorted_indices(self) -> dict[str, tuple]:
        """Per method, the index multiset in ascending order (None last)."""
        out: dict[str, list] = {}
        for e in self.entries:
            out.setdefault(e.method, []).append(e.index)
        return {m: tuple(sorted(v, key=lambda x: (x is None, x if x is not None else 0)))
                for m, v in out.items()}

    def to_dict(self) -> dict:
        return {
            "case": self.case,
            "entries": [
                {"meter": e.meter, "method": e.method,
                 "index": e.index, "seconds": e.seconds}
                for e in self.entries
            ],
            "mismatches": list(self.mismatches),
            "totals": self.totals,
            "sorted_indices": {m: list(v) for m, v in self.sorted_indices.items()},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "BatchReport":
        entries = tuple(
            MeterEntry(int(e["meter"]), str(e["method"]),
                       None if e["index"] is None else int(e["index"]),
                       float(e["seconds"]))
            for e in data["entries"]
        )
        return cls(str(data["case"]), entries,
                   tuple(int(m) for m in data.get("mismatches", [])))


def _solve_one(case_path: str, method: str, k: int) -> MeterEntry:
    """One (meter, method) cell; runs in worker processes during batches."""
    net, meas = parse_case(case_path)
    t0 = time.perf_counter()
    try:
        if method == "lp":
            res = security_index(net, meas, k)
            return MeterEntry(k, method, res.index, res.solve_time)
        if method == "milp":
            res = milp_solve(net, meas, k)
            return MeterEntry(k, method, res.index, res.solve_time)
        if method == "exhaustive":
            prob = reduce_to_tu(net, meas, k)
            value = exhaustive_min_support(prob.A, prob.k, prob.I)
            return MeterEntry(k, method, value, time.perf_counter() - t0)
    except InfeasibleIndex:
        return MeterEntry(k, method, None, time.perf_counter() - t0)
    raise MethodUnavailable(f"{method!r} is not a batch method")


def run_batch(case_path, methods=("lp",), jobs: int | None = None) -> BatchReport:
    """Index of every unprotected flow meter, per method, cross-checked.

    jobs > 1 fans the (meter, method) grid over worker processes; the
    default is the machine's CPU count.  Meters where the methods give
    different answers land in `mismatches`.
    """
    case_path = str(case_path)
    methods = tuple(methods)
    for m in methods:
        if m not in BATCH_METHODS:
            raise MethodUnavailable(f"{m!r} is not a batch method")
    if not methods:
        raise MethodUnavailable("no methods requested")
    net, meas = parse_case(case_path)
    targets = [k for k in range(1, len(meas.flow_meters) + 1)
               if k not in meas.protected]
    tasks = [(case_path, method, k) for method in methods for k in targets]
    if jobs is None:
        jobs = os.cpu_count() or 1
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as pool:
            entries = list(pool.map(_solve_one, *zip(*tasks)))
    else:
        entries = [_solve_one(*t) for t in tasks]
    by_meter: dict[int, set] = {}
    for e in entries:
        by_meter.setdefault(e.meter, set()).add(e.index)
    mismatches = tuple(sorted(k for k, vals in by_meter.items() if len(vals) > 1))
    return BatchReport(case_path, tuple(entries), mismatches)


def emit(report: BatchReport, fmt: str = "csv") -> str:
    """Render a report; CSV rows are sorted by (method, index, meter)."""
    if fmt == "csv":
        rows = sorted(report.entries,
                      key=lambda e: (e.method, e.index is None,
                                     e.index if e.index is not None else 0, e.meter))
        lines = [CSV_HEADER]
        for e in rows:
            idx = "" if e.index is None else str(e.index)
            lines.append(f"{e.meter},{idx},{e.method},{e.seconds:.6f}")
        return "\n".join(lines) + "\n"
    if fmt == "json":
        return json.dumps(report.to_dict(), sort_keys=True, indent=2) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def load_report(source) -> BatchReport:
    """Read a JSON report back (path or open file)."""
    if hasattr(source, "read"):
        data = json.load(source)
    else:
        with open(source, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    return BatchReport.from_dict(data)


class _Parser(argparse.ArgumentParser):
    # usage problems exit 1; 2 is reserved for case parse/validation errors
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gridsec",
                     description="Exact security indices for DC state estimation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", parents=[], help="index of one meter")
    p.add_argument("case")
    p.add_argument("-k", "--meter", type=int, required=True)
    p.add_argument("--method", choices=("lp", "milp", "exhaustive", "bounds"),
                   default="lp")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("attack", help="witness attack vector as JSON")
    p.add_argument("case")
    p.add_argument("-k", "--meter", type=int, required=True)
    p.add_argument("--out", help="write JSON here instead of stdout")
    p.set_defaults(func=_cmd_attack)

    p = sub.add_parser("verify-tu", help="check flow rows for total unimodularity")
    p.add_argument("case")
    p.add_argument("--max-order", type=int, default=3)
    p.add_argument("--budget", type=int, default=200_000)
    p.set_defaults(func=_cmd_verify_tu)

    p = sub.add_parser("bench", help="index every unprotected flow meter")
    p.add_argument("case")
    p.add_argument("--methods", default="lp",
                   help="comma-separated subset of lp,milp,exhaustive")
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.set_defaults(func=_cmd_bench)
    return parser


def _cmd_solve(args) -> int:
    net, meas = parse_case(args.case)
    k = args.meter
    if args.method == "bounds":
        res = security_index_bounds(net, meas, k)
        lo, hi = res.bounds
        print(f"meter={k} bounds={lo},{hi} method=bounds "
              f"seconds={res.solve_time:.6f}")
        return 0
    if args.method == "lp":
        res = security_index(net, meas, k)
        value = res.index
        seconds = res.solve_time
    elif args.method == "milp":
        res = milp_solve(net, meas, k)
        value = res.index
        seconds = res.solve_time
    else:
        t0 = time.perf_counter()
        prob = reduce_to_tu(net, meas, k)
        value = exhaustive_min_support(prob.A, prob.k, prob.I)
        seconds = time.perf_counter() - t0
        if value is None:
            raise InfeasibleIndex(k)
    print(f"meter={k} index={value} method={args.method} seconds={seconds:.6f}")
    return 0


def _cmd_attack(args) -> int:
    net, meas = parse_case(args.case)
    if meas.injection_meters:
        res = security_index_bounds(net, meas, args.meter)
    else:
        res = security_index(net, meas, args.meter)
    atk = res.attack
    payload = {
        "meter": args.meter,
        "delta_theta": [float(v) for v in atk.delta_theta],
        "delta_z": [float(v) for v in atk.delta_z],
        "touched": sorted(atk.touched),
    }
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_verify_tu(args) -> int:
    net, meas = parse_case(args.case)
    if meas.injection_meters:
        raise MethodUnavailable("total unimodularity applies to the flow rows only")
    from .grid import incidence

    _, B = incidence(net)
    A = B.T[[lid - 1 for lid in meas.flow_meters], :]
    order = max(1, min(args.max_order, min(A.shape)))
    ok = verify_tu(A, order, budget=args.budget)
    print(f"totally-unimodular<=order-{order}: {'yes' if ok else 'no'}")
    return 0


def _cmd_bench(args) -> int:
    methods = tuple(m.strip() for m in args.methods.split(",") if m.strip())
    report = run_batch(args.case, methods, jobs=args.jobs)
    text = emit(report, args.format)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if report.mismatches:
        print(f"mismatch on meters: {','.join(map(str, report.mismatches))}",
              file=sys.stderr)
        return 4
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InfeasibleIndex as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 3
    except (IntegralityError, AssertionError) as exc:
        print(f"internal mismatch: {exc}", file=sys.stderr)
        return 4
    except GridsecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
