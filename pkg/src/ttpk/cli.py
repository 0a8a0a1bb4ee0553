"""Command line: build schedules with several methods, validate, bound and report."""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .bounds import compute_bounds
from .canonical import build_hamiltonian_schedule, lift_core_cycle
from .errors import InstanceError, TTPError
from .graphalg import christofides_cycle, graph_of, matching_based_cycle, min_weight_perfect_matching
from .instance import read_instance
from .packing import PackingOptions, build_packing_schedule, select_core_set
from .schedule import dumps, total_cost, validate
from .ttp2 import block_schedule, build_ttp2_block

METHODS = ("ham-christofides", "ham-matching", "packing-cycle", "packing-path")

REFERENCE_RATIOS = {
    "TTP-3": "139/87",
    "TTP-4": "17/10",
    "TTP-k, k>=5": "(5k^2-4k+3)/(2k(k+1))",
    "TTP-3 earlier": "5/3",
    "LDTTP-3": "6/5",
    "LDTTP-k": "(3k-3)/(2k-1)",
}
REFERENCE_NOTE = "theoretical, not asserted per-instance"


@dataclass
class Candidate:
    method: str
    cost: Optional[float] = None
    feasible: bool = False
    validation: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)
    error: str = ""
    time_ms: float = 0.0
    schedule: object = None


@dataclass
class RunReport:
    instance: str
    n: int
    k: int
    candidates: list
    bounds: object
    best: Optional[Candidate]

    @property
    def ratio(self):
        if self.best is None:
            return None
        return ratio_of(self.best.cost, self.bounds.best)

    def as_dict(self, timing=False):
        out = {
            "instance": self.instance,
            "n": self.n,
            "k": self.k,
            "best_method": self.best.method if self.best else None,
            "best_cost": self.best.cost if self.best else None,
            "ratio": self.ratio,
            "bounds": self.bounds.as_dict(),
            "candidates": [
                {
                    "method": c.method,
                    "cost": c.cost,
                    "feasible": c.feasible,
                    "validation": c.validation,
                    "meta": c.meta,
                    "error": c.error,
                    **({"time_ms": round(c.time_ms, 3)} if timing else {}),
                }
                for c in self.candidates
            ],
            "reference_ratios": {"note": REFERENCE_NOTE, **REFERENCE_RATIOS},
        }
        return out


def ratio_of(cost, bound):
    if cost is None:
        return None
    if bound == 0:
        return 1.0 if cost == 0 else float("inf")
    return float(cost) / float(bound)


def _num(x):
    return x.item() if hasattr(x, "item") else x


def _small_schedule(inst):
    return block_schedule(build_ttp2_block(list(range(inst.n))))


def _ham_schedule(inst, k, method, seed, derandomize):
    meta = {}
    if inst.n < 6:
        meta["fallback"] = "small-search"
        return _small_schedule(inst), meta
    if inst.n >= 8 * k * k:
        S, _ = select_core_set(inst, k)
        meta["core"] = "top-degree"
    else:
        S = tuple(range(inst.n))
    g = graph_of(inst, S)
    if method == "ham-christofides":
        core_cycle = christofides_cycle(g)
    else:
        mode = "derandomized" if derandomize else "randomized"
        core_cycle = matching_based_cycle(g, min_weight_perfect_matching(g), mode, seed)
    c = lift_core_cycle(inst, core_cycle)
    meta["cycle_weight"] = _num(c.weight(inst.dist))
    return build_hamiltonian_schedule(inst, k, c), meta


def _packing_schedule(inst, k, method, seed, trials, derandomize):
    if inst.n < 8 * k * k:
        sched, meta = _ham_schedule(inst, k, "ham-christofides", seed, derandomize)
        meta["fallback"] = meta.get("fallback", "canonical")
        return sched, meta
    opts = PackingOptions(
        mode="derandomized" if derandomize else "randomized",
        seed=seed,
        trials=trials,
        strategy="line_blocks" if inst.is_line else "greedy_local",
        kind="k_cycle" if method == "packing-cycle" else "k_path",
    )
    res = build_packing_schedule(inst, k, None, opts)
    ss = res.structure
    meta = {
        "m": ss.m,
        "r": ss.r,
        "sigma": list(ss.sigma),
        "W": res.W,
        "W_bar": res.W_bar,
    }
    return res.schedule, meta


def run_method(inst, k, method, seed=0, trials=1, derandomize=True):
    t0 = time.perf_counter()
    cand = Candidate(method)
    try:
        if method.startswith("ham-"):
            sched, meta = _ham_schedule(inst, k, method, seed, derandomize)
        elif method.startswith("packing-"):
            sched, meta = _packing_schedule(inst, k, method, seed, trials, derandomize)
        else:
            raise ValueError(f"unknown method {method!r}")
        rep = validate(sched, k)
        cand.schedule = sched
        cand.cost = _num(total_cost(sched, inst))
        cand.feasible = rep.ok
        cand.validation = rep.summary()
        cand.meta = meta
    except TTPError as exc:
        cand.error = f"{type(exc).__name__}: {exc}"
    cand.time_ms = (time.perf_counter() - t0) * 1000
    return cand


def solve(inst, k, method="best", seed=0, trials=1, derandomize=True):
    methods = METHODS if method == "best" else (method,)
    cands = [run_method(inst, k, m, seed, trials, derandomize) for m in methods]
    feasible = [c for c in cands if c.feasible]
    best = min(feasible, key=lambda c: (c.cost, methods.index(c.method))) if feasible else None
    return RunReport(inst.name, inst.n, k, cands, compute_bounds(inst, k), best)


def _bool(text):
    low = str(text).lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def _threads():
    try:
        return max(1, int(os.environ.get("TTPF_THREADS", "1")))
    except ValueError:
        return 1


def format_text(report):
    lines = [f"instance {report.instance}  n={report.n}  k={report.k}"]
    for c in report.candidates:
        state = "feasible" if c.feasible else ("error: " + c.error if c.error else "infeasible")
        extra = f"  fallback={c.meta['fallback']}" if "fallback" in c.meta else ""
        lines.append(f"  {c.method:18s} cost={c.cost}  {state}{extra}")
    b = report.bounds
    lines.append(f"  bounds: degree={b.degree_bound} tsp={b.tsp_bound} itinerary={b.itinerary_bound} "
                 f"line={b.line_bound} best={b.best}")
    if report.best:
        lines.append(f"  best: {report.best.method} cost={report.best.cost} ratio={report.ratio}")
    refs = ", ".join(f"{k}: {v}" for k, v in REFERENCE_RATIOS.items())
    lines.append(f"  reference ratios ({REFERENCE_NOTE}): {refs}")
    return "\n".join(lines) + "\n"


def format_report(report, fmt, timing=False):
    if fmt == "json":
        return json.dumps(report.as_dict(timing), indent=2, sort_keys=True) + "\n"
    if fmt == "csv":
        return bench_csv(_rows(report, timing))
    return format_text(report)


CSV_COLUMNS = ("instance", "k", "method", "cost", "bound", "ratio", "time_ms", "feasible", "error")


def _rows(report, timing):
    rows = []
    for c in report.candidates:
        r = ratio_of(c.cost, report.bounds.best)
        rows.append({
            "instance": report.instance,
            "k": report.k,
            "method": c.method,
            "cost": "" if c.cost is None else repr(c.cost) if isinstance(c.cost, float) else c.cost,
            "bound": repr(float(report.bounds.best)),
            "ratio": "" if r is None else f"{r:.6f}",
            "time_ms": f"{c.time_ms:.1f}" if timing else "0",
            "feasible": "true" if c.feasible else "false",
            "error": c.error,
        })
    return rows


def bench_csv(rows):
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for row in sorted(rows, key=lambda r: (r["instance"], int(r["k"]), r["method"])):
        w.writerow(row)
    return buf.getvalue()


def cmd_solve(args):
    try:
        inst = read_instance(args.instance, args.format, args.rounding, args.allow_near_metric)
    except (InstanceError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.k < 3:
        print("error: k must be at least 3", file=sys.stderr)
        return 2
    report = solve(inst, args.k, args.method, args.seed, args.trials, args.derandomize)
    if report.best is None:
        sys.stdout.write(format_report(report, args.report, args.timing))
        print("error: no method produced a feasible schedule", file=sys.stderr)
        return 3
    text = dumps(report.best.schedule, args.k, inst, {"method": report.best.method})
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    out = format_report(report, args.report, args.timing)
    if args.report_file:
        Path(args.report_file).write_text(out, encoding="utf-8")
    sys.stdout.write(out)
    return 0


def bench_rows(directory, ks, methods, seed=0, trials=1, derandomize=True, fmt="auto", timing=False, eps=0.0):
    files = sorted(p for p in Path(directory).iterdir() if p.is_file())
    jobs = [(p, k) for p in files for k in ks]

    def one(job):
        path, k = job
        try:
            inst = read_instance(path, fmt, eps=eps)
        except InstanceError as exc:
            return [{
                "instance": path.stem, "k": k, "method": m, "cost": "", "bound": "", "ratio": "",
                "time_ms": "0", "feasible": "false", "error": f"{type(exc).__name__}: {exc}",
            } for m in methods]
        cands = [run_method(inst, k, m, seed, trials, derandomize) for m in methods]
        rep = RunReport(inst.name, inst.n, k, cands, compute_bounds(inst, k), None)
        return _rows(rep, timing)

    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        parts = list(pool.map(one, jobs))
    return [r for part in parts for r in part]


def cmd_bench(args):
    ks = [int(x) for x in str(args.k).split(",")]
    methods = METHODS if args.method == "best" else (args.method,)
    try:
        rows = bench_rows(args.dir, ks, methods, args.seed, args.trials, args.derandomize,
                          args.format, args.timing, args.allow_near_metric)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    text = bench_csv(rows)
    if args.output:
        try:
            Path(args.output).write_text(text, encoding="utf-8")
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
    else:
        sys.stdout.write(text)
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="ttpk", description="TTP-k schedule construction and bounds")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--format", default="auto", choices=("auto", "matrix", "coords", "line"))
        sp.add_argument("--method", default="best", choices=("best",) + METHODS)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--trials", type=int, default=1)
        sp.add_argument("--derandomize", type=_bool, default=True)
        sp.add_argument("--output")
        sp.add_argument("--allow-near-metric", type=float, default=0.0, metavar="EPS",
                        help="tolerate triangle-inequality violations up to EPS")
        sp.add_argument("--timing", action="store_true", help="record wall time (output is then not reproducible)")

    s = sub.add_parser("solve", help="build schedules for one instance")
    s.add_argument("--instance", required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--rounding", default="none", choices=("none", "nint"))
    s.add_argument("--report", default="text", choices=("json", "csv", "text"))
    s.add_argument("--report-file")
    common(s)
    s.set_defaults(func=cmd_solve)

    b = sub.add_parser("bench", help="run every instance file in a directory")
    b.add_argument("--dir", required=True)
    b.add_argument("--k", default="3", help="comma separated list")
    common(b)
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
