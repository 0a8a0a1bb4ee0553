"""Cost over the line lower bound for packing schedules on unit-gap line instances."""

import argparse

from ttpk.bounds import ldttp_line_bound
from ttpk.instance import unit_line
from ttpk.packing import PackingOptions, build_packing_schedule
from ttpk.schedule import total_cost, validate


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--k", type=int, default=3)
    ap.add_argument("--n", type=int, nargs="+", default=[72, 120])
    args = ap.parse_args()
    for n in args.n:
        inst = unit_line(n)
        res = build_packing_schedule(inst, args.k, opts=PackingOptions(strategy="line_blocks"))
        assert validate(res.schedule, args.k).ok
        cost = total_cost(res.schedule, inst)
        bound = ldttp_line_bound(inst.line_gaps, args.k)
        print(f"n={n} k={args.k} cost={cost} bound={bound} ratio={cost / bound:.6f}")


if __name__ == "__main__":
    main()
