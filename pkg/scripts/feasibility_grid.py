"""Build packing schedules over the (k, n, seed) grid and report validity, cost and bounds."""

import argparse
import time

from ttpk.bounds import compute_bounds
from ttpk.instance import generate_random_metric
from ttpk.packing import PackingOptions, build_packing_schedule
from ttpk.schedule import total_cost, validate

GRID = [(3, n) for n in (72, 74, 76, 80, 90, 100)] + [(4, n) for n in (128, 130, 136)]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=3)
    ap.add_argument("--mode", default="derandomized", choices=("derandomized", "randomized"))
    args = ap.parse_args()
    print("k,n,seed,valid,cost,bound,ratio,seconds")
    for k, n in GRID:
        for seed in range(args.seeds):
            inst = generate_random_metric(n, seed)
            t0 = time.perf_counter()
            res = build_packing_schedule(inst, k, opts=PackingOptions(mode=args.mode, seed=seed))
            ok = validate(res.schedule, k).ok
            dt = time.perf_counter() - t0
            cost = total_cost(res.schedule, inst)
            bound = compute_bounds(inst, k).best
            print(f"{k},{n},{seed},{ok},{cost:.1f},{bound:.1f},{cost / bound:.4f},{dt:.2f}")


if __name__ == "__main__":
    main()
