"""Per-stage Kraft sums, table sizes and timings for the unconditional machine."""

import argparse
import time

from enumdist.enumerator import DEFAULT_TMAX, continuous_bound, discrete_bound


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--tmax", type=int, default=DEFAULT_TMAX)
    ap.add_argument("--depth", type=int, default=16)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    print("stage,kraft,kraft_float,strings,halting_programs,tree_nodes,max_resolved_len,seconds")
    for t in range(args.tmax + 1):
        t0 = time.perf_counter()
        d = discrete_bound(t, workers=args.workers, depth=args.depth)
        c = continuous_bound(t, args.depth, workers=args.workers)
        dt = time.perf_counter() - t0
        longest = max((len(x) for x in d.mass), default=-1)
        k = d.kraft()
        print(f"{t},{k},{float(k):.6f},{len(d.mass)},{len(d.records)},{len(c.tree.items())},{longest},{dt:.3f}")


if __name__ == "__main__":
    main()
