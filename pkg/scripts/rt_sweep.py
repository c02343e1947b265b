#!/usr/bin/env python3
"""Rejection-threshold sensitivity study for double-thresholding pruning.

Sweeps the RT order statistic from the tightest admissible index (L/2) to
the maximum (L-1) at a fixed SNR and reports FER, the rule-3 fill rate,
and the fraction of frames that starve (end a pruning step with fewer
than L survivors).

Example:
    python3 scripts/rt_sweep.py --n 10 --k 512 --snr 2.0 --list-size 8
"""

import argparse

from polarscl.sim import SimConfig, run_point


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=10)
    ap.add_argument("--k", type=int, default=512)
    ap.add_argument("--crc-bits", type=int, default=16)
    ap.add_argument("--list-size", type=int, default=8)
    ap.add_argument("--snr", type=float, default=2.0)
    ap.add_argument("--min-errors", type=int, default=100)
    ap.add_argument("--max-frames", type=int, default=200_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--arith", choices=["float", "fixed"], default="float")
    args = ap.parse_args()

    L = args.list_size
    common = dict(n=args.n, k=args.k, crc_bits=args.crc_bits,
                  snr_db=(args.snr,), list_size=L, arith=args.arith,
                  min_errors=args.min_errors, max_frames=args.max_frames,
                  seed=args.seed)
    print(f"{'pruner':>10} {'frames':>8} {'fer':>10} {'fill':>7} {'starve':>7}")
    r = run_point(SimConfig(**common), args.snr)
    print(f"{'sort':>10} {r.frames:>8d} {r.fer:>10.3e} {'-':>7} {'-':>7}")
    for rt in range(L - 1, L // 2 - 1, -1):
        r = run_point(SimConfig(**common, pruner="dts", rt_index=rt), args.snr)
        print(f"{f'dts rt={rt}':>10} {r.frames:>8d} {r.fer:>10.3e} "
              f"{r.rule3_fill_rate:>7.3f} {r.starve_rate:>7.3f}")


if __name__ == "__main__":
    main()
