#!/usr/bin/env python3
"""FER/BER sweep comparing decoder configurations over a shared SNR grid.

Runs plain SC, sort-based list decoding, and double-thresholding variants
on the same code and writes one CSV per configuration plus a combined
summary table to stdout.

Example:
    python3 scripts/fer_sweep.py --n 10 --k 512 --snr 1.0,1.5,2.0,2.5 \
        --min-errors 100 --out-dir results/
"""

import argparse
import os

from polarscl.sim import SimConfig, emit, run_sweep


def build_configs(args):
    common = dict(n=args.n, k=args.k, crc_bits=args.crc_bits,
                  snr_db=tuple(args.snr), min_errors=args.min_errors,
                  max_frames=args.max_frames, seed=args.seed)
    yield "sc", SimConfig(**common, decoder="sc")
    yield f"scl{args.list_size}_sort", SimConfig(**common,
                                                 list_size=args.list_size)
    for rt in (args.list_size - 1, args.list_size - 2):
        yield (f"scl{args.list_size}_dts_rt{rt}",
               SimConfig(**common, list_size=args.list_size,
                         pruner="dts", rt_index=rt))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=10)
    ap.add_argument("--k", type=int, default=512)
    ap.add_argument("--crc-bits", type=int, default=16)
    ap.add_argument("--list-size", type=int, default=8)
    ap.add_argument("--snr", type=lambda s: [float(x) for x in s.split(",")],
                    default=[1.0, 1.5, 2.0, 2.5])
    ap.add_argument("--min-errors", type=int, default=100)
    ap.add_argument("--max-frames", type=int, default=1_000_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out-dir", default="results")
    args = ap.parse_args()

    os.makedirs(args.out_dir, exist_ok=True)
    print(f"{'config':>18} {'snr':>5} {'frames':>8} {'errors':>7} {'fer':>10}")
    for name, cfg in build_configs(args):
        results = run_sweep(cfg)
        emit(results, cfg, os.path.join(args.out_dir, f"{name}.csv"), "csv")
        for r in results:
            print(f"{name:>18} {r.snr_db:>5.2f} {r.frames:>8d} "
                  f"{r.frame_errors:>7d} {r.fer:>10.3e}")


if __name__ == "__main__":
    main()
