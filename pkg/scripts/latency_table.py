#!/usr/bin/env python3
"""Decoding latency and throughput table across code sizes and PE counts.

For each (N, M) pair the script reports the closed-form cycle count, the
schedule-simulator count, the frozen-sibling count of the constructed
code, and the resulting throughput with the shortcut on and off.

Example:
    python3 scripts/latency_table.py --clock-mhz 641
"""

import argparse

from polarscl import (
    HardwareConfig,
    PolarCode,
    construct_frozen_set,
    cycle_report,
)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rate", type=float, default=0.5)
    ap.add_argument("--crc-bits", type=int, default=16)
    ap.add_argument("--clock-mhz", type=float, default=641.0)
    ap.add_argument("--design-snr", type=float, default=2.0)
    args = ap.parse_args()

    print(f"{'N':>5} {'M':>4} {'cycles':>7} {'fs':>4} {'cycles_fs':>9} "
          f"{'mbps':>7} {'mbps_fs':>8}")
    for n in (6, 7, 8, 9, 10):
        N = 1 << n
        K = int(N * args.rate)
        code = PolarCode(n=n, K=K, r=args.crc_bits,
                         frozen_set=construct_frozen_set(n, K, args.design_snr))
        for M in (4, 16, 64):
            if not M < N // 2:
                continue
            plain = cycle_report(code, HardwareConfig(M, args.clock_mhz))
            fs = cycle_report(code, HardwareConfig(M, args.clock_mhz,
                                                   frozen_sibling_enabled=True))
            print(f"{N:>5} {M:>4} {plain.simulated_cycles:>7} "
                  f"{fs.fs_count:>4} {fs.simulated_cycles:>9} "
                  f"{plain.throughput_mbps:>7.1f} {fs.throughput_mbps:>8.1f}")


if __name__ == "__main__":
    main()
