"""Command-line front end for the FER/BER simulation harness.

Option precedence, lowest to highest: built-in defaults, a JSON config
file (``--config``), environment variables (``POLARSIM_`` prefix, e.g.
``POLARSIM_LIST_SIZE=16``), then explicit command-line flags.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import fields

from .sim import FerResult, SimConfig, emit, run_sweep

ENV_PREFIX = "POLARSIM_"

# flag name -> (SimConfig field, parser)
_OPTIONS = {
    "n": ("n", int),
    "k": ("k", int),
    "crc-bits": ("crc_bits", int),
    "crc-poly": ("crc_poly", lambda s: int(s, 0)),
    "frozen-file": ("frozen_file", str),
    "design-snr": ("design_snr", float),
    "decoder": ("decoder", str),
    "list-size": ("list_size", int),
    "pruner": ("pruner", str),
    "rt-index": ("rt_index", int),
    "dts-fill": ("dts_fill", str),
    "arith": ("arith", str),
    "q-channel": ("q_channel", int),
    "q-pm": ("q_pm", int),
    "llr-scale": ("llr_scale", float),
    "frozen-sibling": ("frozen_sibling", lambda s: s == "on"),
    "engine": ("engine", str),
    "snr": ("snr_db", lambda s: tuple(float(x) for x in s.split(","))),
    "min-errors": ("min_errors", int),
    "max-frames": ("max_frames", int),
    "seed": ("seed", int),
    "workers": ("workers", int),
    "error-scope": ("error_scope", str),
    "pe-count": ("pe_count", int),
    "clock-mhz": ("clock_mhz", float),
    "out": ("out", str),
    "format": ("fmt", str),
}

_RAW_ENV = {  # env values arrive as strings and reuse the flag parsers
    field: parser for _, (field, parser) in _OPTIONS.items()
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="polar-sim",
        description="Monte Carlo FER/BER simulation of CRC-aided polar "
                    "list decoding over the AWGN channel.",
    )
    p.add_argument("--config", metavar="FILE",
                   help="JSON file with SimConfig fields (flags override it)")
    p.add_argument("--n", type=int, help="code length exponent, N = 2^n")
    p.add_argument("--k", type=int, help="non-frozen bit count (CRC included)")
    p.add_argument("--crc-bits", type=int, help="CRC length r")
    p.add_argument("--crc-poly", type=lambda s: int(s, 0),
                   help="CRC generator polynomial, truncated (e.g. 0x1021)")
    p.add_argument("--frozen-file", metavar="FILE",
                   help="frozen-set file: one index per line, '#' comments")
    p.add_argument("--design-snr", type=float,
                   help="design SNR in dB for frozen-set construction")
    p.add_argument("--decoder", choices=["sc", "scl"])
    p.add_argument("--list-size", type=int, help="list size L")
    p.add_argument("--pruner", choices=["sort", "dts"])
    p.add_argument("--rt-index", type=int,
                   help="rejection-threshold order statistic (default L-2)")
    p.add_argument("--dts-fill", choices=["scan", "random"],
                   help="rule-3 band fill order")
    p.add_argument("--arith", choices=["float", "fixed"])
    p.add_argument("--q-channel", type=int, help="channel LLR bits (fixed mode)")
    p.add_argument("--q-pm", type=int, help="path-metric bits (fixed mode)")
    p.add_argument("--llr-scale", type=float, help="quantizer scale")
    p.add_argument("--frozen-sibling", choices=["on", "off"],
                   help="frozen-sibling latency/metric shortcut")
    p.add_argument("--engine", choices=["auto", "fast", "reference"])
    p.add_argument("--snr", help="comma-separated Eb/N0 points in dB")
    p.add_argument("--min-errors", type=int,
                   help="stop an SNR point after this many frame errors")
    p.add_argument("--max-frames", type=int, help="hard frame cap per point")
    p.add_argument("--seed", type=int, help="master RNG seed")
    p.add_argument("--workers", type=int, help="process count (result-invariant)")
    p.add_argument("--error-scope", choices=["source", "info"],
                   help="count errors over all non-frozen bits or payload only")
    p.add_argument("--pe-count", type=int, help="processing elements M per lane")
    p.add_argument("--clock-mhz", type=float)
    p.add_argument("--out", metavar="FILE", help="results file (default stdout)")
    p.add_argument("--format", choices=["csv", "json"])
    return p


def resolve_config(argv: list[str] | None = None) -> SimConfig:
    """Merge defaults, config file, environment, and flags into a SimConfig."""
    args = build_parser().parse_args(argv)
    values: dict = {}

    if args.config:
        with open(args.config) as fh:
            file_cfg = json.load(fh)
        known = {f.name for f in fields(SimConfig)}
        unknown = set(file_cfg) - known
        if unknown:
            raise SystemExit(f"unknown config keys: {sorted(unknown)}")
        values.update(file_cfg)

    for flag, (field, parse) in _OPTIONS.items():
        env = os.environ.get(ENV_PREFIX + field.upper())
        if env is not None:
            values[field] = parse(env)

    for flag, (field, parse) in _OPTIONS.items():
        cli_val = getattr(args, flag.replace("-", "_"))
        if cli_val is not None:
            if field == "snr_db" and isinstance(cli_val, str):
                cli_val = _OPTIONS["snr"][1](cli_val)
            if field == "frozen_sibling" and isinstance(cli_val, str):
                cli_val = cli_val == "on"
            values[field] = cli_val

    if "snr_db" in values:
        values["snr_db"] = tuple(values["snr_db"])
    return SimConfig(**values)


def _print_table(results: list[FerResult]) -> None:
    head = (f"{'snr_db':>7} {'frames':>9} {'errors':>7} {'fer':>10} "
            f"{'ber':>10} {'fill':>7} {'starve':>7} {'cycles':>7} {'mbps':>8}")
    print(head)
    for r in results:
        print(f"{r.snr_db:>7.2f} {r.frames:>9d} {r.frame_errors:>7d} "
              f"{r.fer:>10.3e} {r.ber:>10.3e} {r.rule3_fill_rate:>7.3f} "
              f"{r.starve_rate:>7.4f} {r.cycles:>7d} {r.throughput_mbps:>8.1f}")


def main(argv: list[str] | None = None) -> int:
    cfg = resolve_config(argv)
    results = run_sweep(cfg)
    if cfg.out:
        emit(results, cfg, cfg.out, cfg.fmt)
        print(f"wrote {cfg.out} ({cfg.fmt}, {len(results)} SNR points)")
    else:
        _print_table(results)
    return 0


if __name__ == "__main__":
    sys.exit(main())
