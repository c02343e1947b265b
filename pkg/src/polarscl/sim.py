"""Monte Carlo FER/BER harness over the binary-input AWGN channel.

Reproducibility contract: the RNG stream of frame k at a given SNR point is
derived from (master seed, SNR point id, k), so results depend only on the
configuration and seed, never on the worker count or scheduling.  Frames
are simulated in fixed-size batches; the stopping rule is evaluated at
batch boundaries.
"""

from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import __version__
from .channel import ChannelParams, add_awgn, channel_llr, modulate, quantize
from .fast_engine import FastListDecoder
from .latency_model import HardwareConfig, cycle_report
from .list_decoder import ListDecoder
from .polar_code import PolarCode, assemble_source_word, construct_frozen_set, encode, load_frozen_set
from .pruning import DtsPruner, SortPruner
from .sc_engine import Arithmetic, sc_decode

_BATCH = 512

# widely used truncated generator polynomials by CRC width
_STANDARD_CRC = {4: 0x3, 8: 0x07, 12: 0x80F, 16: 0x1021, 24: 0x864CFB,
                 32: 0x04C11DB7}


def default_crc_poly(r: int) -> int:
    """A standard polynomial for common widths, x^r + x^(r-1) + 1 otherwise."""
    if r in _STANDARD_CRC:
        return _STANDARD_CRC[r]
    return (1 << (r - 1)) | 1 if r > 1 else 1


@dataclass(frozen=True)
class SimConfig:
    """Everything a simulation run depends on.  Validated up front."""

    # code
    n: int = 10
    k: int = 512                  # non-frozen positions, CRC included
    crc_bits: int = 16
    crc_poly: int | None = None   # None -> standard polynomial for crc_bits
    frozen_file: str | None = None
    design_snr: float = 2.0
    # decoder
    decoder: str = "scl"          # "sc" | "scl"
    list_size: int = 8
    pruner: str = "sort"          # "sort" | "dts"
    rt_index: int | None = None   # None -> L-2
    dts_fill: str = "scan"        # "scan" | "random"
    arith: str = "float"          # "float" | "fixed"
    q_channel: int = 6
    q_pm: int = 8
    llr_scale: float = 2.0
    frozen_sibling: bool = False
    engine: str = "auto"          # "auto" | "fast" | "reference"
    # channel / stopping
    snr_db: tuple = (2.0,)
    min_errors: int = 100
    max_frames: int = 10_000_000
    seed: int = 0
    workers: int = 1
    error_scope: str = "source"   # "source" | "info"
    # hardware model (PE count is clamped to N/4 for short codes)
    pe_count: int = 64
    clock_mhz: float = 641.0
    # output
    out: str | None = None
    fmt: str = "csv"              # "csv" | "json"

    def __post_init__(self):
        object.__setattr__(self, "snr_db", tuple(float(s) for s in self.snr_db))
        if self.decoder not in ("sc", "scl"):
            raise ValueError(f"decoder must be 'sc' or 'scl', got {self.decoder!r}")
        if self.pruner not in ("sort", "dts"):
            raise ValueError(f"pruner must be 'sort' or 'dts', got {self.pruner!r}")
        if self.arith not in ("float", "fixed"):
            raise ValueError(f"arith must be 'float' or 'fixed', got {self.arith!r}")
        if self.engine not in ("auto", "fast", "reference"):
            raise ValueError(f"engine must be auto/fast/reference, got {self.engine!r}")
        if self.error_scope not in ("source", "info"):
            raise ValueError(f"error_scope must be 'source' or 'info', got {self.error_scope!r}")
        if self.fmt not in ("csv", "json"):
            raise ValueError(f"fmt must be 'csv' or 'json', got {self.fmt!r}")
        if not self.snr_db:
            raise ValueError("need at least one SNR point")
        if self.min_errors < 1 or self.max_frames < 1 or self.workers < 1:
            raise ValueError("min_errors, max_frames, workers must be >= 1")
        self.build_code()  # validates code parameters eagerly

    def build_code(self) -> PolarCode:
        N = 1 << self.n
        if self.frozen_file:
            frozen = load_frozen_set(self.frozen_file, N)
            if len(frozen) != N - self.k:
                raise ValueError(
                    f"frozen file has {len(frozen)} indices, need {N - self.k}"
                )
        else:
            frozen = construct_frozen_set(self.n, self.k, self.design_snr)
        poly = self.crc_poly if self.crc_poly is not None \
            else default_crc_poly(self.crc_bits)
        return PolarCode(n=self.n, K=self.k, r=self.crc_bits,
                         frozen_set=frozen, crc_poly=poly)

    @property
    def rate(self) -> float:
        return self.k / (1 << self.n)

    def arithmetic(self) -> Arithmetic:
        return Arithmetic(mode=self.arith, q_channel=self.q_channel,
                          q_pm=self.q_pm, llr_scale=self.llr_scale)


@dataclass
class FerResult:
    """One SNR point of a sweep, with Wilson 95% bounds on the FER."""

    snr_db: float
    frames: int
    frame_errors: int
    bit_errors: int
    fer: float
    ber: float
    fer_ci_lo: float
    fer_ci_hi: float
    rule3_fill_rate: float
    starve_rate: float
    crc_miss_rate: float
    cycles: int
    throughput_mbps: float
    seed: int
    arith: str = "float"
    diverged_frames: int = 0


def wilson_interval(k: int, n: int, z: float = 1.959964) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if n == 0:
        return 0.0, 1.0
    p = k / n
    z2 = z * z
    denom = 1.0 + z2 / n
    center = (p + z2 / (2 * n)) / denom
    half = z / denom * np.sqrt(p * (1 - p) / n + z2 / (4 * n * n))
    return float(max(0.0, center - half)), float(min(1.0, center + half))


class _ScAdapter:
    """Gives plain SC the list-decoder's .decode interface."""

    def __init__(self, code, arith):
        self.code = code
        self.arith = arith

    def decode(self, llr):
        from .list_decoder import DecodeResult
        return DecodeResult(u_hat=sc_decode(llr, self.code, self.arith))


def make_decoder(cfg: SimConfig, code: PolarCode):
    """Build the decoder object a config describes, honoring engine choice."""
    arith = cfg.arithmetic()
    if cfg.decoder == "sc" and cfg.engine == "reference":
        return _ScAdapter(code, arith)
    list_size = 1 if cfg.decoder == "sc" else cfg.list_size
    if cfg.pruner == "dts" and cfg.decoder == "scl":
        seed = cfg.seed if cfg.dts_fill == "random" else None
        pruner = DtsPruner(rt_order_index=cfg.rt_index,
                           fill_policy=cfg.dts_fill, seed=seed)
    else:
        pruner = SortPruner()
    kwargs = dict(pruner=pruner, arith=arith, frozen_sibling=cfg.frozen_sibling)
    if cfg.engine == "reference":
        return ListDecoder(code, list_size, **kwargs)
    try:
        return FastListDecoder(code, list_size, **kwargs)
    except ValueError:
        if cfg.engine == "fast":
            raise
        return ListDecoder(code, list_size, **kwargs)


def _point_id(snr_db: float) -> int:
    return int(round(snr_db * 1000))


def _simulate_frames(cfg: SimConfig, snr_db: float, lo: int, hi: int) -> dict:
    """Simulate frames [lo, hi) of one SNR point; pure in (cfg, snr, range)."""
    code = cfg.build_code()
    decoder = make_decoder(cfg, code)
    sigma = ChannelParams(snr_db, cfg.rate).sigma
    fixed = cfg.arith == "fixed"
    info_len = code.info_bit_count
    pid = _point_id(snr_db)
    scope = code.info_positions if cfg.error_scope == "source" else \
        code.info_positions[:info_len]

    acc = dict(frames=0, frame_errors=0, bit_errors=0, crc_misses=0,
               starved_frames=0, rule3_filled=0, prune_steps=0,
               diverged=0)
    for f in range(lo, hi):
        rng = np.random.default_rng([cfg.seed, pid, f])
        u = assemble_source_word(rng.integers(0, 2, info_len), code)
        y = add_awgn(modulate(encode(u, code)), sigma, rng)
        llr = channel_llr(y, sigma)
        if fixed:
            llr = quantize(llr, cfg.q_channel, cfg.llr_scale)
        res = decoder.decode(llr)
        bit_errs = int(np.count_nonzero(res.u_hat[scope] != u[scope]))
        acc["frames"] += 1
        acc["bit_errors"] += bit_errs
        acc["frame_errors"] += int(bit_errs > 0)
        d = res.diagnostics
        if d is not None:
            acc["crc_misses"] += int(d.crc_fallback)
            acc["starved_frames"] += int(d.starved_bits > 0)
            acc["rule3_filled"] += d.rule3_filled
            acc["prune_steps"] += d.prune_steps
    return acc


def run_point(cfg: SimConfig, snr_db: float) -> FerResult:
    """Monte Carlo at one SNR until min_errors frame errors or max_frames."""
    totals = dict(frames=0, frame_errors=0, bit_errors=0, crc_misses=0,
                  starved_frames=0, rule3_filled=0, prune_steps=0, diverged=0)
    frame = 0
    while totals["frame_errors"] < cfg.min_errors and frame < cfg.max_frames:
        batch = min(_BATCH, cfg.max_frames - frame)
        bounds = np.linspace(frame, frame + batch, cfg.workers + 1, dtype=int)
        chunks = [(int(a), int(b)) for a, b in zip(bounds, bounds[1:]) if b > a]
        if cfg.workers == 1 or len(chunks) == 1:
            parts = [_simulate_frames(cfg, snr_db, a, b) for a, b in chunks]
        else:
            with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
                parts = list(pool.map(_simulate_frames, [cfg] * len(chunks),
                                      [snr_db] * len(chunks),
                                      [a for a, _ in chunks],
                                      [b for _, b in chunks]))
        for part in parts:
            for key, val in part.items():
                totals[key] += val
        frame += batch

    code = cfg.build_code()
    # the schedule model needs M < N/2; short codes clamp the PE count down
    m_eff = min(cfg.pe_count, code.N // 4)
    hw = HardwareConfig(M=m_eff, clock_mhz=cfg.clock_mhz,
                        frozen_sibling_enabled=cfg.frozen_sibling)
    cycles = cycle_report(code, hw)
    frames = totals["frames"]
    errors = totals["frame_errors"]
    lo, hi = wilson_interval(errors, frames)
    list_size = 1 if cfg.decoder == "sc" else cfg.list_size
    fill_den = totals["prune_steps"] * list_size
    return FerResult(
        snr_db=snr_db,
        frames=frames,
        frame_errors=errors,
        bit_errors=totals["bit_errors"],
        fer=errors / frames if frames else 0.0,
        ber=totals["bit_errors"] / (frames * code.K) if frames else 0.0,
        fer_ci_lo=lo,
        fer_ci_hi=hi,
        rule3_fill_rate=totals["rule3_filled"] / fill_den if fill_den else 0.0,
        starve_rate=totals["starved_frames"] / frames if frames else 0.0,
        crc_miss_rate=totals["crc_misses"] / frames if frames else 0.0,
        cycles=cycles.simulated_cycles,
        throughput_mbps=cycles.throughput_mbps,
        seed=cfg.seed,
        arith=cfg.arith,
    )


def run_sweep(cfg: SimConfig) -> list[FerResult]:
    return [run_point(cfg, snr) for snr in cfg.snr_db]


_CSV_COLUMNS = ["snr_db", "frames", "frame_errors", "fer", "fer_ci_lo",
                "fer_ci_hi", "ber", "rule3_fill_rate", "starve_rate",
                "cycles", "throughput_mbps"]


def emit(results: list[FerResult], cfg: SimConfig, path: str, fmt: str = "csv") -> None:
    """Write sweep results as CSV (fixed column set) or JSON (full record)."""
    if fmt == "csv":
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(_CSV_COLUMNS)
            for r in results:
                row = asdict(r)
                writer.writerow([row[c] for c in _CSV_COLUMNS])
    elif fmt == "json":
        payload = {
            "tool": "polarscl",
            "version": __version__,
            "config": asdict(cfg),
            "results": [asdict(r) for r in results],
        }
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2)
    else:
        raise ValueError(f"unknown format {fmt!r}")


def load_results(path: str) -> list[FerResult]:
    """Parse a JSON emit() file back into FerResult records."""
    with open(path) as fh:
        payload = json.load(fh)
    names = {f.name for f in fields(FerResult)}
    return [FerResult(**{k: v for k, v in rec.items() if k in names})
            for rec in payload["results"]]


def compare_decoders(cfg_a: SimConfig, cfg_b: SimConfig, snr_db: float,
                     frames: int) -> dict:
    """Frame-by-frame divergence count between two decoder configs run on
    identical channel realizations (same seed, same frame indices)."""
    code_a, code_b = cfg_a.build_code(), cfg_b.build_code()
    if code_a != code_b:
        raise ValueError("decoder comparison requires identical codes")
    dec_a = make_decoder(cfg_a, code_a)
    dec_b = make_decoder(cfg_b, code_b)
    sigma = ChannelParams(snr_db, cfg_a.rate).sigma
    pid = _point_id(snr_db)
    diverged = errors_a = errors_b = 0
    for f in range(frames):
        rng = np.random.default_rng([cfg_a.seed, pid, f])
        u = assemble_source_word(rng.integers(0, 2, code_a.info_bit_count), code_a)
        llr = channel_llr(add_awgn(modulate(encode(u, code_a)), sigma, rng), sigma)
        if cfg_a.arith == "fixed":
            llr = quantize(llr, cfg_a.q_channel, cfg_a.llr_scale)
        ua = dec_a.decode(llr).u_hat
        ub = dec_b.decode(llr).u_hat
        diverged += int(not np.array_equal(ua, ub))
        errors_a += int(not np.array_equal(ua, u))
        errors_b += int(not np.array_equal(ub, u))
    return {"frames": frames, "diverged": diverged,
            "errors_a": errors_a, "errors_b": errors_b}
