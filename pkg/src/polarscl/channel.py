"""BPSK over AWGN: modulation, noise, channel LLRs, and fixed-point quantization.

Eb/N0 convention: sigma^2 = 1 / (2 * rate * 10^(snr_db/10)), so curves for
codes of different rates share one SNR axis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# LLR magnitude substituted for the noiseless (sigma = 0) channel.
NOISELESS_LLR = 1000.0


@dataclass(frozen=True)
class ChannelParams:
    snr_db: float
    rate: float

    def __post_init__(self):
        if not 0 < self.rate <= 1:
            raise ValueError(f"rate must be in (0, 1], got {self.rate}")

    @property
    def sigma(self) -> float:
        return float(np.sqrt(1.0 / (2.0 * self.rate * 10.0 ** (self.snr_db / 10.0))))


def modulate(bits: np.ndarray) -> np.ndarray:
    """BPSK map: bit 0 -> +1.0, bit 1 -> -1.0."""
    return 1.0 - 2.0 * np.asarray(bits, dtype=np.float64)


def add_awgn(symbols: np.ndarray, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """Add i.i.d. Gaussian noise of standard deviation sigma."""
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    if sigma == 0:
        return np.asarray(symbols, dtype=np.float64).copy()
    return symbols + rng.normal(0.0, sigma, size=np.shape(symbols))


def channel_llr(y: np.ndarray, sigma: float, max_llr: float = NOISELESS_LLR) -> np.ndarray:
    """LLR of each received sample; positive favors bit 0.

    For BPSK over AWGN this is 2*y/sigma^2.  sigma = 0 yields saturated
    LLRs of magnitude ``max_llr``.
    """
    y = np.asarray(y, dtype=np.float64)
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    if sigma == 0:
        return np.sign(y) * max_llr
    return 2.0 * y / (sigma * sigma)


def quantize(llr: np.ndarray, q_bits: int, scale: float = 2.0) -> np.ndarray:
    """Scale, round half away from zero, and saturate to q_bits (symmetric).

    The hardware word length covers [-(2^(q-1)-1), 2^(q-1)-1]; the default
    scale puts one LSB at 0.5 LLR units.
    """
    if q_bits < 2:
        raise ValueError(f"q_bits must be >= 2, got {q_bits}")
    llr = np.asarray(llr, dtype=np.float64)
    lim = float((1 << (q_bits - 1)) - 1)
    v = np.sign(llr) * np.floor(np.abs(llr) * scale + 0.5)
    return np.clip(v, -lim, lim)
