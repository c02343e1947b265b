"""Polar code description: frozen sets, CRC handling, and encoding.

The code is used in natural bit order throughout, i.e. the generator matrix
is the n-fold Kronecker power of [[1,0],[1,1]] without the bit-reversal
permutation, so index arithmetic in the decoder and the latency model lines
up with the encoder.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

# CRC-16/CCITT, x^16 + x^12 + x^5 + 1 (truncated representation, the x^r
# term is implicit).  The polynomial only affects which list candidate is
# selected, not the decoder mechanics.
CRC16_CCITT = 0x1021


class FrozenSetFormatError(ValueError):
    """Raised when a frozen-set file cannot be parsed."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


@dataclass(frozen=True)
class PolarCode:
    """Static description of a CRC-concatenated polar code.

    Parameters
    ----------
    n : int
        Code-length exponent, N = 2**n.
    K : int
        Number of non-frozen positions.  Includes the r CRC bits.
    r : int
        CRC length in bits; 0 disables the CRC.
    frozen_set : frozenset[int]
        The N - K frozen bit indices.
    crc_poly : int
        Truncated CRC generator polynomial (degree-r term implicit).
    """

    n: int
    K: int
    r: int = 0
    frozen_set: frozenset = field(default_factory=frozenset)
    crc_poly: int = CRC16_CCITT

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        N = 1 << self.n
        if not 0 < self.K <= N:
            raise ValueError(f"K must be in (0, {N}], got {self.K}")
        if self.r < 0 or (self.r > 0 and self.r >= self.K):
            raise ValueError(f"need 0 <= r < K, got r={self.r}, K={self.K}")
        if self.r > 0 and not 0 < self.crc_poly < (1 << self.r):
            raise ValueError("crc_poly must fit in r bits (truncated form)")
        fs = frozenset(int(i) for i in self.frozen_set)
        object.__setattr__(self, "frozen_set", fs)
        if len(fs) != N - self.K:
            raise ValueError(
                f"|frozen_set| must be N - K = {N - self.K}, got {len(fs)}"
            )
        if fs and (min(fs) < 0 or max(fs) >= N):
            raise ValueError("frozen indices must lie in [0, N)")

    @property
    def N(self) -> int:
        return 1 << self.n

    @property
    def info_bit_count(self) -> int:
        """Number of payload bits, excluding the CRC tail."""
        return self.K - self.r

    @cached_property
    def frozen_mask(self) -> np.ndarray:
        mask = np.zeros(self.N, dtype=bool)
        if self.frozen_set:
            mask[sorted(self.frozen_set)] = True
        mask.setflags(write=False)
        return mask

    @cached_property
    def info_positions(self) -> np.ndarray:
        pos = np.flatnonzero(~self.frozen_mask)
        pos.setflags(write=False)
        return pos


def bhattacharyya_parameters(n: int, design_snr_db: float, rate: float) -> np.ndarray:
    """Evolve Bhattacharyya parameters of the N synthetic channels.

    The base channel is BPSK over AWGN at the design Eb/N0 (``rate`` enters
    through the Eb/N0 -> Es/N0 conversion).  Larger value = less reliable.
    Index order is natural (matches encoding without bit reversal): the MSB
    of a channel index selects the first polarization step.
    """
    es_n0 = rate * 10.0 ** (design_snr_db / 10.0)
    z = np.array([np.exp(-es_n0)], dtype=np.float64)
    for _ in range(n):
        zm = 2.0 * z - z * z
        zp = z * z
        out = np.empty(2 * z.size, dtype=np.float64)
        out[0::2] = zm
        out[1::2] = zp
        z = out
    return z


def construct_frozen_set(n: int, K: int, design_snr_db: float = 2.0) -> frozenset:
    """Pick the N - K least reliable synthetic channels as frozen.

    Deterministic for fixed inputs; ties broken toward freezing the smaller
    index.
    """
    N = 1 << n
    if not 0 < K <= N:
        raise ValueError(f"K must be in (0, {N}], got {K}")
    z = bhattacharyya_parameters(n, design_snr_db, rate=K / N)
    order = np.lexsort((np.arange(N), -z))  # by descending z, then index
    return frozenset(int(i) for i in order[: N - K])


def load_frozen_set(path: str | Path, N: int) -> frozenset:
    """Read a frozen set from a text file, one decimal index per line.

    Blank lines and ``#`` comments are ignored.  Duplicates, out-of-range
    indices, and non-integer tokens are rejected with the offending line
    number.
    """
    seen: set[int] = set()
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                idx = int(line)
            except ValueError:
                raise FrozenSetFormatError(f"not an integer: {line!r}", lineno)
            if not 0 <= idx < N:
                raise FrozenSetFormatError(f"index {idx} out of range [0, {N})", lineno)
            if idx in seen:
                raise FrozenSetFormatError(f"duplicate index {idx}", lineno)
            seen.add(idx)
    return frozenset(seen)


def crc_compute(bits: np.ndarray, poly: int, r: int) -> np.ndarray:
    """Remainder of bits * x^r divided by the generator over GF(2).

    ``poly`` is the truncated polynomial (x^r implicit).  The first message
    bit is the highest-power coefficient.
    """
    if r < 1:
        raise ValueError("CRC length r must be >= 1")
    if not 0 < poly < (1 << r):
        raise ValueError("poly must fit in r bits (truncated form)")
    reg = 0
    top = 1 << (r - 1)
    mask = (1 << r) - 1
    for b in np.asarray(bits, dtype=np.int64):
        fb = ((reg & top) != 0) ^ (b & 1)
        reg = (reg << 1) & mask
        if fb:
            reg ^= poly
    return np.array([(reg >> (r - 1 - i)) & 1 for i in range(r)], dtype=np.int8)


def crc_check(bits: np.ndarray, poly: int, r: int) -> bool:
    """True iff the last r bits are the CRC of the preceding ones."""
    bits = np.asarray(bits)
    if bits.size < r:
        return False
    return bool(np.array_equal(crc_compute(bits[: bits.size - r], poly, r),
                               bits[bits.size - r:]))


def assemble_source_word(info_bits: np.ndarray, code: PolarCode) -> np.ndarray:
    """Place payload + CRC into the non-frozen positions (ascending order)."""
    info_bits = np.asarray(info_bits, dtype=np.int8) & 1
    if info_bits.size != code.info_bit_count:
        raise ValueError(
            f"expected {code.info_bit_count} info bits, got {info_bits.size}"
        )
    u = np.zeros(code.N, dtype=np.int8)
    if code.r > 0:
        payload = np.concatenate(
            [info_bits, crc_compute(info_bits, code.crc_poly, code.r)]
        )
    else:
        payload = info_bits
    u[code.info_positions] = payload
    return u


def encode(u: np.ndarray, code: PolarCode | None = None) -> np.ndarray:
    """Polar transform x = u G_N over GF(2), butterfly stages, O(N log N)."""
    x = np.asarray(u, dtype=np.int8).copy()
    N = x.size
    if N == 0 or N & (N - 1):
        raise ValueError(f"input length must be a power of two, got {N}")
    if code is not None and N != code.N:
        raise ValueError(f"input length {N} does not match code N={code.N}")
    h = 1
    while h < N:
        for i in range(0, N, 2 * h):
            x[i : i + h] ^= x[i + h : i + 2 * h]
        h *= 2
    return x


def count_frozen_siblings(code: PolarCode) -> int:
    """Number of index pairs (2j, 2j+1) that are both frozen."""
    mask = code.frozen_mask
    return int(np.count_nonzero(mask[0::2] & mask[1::2]))


def extract_payload(u: np.ndarray, code: PolarCode) -> np.ndarray:
    """Payload bits (CRC tail stripped) of a full source word."""
    return np.asarray(u)[code.info_positions][: code.info_bit_count]


def source_word_passes_crc(u: np.ndarray, code: PolarCode) -> bool:
    """CRC check over the non-frozen positions of a source word."""
    if code.r == 0:
        return True
    return crc_check(np.asarray(u)[code.info_positions], code.crc_poly, code.r)
