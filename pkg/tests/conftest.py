"""Shared fixtures and independent reference implementations (oracles).

Every oracle here deliberately uses a different algorithm than the package
code it checks: dense matrix algebra instead of butterflies, big-integer
long division instead of a shift register, full prefix recomputation
instead of stage memories.
"""

from __future__ import annotations

import numpy as np
import pytest

from polarscl import Arithmetic, PolarCode, construct_frozen_set
from polarscl.list_decoder import pmu_exact, pmu_hw
from polarscl.sc_engine import ScState


# ---------------------------------------------------------------------------
# oracles

def dense_generator(n: int) -> np.ndarray:
    """G_N as an explicit Kronecker power of [[1,0],[1,1]] over GF(2)."""
    g = np.array([[1]], dtype=np.int8)
    f2 = np.array([[1, 0], [1, 1]], dtype=np.int8)
    for _ in range(n):
        g = np.kron(g, f2)
    return g


def crc_longdiv(bits, poly: int, r: int) -> np.ndarray:
    """CRC via big-integer polynomial long division of m(x) * x^r."""
    bits = np.asarray(bits, dtype=np.int64) & 1
    num = 0
    for b in bits:
        num = (num << 1) | int(b)
    num <<= r
    divisor = (1 << r) | poly
    shift = num.bit_length() - divisor.bit_length()
    while shift >= 0:
        if num >> (shift + r):
            num ^= divisor << shift
        shift = num.bit_length() - divisor.bit_length()
    return np.array([(num >> (r - 1 - i)) & 1 for i in range(r)], dtype=np.int8)


def sc_recursive(llrs: np.ndarray, frozen_mask: np.ndarray) -> np.ndarray:
    """Plain SC by direct recursion on LLR vectors (no stage memories)."""
    def rec(llr, frozen):
        if llr.size == 1:
            u = 0 if frozen[0] else int(llr[0] < 0)
            return np.array([u], dtype=np.int8), np.array([u], dtype=np.int8)
        h = llr.size // 2
        a, b = llr[:h], llr[h:]
        f = np.where(a < 0, -1.0, 1.0) * np.where(b < 0, -1.0, 1.0) * \
            np.minimum(np.abs(a), np.abs(b))
        u_left, x_left = rec(f, frozen[:h])
        g = b + (1.0 - 2.0 * x_left) * a
        u_right, x_right = rec(g, frozen[h:])
        return (np.concatenate([u_left, u_right]),
                np.concatenate([x_left ^ x_right, x_right]))
    u, _ = rec(np.asarray(llrs, dtype=np.float64), np.asarray(frozen_mask))
    return u


def leaf_llr_bruteforce(llrs, prefix) -> float:
    """LLR of leaf len(prefix) by the same recursion, forcing the prefix."""
    prefix = list(prefix)
    target = len(prefix)

    def rec(llr, base):
        if llr.size == 1:
            if base == target:
                raise _Found(float(llr[0]))
            u = prefix[base]
            return np.array([u], dtype=np.int8)
        h = llr.size // 2
        a, b = llr[:h], llr[h:]
        f = np.where(a < 0, -1.0, 1.0) * np.where(b < 0, -1.0, 1.0) * \
            np.minimum(np.abs(a), np.abs(b))
        x_left = rec(f, base)
        g = b + (1.0 - 2.0 * x_left) * a
        x_right = rec(g, base + h)
        return np.concatenate([x_left ^ x_right, x_right])

    class _Found(Exception):
        def __init__(self, v):
            self.v = v

    try:
        rec(np.asarray(llrs, dtype=np.float64), 0)
    except _Found as e:  # noqa: F841
        return e.v
    raise AssertionError("prefix covered the whole word")


def scl_bruteforce(llrs, code: PolarCode, list_size: int, pmu: str = "hw"):
    """List decoding with explicit path prefixes and full recomputation.

    Each path stores its decided prefix; leaf LLRs come from a fresh
    ScState replay, pruning is an exact stable sort.  Returns the decided
    words and metrics of the final list, in list order.
    """
    frozen = code.frozen_mask
    paths = [(0.0, [])]  # (pm, prefix); insertion order is the tie-break id
    for i in range(code.N):
        ext = []
        for pm, prefix in paths:
            state = ScState(np.asarray(llrs, dtype=np.float64))
            for j, u in enumerate(prefix):
                state.leaf_llr(j)
                state.commit(j, u)
            llr = state.leaf_llr(i)
            bits = (0,) if frozen[i] else (0, 1)
            for u in bits:
                if pmu == "hw":
                    npm = float(pmu_hw(pm, llr, u))
                else:
                    npm = float(pmu_exact(pm, llr, u))
                ext.append((npm, prefix + [u]))
        if len(ext) > list_size:
            order = sorted(range(len(ext)), key=lambda t: (ext[t][0], t))
            ext = [ext[t] for t in sorted(order[:list_size])]
        paths = ext
    return ([np.array(p, dtype=np.int8) for _, p in paths],
            np.array([pm for pm, _ in paths]))


# ---------------------------------------------------------------------------
# fixtures

@pytest.fixture(scope="session")
def small_code():
    n, K, r = 5, 16, 4
    return PolarCode(n=n, K=K, r=r, frozen_set=construct_frozen_set(n, K),
                     crc_poly=0x3)


@pytest.fixture(scope="session")
def mid_code():
    n, K, r = 8, 128, 8
    return PolarCode(n=n, K=K, r=r, frozen_set=construct_frozen_set(n, K),
                     crc_poly=0x07)


@pytest.fixture(scope="session")
def fixed_arith():
    return Arithmetic(mode="fixed", q_channel=6, q_pm=8)
