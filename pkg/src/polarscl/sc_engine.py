"""Successive-cancellation kernel: f/g node functions and the SC traversal.

The traversal is iterative over leaf phases with explicit per-stage LLR and
partial-sum rows (row s holds the most recent values of every depth-s node
segment).  The same phase/segment arithmetic drives the list decoder.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .polar_code import PolarCode


@dataclass(frozen=True)
class Arithmetic:
    """Decoder number format.

    ``float`` is unquantized.  ``fixed`` models the hardware word lengths:
    channel LLRs are q_channel-bit integers, internal stage LLRs get two
    guard bits (the g node adds magnitudes), and path metrics saturate at
    2^q_pm - 1.
    """

    mode: str = "float"  # "float" | "fixed"
    q_channel: int = 6
    q_pm: int = 8
    llr_scale: float = 2.0

    def __post_init__(self):
        if self.mode not in ("float", "fixed"):
            raise ValueError(f"mode must be 'float' or 'fixed', got {self.mode!r}")
        if self.mode == "fixed" and (self.q_channel < 2 or self.q_pm < 2):
            raise ValueError("fixed mode needs q_channel >= 2 and q_pm >= 2")

    @property
    def fixed(self) -> bool:
        return self.mode == "fixed"

    @property
    def llr_clip(self) -> float | None:
        """Internal LLR saturation bound (q_channel + 2 bits), or None."""
        if not self.fixed:
            return None
        return float((1 << (self.q_channel + 1)) - 1)

    @property
    def pm_cap(self) -> float | None:
        """Path-metric saturation bound (2^q_pm - 1), or None."""
        if not self.fixed:
            return None
        return float((1 << self.q_pm) - 1)


def hard_decision(llr):
    """0 for LLR >= 0, else 1 (ties go to 0)."""
    return (np.asarray(llr) < 0).astype(np.int8)


def f_node(a, b, clip: float | None = None):
    """Min-sum check-node update: sign(a)sign(b)min(|a|,|b|), sign(0) = +1."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    out = np.where(a < 0, -1.0, 1.0) * np.where(b < 0, -1.0, 1.0) * np.minimum(
        np.abs(a), np.abs(b)
    )
    if clip is not None:
        out = np.clip(out, -clip, clip)
    return out


def f_node_tanh(a, b, clip: float | None = None):
    """Exact boxplus update, for sensitivity studies against min-sum."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    out = 2.0 * np.arctanh(np.clip(np.tanh(a / 2.0) * np.tanh(b / 2.0), -1 + 1e-15, 1 - 1e-15))
    if clip is not None:
        out = np.clip(out, -clip, clip)
    return out


def g_node(a, b, u_partial, clip: float | None = None):
    """Variable-node update: b + (1 - 2u)a."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    out = b + (1.0 - 2.0 * np.asarray(u_partial, dtype=np.float64)) * a
    if clip is not None:
        out = np.clip(out, -clip, clip)
    return out


_F_RULES = {"minsum": f_node, "tanh": f_node_tanh}


def phase_update_stages(n: int, i: int) -> tuple[int | None, int]:
    """Stages to recompute when moving to leaf phase i.

    Returns (g_stage, first_f_stage): stage ``g_stage`` gets a g update (None
    for phase 0), stages first_f_stage..n get f updates.
    """
    if i == 0:
        return None, 1
    tz = (i & -i).bit_length() - 1
    return n - tz, n - tz + 1


class ScState:
    """Per-frame stage memories for one SC traversal."""

    def __init__(self, channel_llrs: np.ndarray, clip: float | None = None,
                 f_rule: str = "minsum"):
        llrs = np.asarray(channel_llrs, dtype=np.float64)
        N = llrs.size
        if N < 2 or N & (N - 1):
            raise ValueError(f"channel LLR length must be a power of two, got {N}")
        self.N = N
        self.n = N.bit_length() - 1
        self.clip = clip
        self._f = _F_RULES[f_rule]
        self.llr = [llrs] + [np.zeros(N, dtype=np.float64) for _ in range(self.n)]
        self.ucap = [None] + [np.zeros(N, dtype=np.int8) for _ in range(self.n)]

    def leaf_llr(self, i: int) -> float:
        """LLR of leaf i; decisions for all earlier leaves must be committed."""
        n, N = self.n, self.N
        g_stage, f_start = phase_update_stages(n, i)
        if g_stage is not None:
            self._node_update(g_stage, i >> (n - g_stage), use_g=True)
        for lam in range(f_start, n + 1):
            self._node_update(lam, i >> (n - lam), use_g=False)
        return float(self.llr[n][i])

    def commit(self, i: int, u: int) -> None:
        """Record decision for leaf i and propagate partial sums upward."""
        self.ucap[self.n][i] = u & 1
        node, lam = i, self.n
        while node & 1 and lam > 1:
            w = self.N >> lam
            left = self.ucap[lam][(node - 1) * w : node * w]
            right = self.ucap[lam][node * w : (node + 1) * w]
            p = node >> 1
            dst = self.ucap[lam - 1]
            dst[p * 2 * w : p * 2 * w + w] = left ^ right
            dst[p * 2 * w + w : (p + 1) * 2 * w] = right
            node, lam = p, lam - 1

    def _node_update(self, lam: int, node: int, use_g: bool) -> None:
        w = self.N >> lam
        p = node >> 1
        seg = self.llr[lam - 1][p * 2 * w : (p + 1) * 2 * w]
        a, b = seg[:w], seg[w:]
        if use_g:
            us = self.ucap[lam][(node - 1) * w : node * w]
            out = g_node(a, b, us, self.clip)
        else:
            out = self._f(a, b, self.clip)
        self.llr[lam][node * w : (node + 1) * w] = out


def leaf_llrs(channel_llrs: np.ndarray, decided_prefix, clip: float | None = None,
              f_rule: str = "minsum") -> float:
    """LLR of the next leaf given the decided prefix (stage-memory path)."""
    state = ScState(channel_llrs, clip=clip, f_rule=f_rule)
    prefix = np.asarray(decided_prefix, dtype=np.int8)
    for j, u in enumerate(prefix):
        state.leaf_llr(j)
        state.commit(j, int(u))
    return state.leaf_llr(len(prefix))


def sc_decode(channel_llrs: np.ndarray, code: PolarCode,
              arith: Arithmetic | None = None, f_rule: str = "minsum") -> np.ndarray:
    """Plain successive cancellation: frozen bits forced to 0, info bits by
    hard decision on the leaf LLR."""
    clip = arith.llr_clip if arith is not None else None
    state = ScState(channel_llrs, clip=clip, f_rule=f_rule)
    frozen = code.frozen_mask
    u_hat = np.zeros(code.N, dtype=np.int8)
    for i in range(code.N):
        llr = state.leaf_llr(i)
        u_hat[i] = 0 if frozen[i] else int(llr < 0)
        state.commit(i, int(u_hat[i]))
    return u_hat
