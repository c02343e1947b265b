"""CRC-aided successive-cancellation list decoding.

The decoder runs L synchronized SC traversals over shared per-stage memory
banks.  After each pruning step surviving paths initially alias their
parent's banks; a bank is physically duplicated only right before a path
writes to one it still shares (copy-on-write).  ``copy_mode="full"``
materializes every shared bank eagerly instead, which is the oracle the
lazy discipline is tested against.

Path metrics are non-negative penalties; the hardware update adds |L| when
the hypothesized bit disagrees with the hard decision, the exact update
adds softplus((2u-1)L).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .polar_code import PolarCode, source_word_passes_crc
from .pruning import SortPruner
from .sc_engine import Arithmetic, f_node, f_node_tanh, g_node, phase_update_stages


def _softplus(x):
    """log(1 + e^x), stable for large |x|.

    Evaluated per element through libm so the result is bit-identical to
    the compiled engine (numpy's vectorized exp may differ by 1 ulp).
    """
    x = np.asarray(x, dtype=np.float64)
    out = np.empty(x.shape, dtype=np.float64)
    it = np.nditer([x, out], op_flags=[["readonly"], ["writeonly"]])
    for xi, oi in it:
        v = float(xi)
        oi[...] = math.log1p(math.exp(-abs(v))) + max(v, 0.0)
    return out


def pmu_exact(pm, llr, u):
    """Exact path-metric update: pm + log(1 + e^((2u-1)L)).  Float mode."""
    pm = np.asarray(pm, dtype=np.float64)
    s = (2.0 * np.asarray(u, dtype=np.float64) - 1.0) * np.asarray(llr, dtype=np.float64)
    return pm + _softplus(s)


def pmu_hw(pm, llr, u, cap: float | None = None):
    """Hardware update: keep pm when u matches the hard decision, else add |L|."""
    pm = np.asarray(pm, dtype=np.float64)
    llr = np.asarray(llr, dtype=np.float64)
    mismatch = (llr < 0).astype(np.int8) != (np.asarray(u) & 1)
    out = pm + np.where(mismatch, np.abs(llr), 0.0)
    if cap is not None:
        out = np.minimum(out, cap)
    return out


def pmu_frozen_sibling(pm, llr0, llr1, cap: float | None = None):
    """Collapsed two-bit update for an all-frozen sibling pair.

    Adds |L| of each parent-stage LLR that votes for bit 1; equivalent to
    applying the hardware update through the sibling's f and g nodes.
    """
    pm = np.asarray(pm, dtype=np.float64)
    llr0 = np.asarray(llr0, dtype=np.float64)
    llr1 = np.asarray(llr1, dtype=np.float64)
    out = pm + np.where(llr0 < 0, np.abs(llr0), 0.0) + np.where(llr1 < 0, np.abs(llr1), 0.0)
    if cap is not None:
        out = np.minimum(out, cap)
    return out


@dataclass
class DecodeDiagnostics:
    """Per-frame decoder statistics, serialized by the simulation harness."""

    final_pms: np.ndarray
    crc_pass_mask: np.ndarray
    selected_path: int
    crc_fallback: bool
    path_count: int
    prune_steps: int = 0
    rule1_kept: int = 0
    rule2_pruned: int = 0
    rule3_filled: int = 0
    starved_bits: int = 0
    min_survivors: int = 0
    banks_copied: int = 0


@dataclass
class DecodeResult:
    u_hat: np.ndarray
    diagnostics: DecodeDiagnostics = field(repr=False, default=None)


class _BankStore:
    """Refcounted pools of full-width rows, one pool per tree stage."""

    def __init__(self, n: int, width: int, dtype, capacity: int):
        self.data = [None] + [np.zeros((capacity, width), dtype=dtype) for _ in range(n)]
        self.rc = [None] + [np.zeros(capacity, dtype=np.int32) for _ in range(n)]
        self.copies = 0

    def alloc(self, lam: int) -> int:
        free = np.flatnonzero(self.rc[lam] == 0)
        if free.size == 0:
            raise RuntimeError("bank pool exhausted (internal invariant violation)")
        idx = int(free[0])
        self.rc[lam][idx] = 1
        return idx

    def writable(self, lam: int, idx: int) -> int:
        """Return a bank the caller may write: ``idx`` itself if unshared,
        otherwise a fresh copy (copy-on-write)."""
        if self.rc[lam][idx] == 1:
            return idx
        self.rc[lam][idx] -= 1
        new = self.alloc(lam)
        self.data[lam][new] = self.data[lam][idx]
        self.copies += 1
        return new


class ListDecoder:
    """SCL decoder with a pluggable pruner and lazy path copying.

    Parameters
    ----------
    code : PolarCode
    list_size : int
        Power of two, >= 1.
    pruner : SortPruner | DtsPruner, optional
        Defaults to exact sorting.
    arith : Arithmetic, optional
        Float (default) or fixed-point number format.
    pmu : {"hw", "exact"}
        Path-metric update rule; "exact" requires float arithmetic.
    frozen_sibling : bool
        Collapse all-frozen sibling pairs into a single metric update.  Never
        changes decoded output, only the modeled schedule.
    copy_mode : {"lazy", "full"}
    """

    def __init__(self, code: PolarCode, list_size: int, pruner=None,
                 arith: Arithmetic | None = None, pmu: str = "hw",
                 frozen_sibling: bool = False, copy_mode: str = "lazy",
                 f_rule: str = "minsum"):
        if list_size < 1 or list_size & (list_size - 1):
            raise ValueError(f"list_size must be a power of two >= 1, got {list_size}")
        if pmu not in ("hw", "exact"):
            raise ValueError(f"pmu must be 'hw' or 'exact', got {pmu!r}")
        if copy_mode not in ("lazy", "full"):
            raise ValueError(f"copy_mode must be 'lazy' or 'full', got {copy_mode!r}")
        arith = arith or Arithmetic()
        if pmu == "exact" and arith.fixed:
            raise ValueError("exact path-metric update is float-mode only")
        self.code = code
        self.L = list_size
        self.pruner = pruner if pruner is not None else SortPruner()
        self.arith = arith
        self.pmu_mode = pmu
        self.frozen_sibling = frozen_sibling
        self.copy_mode = copy_mode
        self._f = f_node if f_rule == "minsum" else f_node_tanh

    # -- per-frame state ---------------------------------------------------

    def _pmu(self, pms, llrs, u):
        if self.pmu_mode == "exact":
            return pmu_exact(pms, llrs, u)
        return pmu_hw(pms, llrs, u, cap=self.arith.pm_cap)

    def decode(self, channel_llrs: np.ndarray) -> DecodeResult:
        code, L = self.code, self.L
        N, n = code.N, code.n
        chan = np.asarray(channel_llrs, dtype=np.float64)
        if chan.size != N:
            raise ValueError(f"expected {N} channel LLRs, got {chan.size}")
        clip = self.arith.llr_clip

        cap = 2 * L + 2
        llr_b = _BankStore(n, N, np.float64, cap)
        ucap_b = _BankStore(n, N, np.int8, cap)
        llr_ref = np.zeros((L, n + 1), dtype=np.int32)
        ucap_ref = np.zeros((L, n + 1), dtype=np.int32)
        for lam in range(1, n + 1):
            llr_ref[0, lam] = llr_b.alloc(lam)
            ucap_ref[0, lam] = ucap_b.alloc(lam)
        decided = np.zeros((L, N), dtype=np.int8)
        pms = np.zeros(L, dtype=np.float64)
        P = 1

        stats = dict(prune_steps=0, rule1=0, rule2=0, rule3=0,
                     starved_bits=0, min_survivors=L)
        frozen = code.frozen_mask
        fs_pair = frozen[0::2] & frozen[1::2] if self.frozen_sibling else None

        def ensure_writable(store, refs, lam):
            for p in range(P):
                refs[p, lam] = store.writable(lam, refs[p, lam])

        def gather(store, refs, lam, lo, hi):
            if lam == 0:
                return np.broadcast_to(chan[lo:hi], (P, hi - lo))
            return store.data[lam][refs[:P, lam], lo:hi]

        def node_update(lam, node, use_g):
            w = N >> lam
            p = node >> 1
            src = gather(llr_b, llr_ref, lam - 1, p * 2 * w, (p + 1) * 2 * w)
            a, b = src[:, :w], src[:, w:]
            if use_g:
                us = gather(ucap_b, ucap_ref, lam, (node - 1) * w, node * w)
                out = g_node(a, b, us, clip)
            else:
                out = self._f(a, b, clip)
            ensure_writable(llr_b, llr_ref, lam)
            llr_b.data[lam][llr_ref[:P, lam], node * w : (node + 1) * w] = out

        def commit(i, bits):
            ensure_writable(ucap_b, ucap_ref, n)
            ucap_b.data[n][ucap_ref[:P, n], i] = bits
            node, lam = i, n
            while node & 1 and lam > 1:
                w = N >> lam
                left = gather(ucap_b, ucap_ref, lam, (node - 1) * w, node * w)
                right = gather(ucap_b, ucap_ref, lam, node * w, (node + 1) * w)
                p = node >> 1
                ensure_writable(ucap_b, ucap_ref, lam - 1)
                dst = ucap_b.data[lam - 1]
                rows = ucap_ref[:P, lam - 1]
                dst[rows, p * 2 * w : p * 2 * w + w] = left ^ right
                dst[rows, p * 2 * w + w : (p + 1) * 2 * w] = right
                node, lam = p, lam - 1

        def leaf_llrs_now(i):
            return gather(llr_b, llr_ref, n, i, i + 1)[:, 0].copy()

        def reassign(survivor_ext, ext_pms, i):
            nonlocal P, pms, decided, llr_ref, ucap_ref
            parents = survivor_ext >> 1
            bits = (survivor_ext & 1).astype(np.int8)
            S = parents.size
            new_llr = llr_ref[parents].copy()
            new_ucap = ucap_ref[parents].copy()
            for lam in range(1, n + 1):
                np.add.at(llr_b.rc[lam], new_llr[:, lam], 1)
                np.add.at(llr_b.rc[lam], llr_ref[:P, lam], -1)
                np.add.at(ucap_b.rc[lam], new_ucap[:, lam], 1)
                np.add.at(ucap_b.rc[lam], ucap_ref[:P, lam], -1)
            llr_ref[:S] = new_llr
            ucap_ref[:S] = new_ucap
            decided[:S] = decided[parents]
            pms[:S] = ext_pms[survivor_ext]
            P = S
            if self.copy_mode == "full":
                for store, refs in ((llr_b, llr_ref), (ucap_b, ucap_ref)):
                    for lam in range(1, n + 1):
                        ensure_writable(store, refs, lam)
            return bits

        i = 0
        while i < N:
            if fs_pair is not None and i % 2 == 0 and fs_pair[i // 2]:
                # Frozen sibling: both bits are 0; update the metric straight
                # from the parent-stage LLR pair and skip the leaf stage.
                g_stage, f_start = phase_update_stages(n, i)
                if g_stage is not None:
                    node_update(g_stage, i >> (n - g_stage), use_g=True)
                for lam in range(f_start, n):
                    node_update(lam, i >> (n - lam), use_g=False)
                seg = gather(llr_b, llr_ref, n - 1, i, i + 2)
                l0, l1 = seg[:, 0], seg[:, 1]
                # Two-step arithmetic keeps fs on/off outputs bit-identical.
                pms[:P] = self._pmu(pms[:P], self._f(l0, l1, clip), 0)
                pms[:P] = self._pmu(pms[:P], g_node(l0, l1, 0, clip), 0)
                commit(i, np.zeros(P, dtype=np.int8))
                commit(i + 1, np.zeros(P, dtype=np.int8))
                i += 2
                continue

            g_stage, f_start = phase_update_stages(n, i)
            if g_stage is not None:
                node_update(g_stage, i >> (n - g_stage), use_g=True)
            for lam in range(f_start, n + 1):
                node_update(lam, i >> (n - lam), use_g=False)
            llrs = leaf_llrs_now(i)

            if frozen[i]:
                pms[:P] = self._pmu(pms[:P], llrs, 0)
                commit(i, np.zeros(P, dtype=np.int8))
            else:
                ext = np.empty(2 * P, dtype=np.float64)
                ext[0::2] = self._pmu(pms[:P], llrs, 0)
                ext[1::2] = self._pmu(pms[:P], llrs, 1)
                if 2 * P <= L:
                    survivors, outcome, pruned = np.arange(2 * P), None, False
                else:
                    survivors, outcome = self.pruner.select(ext, pms[:P], L)
                    pruned = True
                if pruned:
                    stats["prune_steps"] += 1
                if outcome is not None:
                    stats["rule1"] += outcome.kept_by_rule1
                    stats["rule2"] += outcome.pruned_by_rule2
                    stats["rule3"] += outcome.filled_by_rule3
                    stats["starved_bits"] += int(outcome.starved)
                bits = reassign(np.asarray(survivors), ext, i)
                if pruned:
                    stats["min_survivors"] = min(stats["min_survivors"], P)
                decided[np.arange(P), i] = bits
                commit(i, bits)
            i += 1

        return self._select_output(decided, pms, P, llr_b, ucap_b, stats)

    def _select_output(self, decided, pms, P, llr_b, ucap_b, stats):
        code = self.code
        crc_pass = np.array(
            [source_word_passes_crc(decided[p], code) for p in range(P)], dtype=bool
        )
        order = np.lexsort((np.arange(P), pms[:P]))
        passing = [p for p in order if crc_pass[p]]
        fallback = not passing
        selected = int(order[0]) if fallback else int(passing[0])
        diag = DecodeDiagnostics(
            final_pms=pms[:P].copy(),
            crc_pass_mask=crc_pass,
            selected_path=selected,
            crc_fallback=fallback,
            path_count=P,
            prune_steps=stats["prune_steps"],
            rule1_kept=stats["rule1"],
            rule2_pruned=stats["rule2"],
            rule3_filled=stats["rule3"],
            starved_bits=stats["starved_bits"],
            min_survivors=stats["min_survivors"],
            banks_copied=llr_b.copies + ucap_b.copies,
        )
        return DecodeResult(u_hat=decided[selected].copy(), diagnostics=diag)


def scl_decode(channel_llrs: np.ndarray, code: PolarCode, list_size: int,
               pruner=None, **kwargs) -> DecodeResult:
    """One-shot convenience wrapper around :class:`ListDecoder`."""
    return ListDecoder(code, list_size, pruner=pruner, **kwargs).decode(channel_llrs)
