"""Compiled SCL decode kernel for Monte Carlo throughput.

Same algorithm as :class:`polarscl.list_decoder.ListDecoder` (synchronized
traversals, copy-on-write banks, min-sum f, deterministic tie-breaks),
restated as a numba kernel so frame loops run at compiled speed.  Covers
the simulation-relevant configuration subset: sort or deterministic-scan
DTS pruning, hardware or exact metric updates, float or fixed arithmetic,
optional frozen-sibling shortcut.  A dedicated test pins its outputs
bit-for-bit against the reference decoder across the configuration matrix.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .list_decoder import DecodeDiagnostics, DecodeResult
from .polar_code import PolarCode, source_word_passes_crc
from .pruning import DtsPruner, SortPruner
from .sc_engine import Arithmetic


@njit(cache=True, inline="always")
def _softplus(x):
    return np.log1p(np.exp(-abs(x))) + max(x, 0.0)


@njit(cache=True, inline="always")
def _pmu(pm, llr, u, exact, cap):
    if exact:
        return pm + _softplus((2.0 * u - 1.0) * llr)
    hd = 1 if llr < 0 else 0
    out = pm + (abs(llr) if u != hd else 0.0)
    if cap > 0.0:
        out = min(out, cap)
    return out


@njit(cache=True, inline="always")
def _writable(bank, rc, idx, counters):
    """Copy-on-write: return a bank index the caller may overwrite."""
    if rc[idx] == 1:
        return idx
    rc[idx] -= 1
    new = -1
    for k in range(rc.size):
        if rc[k] == 0:
            new = k
            break
    rc[new] = 1
    bank[new] = bank[idx]
    counters[6] += 1
    return new


@njit(cache=True)
def _scl_kernel(chan, frozen, L, pruner_kind, rt_index, exact_pmu,
                llr_clip, pm_cap, fs_enabled, full_copy):
    N = chan.size
    n = 0
    while (1 << n) < N:
        n += 1
    cap = 2 * L + 2

    llr_banks = np.zeros((n + 1, cap, N), dtype=np.float64)
    ucap_banks = np.zeros((n + 1, cap, N), dtype=np.int8)
    llr_rc = np.zeros((n + 1, cap), dtype=np.int32)
    ucap_rc = np.zeros((n + 1, cap), dtype=np.int32)
    llr_ref = np.zeros((L, n + 1), dtype=np.int32)
    ucap_ref = np.zeros((L, n + 1), dtype=np.int32)
    decided = np.zeros((L, N), dtype=np.int8)
    pms = np.zeros(L, dtype=np.float64)
    # counters: prune_steps, rule1, rule2, rule3, starved_bits, min_surv, copies
    counters = np.zeros(7, dtype=np.int64)
    counters[5] = L
    for lam in range(1, n + 1):
        llr_rc[lam, 0] = 1
        ucap_rc[lam, 0] = 1
    P = 1

    ext = np.empty(2 * L, dtype=np.float64)
    order = np.empty(2 * L, dtype=np.int64)
    keep = np.zeros(2 * L, dtype=np.uint8)
    survivors = np.empty(2 * L, dtype=np.int64)
    bits = np.empty(L, dtype=np.int8)
    srt = np.empty(L, dtype=np.float64)
    new_llr_ref = np.empty((L, n + 1), dtype=np.int32)
    new_ucap_ref = np.empty((L, n + 1), dtype=np.int32)
    new_decided = np.empty((L, N), dtype=np.int8)

    i = 0
    while i < N:
        fs_here = fs_enabled and (i % 2 == 0) and frozen[i] and frozen[i + 1]

        # ---- stage updates for this phase -------------------------------
        if i == 0:
            g_stage = -1
            f_start = 1
        else:
            tz = 0
            while ((i >> tz) & 1) == 0:
                tz += 1
            g_stage = n - tz
            f_start = g_stage + 1
        f_stop = n - 1 if fs_here else n

        if g_stage >= 1:
            lam = g_stage
            node = i >> (n - lam)
            w = N >> lam
            base = (node >> 1) * 2 * w
            for p in range(P):
                llr_ref[p, lam] = _writable(llr_banks[lam], llr_rc[lam],
                                            llr_ref[p, lam], counters)
            for p in range(P):
                src = chan if lam == 1 else llr_banks[lam - 1][llr_ref[p, lam - 1]]
                dst = llr_banks[lam][llr_ref[p, lam]]
                ub = ucap_banks[lam][ucap_ref[p, lam]]
                for j in range(w):
                    a = src[base + j]
                    b = src[base + w + j]
                    out = b - a if ub[(node - 1) * w + j] else b + a
                    if llr_clip > 0.0:
                        out = min(max(out, -llr_clip), llr_clip)
                    dst[node * w + j] = out
        for lam in range(f_start, f_stop + 1):
            node = i >> (n - lam)
            w = N >> lam
            base = (node >> 1) * 2 * w
            for p in range(P):
                llr_ref[p, lam] = _writable(llr_banks[lam], llr_rc[lam],
                                            llr_ref[p, lam], counters)
            for p in range(P):
                src = chan if lam == 1 else llr_banks[lam - 1][llr_ref[p, lam - 1]]
                dst = llr_banks[lam][llr_ref[p, lam]]
                for j in range(w):
                    a = src[base + j]
                    b = src[base + w + j]
                    sa = -1.0 if a < 0 else 1.0
                    sb = -1.0 if b < 0 else 1.0
                    out = sa * sb * min(abs(a), abs(b))
                    if llr_clip > 0.0:
                        out = min(max(out, -llr_clip), llr_clip)
                    dst[node * w + j] = out

        # ---- leaf handling ---------------------------------------------
        if fs_here:
            for p in range(P):
                row = llr_banks[n - 1][llr_ref[p, n - 1]]
                l0 = row[i]
                l1 = row[i + 1]
                sa = -1.0 if l0 < 0 else 1.0
                sb = -1.0 if l1 < 0 else 1.0
                fv = sa * sb * min(abs(l0), abs(l1))
                gv = l1 + l0
                if llr_clip > 0.0:
                    fv = min(max(fv, -llr_clip), llr_clip)
                    gv = min(max(gv, -llr_clip), llr_clip)
                pms[p] = _pmu(_pmu(pms[p], fv, 0, exact_pmu, pm_cap),
                              gv, 0, exact_pmu, pm_cap)
            for p in range(P):
                bits[p] = 0
            _commit(ucap_banks, ucap_rc, ucap_ref, bits, P, i, N, n, counters)
            _commit(ucap_banks, ucap_rc, ucap_ref, bits, P, i + 1, N, n, counters)
            i += 2
            continue

        if frozen[i]:
            for p in range(P):
                llr = llr_banks[n][llr_ref[p, n], i]
                pms[p] = _pmu(pms[p], llr, 0, exact_pmu, pm_cap)
            for p in range(P):
                bits[p] = 0
            _commit(ucap_banks, ucap_rc, ucap_ref, bits, P, i, N, n, counters)
            i += 1
            continue

        m = 2 * P
        for p in range(P):
            llr = llr_banks[n][llr_ref[p, n], i]
            ext[2 * p] = _pmu(pms[p], llr, 0, exact_pmu, pm_cap)
            ext[2 * p + 1] = _pmu(pms[p], llr, 1, exact_pmu, pm_cap)

        if m <= L:
            S = m
            for s in range(S):
                survivors[s] = s
            pruned = False
        else:
            pruned = True
            counters[0] += 1
            if pruner_kind == 0 or P < 2:
                # stable selection of the L smallest (pm, index)
                for a in range(m):
                    order[a] = a
                for a in range(1, m):
                    v = order[a]
                    b = a - 1
                    while b >= 0 and (ext[order[b]] > ext[v]
                                      or (ext[order[b]] == ext[v] and order[b] > v)):
                        order[b + 1] = order[b]
                        b -= 1
                    order[b + 1] = v
                S = L
                for s in range(S):
                    survivors[s] = order[s]
                survivors[:S].sort()
            else:
                # double thresholding from the current P metrics
                for p in range(P):
                    srt[p] = pms[p]
                srt[:P].sort()
                at = srt[P // 2]
                ridx = rt_index if P == L else P - 1 - (L - 1 - rt_index)
                if ridx < P // 2:
                    ridx = P // 2
                if ridx > P - 1:
                    ridx = P - 1
                rt = srt[ridx]
                kept1 = 0
                for a in range(m):
                    if ext[a] < at:
                        keep[a] = 1
                        kept1 += 1
                    else:
                        keep[a] = 0
                pruned2 = 0
                for a in range(m):
                    if ext[a] > rt:
                        pruned2 += 1
                filled = 0
                nsurv = kept1
                for a in range(m):
                    if nsurv >= L:
                        break
                    if keep[a] == 0 and not ext[a] > rt:
                        keep[a] = 1
                        nsurv += 1
                        filled += 1
                S = 0
                for a in range(m):
                    if keep[a]:
                        survivors[S] = a
                        S += 1
                counters[1] += kept1
                counters[2] += pruned2
                counters[3] += filled
                if S < L:
                    counters[4] += 1

        # ---- lazy-copy reassignment ------------------------------------
        for s in range(S):
            parent = survivors[s] >> 1
            bits[s] = survivors[s] & 1
            for lam in range(1, n + 1):
                new_llr_ref[s, lam] = llr_ref[parent, lam]
                new_ucap_ref[s, lam] = ucap_ref[parent, lam]
            for j in range(N):
                new_decided[s, j] = decided[parent, j]
        for lam in range(1, n + 1):
            for s in range(S):
                llr_rc[lam, new_llr_ref[s, lam]] += 1
                ucap_rc[lam, new_ucap_ref[s, lam]] += 1
            for p in range(P):
                llr_rc[lam, llr_ref[p, lam]] -= 1
                ucap_rc[lam, ucap_ref[p, lam]] -= 1
        for s in range(S):
            pms[s] = ext[survivors[s]]
            for lam in range(1, n + 1):
                llr_ref[s, lam] = new_llr_ref[s, lam]
                ucap_ref[s, lam] = new_ucap_ref[s, lam]
            for j in range(N):
                decided[s, j] = new_decided[s, j]
            decided[s, i] = bits[s]
        P = S
        if pruned and P < counters[5]:
            counters[5] = P
        if full_copy:
            for lam in range(1, n + 1):
                for p in range(P):
                    llr_ref[p, lam] = _writable(llr_banks[lam], llr_rc[lam],
                                                llr_ref[p, lam], counters)
                    ucap_ref[p, lam] = _writable(ucap_banks[lam], ucap_rc[lam],
                                                 ucap_ref[p, lam], counters)
        _commit(ucap_banks, ucap_rc, ucap_ref, bits, P, i, N, n, counters)
        i += 1

    return decided, pms, P, counters


@njit(cache=True)
def _commit(ucap_banks, ucap_rc, ucap_ref, bits, P, i, N, n, counters):
    for p in range(P):
        ucap_ref[p, n] = _writable(ucap_banks[n], ucap_rc[n],
                                   ucap_ref[p, n], counters)
        ucap_banks[n][ucap_ref[p, n], i] = bits[p]
    node = i
    lam = n
    while node & 1 and lam > 1:
        w = N >> lam
        pn = node >> 1
        for p in range(P):
            ucap_ref[p, lam - 1] = _writable(ucap_banks[lam - 1], ucap_rc[lam - 1],
                                             ucap_ref[p, lam - 1], counters)
        for p in range(P):
            src = ucap_banks[lam][ucap_ref[p, lam]]
            dst = ucap_banks[lam - 1][ucap_ref[p, lam - 1]]
            for j in range(w):
                lv = src[(node - 1) * w + j]
                rv = src[node * w + j]
                dst[pn * 2 * w + j] = lv ^ rv
                dst[pn * 2 * w + w + j] = rv
        node = pn
        lam -= 1


class FastListDecoder:
    """Drop-in compiled equivalent of :class:`ListDecoder` for the
    configurations the simulation harness uses.

    Raises ValueError for unsupported options (tanh f rule, random DTS
    fill); callers fall back to the reference decoder for those.
    """

    def __init__(self, code: PolarCode, list_size: int, pruner=None,
                 arith: Arithmetic | None = None, pmu: str = "hw",
                 frozen_sibling: bool = False, copy_mode: str = "lazy",
                 f_rule: str = "minsum"):
        if list_size < 1 or list_size & (list_size - 1):
            raise ValueError(f"list_size must be a power of two >= 1, got {list_size}")
        if f_rule != "minsum":
            raise ValueError("fast engine supports the min-sum f rule only")
        pruner = pruner if pruner is not None else SortPruner()
        if isinstance(pruner, SortPruner):
            self._kind, self._rt = 0, 0
        elif isinstance(pruner, DtsPruner):
            if pruner.fill_policy != "scan":
                raise ValueError("fast engine supports deterministic DTS fill only")
            self._kind = 1
            self._rt = (list_size - 2 if pruner.rt_order_index is None
                        else pruner.rt_order_index)
            if not list_size // 2 <= self._rt < list_size:
                raise ValueError("rt_order_index out of range for list size")
        else:
            raise ValueError(f"unsupported pruner {pruner!r}")
        arith = arith or Arithmetic()
        if pmu not in ("hw", "exact"):
            raise ValueError(f"pmu must be 'hw' or 'exact', got {pmu!r}")
        if pmu == "exact" and arith.fixed:
            raise ValueError("exact path-metric update is float-mode only")
        if copy_mode not in ("lazy", "full"):
            raise ValueError(f"copy_mode must be 'lazy' or 'full', got {copy_mode!r}")
        self.code = code
        self.L = list_size
        self.arith = arith
        self._exact = pmu == "exact"
        self._fs = frozen_sibling
        self._full = copy_mode == "full"

    def decode(self, channel_llrs: np.ndarray) -> DecodeResult:
        code = self.code
        chan = np.ascontiguousarray(channel_llrs, dtype=np.float64)
        if chan.size != code.N:
            raise ValueError(f"expected {code.N} channel LLRs, got {chan.size}")
        clip = self.arith.llr_clip or 0.0
        cap = self.arith.pm_cap or 0.0
        decided, pms, P, c = _scl_kernel(
            chan, code.frozen_mask, self.L, self._kind, self._rt,
            self._exact, clip, cap, self._fs, self._full,
        )
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
            prune_steps=int(c[0]),
            rule1_kept=int(c[1]),
            rule2_pruned=int(c[2]),
            rule3_filled=int(c[3]),
            starved_bits=int(c[4]),
            min_survivors=int(c[5]),
            banks_copied=int(c[6]),
        )
        return DecodeResult(u_hat=decided[selected].copy(), diagnostics=diag)
