"""List-pruning strategies and threshold tracking.

Two interchangeable pruners reduce the 2L path extensions back to L
survivors at each information bit:

* exact sorting (keep the L smallest path metrics), and
* double thresholding: keep everything below an acceptance threshold AT,
  discard everything above a rejection threshold RT, and fill the remainder
  from the [AT, RT] band in priority-encoder scan order.

AT is the upper median of the previous L surviving metrics and RT an order
statistic with configurable index (default L-2, the second maximum).  The
threshold values are produced by comparator-network emulations of the
tracking hardware; tests cross-check them against plain sorting.

All order statistics are multiset order statistics with 0-based indexing;
ties between equal metrics are broken by extension scan order
(parent-major, bit 0 before bit 1), which keeps every outcome deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class DtsThresholds:
    """Acceptance/rejection threshold pair for one pruning step."""

    at: float
    rt: float
    rt_order_index: int

    def __post_init__(self):
        if self.rt < self.at:
            raise ValueError(f"need at <= rt, got at={self.at}, rt={self.rt}")


@dataclass(frozen=True)
class PruneOutcome:
    """Survivor indices (into the extension array) plus rule statistics."""

    survivors: np.ndarray
    kept_by_rule1: int
    pruned_by_rule2: int
    filled_by_rule3: int
    starved: bool


def lpo_sort(ext_pms: np.ndarray, list_size: int) -> np.ndarray:
    """Exact pruning: indices of the ``list_size`` smallest metrics.

    Returned ascending by extension index; ties at the selection boundary
    go to the lower extension index.
    """
    ext_pms = np.asarray(ext_pms, dtype=np.float64)
    if ext_pms.size <= list_size:
        return np.arange(ext_pms.size)
    order = np.argsort(ext_pms, kind="stable")
    return np.sort(order[:list_size])


def omega_cardinality(ext_pms: np.ndarray, threshold: float) -> int:
    """|{extension metrics strictly below threshold}|."""
    return int(np.count_nonzero(np.asarray(ext_pms) < threshold))


def lpo_dts(ext_pms: np.ndarray, thresholds: DtsThresholds, list_size: int,
            fill_order: np.ndarray | None = None) -> PruneOutcome:
    """Double-thresholding prune of the extension metrics.

    Rule 1 keeps pm < AT, rule 2 discards pm > RT, rule 3 fills up to
    ``list_size`` survivors from the inclusive [AT, RT] band.  The band is
    scanned in extension order unless ``fill_order`` (a permutation of the
    extension indices, e.g. from a seeded RNG) overrides it.  ``starved`` is
    set when the two rules leave fewer than ``list_size`` candidates.
    """
    ext_pms = np.asarray(ext_pms, dtype=np.float64)
    m = ext_pms.size
    # A degenerate +inf AT means "thresholds disabled": nothing is accepted
    # outright, the whole band is left to the rule-3 scan.
    if np.isinf(thresholds.at):
        keep = np.zeros(m, dtype=bool)
    else:
        keep = ext_pms < thresholds.at
    drop = ext_pms > thresholds.rt
    kept1 = int(np.count_nonzero(keep))
    pruned2 = int(np.count_nonzero(drop))
    band = ~keep & ~drop

    need = list_size - kept1
    filled = 0
    if need > 0 and band.any():
        band_idx = np.flatnonzero(band)
        if fill_order is not None:
            rank = np.empty(m, dtype=np.int64)
            rank[fill_order] = np.arange(m)
            band_idx = band_idx[np.argsort(rank[band_idx], kind="stable")]
        take = band_idx[:need]
        keep[take] = True
        filled = take.size
    survivors = np.flatnonzero(keep)
    return PruneOutcome(
        survivors=survivors,
        kept_by_rule1=kept1,
        pruned_by_rule2=pruned2,
        filled_by_rule3=filled,
        starved=survivors.size < min(list_size, m),
    )


def _sorted_halves(pms: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    h = pms.size // 2
    return np.sort(pms[:h]), np.sort(pms[h:])


def median_network(pms: np.ndarray) -> float:
    """Upper median (0-based order statistic L/2) via the tracking network.

    Emulates the two radix-L/2 sorters followed by log2(L) compare-and-mux
    stages that halve the candidate windows: compare the sub-medians of the
    two sorted windows, keep the upper part of the smaller-median window and
    the lower part of the other.
    """
    pms = np.asarray(pms, dtype=np.float64)
    L = pms.size
    if L < 4 or L & (L - 1):
        raise ValueError(f"median network needs a power-of-two size >= 4, got {L}")
    a, b = _sorted_halves(pms)
    s = L // 2
    while s > 1:
        m0, m1 = a[s // 2], b[s // 2]
        if m0 == m1:
            return float(m0)
        if m0 < m1:
            a, b = a[s // 2 :], b[: s // 2]
        else:
            a, b = a[: s // 2], b[s // 2 :]
        s //= 2
    return float(max(a[0], b[0]))


def max_network(pms: np.ndarray) -> float:
    """Maximum via a balanced comparison tree."""
    vals = np.asarray(pms, dtype=np.float64).copy()
    if vals.size == 0:
        raise ValueError("max_network needs at least one value")
    while vals.size > 1:
        if vals.size % 2:
            vals = np.append(vals, -np.inf)
        vals = np.maximum(vals[0::2], vals[1::2])
    return float(vals[0])


def second_max_network(pms: np.ndarray) -> float:
    """Second-largest value (multiset order statistic L-2).

    Tournament reduction: the runner-up is the largest value that lost a
    comparison directly to the winner, so only log2(L) candidates need a
    second pass.
    """
    vals = list(np.asarray(pms, dtype=np.float64))
    if len(vals) < 2:
        raise ValueError("second_max_network needs at least two values")
    entries = [(v, [])  for v in vals]  # (value, losers-to-this-entry)
    while len(entries) > 1:
        if len(entries) % 2:
            entries.append((-np.inf, []))
        nxt = []
        for (va, la), (vb, lb) in zip(entries[0::2], entries[1::2]):
            if va >= vb:
                la.append(vb)
                nxt.append((va, la))
            else:
                lb.append(va)
                nxt.append((vb, lb))
        entries = nxt
    _, losers = entries[0]
    return max_network(np.array(losers))


def track_thresholds(pms: np.ndarray, rt_order_index: int | None = None) -> DtsThresholds:
    """(AT, RT) for the next information bit from the current survivor metrics.

    AT is the upper median; RT the requested order statistic (default the
    second maximum).  Power-of-two inputs of at least 4 use the comparator
    networks; other sizes, and RT indices the max/second-max trees cannot
    produce, fall back to sorting.
    """
    pms = np.asarray(pms, dtype=np.float64)
    L = pms.size
    if L < 2:
        raise ValueError("thresholds need at least two path metrics")
    if rt_order_index is None:
        rt_order_index = L - 2
    if not L // 2 <= rt_order_index < L:
        raise ValueError(
            f"rt_order_index must be in [{L // 2}, {L - 1}], got {rt_order_index}"
        )
    networked = L >= 4 and not (L & (L - 1))
    if networked:
        at = median_network(pms)
        if rt_order_index == L - 1:
            rt = max_network(pms)
        elif rt_order_index == L - 2:
            rt = second_max_network(pms)
        else:
            rt = float(np.sort(pms)[rt_order_index])
    else:
        srt = np.sort(pms)
        at = float(srt[L // 2])
        rt = float(srt[rt_order_index])
    return DtsThresholds(at=at, rt=rt, rt_order_index=rt_order_index)


class SortPruner:
    """Exact baseline: full sort, keep the L best."""

    name = "sort"

    def select(self, ext_pms: np.ndarray, parent_pms: np.ndarray,
               list_size: int) -> tuple[np.ndarray, PruneOutcome | None]:
        return lpo_sort(ext_pms, list_size), None


class DtsPruner:
    """Double-thresholding pruner with threshold tracking.

    ``rt_order_index`` of None means L-2 (second maximum), which trades a
    small starvation risk for cheaper tracking hardware; L-1 never starves.  ``fill_policy`` is "scan" (deterministic priority
    encoder) or "random" (seeded shuffle of the band).
    """

    name = "dts"

    def __init__(self, rt_order_index: int | None = None,
                 fill_policy: str = "scan", seed: int | None = None):
        if fill_policy not in ("scan", "random"):
            raise ValueError(f"fill_policy must be 'scan' or 'random', got {fill_policy!r}")
        self.rt_order_index = rt_order_index
        self.fill_policy = fill_policy
        self._rng = np.random.default_rng(seed) if fill_policy == "random" else None

    def _rt_index_for(self, count: int, list_size: int) -> int:
        idx = list_size - 2 if self.rt_order_index is None else self.rt_order_index
        if count != list_size:
            # After starvation the list may hold fewer than L paths; keep the
            # same distance from the top, clamped to the valid range.
            idx = count - 1 - (list_size - 1 - idx)
        return min(max(idx, count // 2), count - 1)

    def select(self, ext_pms: np.ndarray, parent_pms: np.ndarray,
               list_size: int) -> tuple[np.ndarray, PruneOutcome | None]:
        parent_pms = np.asarray(parent_pms, dtype=np.float64)
        if ext_pms.size <= list_size:
            return np.arange(ext_pms.size), None
        if parent_pms.size < 2:
            # Thresholds are undefined below two paths; exact selection.
            return lpo_sort(ext_pms, list_size), None
        th = track_thresholds(parent_pms, self._rt_index_for(parent_pms.size, list_size))
        fill_order = None
        if self._rng is not None:
            fill_order = self._rng.permutation(ext_pms.size)
        outcome = lpo_dts(ext_pms, th, list_size, fill_order=fill_order)
        return outcome.survivors, outcome
