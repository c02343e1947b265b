"""Cycle-accurate schedule model of the semi-parallel list decoder.

One shared schedule covers all list lanes (they run in lockstep), so the
cycle count is independent of the list size and of the channel data.  An
f/g node producing w LLRs costs ceil(w / M) cycles on the M-PE array (one
output per PE per cycle); every leaf-stage node op is followed by one
pruning cycle and one lazy-copy cycle.  Threshold tracking runs off the
critical path and is charged nothing; a slack check verifies the schedule
leaves it at least two cycles between uses.
"""

from __future__ import annotations

from dataclasses import dataclass

from .polar_code import PolarCode, count_frozen_siblings


@dataclass(frozen=True)
class HardwareConfig:
    """Per-lane processing-element count and clock."""

    M: int
    clock_mhz: float = 641.0
    frozen_sibling_enabled: bool = False

    def __post_init__(self):
        if self.M < 1 or self.M & (self.M - 1):
            raise ValueError(f"M must be a power of two, got {self.M}")
        if self.clock_mhz <= 0:
            raise ValueError("clock_mhz must be positive")


@dataclass(frozen=True)
class CycleReport:
    closed_form_cycles: int
    simulated_cycles: int
    fs_count: int
    throughput_mbps: float


def _check_m(N: int, M: int):
    if M < 1 or M & (M - 1):
        raise ValueError(f"M must be a power of two, got {M}")
    if not M < N // 2:
        raise ValueError(f"semi-parallel model needs M < N/2, got M={M}, N={N}")


def cycles_closed_form(N: int, M: int) -> int:
    """Decoding latency without the frozen-sibling shortcut:
    4N + (n - 2 - log2(M)) * N / M clock cycles."""
    _check_m(N, M)
    n = N.bit_length() - 1
    log2m = M.bit_length() - 1
    return 4 * N + (n - 2 - log2m) * (N // M)


def cycles_with_fs(N: int, M: int, fs_count: int) -> int:
    """Latency with the frozen-sibling shortcut: 5 cycles saved per sibling."""
    if not 0 <= fs_count <= N // 2:
        raise ValueError(f"fs_count must be in [0, N/2], got {fs_count}")
    return cycles_closed_form(N, M) - 5 * fs_count


def throughput_mbps(cycles: int, N: int, clock_mhz: float) -> float:
    """Coded throughput in Mbps: N bits per frame at clock_mhz / cycles."""
    if cycles <= 0:
        raise ValueError("cycles must be positive")
    return N * clock_mhz / cycles


def simulate_schedule(code: PolarCode, hw: HardwareConfig,
                      return_dts_cycles: bool = False):
    """Walk the scheduling tree and count clock cycles.

    Depth-first over internal nodes: the f op, the left subtree, the g op,
    the right subtree.  Leaf-stage ops (width 1) take one cycle plus two
    cycles for pruning and lazy copy.  When enabled, an all-frozen sibling
    pair collapses its six leaf-stage cycles into one metric-update cycle.
    """
    N, n = code.N, code.n
    _check_m(N, hw.M)
    frozen = code.frozen_mask
    fs_on = hw.frozen_sibling_enabled
    cycles = 0
    dts_at: list[int] = []

    def op_cost(w: int) -> int:
        return max(1, -(-w // hw.M))

    def visit(d: int, node: int):
        nonlocal cycles
        if fs_on and d == n - 1 and frozen[2 * node] and frozen[2 * node + 1]:
            cycles += 1  # single collapsed PMU cycle
            return
        w = N >> (d + 1)
        for child in (2 * node, 2 * node + 1):
            cycles += op_cost(w)
            if d + 1 == n:
                dts_at.append(cycles)
                cycles += 2  # DTS + LCP
            else:
                visit(d + 1, child)

    visit(0, 0)
    if return_dts_cycles:
        return cycles, dts_at
    return cycles


def schedule_ops(code: PolarCode, frozen_sibling_enabled: bool = False) -> list[tuple]:
    """Operation sequence of the schedule, one entry per node/pipeline op.

    Entries are ("f", stage), ("g", stage), ("dts",), ("lcp",), ("pmu",)
    with stage counted from 1 at the root ops.  Useful for checking the
    timing-diagram order independently of the PE count.
    """
    N, n = code.N, code.n
    frozen = code.frozen_mask
    ops: list[tuple] = []

    def visit(d: int, node: int):
        if frozen_sibling_enabled and d == n - 1 and frozen[2 * node] and frozen[2 * node + 1]:
            ops.append(("pmu",))
            return
        for kind, child in (("f", 2 * node), ("g", 2 * node + 1)):
            ops.append((kind, d + 1))
            if d + 1 == n:
                ops.append(("dts",))
                ops.append(("lcp",))
            else:
                visit(d + 1, child)

    visit(0, 0)
    return ops


def min_tta_slack(code: PolarCode, hw: HardwareConfig) -> int:
    """Smallest number of cycles between consecutive pruning ops, minus the
    pruning cycle itself; the threshold tracker needs at least 2."""
    _, dts_at = simulate_schedule(code, hw, return_dts_cycles=True)
    if len(dts_at) < 2:
        return 1 << 30
    return min(b - a - 1 for a, b in zip(dts_at, dts_at[1:]))


def cycle_report(code: PolarCode, hw: HardwareConfig) -> CycleReport:
    """Closed-form vs simulated latency plus derived throughput."""
    fs = count_frozen_siblings(code) if hw.frozen_sibling_enabled else 0
    closed = cycles_with_fs(code.N, hw.M, fs)
    simulated = simulate_schedule(code, hw)
    return CycleReport(
        closed_form_cycles=closed,
        simulated_cycles=simulated,
        fs_count=fs,
        throughput_mbps=throughput_mbps(simulated, code.N, hw.clock_mhz),
    )
