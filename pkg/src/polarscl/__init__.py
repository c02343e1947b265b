"""Polar-code SCL decoding with double-thresholding list pruning."""

from .polar_code import (
    PolarCode,
    assemble_source_word,
    construct_frozen_set,
    count_frozen_siblings,
    crc_check,
    crc_compute,
    encode,
    extract_payload,
    load_frozen_set,
    source_word_passes_crc,
)
from .channel import ChannelParams, add_awgn, channel_llr, modulate, quantize
from .sc_engine import Arithmetic, f_node, g_node, hard_decision, leaf_llrs, sc_decode
from .pruning import (
    DtsPruner,
    DtsThresholds,
    PruneOutcome,
    SortPruner,
    lpo_dts,
    lpo_sort,
    max_network,
    median_network,
    second_max_network,
    track_thresholds,
)
from .list_decoder import (
    ListDecoder,
    pmu_exact,
    pmu_frozen_sibling,
    pmu_hw,
    scl_decode,
)
from .latency_model import (
    CycleReport,
    HardwareConfig,
    cycle_report,
    cycles_closed_form,
    cycles_with_fs,
    simulate_schedule,
    throughput_mbps,
)

__version__ = "0.1.0"

from .fast_engine import FastListDecoder  # noqa: E402
from .sim import (  # noqa: E402
    FerResult,
    SimConfig,
    emit,
    load_results,
    run_point,
    run_sweep,
    wilson_interval,
)
