"""List decoder: metric updates, path management, and CRC-aided selection."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polarscl import (
    Arithmetic,
    ChannelParams,
    DtsPruner,
    ListDecoder,
    PolarCode,
    add_awgn,
    channel_llr,
    assemble_source_word,
    construct_frozen_set,
    encode,
    modulate,
    scl_decode,
)
from polarscl.list_decoder import (
    pmu_exact,
    pmu_frozen_sibling,
    pmu_hw,
)
from polarscl.sc_engine import f_node, g_node, sc_decode

from conftest import scl_bruteforce


def _frame(code, rng, snr_db=2.0):
    u = assemble_source_word(rng.integers(0, 2, code.info_bit_count), code)
    sigma = ChannelParams(snr_db, code.K / code.N).sigma
    y = add_awgn(modulate(encode(u, code)), sigma, rng)
    return u, channel_llr(y, sigma)


# ---------------------------------------------------------------------------
# metric updates

@given(st.floats(0, 500), st.floats(-60, 60), st.integers(0, 1))
def test_pmu_exact_formula(pm, llr, u):
    got = float(pmu_exact(pm, llr, u))
    want = pm + np.log1p(np.exp(min((2 * u - 1) * llr, 700)))
    assert got == pytest.approx(want, rel=1e-12)


@given(st.floats(0, 500), st.floats(-60, 60), st.integers(0, 1))
def test_pmu_hw_penalizes_only_mismatch(pm, llr, u):
    got = float(pmu_hw(pm, llr, u))
    hard = 1 if llr < 0 else 0
    assert got == (pm if u == hard else pm + abs(llr))


@given(st.floats(0, 500), st.floats(-600, 600), st.integers(0, 1))
def test_pmu_hw_saturates(pm, llr, u):
    assert float(pmu_hw(pm, llr, u, cap=255.0)) <= 255.0


@given(st.floats(0, 200), st.floats(-50, 50), st.integers(0, 1))
def test_pmu_hw_is_high_llr_limit_of_exact(pm, llr, u):
    # the hardware rule drops the log(1+e^-|x|) term, so it never exceeds
    # the exact metric and differs by at most log(2)
    hw = float(pmu_hw(pm, llr, u))
    ex = float(pmu_exact(pm, llr, u))
    assert hw <= ex + 1e-9
    assert ex - hw <= np.log(2.0) + 1e-9


def test_pmu_frozen_sibling_equals_two_step_grid():
    # exhaustive small grid: collapsed update == f-then-g hardware updates
    vals = np.arange(-8, 9, dtype=float)
    for l0 in vals:
        for l1 in vals:
            for pm in (0.0, 10.0):
                two = pmu_hw(pmu_hw(pm, f_node(l0, l1), 0),
                             g_node(l0, l1, 0), 0)
                one = pmu_frozen_sibling(pm, l0, l1)
                assert float(one) == float(two)


def test_pmu_frozen_sibling_saturation_matches_capped_two_step():
    cap = 255.0
    for l0, l1, pm in [(-200.0, -100.0, 0.0), (-30.0, -40.0, 250.0)]:
        two = pmu_hw(pmu_hw(pm, f_node(l0, l1), 0, cap),
                     g_node(l0, l1, 0), 0, cap)
        assert float(pmu_frozen_sibling(pm, l0, l1, cap)) == float(two)


# ---------------------------------------------------------------------------
# construction validation

def test_list_decoder_validates_arguments(small_code):
    with pytest.raises(ValueError):
        ListDecoder(small_code, 3)
    with pytest.raises(ValueError):
        ListDecoder(small_code, 4, pmu="soft")
    with pytest.raises(ValueError):
        ListDecoder(small_code, 4, copy_mode="eager")
    with pytest.raises(ValueError):
        ListDecoder(small_code, 4, pmu="exact",
                    arith=Arithmetic(mode="fixed"))
    with pytest.raises(ValueError):
        ListDecoder(small_code, 4).decode(np.zeros(16))


# ---------------------------------------------------------------------------
# decoding behavior

def test_scl_list1_equals_sc(small_code):
    rng = np.random.default_rng(0)
    for _ in range(100):
        _, llr = _frame(small_code, rng, snr_db=0.0)
        res = scl_decode(llr, small_code, 1)
        assert np.array_equal(res.u_hat, sc_decode(llr, small_code))


def test_scl_matches_bruteforce_list_oracle():
    # independent implementation: explicit prefixes, full recomputation,
    # exact stable sort pruning
    n, K = 4, 10
    code = PolarCode(n=n, K=K, r=0, frozen_set=construct_frozen_set(n, K))
    rng = np.random.default_rng(42)
    for L in (2, 4):
        dec = ListDecoder(code, L)
        for _ in range(30):
            llr = rng.normal(0, 3, code.N)
            res = dec.decode(llr)
            words, pms = scl_bruteforce(llr, code, L)
            assert np.allclose(np.sort(res.diagnostics.final_pms), np.sort(pms))
            sel = int(np.lexsort((np.arange(pms.size), pms))[0])
            assert np.array_equal(res.u_hat, words[sel])


def test_lazy_equals_full_copy(mid_code):
    rng = np.random.default_rng(1)
    lazy = ListDecoder(mid_code, 8, copy_mode="lazy")
    full = ListDecoder(mid_code, 8, copy_mode="full")
    for _ in range(30):
        _, llr = _frame(mid_code, rng, snr_db=1.0)
        a, b = lazy.decode(llr), full.decode(llr)
        assert np.array_equal(a.u_hat, b.u_hat)
        assert np.array_equal(a.diagnostics.final_pms, b.diagnostics.final_pms)
        assert a.diagnostics.banks_copied <= b.diagnostics.banks_copied


def test_frozen_sibling_never_changes_output(mid_code):
    rng = np.random.default_rng(2)
    off = ListDecoder(mid_code, 4, frozen_sibling=False)
    on = ListDecoder(mid_code, 4, frozen_sibling=True)
    for _ in range(30):
        _, llr = _frame(mid_code, rng, snr_db=1.0)
        a, b = off.decode(llr), on.decode(llr)
        assert np.array_equal(a.u_hat, b.u_hat)
        assert np.array_equal(a.diagnostics.final_pms, b.diagnostics.final_pms)


def test_crc_selection_prefers_passing_path(small_code):
    # at moderate noise some frames are saved specifically by the CRC:
    # the best-metric path fails the check while a worse one passes
    rng = np.random.default_rng(3)
    dec = ListDecoder(small_code, 8)
    saved = 0
    for _ in range(300):
        u, llr = _frame(small_code, rng, snr_db=1.0)
        res = dec.decode(llr)
        d = res.diagnostics
        if not d.crc_fallback and d.selected_path != int(np.argmin(d.final_pms)):
            saved += 1
            assert d.crc_pass_mask[d.selected_path]
    assert saved > 0


def test_crc_fallback_flag(small_code):
    # heavy noise eventually produces a frame where no path passes the CRC
    rng = np.random.default_rng(4)
    dec = ListDecoder(small_code, 2)
    seen_fallback = False
    for _ in range(200):
        _, llr = _frame(small_code, rng, snr_db=-3.0)
        d = dec.decode(llr).diagnostics
        if d.crc_fallback:
            seen_fallback = True
            assert not d.crc_pass_mask.any()
            assert d.selected_path == int(np.lexsort(
                (np.arange(d.path_count), d.final_pms))[0])
    assert seen_fallback


def test_exact_pmu_mode_decodes(small_code):
    rng = np.random.default_rng(5)
    dec = ListDecoder(small_code, 4, pmu="exact")
    ok = 0
    for _ in range(50):
        u, llr = _frame(small_code, rng, snr_db=3.0)
        ok += int(np.array_equal(dec.decode(llr).u_hat, u))
    assert ok >= 45


def test_fixed_point_decoding(mid_code, fixed_arith):
    from polarscl import quantize
    rng = np.random.default_rng(6)
    dec = ListDecoder(mid_code, 4, arith=fixed_arith)
    ok = 0
    for _ in range(40):
        u, llr = _frame(mid_code, rng, snr_db=3.0)
        res = dec.decode(quantize(llr, fixed_arith.q_channel))
        ok += int(np.array_equal(res.u_hat, u))
        assert res.diagnostics.final_pms.max() <= fixed_arith.pm_cap
    assert ok >= 35


def test_dts_pruner_in_decoder(mid_code):
    rng = np.random.default_rng(7)
    dec = ListDecoder(mid_code, 8, pruner=DtsPruner())
    sort_dec = ListDecoder(mid_code, 8)
    dts_ok = sort_ok = 0
    for _ in range(60):
        u, llr = _frame(mid_code, rng, snr_db=2.5)
        r = dec.decode(llr)
        dts_ok += int(np.array_equal(r.u_hat, u))
        sort_ok += int(np.array_equal(sort_dec.decode(llr).u_hat, u))
        d = r.diagnostics
        assert d.prune_steps > 0
        assert d.rule1_kept + d.rule3_filled <= d.prune_steps * 8
    assert dts_ok >= sort_ok - 5  # near-identical performance


def test_dts_rt_max_never_starves(mid_code):
    rng = np.random.default_rng(8)
    dec = ListDecoder(mid_code, 8, pruner=DtsPruner(rt_order_index=7))
    for _ in range(40):
        _, llr = _frame(mid_code, rng, snr_db=1.0)
        d = dec.decode(llr).diagnostics
        assert d.starved_bits == 0
        assert d.path_count == 8


def test_diagnostics_bookkeeping(mid_code):
    rng = np.random.default_rng(9)
    dec = ListDecoder(mid_code, 8)
    _, llr = _frame(mid_code, rng)
    d = dec.decode(llr).diagnostics
    # one prune step per info bit after the list has ramped up to L
    assert d.prune_steps == mid_code.K - 3  # 2P<=L for the first 3 info bits
    assert d.final_pms.size == d.path_count == 8
    assert 1 <= d.min_survivors <= 8
    assert d.banks_copied > 0


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_noiseless_roundtrip_all_list_sizes(seed):
    n, K, r = 5, 16, 4
    code = PolarCode(n=n, K=K, r=r, frozen_set=construct_frozen_set(n, K),
                     crc_poly=0x3)
    rng = np.random.default_rng(seed)
    u = assemble_source_word(rng.integers(0, 2, code.info_bit_count), code)
    llr = channel_llr(modulate(encode(u, code)), 0.0)
    for L in (1, 2, 8):
        assert np.array_equal(scl_decode(llr, code, L).u_hat, u)
