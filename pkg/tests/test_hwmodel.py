"""Cost model: anchor fidelity, structural terms, telemetry cross-validation."""

import numpy as np
import pytest

import ftsinv as fi
from ftsinv import hwmodel
from ftsinv.errors import ConfigError

PINV_ANCHORS = {1: 53965, 2: 27559, 3: 18529, 4: 14014, 5: 11434, 6: 9499}
SVD_ANCHORS = {1: 154673, 2: 77918, 3: 52118, 4: 39218, 5: 31693, 6: 26318}


class TestCalibration:
    def test_parse_rejects_garbage(self):
        with pytest.raises(ConfigError):
            hwmodel.CalibrationTable.parse("pinv.latency.k1 = not_a_number")
        with pytest.raises(ConfigError):
            hwmodel.CalibrationTable.parse("just words, no assignment")

    def test_provenance_tags_kept(self):
        calib = hwmodel.default_calibration()
        assert calib.entries["pinv.latency.k1"].provenance == "pinv-parallel-sweep"
        assert calib.entries["fft.latency"].provenance == "method-survey"

    def test_fit_residuals_recorded(self):
        calib = hwmodel.default_calibration()
        assert 0 < calib.pinv_fit.max_rel_residual < 0.05
        assert 0 < calib.svd_fit.max_rel_residual < 0.05

    def test_missing_entries_detected(self):
        with pytest.raises(ConfigError):
            hwmodel.CalibrationTable.parse("fft.latency = 4300")


class TestAnchorFidelity:
    def test_pinv_anchors_within_5_percent(self):
        for k, anchor in PINV_ANCHORS.items():
            got = hwmodel.pinv_cost(k).latency_cycles
            assert abs(got - anchor) / anchor <= 0.05

    def test_svd_anchors_within_5_percent(self):
        for k, anchor in SVD_ANCHORS.items():
            got = hwmodel.svd_cost(k).latency_cycles
            assert abs(got - anchor) / anchor <= 0.05

    def test_pinv_k1_to_k6_ratio(self):
        ratio = (hwmodel.pinv_cost(1).latency_cycles
                 / hwmodel.pinv_cost(6).latency_cycles)
        assert abs(ratio - 5.68) / 5.68 <= 0.10

    def test_fft_anchor_exact(self):
        calib = hwmodel.default_calibration()
        n0 = int(calib["fft.anchor_points"])
        assert hwmodel.fft_cost(n0, "post").latency_cycles == 4300
        assert hwmodel.fft_cost(n0, "post").fmax_mhz == 98.0


class TestStructure:
    def test_butterfly_slot_formula(self):
        c1024 = hwmodel.fft_cost(1024, "post")
        c512 = hwmodel.fft_cost(512, "post")
        # the size-dependent part grows by the slot difference plus io/stage terms
        slots_diff = (1024 // 2) * 10 - (512 // 2) * 9
        calib = hwmodel.default_calibration()
        expected = (slots_diff + 512 * int(calib["fft.io_cycles_per_point"])
                    + int(calib["fft.norm_cycles_per_stage"]))
        assert c1024.latency_cycles - c512.latency_cycles == expected

    def test_pre_mode_never_faster(self):
        for n in (8, 64, 512, 4096):
            assert (hwmodel.fft_cost(n, "pre").latency_cycles
                    >= hwmodel.fft_cost(n, "post").latency_cycles)

    def test_latency_monotone_dsp_increasing(self):
        prev_lat, prev_dsp = np.inf, 0
        for k in range(1, 9):
            cost = hwmodel.pinv_cost(k)
            assert cost.latency_cycles < prev_lat
            assert cost.dsp > prev_dsp
            prev_lat, prev_dsp = cost.latency_cycles, cost.dsp

    def test_time_consistency(self):
        cost = hwmodel.svd_cost(3)
        assert cost.time_us == pytest.approx(cost.latency_cycles / cost.fmax_mhz)

    def test_desk_scale_work_term(self):
        calib = hwmodel.default_calibration()
        got = hwmodel.pinv_cost(1, n=64, m=48).latency_cycles
        assert got == 64 * 48 + round(calib.pinv_fit.intercept)
        got = hwmodel.svd_cost(2, n=64, m=48, rank=10).latency_cycles
        expect = -(-10 * (2 * 64 + 48) // 2) + round(calib.svd_fit.intercept)
        assert got == expect

    def test_validation(self):
        with pytest.raises(ConfigError):
            hwmodel.pinv_cost(0)
        with pytest.raises(ConfigError):
            hwmodel.fft_cost(48)
        with pytest.raises(ConfigError):
            hwmodel.resource_table("dft")


class TestResources:
    def test_fft_row_verbatim(self):
        assert hwmodel.resource_table("fft") == (5, 3, 5540)

    def test_pinv_rows_verbatim(self):
        for k in range(1, 7):
            dsp, bram, _ = hwmodel.resource_table("pinv", k)
            assert dsp == k and bram == 27
        assert hwmodel.resource_table("pinv", 1)[2] == 6390
        assert hwmodel.resource_table("pinv", 6)[2] == 6670

    def test_svd_rows_verbatim(self):
        ram_row = {1: 73, 2: 76, 3: 76, 4: 80, 5: 80, 6: 78}
        for k in range(1, 7):
            for method in ("tsvd", "tik"):
                dsp, bram, _ = hwmodel.resource_table(method, k)
                assert dsp == 2 * k
                assert bram == ram_row[k]


class TestCompareMethods:
    def test_headline_ratios_within_bands(self):
        _, ratios, flags = hwmodel.compare_methods()
        assert 6.8 <= ratios["time_pinv_k1_over_fft"] <= 9.2
        assert 20.4 <= ratios["time_tik_k1_over_fft"] <= 27.6
        assert 1.27 <= ratios["time_pinv_k6_over_fft"] <= 1.73
        assert 2.72 <= ratios["time_tik_k6_over_fft"] <= 3.68
        assert flags == []

    def test_both_svd_pinv_ratio_views_emitted(self):
        _, ratios, _ = hwmodel.compare_methods()
        assert ratios["cycles_svd_over_pinv_k1"] == pytest.approx(2.87, abs=0.05)
        assert ratios["opcount_svd_over_pinv_square"] == 3.0

    def test_flagging_detects_distorted_calibration(self):
        calib = hwmodel.default_calibration()
        text = hwmodel.resources.files("ftsinv.data").joinpath("calibration.txt").read_text()
        distorted = text.replace("fft.fmax = 98.0", "fft.fmax = 300.0")
        calib2 = hwmodel.CalibrationTable.parse(distorted)
        _, _, flags = hwmodel.compare_methods(calib=calib2)
        assert flags


class TestCrossValidation:
    """Latency-model work terms equal the live multiplier counters."""

    def test_pinv_term_vs_counter(self):
        rng = np.random.default_rng(0)
        for _ in range(5):
            n, m = int(rng.integers(4, 40)), int(rng.integers(4, 40))
            adag = rng.standard_normal((n, m))
            res = fi.reconstruct_pinv(adag, rng.standard_normal(m), fmt=12)
            assert res.telemetry.mults == n * m

    def test_svd_term_vs_counter(self):
        rng = np.random.default_rng(1)
        for _ in range(5):
            m, n = int(rng.integers(6, 32)), int(rng.integers(6, 32))
            a = rng.standard_normal((m, n))
            f = fi.svd_factorize(a)
            rank = int(rng.integers(1, min(m, n) + 1))
            z = fi.penalize(f.xi, fi.Tsvd(rank))
            res = fi.reconstruct_svd(f, z, rng.standard_normal(m), fmt=12)
            assert res.telemetry.mults == rank * (2 * n + m)

    def test_fft_term_vs_counter(self):
        for n in (16, 128, 1024):
            plan = fi.FftPlan.make(n, bits=14, mode="post", headroom_bits=3)
            res = fi.fft_bfp(np.ones(n, dtype=complex), plan)
            slots = (n // 2) * (n.bit_length() - 1)
            assert res.telemetry.butterflies == slots
            assert res.telemetry.mults == 4 * slots
