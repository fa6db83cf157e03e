import math
import os

import numpy as np
import pytest

from cohlab.experiment import (
    CSV_HEADER,
    RudelsonRow,
    SweepConfig,
    SweepRecord,
    ThresholdEstimate,
    coupon_reference,
    estimate_threshold,
    laman_brute_oracle,
    read_csv,
    resolve_workers,
    rudelson_probe,
    run_sweep,
    sweep_metadata,
    theoretical_rate,
    wilson_interval,
    write_csv,
)
from cohlab.flats import max_incoherent_flat
from cohlab.sampling import philox
from cohlab.varieties import CayleyMenger, LowRank, MinkowskiSum


class TestWilson:
    def test_contains_the_point_estimate(self):
        lo, hi = wilson_interval(7, 10)
        assert lo < 0.7 < hi

    def test_extremes_stay_in_unit_interval(self):
        lo, hi = wilson_interval(0, 20)
        assert lo == 0.0 and 0 < hi < 0.2
        lo, hi = wilson_interval(20, 20)
        assert 0.8 < lo < 1 and hi == 1.0

    def test_width_shrinks_with_trials(self):
        w_small = np.diff(wilson_interval(5, 10))
        w_big = np.diff(wilson_interval(500, 1000))
        assert w_big < w_small

    def test_validates_inputs(self):
        with pytest.raises(ValueError):
            wilson_interval(-1, 10)
        with pytest.raises(ValueError):
            wilson_interval(11, 10)
        with pytest.raises(ValueError):
            wilson_interval(0, 0)


class TestSweepConfig:
    def test_accepts_reasonable_config(self):
        cfg = SweepConfig("lowrank:m=3,n=3,r=1", (0.2, 0.5, 1.0), 10, 1)
        assert cfg.rho_grid == (0.2, 0.5, 1.0)

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(rho_grid=()),
            dict(rho_grid=(0.5, 0.2)),
            dict(rho_grid=(0.0, 0.5)),
            dict(rho_grid=(0.5, 1.2)),
            dict(trials_per_rho=0),
            dict(lam=0.5),
            dict(tol=0.0),
        ],
    )
    def test_rejects_bad_values(self, kwargs):
        base = dict(
            model="lowrank:m=3,n=3,r=1",
            rho_grid=(0.2, 0.5),
            trials_per_rho=5,
            base_seed=0,
        )
        base.update(kwargs)
        with pytest.raises(ValueError):
            SweepConfig(**base)


class TestRunSweep:
    def test_full_rate_row_always_succeeds(self):
        cfg = SweepConfig("lowrank:m=3,n=3,r=1", (0.3, 1.0), 25, 7)
        records = run_sweep(cfg)
        assert records[-1].rho == 1.0
        assert records[-1].success_rate == 1.0

    def test_deterministic_and_worker_independent(self):
        cfg = SweepConfig("symlowrank:n=4,r=1", (0.3, 0.6, 1.0), 20, 11)
        serial = run_sweep(cfg, workers=1)
        threaded = run_sweep(cfg, workers=3)
        assert serial == threaded
        assert serial == run_sweep(cfg)

    def test_no_decrease_beyond_pooled_ci(self):
        cfg = SweepConfig("lowrank:m=4,n=4,r=1", tuple(np.linspace(0.1, 1.0, 10)), 30, 3)
        records = run_sweep(cfg)
        for a, b in zip(records, records[1:]):
            pooled = (a.ci_high - a.ci_low) + (b.ci_high - b.ci_low)
            assert b.success_rate >= a.success_rate - pooled

    def test_progress_callback_sees_every_row(self):
        cfg = SweepConfig("lowrank:m=3,n=3,r=1", (0.4, 0.8), 5, 2)
        seen = []
        records = run_sweep(cfg, progress=seen.append)
        assert seen == records

    def test_bad_model_descriptor(self):
        cfg = SweepConfig("nonsense:z=1", (0.5,), 2, 0)
        with pytest.raises(ValueError):
            run_sweep(cfg)


class TestThreshold:
    def test_interpolates_the_crossing(self):
        rows = [
            SweepRecord(0.2, 10, 2, 0.2, 0.0, 0.5),
            SweepRecord(0.4, 10, 8, 0.8, 0.5, 1.0),
        ]
        est = estimate_threshold(rows)
        assert est.bracketed
        assert est.rho_half == pytest.approx(0.3)

    def test_unbracketed_when_curve_never_crosses(self):
        rows = [SweepRecord(0.5, 10, 9, 0.9, 0.6, 1.0)]
        est = estimate_threshold(rows)
        assert not est.bracketed and est.rho_half is None

    def test_first_upward_crossing_wins(self):
        rows = [
            SweepRecord(0.1, 10, 1, 0.1, 0, 1),
            SweepRecord(0.2, 10, 6, 0.6, 0, 1),
            SweepRecord(0.3, 10, 4, 0.4, 0, 1),
            SweepRecord(0.4, 10, 9, 0.9, 0, 1),
        ]
        est = estimate_threshold(rows)
        assert est.rho_half == pytest.approx(0.18)


class TestTheoreticalRate:
    def test_desk_scale_reference_value(self):
        # rank-2 30x30: coh = 2*58/900, rate = coh * ln(900)
        model = LowRank(30, 30, 2)
        expected = (2 * 58 / 900) * math.log(900)
        assert theoretical_rate(model) == pytest.approx(expected, abs=1e-12)
        assert expected == pytest.approx(0.8768, abs=5e-5)

    def test_lambda_scales_linearly_before_clamp(self):
        model = LowRank(30, 30, 2)
        assert theoretical_rate(model, lam=1.0) * 1.05 == pytest.approx(
            theoretical_rate(model, lam=1.05)
        )

    def test_clamped_at_one(self):
        assert theoretical_rate(LowRank(30, 30, 2), lam=4.0) == 1.0

    def test_log_base_flag(self):
        model = LowRank(30, 30, 1)  # low enough coherence not to clamp
        by_e = theoretical_rate(model, log_base="e")
        assert 0 < by_e < 1
        assert theoretical_rate(model, log_base="2") == pytest.approx(by_e / math.log(2))
        assert theoretical_rate(model, log_base="10") == pytest.approx(by_e / math.log(10))

    def test_validates_arguments(self):
        model = LowRank(3, 3, 1)
        with pytest.raises(ValueError):
            theoretical_rate(model, lam=0.5)
        with pytest.raises(ValueError):
            theoretical_rate(model, c=0.0)
        with pytest.raises(ValueError):
            theoretical_rate(model, log_base="3")
        with pytest.raises(ValueError):
            theoretical_rate(MinkowskiSum(LowRank(2, 2, 1), LowRank(2, 2, 1)))


class TestCouponReference:
    def test_full_rate(self):
        assert coupon_reference(16, 4, 1.0) == 1.0

    def test_zero_rate(self):
        assert coupon_reference(16, 4, 0.0) == 0.0

    def test_half_rate_reference_value(self):
        # (1 - 0.5^4)^4, exact in binary
        assert coupon_reference(16, 4, 0.5) == 0.7724761962890625

    def test_rejects_non_divisor(self):
        with pytest.raises(ValueError):
            coupon_reference(16, 5, 0.5)
        with pytest.raises(ValueError):
            coupon_reference(16, 4, 1.5)


class TestRudelsonProbe:
    def test_full_rate_norms_vanish(self):
        flat = max_incoherent_flat(32, 4)
        rows = rudelson_probe(flat, [1.0], 5, philox(3))
        assert rows[0].mean_norm == pytest.approx(0.0, abs=1e-12)

    def test_norms_decrease_in_rate(self):
        flat = max_incoherent_flat(64, 8)
        rows = rudelson_probe(flat, [0.2, 0.5, 1.0], 20, philox(4))
        norms = [r.mean_norm for r in rows]
        assert norms[0] > norms[1] > norms[2]

    def test_bound_shape_formula(self):
        flat = max_incoherent_flat(64, 8)
        rows = rudelson_probe(flat, [0.25], 2, philox(5))
        row = rows[0]
        assert row.max_leverage == pytest.approx(8 / 64, abs=1e-9)
        assert row.bound_shape == pytest.approx(
            math.sqrt(math.log(64) / 0.25) * math.sqrt(row.max_leverage)
        )

    def test_validates_inputs(self):
        flat = max_incoherent_flat(8, 2)
        with pytest.raises(ValueError):
            rudelson_probe(flat, [0.5], 0, philox(0))
        with pytest.raises(ValueError):
            rudelson_probe(flat, [0.0, 0.5], 3, philox(0))


class TestLamanOracle:
    def test_triangle_is_rigid(self):
        assert laman_brute_oracle(3, [(0, 1), (1, 2), (2, 0)])

    def test_four_cycle_is_flexible(self):
        assert not laman_brute_oracle(4, [(0, 1), (1, 2), (2, 3), (3, 0)])

    def test_k4_minus_edge_is_rigid(self):
        assert laman_brute_oracle(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)])

    def test_double_banana_needs_more_than_counts(self):
        # complete graph is always rigid; removing everything is not
        assert laman_brute_oracle(5, [(i, j) for i in range(5) for j in range(i + 1, 5)])
        assert not laman_brute_oracle(5, [])

    def test_single_vertex_and_single_edge(self):
        assert laman_brute_oracle(1, [])
        assert laman_brute_oracle(2, [(0, 1)])
        assert not laman_brute_oracle(2, [])

    def test_size_guard(self):
        with pytest.raises(ValueError, match="n <= 7"):
            laman_brute_oracle(8, [])

    def test_rejects_bad_edges(self):
        with pytest.raises(ValueError):
            laman_brute_oracle(3, [(0, 0)])
        with pytest.raises(ValueError):
            laman_brute_oracle(3, [(0, 3)])
        with pytest.raises(ValueError):
            laman_brute_oracle(3, [(0, 1), (1, 0)])


class TestCsvRoundTrip:
    def records(self):
        cfg = SweepConfig("lowrank:m=3,n=3,r=1", (0.3, 0.7, 1.0), 8, 5)
        return run_sweep(cfg), cfg

    def test_round_trip_equality(self, tmp_path):
        records, cfg = self.records()
        path = tmp_path / "sweep.csv"
        write_csv(records, path, sweep_metadata(cfg))
        back, meta = read_csv(path)
        assert back == records
        assert meta["base_seed"] == "5"
        assert meta["model"] == "lowrank:m=3,n=3,r=1"
        assert meta["rng"] == "numpy-philox4x64-seedseq"
        assert "code_version" in meta

    def test_reader_rejects_excess_successes(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text(CSV_HEADER + "\n0.5,10,11,1.1,0.0,1.0\n")
        with pytest.raises(ValueError, match=":2:"):
            read_csv(path)

    def test_reader_rejects_malformed_numbers(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text(CSV_HEADER + "\n0.5,ten,1,0.1,0.0,1.0\n")
        with pytest.raises(ValueError, match=":2:"):
            read_csv(path)

    def test_reader_rejects_wrong_field_count(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text(CSV_HEADER + "\n0.5,10,1\n")
        with pytest.raises(ValueError, match="6 fields"):
            read_csv(path)

    def test_reader_requires_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("0.5,10,1,0.1,0.0,1.0\n")
        with pytest.raises(ValueError, match="header"):
            read_csv(path)

    def test_metadata_must_be_single_line(self, tmp_path):
        with pytest.raises(ValueError):
            write_csv([], tmp_path / "x.csv", {"note": "a\nb"})


class TestResolveWorkers:
    def test_explicit_wins(self, monkeypatch):
        monkeypatch.setenv("COHLAB_THREADS", "7")
        assert resolve_workers(2) == 2

    def test_unset_means_serial(self, monkeypatch):
        monkeypatch.delenv("COHLAB_THREADS", raising=False)
        assert resolve_workers() == 1

    def test_zero_means_auto(self, monkeypatch):
        monkeypatch.setenv("COHLAB_THREADS", "0")
        assert resolve_workers() == (os.cpu_count() or 1)

    def test_env_value_used(self, monkeypatch):
        monkeypatch.setenv("COHLAB_THREADS", "3")
        assert resolve_workers() == 3
