import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from qiopa.analysis import (FilterConfig, discriminate, fidelity_verdict,
                            filtered_visibility_curve, fit_fringe,
                            fit_visibility_log_curve, o_filter,
                            parity_discriminate, scan_fringe)
from qiopa.detection import (Branch, DetectionConfig, ExperimentConfig,
                             ShotBatch, run_experiment)
from qiopa.errors import FitError, InsufficientDataError
from qiopa.fock import make_gain_params
from qiopa.model import mean_fringe, visibility_ideal


def batch_from_signals(i_plus, i_minus, branch=None):
    n = len(i_plus)
    if branch is None:
        branch = np.full(n, int(Branch.STIMULATED_ODD))
    zeros = np.zeros(n, dtype=np.int64)
    return ShotBatch(branch, zeros, zeros,
                     np.asarray(i_plus, dtype=np.int64),
                     np.asarray(i_minus, dtype=np.int64),
                     np.asarray(i_plus, dtype=float),
                     np.asarray(i_minus, dtype=float))


class TestFitFringe:
    def test_exact_synthetic_fringe(self, phi_grid12):
        gp = make_gain_params(1.0)
        means = np.array([mean_fringe(phi, gp).n_plus_mean for phi in phi_grid12])
        fit = fit_fringe(phi_grid12, means)
        assert fit.visibility == pytest.approx(visibility_ideal(gp), abs=1e-9)
        assert fit.visibility == pytest.approx(0.5766, abs=1e-4)
        assert fit.phase0 == pytest.approx(0.0, abs=1e-9)
        assert fit.offset == pytest.approx(2 * gp.m_bar + 0.5, abs=1e-9)

    def test_constant_data_has_zero_visibility(self, phi_grid12):
        fit = fit_fringe(phi_grid12, np.full(12, 3.7))
        assert fit.visibility == pytest.approx(0.0, abs=1e-12)

    def test_weighted_matches_unweighted_on_exact_data(self, phi_grid12):
        gp = make_gain_params(0.8)
        means = np.array([mean_fringe(phi, gp).n_plus_mean for phi in phi_grid12])
        errors = np.full(12, 0.05)
        weighted = fit_fringe(phi_grid12, means, errors)
        unweighted = fit_fringe(phi_grid12, means)
        assert weighted.visibility == pytest.approx(unweighted.visibility, rel=1e-9)
        assert weighted.visibility_error > 0.0

    def test_recovers_phase_offset(self, phi_grid12):
        means = 5.0 + 2.0 * np.cos(phi_grid12 + 0.6)
        fit = fit_fringe(phi_grid12, means)
        assert fit.phase0 == pytest.approx(0.6, abs=1e-9)
        assert fit.amplitude == pytest.approx(2.0, abs=1e-9)
        assert fit.offset == pytest.approx(5.0, abs=1e-9)

    def test_degenerate_grid_rejected(self):
        with pytest.raises(FitError):
            fit_fringe(np.zeros(8), np.ones(8))
        with pytest.raises(FitError):
            fit_fringe(np.array([0.0, 2 * np.pi, 4 * np.pi, 0.0]), np.ones(4))

    def test_narrow_span_rejected(self):
        phis = np.array([0.0, 0.3, 0.6, 0.9, 1.2])
        with pytest.raises(FitError):
            fit_fringe(phis, np.ones(5))

    def test_too_few_phases_rejected(self):
        with pytest.raises(FitError):
            fit_fringe(np.array([0.0, 1.0, 4.0]), np.ones(3))

    def test_zero_offset_rejected(self, phi_grid12):
        with pytest.raises(FitError):
            fit_fringe(phi_grid12, np.zeros(12))


class TestOFilter:
    def test_zero_threshold_retains_all(self):
        batch = batch_from_signals([5, 2, 0], [1, 2, 4])
        kept, fraction = o_filter(batch, FilterConfig(0.0))
        assert len(kept) == 3 and fraction == 1.0

    def test_rule_example(self):
        batch = batch_from_signals([5, 2, 0], [1, 2, 4])
        kept, fraction = o_filter(batch, FilterConfig(2.0))
        assert [(s.signals) for s in [kept[0], kept[1]]] == [(5.0, 1.0), (0.0, 4.0)]
        assert fraction == pytest.approx(2.0 / 3.0)

    def test_accepts_bare_float(self):
        batch = batch_from_signals([5, 2], [1, 2])
        kept, _ = o_filter(batch, 2.0)
        assert len(kept) == 1

    def test_rejects_negative_threshold(self):
        with pytest.raises(ValueError):
            FilterConfig(-1.0)

    @given(arrays(np.float64, st.integers(1, 60),
                  elements=st.floats(0, 100)),
           arrays(np.float64, st.integers(1, 60),
                  elements=st.floats(0, 100)),
           st.floats(min_value=0.0, max_value=50.0))
    def test_soundness_and_idempotence(self, i_plus, i_minus, q):
        n = min(len(i_plus), len(i_minus))
        i_plus, i_minus = i_plus[:n], i_minus[:n]
        batch = ShotBatch(np.zeros(n), np.zeros(n), np.zeros(n),
                          np.zeros(n), np.zeros(n), i_plus, i_minus)
        kept, fraction = o_filter(batch, q)
        assert np.all(np.abs(kept.i_plus - kept.i_minus) >= q)
        assert len(kept) == round(fraction * n)
        again, fraction2 = o_filter(kept, q)
        assert len(again) == len(kept)
        if len(kept):
            assert fraction2 == 1.0


@pytest.fixture(scope="module")
def points():
    cfg = ExperimentConfig(
        g=1.5, p=1.0, v_in=1.0, detection=DetectionConfig(),
        phi_grid=tuple(np.linspace(0, 2 * np.pi, 12, endpoint=False)),
        shots_per_point=4000, seed=21)
    return run_experiment(cfg)


class TestFilteredCurve:

    def test_q_zero_matches_raw_fit_bit_for_bit(self, points):
        curve = filtered_visibility_curve(points, [0.0])
        raw = scan_fringe(points, q=0.0)
        assert curve[0].visibility == raw.visibility
        assert curve[0].retained_fraction == 1.0
        assert curve[0].status == "ok"

    def test_insufficient_data_flagged_not_dropped(self, points):
        huge = 1e9
        curve = filtered_visibility_curve(points, [0.0, huge])
        assert [pt.status for pt in curve] == ["ok", "insufficient-data"]
        assert math.isnan(curve[1].visibility)
        assert curve[1].retained_fraction == 0.0

    def test_log_curve_fit_recovers_synthetic_params(self):
        x = np.linspace(0.01, 1.0, 30)
        y = 0.3 - 0.08 * np.log(x + 0.05)
        a, b, c = fit_visibility_log_curve(x, y)
        assert a == pytest.approx(0.3, abs=1e-6)
        assert b == pytest.approx(0.08, abs=1e-6)
        assert c == pytest.approx(0.05, abs=1e-5)

    def test_log_curve_needs_enough_points(self):
        with pytest.raises(InsufficientDataError):
            fit_visibility_log_curve([0.5, 1.0], [0.3, 0.2])


class TestDiscrimination:
    def test_rule_examples(self):
        batch = batch_from_signals([10, 3], [1, 3])
        result = discriminate(batch)
        assert result.guesses.tolist() == [1, 0]
        assert result.success_rate == 1.0
        assert result.decided_fraction == 0.5

    def test_spontaneous_shots_are_not_scored(self):
        branch = np.array([int(Branch.SPONTANEOUS), int(Branch.STIMULATED_ODD)])
        batch = batch_from_signals([9, 2], [1, 5], branch)
        result = discriminate(batch)
        # the spontaneous shot is decided but carries no ground truth
        assert result.decided_fraction == 1.0
        assert result.success_rate == 0.0

    def test_parity_discrimination_is_exact_without_loss(self):
        cfg = ExperimentConfig(
            g=1.2, p=1.0, v_in=1.0, detection=DetectionConfig(eta=1.0),
            phi_grid=(0.0,), shots_per_point=3000, seed=5)
        _, plus_batch = run_experiment(cfg)[0]
        assert parity_discriminate(plus_batch).success_rate == 1.0
        cfg2 = ExperimentConfig(
            g=1.2, p=1.0, v_in=1.0, detection=DetectionConfig(eta=1.0),
            phi_grid=(math.pi,), shots_per_point=3000, seed=6)
        _, minus_batch = run_experiment(cfg2)[0]
        assert parity_discriminate(minus_batch).success_rate == 1.0

    def test_parity_scrambles_at_half_efficiency(self):
        # thinning at eta = 1/2 makes the detected parity a fair coin
        cfg = ExperimentConfig(
            g=3.0, p=1.0, v_in=1.0, detection=DetectionConfig(eta=0.5),
            phi_grid=(0.0,), shots_per_point=20_000, seed=7)
        _, batch = run_experiment(cfg)[0]
        rate = parity_discriminate(batch).success_rate
        assert abs(rate - 0.5) < 4.0 / math.sqrt(len(batch))

    def test_filter_raises_ratio_discrimination(self):
        cfg = ExperimentConfig(
            g=2.0, p=1.0, v_in=1.0, detection=DetectionConfig(eta=0.1),
            phi_grid=(0.0, math.pi), shots_per_point=20_000, seed=8)
        points = run_experiment(cfg)
        merged = ShotBatch(
            *(np.concatenate([getattr(points[0][1], col), getattr(points[1][1], col)])
              for col in ("branch", "true_plus", "true_minus", "det_plus",
                          "det_minus", "i_plus", "i_minus")))
        plain = discriminate(merged).success_rate
        assert plain > 0.5
        filtered, fraction = o_filter(merged, 20.0)
        assert fraction < 1.0
        assert discriminate(filtered).success_rate > plain


class TestFidelityVerdict:
    @pytest.mark.parametrize("v,f,beats", [
        (0.0, 0.5, False),
        (0.5, 0.75, False),
        (0.8, 0.9, True),
        (1.0, 1.0, True),
    ])
    def test_examples(self, v, f, beats):
        fidelity, flag = fidelity_verdict(v)
        assert fidelity == pytest.approx(f)
        assert flag is beats

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            fidelity_verdict(1.2)
        with pytest.raises(ValueError):
            fidelity_verdict(-0.1)


class TestScanFringe:
    def test_requires_two_shots_per_point(self):
        cfg = ExperimentConfig(
            g=1.0, p=1.0, v_in=1.0, detection=DetectionConfig(),
            phi_grid=tuple(np.linspace(0, 2 * np.pi, 6, endpoint=False)),
            shots_per_point=50, seed=9)
        points = run_experiment(cfg)
        with pytest.raises(InsufficientDataError):
            scan_fringe(points, q=1e9)

    def test_anti_phase_fits(self):
        cfg = ExperimentConfig(
            g=1.5, p=1.0, v_in=1.0, detection=DetectionConfig(),
            phi_grid=tuple(np.linspace(0, 2 * np.pi, 12, endpoint=False)),
            shots_per_point=20_000, seed=10)
        scan = scan_fringe(run_experiment(cfg))
        delta = abs(scan.fit_plus.phase0 - scan.fit_minus.phase0) % (2 * math.pi)
        assert delta == pytest.approx(math.pi, abs=0.05)
