import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from ttdcopula.gof import ks_statistic
from ttdcopula.marginals import (GmmParams, fit_gmm, gmm_cdf, gmm_logpdf, gmm_pdf, gmm_quantile,
                                 gmm_sample)

from conftest import SEG2_MEANS, SEG2_SIGMAS, SEG2_WEIGHTS
from oracles import mixture_cdf_by_hand, mixture_pdf_by_hand


mixtures = st.builds(
    lambda mus, sds, ws: GmmParams.normalized(mus, sds, ws),
    st.lists(st.floats(-50, 50), min_size=3, max_size=3),
    st.lists(st.floats(0.05, 20), min_size=3, max_size=3),
    st.lists(st.floats(0.05, 1), min_size=3, max_size=3),
)


class TestParams:
    def test_sorted_by_mean(self):
        g = GmmParams((3.0, 1.0, 2.0), (0.3, 0.1, 0.2), (0.5, 0.2, 0.3))
        assert g.means == (1.0, 2.0, 3.0)
        assert g.sigmas == (0.1, 0.2, 0.3)
        assert g.weights == (0.2, 0.3, 0.5)

    @pytest.mark.parametrize("kwargs", [
        dict(means=(0.0,), sigmas=(0.0,), weights=(1.0,)),
        dict(means=(0.0, 1.0), sigmas=(1.0, 1.0), weights=(0.5, 0.6)),
        dict(means=(0.0,), sigmas=(1.0, 2.0), weights=(1.0,)),
        dict(means=(), sigmas=(), weights=()),
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            GmmParams(**kwargs)

    def test_rounded_weights_need_normalising(self):
        with pytest.raises(ValueError):
            GmmParams(SEG2_MEANS, SEG2_SIGMAS, SEG2_WEIGHTS)
        g = GmmParams.normalized(SEG2_MEANS, SEG2_SIGMAS, SEG2_WEIGHTS)
        assert sum(g.weights) == pytest.approx(1.0, abs=1e-12)

    def test_json_roundtrip(self, seg2):
        text = json.dumps(seg2.to_dict())
        assert set(json.loads(text)) == {"k", "means", "sigmas", "weights"}
        assert GmmParams.from_dict(json.loads(text)) == seg2

    def test_analytic_mean(self, seg2):
        # 0.52*5.41 + 0.38*8.86 + 0.09*16.31 over the 0.99 weight total
        assert seg2.mean() == pytest.approx(7.6479 / 0.99, rel=1e-12)


class TestPdf:
    def test_standard_normal_peak(self, std_normal):
        assert gmm_pdf(std_normal, 0.0) == pytest.approx(0.398942, abs=1e-6)

    @pytest.mark.parametrize("a", [0.5, 1.0, 2.5])
    def test_symmetric_pair(self, a):
        g = GmmParams((-a, a), (1.0, 1.0), (0.5, 0.5))
        phi_a = math.exp(-a * a / 2) / math.sqrt(2 * math.pi)
        assert gmm_pdf(g, 0.0) == pytest.approx(phi_a, abs=1e-15)

    def test_segment2_by_hand(self, seg2):
        expected = mixture_pdf_by_hand(seg2.means, seg2.sigmas, seg2.weights, 5.41)
        assert gmm_pdf(seg2, 5.41) == pytest.approx(expected, abs=1e-9)

    def test_logpdf_consistent(self, seg2):
        x = np.linspace(-5, 40, 101)
        np.testing.assert_allclose(np.exp(gmm_logpdf(seg2, x)), gmm_pdf(seg2, x), rtol=1e-12)

    def test_normalisation(self, seg2):
        lo = min(seg2.means) - 10 * max(seg2.sigmas)
        hi = max(seg2.means) + 10 * max(seg2.sigmas)
        x = np.linspace(lo, hi, 200_001)
        assert integrate.trapezoid(gmm_pdf(seg2, x), x) == pytest.approx(1.0, abs=1e-6)

    def test_pdf_is_cdf_derivative(self, seg2, rng):
        x = rng.uniform(-2, 40, 100)
        h = 1e-5
        numeric = (gmm_cdf(seg2, x + h) - gmm_cdf(seg2, x - h)) / (2 * h)
        np.testing.assert_allclose(numeric, gmm_pdf(seg2, x), atol=1e-5)


class TestCdf:
    def test_standard_normal_median(self, std_normal):
        assert gmm_cdf(std_normal, 0.0) == 0.5

    def test_limits(self, seg2):
        assert gmm_cdf(seg2, -np.inf) == 0.0
        assert gmm_cdf(seg2, np.inf) == 1.0
        assert gmm_cdf(seg2, -1e6) == 0.0

    def test_segment2_by_hand(self, seg2):
        expected = mixture_cdf_by_hand(seg2.means, seg2.sigmas, seg2.weights, 8.86)
        assert gmm_cdf(seg2, 8.86) == pytest.approx(expected, abs=1e-9)

    @given(mixtures, st.floats(-200, 200), st.floats(0, 50))
    def test_monotone(self, g, x, dx):
        assert gmm_cdf(g, x + dx) >= gmm_cdf(g, x) - 1e-15


class TestQuantile:
    def test_standard_normal_median(self, std_normal):
        assert gmm_quantile(std_normal, 0.5) == pytest.approx(0.0, abs=1e-9)

    @pytest.mark.parametrize("p", [0.01, 0.5, 0.99])
    def test_roundtrip(self, seg2, p):
        assert gmm_cdf(seg2, gmm_quantile(seg2, p)) == pytest.approx(p, abs=1e-8)

    def test_tolerance_contract(self, seg2, rng):
        p = rng.random(10_000)
        assert np.max(np.abs(gmm_cdf(seg2, gmm_quantile(seg2, p)) - p)) < 1e-10

    @settings(max_examples=50, deadline=None)
    @given(mixtures, st.floats(1e-9, 1 - 1e-9))
    def test_roundtrip_property(self, g, p):
        assert abs(gmm_cdf(g, gmm_quantile(g, p)) - p) < 1e-10

    def test_monte_carlo_quantile(self, seg2):
        draws = gmm_sample(seg2, 10_000_000, 7)
        assert gmm_quantile(seg2, 0.9) == pytest.approx(np.quantile(draws, 0.9), abs=0.05)

    @pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5, float("nan")])
    def test_rejects_outside_unit_interval(self, seg2, p):
        with pytest.raises(ValueError):
            gmm_quantile(seg2, p)


class TestSample:
    def test_moments(self):
        x = gmm_sample(GmmParams((5.0,), (2.0,), (1.0,)), 1_000_000, 3)
        assert abs(x.mean() - 5) < 0.01
        assert abs(x.std() - 2) < 0.01

    def test_component_proportions(self, seg2):
        # the draw has no labels; well-separated copies of the means recover them
        spread = GmmParams(tuple(m * 100 for m in seg2.means), (1e-3,) * 3, seg2.weights)
        x = gmm_sample(spread, 1_000_000, 11)
        labels = np.argmin(np.abs(x[:, None] - np.array(spread.means)), axis=1)
        props = np.bincount(labels, minlength=3) / x.size
        np.testing.assert_allclose(props, np.array(SEG2_WEIGHTS) / 0.99, atol=0.002)

    def test_deterministic(self, seg2):
        np.testing.assert_array_equal(gmm_sample(seg2, 100, 5), gmm_sample(seg2, 100, 5))
        assert not np.array_equal(gmm_sample(seg2, 100, 5), gmm_sample(seg2, 100, 6))


class TestFit:
    def test_single_component_is_sample_moments(self, rng):
        x = rng.gamma(3.0, 2.0, 500)
        fit = fit_gmm(x, 1, seed=0)
        assert fit.params.means[0] == pytest.approx(x.mean(), abs=1e-9)
        assert fit.params.sigmas[0] == pytest.approx(x.std(), abs=1e-9)
        assert fit.converged

    def test_log_likelihood_monotone(self, seg2):
        fit = fit_gmm(gmm_sample(seg2, 3000, 1), 3, seed=1)
        steps = np.diff(fit.history)
        assert np.all(steps >= -1e-8)
        assert fit.log_likelihood == pytest.approx(
            float(gmm_logpdf(fit.params, gmm_sample(seg2, 3000, 1)).sum()), rel=1e-9)

    def test_recovers_segment2(self, seg2):
        x = gmm_sample(seg2, 5000, 42)
        fit = fit_gmm(x, 3, seed=42)
        np.testing.assert_allclose(fit.params.means, seg2.means, rtol=0.10)
        np.testing.assert_allclose(fit.params.weights, seg2.weights, atol=0.05)
        assert ks_statistic(x, lambda t: gmm_cdf(fit.params, t)) < 0.03

    def test_output_mean_sorted(self, rng):
        x = np.concatenate([rng.normal(30, 1, 400), rng.normal(0, 1, 400), rng.normal(10, 1, 400)])
        fit = fit_gmm(x, 3, seed=3)
        assert list(fit.params.means) == sorted(fit.params.means)
        np.testing.assert_allclose(fit.params.means, [0, 10, 30], atol=0.3)

    def test_sigma_floor(self):
        x = np.array([1.0] * 50 + [2.0] * 50 + [3.0] * 50)
        fit = fit_gmm(x, 3, seed=0)
        assert min(fit.params.sigmas) >= 1e-3

    def test_degenerate_input(self):
        with pytest.raises(ValueError, match="identical"):
            fit_gmm(np.full(100, 4.2), 2)

    def test_too_few_samples(self):
        with pytest.raises(ValueError):
            fit_gmm(np.arange(29.0), 3)

    def test_non_convergence_is_flagged(self, seg2):
        fit = fit_gmm(gmm_sample(seg2, 2000, 2), 3, seed=2, max_iter=2)
        assert not fit.converged
        assert fit.iterations == 2
        assert sum(fit.params.weights) == pytest.approx(1.0, abs=1e-9)
