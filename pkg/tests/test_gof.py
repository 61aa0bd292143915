import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special, stats

from ttdcopula.gof import GofReport, cvm_statistic, gof_report, ks_statistic

from oracles import ks_by_enumeration

samples = st.lists(st.floats(-100, 100, allow_nan=False), min_size=1, max_size=30)


class TestKs:
    def test_identical(self):
        assert ks_statistic([1.0, 2.0, 3.0], [1.0, 2.0, 3.0]) == 0.0

    def test_disjoint(self):
        assert ks_statistic([1.0], [2.0]) == 1.0

    def test_shifted_thirds(self):
        assert ks_statistic([1, 2, 3], [1.5, 2.5, 3.5]) == pytest.approx(1 / 3)
        assert ks_by_enumeration([1, 2, 3], [1.5, 2.5, 3.5]) == pytest.approx(1 / 3)

    @given(samples, samples)
    def test_matches_enumeration(self, a, b):
        assert ks_statistic(a, b) == pytest.approx(ks_by_enumeration(a, b), abs=1e-12)

    # only the statistic is compared; scipy's asymptotic p-value warns on tiny samples
    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    @given(samples, samples)
    def test_matches_scipy_two_sample(self, a, b):
        ref = stats.ks_2samp(a, b, method="asymp").statistic
        assert ks_statistic(a, b) == pytest.approx(ref, abs=1e-12)

    def test_one_sample_matches_scipy(self, rng):
        x = rng.normal(size=500)
        assert ks_statistic(x, special.ndtr) == pytest.approx(
            stats.kstest(x, "norm").statistic, abs=1e-12)

    @given(samples, samples)
    def test_bounds(self, a, b):
        assert 0.0 <= ks_statistic(a, b) <= 1.0

    def test_empty(self):
        with pytest.raises(ValueError):
            ks_statistic([], [1.0])
        with pytest.raises(ValueError):
            ks_statistic([1.0], [])


class TestCvm:
    def test_self_fit_floor(self, rng):
        x = np.sort(rng.random(1000))
        n = x.size
        # CDF interpolating the midpoints (i - 0.5)/N at the reference points
        f = lambda t: np.interp(t, x, (np.arange(1, n + 1) - 0.5) / n)
        assert cvm_statistic(x, f) < 1 / (12 * n**2) * n

    def test_true_model(self, rng):
        assert cvm_statistic(rng.random(100_000), lambda t: np.clip(t, 0, 1)) < 1e-3

    def test_gross_misfit(self, rng):
        assert cvm_statistic(rng.normal(size=10_000), lambda t: special.ndtr(t - 5)) > 0.2

    def test_matches_scipy_definition(self, rng):
        # scipy reports 1/(12N) + sum of squared gaps, i.e. N times this statistic plus 1/(12N)
        x = rng.normal(size=400)
        ref = stats.cramervonmises(x, "norm").statistic
        n = x.size
        assert cvm_statistic(x, special.ndtr) == pytest.approx((ref - 1 / (12 * n)) / n, rel=1e-10)

    def test_sample_model_uses_ecdf(self):
        # model ECDF of {2} is 0 below 2 and 1 from 2 on; gaps at x=(1, 3) are 0.25 and 0.25
        assert cvm_statistic([1.0, 3.0], [2.0]) == pytest.approx(0.0625)


class TestInvariance:
    @settings(deadline=None)
    @given(st.integers(0, 10_000))
    def test_monotone_transform(self, seed):
        rng = np.random.default_rng(seed)
        x = rng.normal(size=200)
        f = lambda t: special.ndtr(t / 1.3)
        g = lambda t: f(np.log(t))
        assert ks_statistic(np.exp(x), g) == pytest.approx(ks_statistic(x, f), abs=1e-12)
        assert cvm_statistic(np.exp(x), g) == pytest.approx(cvm_statistic(x, f), abs=1e-12)
        y = rng.normal(0.2, 1, 300)
        assert ks_statistic(np.exp(x), np.exp(y)) == pytest.approx(ks_statistic(x, y), abs=1e-12)


class TestReport:
    def test_fields(self, rng):
        rep = gof_report(rng.random(50), rng.random(80), "2D Clayton", {"alpha": 2.0})
        assert isinstance(rep, GofReport)
        d = rep.to_dict()
        assert d["model"] == "2D Clayton"
        assert {"ks", "cvm"} <= set(d)
        assert (rep.n_reference, rep.n_model) == (50, 80)
        assert 0 <= rep.ks <= 1 and rep.cvm >= 0

    def test_better_model_scores_lower(self, rng):
        ref = rng.normal(size=2000)
        good = gof_report(ref, rng.normal(size=20_000), "good")
        bad = gof_report(ref, rng.normal(0.5, 1, 20_000), "bad")
        assert good.ks < bad.ks and good.cvm < bad.cvm
