import io
import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from ttdcopula.copulas import CopulaModel
from ttdcopula.dependence import kendall_tau
from ttdcopula.marginals import GmmParams, gmm_cdf
from ttdcopula.presets import (LEOPOLDSTRASSE_TAUS, leopoldstrasse_alpha, leopoldstrasse_marginals,
                               leopoldstrasse_pair_alpha, leopoldstrasse_spec)
from ttdcopula.tripdata import (DuplicateTripError, EmptySeriesError, SegmentSeries, SynthSpec,
                                TripDomainError, TripParseError, TripRecord, assemble_series,
                                load_trips, positive_quantile, synthesize, write_trips)

HEAD = "drive_id,segment_id,travel_time_s\n"


class TestLoad:
    def test_single_row(self):
        recs = load_trips((HEAD + "d1,2,5.41\n").encode())
        assert recs == [TripRecord("d1", 2, 5.41)]

    def test_negative_time_names_line(self):
        with pytest.raises(TripDomainError, match="line 2"):
            load_trips((HEAD + "d1,2,-3.0\n").encode())

    def test_duplicate(self):
        with pytest.raises(DuplicateTripError):
            load_trips((HEAD + "d1,2,5.0\nd1,2,6.0\n").encode())

    @pytest.mark.parametrize("body,line", [
        ("d1,2\n", 2),
        ("d1,2,5.0\nd2,x,5.0\n", 3),
        ("d1,2,abc\n", 2),
        ("d1,2,nan\n", 2),
        (",2,5.0\n", 2),
    ])
    def test_parse_errors(self, body, line):
        with pytest.raises(TripParseError, match=f"line {line}"):
            load_trips((HEAD + body).encode())

    def test_zero_segment_id(self):
        with pytest.raises(TripDomainError):
            load_trips((HEAD + "d1,0,5.0\n").encode())

    def test_bad_header(self):
        with pytest.raises(TripParseError, match="line 1"):
            load_trips(b"drive,segment,time\nd1,2,5.0\n")

    def test_text_stream_and_blank_lines(self):
        recs = load_trips(io.StringIO(HEAD + "d1,1,3.0\n\nd1,2,4.5\n"))
        assert [r.segment_id for r in recs] == [1, 2]

    def test_file_roundtrip(self, tmp_path, leopold_series):
        small = leopold_series.select((2, 3))
        path = tmp_path / "trips.csv"
        write_trips(small, path)
        back = assemble_series(load_trips(path), (2, 3))
        np.testing.assert_array_equal(back.times, small.times)
        assert back.drive_ids == small.drive_ids

    def test_record_domain(self):
        with pytest.raises(TripDomainError):
            TripRecord("d", 1, 0.0)


class TestAssemble:
    def test_completeness_filter(self):
        recs = [TripRecord("d1", 1, 3.0), TripRecord("d1", 2, 4.0), TripRecord("d2", 1, 2.0),
                TripRecord("d3", 1, 1.0), TripRecord("d3", 2, 2.0)]
        s = assemble_series(recs, [1, 2])
        assert s.drive_ids == ("d1", "d3")
        assert s.n_discarded == 1

    def test_single_complete_drive(self):
        # one complete drive cannot form a series of at least two trips
        recs = [TripRecord("d1", 1, 3.0), TripRecord("d1", 2, 4.0), TripRecord("d2", 1, 2.0)]
        with pytest.raises(EmptySeriesError):
            assemble_series(recs, [1, 2])

    def test_missing_segment(self):
        recs = [TripRecord("d1", 1, 3.0), TripRecord("d1", 2, 4.0)]
        with pytest.raises(EmptySeriesError):
            assemble_series(recs, [1, 2, 3])

    def test_column_order_follows_request(self):
        recs = [TripRecord(d, s, 10.0 * s + i) for i, d in enumerate("ab") for s in (1, 2)]
        s = assemble_series(recs, [2, 1])
        np.testing.assert_array_equal(s.times, [[20.0, 10.0], [21.0, 11.0]])

    def test_full_leopoldstrasse_size(self, leopold_series):
        s = assemble_series(leopold_series.to_records(), range(1, 11))
        assert (s.n, s.s) == (4495, 10)

    @given(st.lists(st.tuples(st.sampled_from("abcdef"), st.integers(1, 3)), unique=True,
                    min_size=1, max_size=18))
    def test_rows_never_exceed_drives(self, pairs):
        recs = [TripRecord(d, s, 1.0 + s) for d, s in pairs]
        try:
            series = assemble_series(recs, [1, 2])
        except EmptySeriesError:
            return
        assert series.n <= len({d for d, _ in pairs})
        assert series.n + series.n_discarded == len({d for d, _ in pairs})


class TestSeries:
    def test_read_only(self):
        s = SegmentSeries((1, 2), np.array([[1.0, 2.0], [3.0, 4.0]]))
        with pytest.raises(ValueError):
            s.times[0, 0] = 5.0

    @pytest.mark.parametrize("times", [[[1.0, -2.0], [1.0, 1.0]], [[1.0, 2.0]], [[1.0], [2.0]]])
    def test_invalid(self, times):
        with pytest.raises(ValueError):
            SegmentSeries((1, 2), np.array(times))


class TestSynthesize:
    def test_independence_tau(self):
        g = GmmParams((10.0,), (1.0,), (1.0,))
        spec = SynthSpec((g, g), CopulaModel("gaussian", 2, rho=0.0), 100_000, seed=3)
        s = synthesize(spec)
        assert abs(kendall_tau(s.times[:, 0], s.times[:, 1])) < 0.01

    def test_clayton_tau(self, seg2, seg3):
        spec = SynthSpec((seg2, seg3), CopulaModel("clayton", 2, alpha=2.595), 100_000, seed=5)
        s = synthesize(spec)
        assert kendall_tau(s.times[:, 0], s.times[:, 1]) == pytest.approx(2.595 / 4.595, abs=0.02)

    def test_segment_means(self, leopold_series):
        for sid, g in zip(leopold_series.segment_ids, leopoldstrasse_marginals()):
            assert leopold_series.column(sid).mean() == pytest.approx(g.mean(), rel=0.02)
        # segment 2 with rounded weights: 0.52*5.41 + 0.38*8.86 + 0.09*16.31
        assert leopold_series.column(2).mean() == pytest.approx(7.65, rel=0.02)

    def test_marginal_ks(self):
        s = synthesize(leopoldstrasse_spec(n_trips=100_000, seed=9))
        for i, g in enumerate(leopoldstrasse_marginals()):
            f0 = gmm_cdf(g, 0.0)
            # synthesis draws from the mixture restricted to positive times
            ks = stats.kstest(s.times[:, i], lambda t: (gmm_cdf(g, t) - f0) / (1 - f0)).statistic
            assert ks < 0.02

    def test_deterministic(self):
        a = synthesize(leopoldstrasse_spec(n_trips=500, seed=1))
        b = synthesize(leopoldstrasse_spec(n_trips=500, seed=1))
        np.testing.assert_array_equal(a.times, b.times)
        assert a.drive_ids == b.drive_ids

    def test_shape_and_ids(self, leopold_series):
        assert (leopold_series.n, leopold_series.s) == (4495, 10)
        assert leopold_series.segment_ids == tuple(range(1, 11))
        assert leopold_series.drive_ids[0] == "d0001"

    def test_positive(self, leopold_series):
        assert leopold_series.times.min() > 0

    def test_gps_artifact_rewrites_pairs(self):
        base = synthesize(leopoldstrasse_spec(n_trips=1000, seed=4))
        art = synthesize(leopoldstrasse_spec(n_trips=1000, seed=4, gps_artifact=0.1))
        changed_rows = np.any(base.times != art.times, axis=1)
        assert 0 < changed_rows.sum() <= 100

    def test_spec_json_roundtrip(self, tmp_path):
        spec = leopoldstrasse_spec(n_trips=100, seed=7)
        path = tmp_path / "spec.json"
        path.write_text(json.dumps(spec.to_dict()))
        assert SynthSpec.from_json(path) == spec

    @pytest.mark.parametrize("kwargs", [dict(n_trips=1), dict(gps_artifact=1.5), dict(seed=-1)])
    def test_spec_invalid(self, seg2, kwargs):
        base = dict(marginals=(seg2, seg2), coupling=CopulaModel("clayton", 2, alpha=1.0),
                    n_trips=10)
        base.update(kwargs)
        with pytest.raises(ValueError):
            SynthSpec(**base)

    def test_dimension_mismatch(self, seg2):
        with pytest.raises(ValueError):
            SynthSpec((seg2,), CopulaModel("clayton", 2, alpha=1.0), 10)


class TestPositiveQuantile:
    @given(st.floats(1e-12, 1 - 1e-12))
    def test_positive(self, u):
        g = GmmParams((1.0,), (2.0,), (1.0,))
        assert positive_quantile(g, u) > 0

    def test_uniform_on_truncated_cdf(self, rng):
        g = GmmParams((1.0,), (2.0,), (1.0,))
        x = positive_quantile(g, rng.random(50_000))
        f0 = gmm_cdf(g, 0.0)
        assert stats.kstest(x, lambda t: (gmm_cdf(g, t) - f0) / (1 - f0)).statistic < 0.01


class TestPreset:
    def test_pair_alpha_from_tau(self):
        assert leopoldstrasse_pair_alpha(2) == pytest.approx(2 * 0.604 / (1 - 0.604))

    def test_exchangeable_alpha_from_mean_tau(self):
        tbar = np.mean(LEOPOLDSTRASSE_TAUS)
        assert tbar == pytest.approx(0.595, abs=0.001)
        assert leopoldstrasse_alpha() == pytest.approx(2 * tbar / (1 - tbar))

    def test_marginals_normalized(self):
        for g in leopoldstrasse_marginals():
            assert sum(g.weights) == pytest.approx(1.0, abs=1e-9)

    def test_adjacent_pair_uses_own_alpha(self):
        spec = leopoldstrasse_spec(segment_ids=(2, 3))
        assert spec.coupling.alpha == pytest.approx(leopoldstrasse_pair_alpha(2))
