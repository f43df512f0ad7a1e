import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from evofis.timeseries import (
    ChannelRange,
    CsvSchema,
    DegenerateChannelError,
    IngestionError,
    NormalizationParams,
    RawSeries,
    SchemaError,
    SplitError,
    WindowConfig,
    WindowError,
    build_pairs,
    denormalize,
    fit_normalizer,
    ingest_csv,
    normalize,
    split_stream,
)


def write(tmp_path, text, name="data.csv"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


class TestIngest:
    def test_read_through(self, tmp_path):
        p = write(tmp_path, "t,load\n1,2.0\n2,4.0\n3,6.0\n")
        s = ingest_csv(p, CsvSchema(value="load", time="t"))
        np.testing.assert_array_equal(s.values, [2.0, 4.0, 6.0])
        assert s.exogenous == {}

    def test_exogenous_mapping(self, tmp_path):
        rows = "\n".join(f"{i},{i * 1.5},{20 + i}" for i in range(10))
        p = write(tmp_path, "t,load,temperature\n" + rows + "\n")
        s = ingest_csv(p, CsvSchema(value="load", time="t", exogenous=("temperature",)))
        assert len(s) == 10
        assert list(s.exogenous) == ["temperature"]
        assert s.exogenous["temperature"].size == 10

    def test_nan_cites_row(self, tmp_path):
        rows = ["1,1.0", "2,2.0", "3,3.0", "4,4.0", "5,NaN", "6,6.0"]
        p = write(tmp_path, "t,load\n" + "\n".join(rows) + "\n")
        with pytest.raises(IngestionError, match="row 5") as err:
            ingest_csv(p, CsvSchema(value="load", time="t"))
        assert err.value.row == 5

    def test_non_numeric_cell(self, tmp_path):
        p = write(tmp_path, "t,load\n1,1.0\n2,abc\n")
        with pytest.raises(IngestionError, match="row 2"):
            ingest_csv(p, CsvSchema(value="load", time="t"))

    def test_out_of_order_timestamp(self, tmp_path):
        p = write(tmp_path, "t,load\n1,1.0\n3,2.0\n2,3.0\n")
        with pytest.raises(IngestionError, match="row 3"):
            ingest_csv(p, CsvSchema(value="load", time="t"))

    def test_iso_timestamps(self, tmp_path):
        p = write(tmp_path, "t,load\n2015-05-01T00:00,1\n2015-05-01T01:00,2\n")
        assert len(ingest_csv(p, CsvSchema(value="load", time="t"))) == 2

    def test_missing_column(self, tmp_path):
        p = write(tmp_path, "t,load\n1,2\n")
        with pytest.raises(SchemaError, match="temperature"):
            ingest_csv(p, CsvSchema(value="load", exogenous=("temperature",)))

    def test_exogenous_length_checked(self):
        with pytest.raises(IngestionError):
            RawSeries([1.0, 2.0], exogenous={"temp": [1.0]})


class TestNormalization:
    def test_fit(self):
        p = fit_normalizer(RawSeries([2, 4, 6]), 3)
        assert (p.min, p.max) == (2, 6)

    def test_fit_ignores_test_suffix(self):
        p = fit_normalizer(RawSeries([2, 4, 6, 100]), 3)
        assert (p.min, p.max) == (2, 6)

    def test_constant_channel(self):
        with pytest.raises(DegenerateChannelError):
            fit_normalizer(RawSeries([5, 5, 5]), 3)

    def test_constant_exogenous_channel(self):
        with pytest.raises(DegenerateChannelError):
            fit_normalizer(RawSeries([1, 2, 3], exogenous={"t": [0, 0, 0]}), 3)

    def test_normalize(self):
        params = NormalizationParams(ChannelRange(2, 6))
        np.testing.assert_allclose(normalize(RawSeries([2, 4, 6]), params).values, [0, 0.5, 1])

    def test_no_clipping(self):
        params = NormalizationParams(ChannelRange(2, 6))
        np.testing.assert_allclose(normalize(RawSeries([100]), params).values, [24.5])

    def test_denormalize(self):
        np.testing.assert_allclose(denormalize([0, 0.5, 1], NormalizationParams(ChannelRange(2, 6))), [2, 4, 6])
        np.testing.assert_allclose(denormalize([0.25], ChannelRange(0, 8)), [2])

    def test_exogenous_normalized_separately(self):
        s = RawSeries([0, 10, 20], exogenous={"temp": [20, 25, 30]})
        n = normalize(s, fit_normalizer(s, 3))
        np.testing.assert_allclose(n.exogenous["temp"], [0, 0.5, 1])

    @settings(max_examples=50)
    @given(arrays(float, st.integers(2, 40), elements=st.floats(-1e3, 1e3)))
    def test_round_trip(self, x):
        if np.ptp(x) < 1e-3:
            return
        params = fit_normalizer(RawSeries(x), x.size)
        back = denormalize(normalize(RawSeries(x), params).values, params)
        np.testing.assert_allclose(back, x, rtol=0, atol=1e-12 * max(1.0, np.abs(x).max()))

    @settings(max_examples=30)
    @given(arrays(float, 5, elements=st.floats(-100, 100)))
    def test_no_leakage(self, suffix):
        head = np.array([1.0, 3.0, 2.0, 7.0])
        a = fit_normalizer(RawSeries(np.concatenate([head, suffix])), 4)
        b = fit_normalizer(RawSeries(np.concatenate([head, np.zeros(5)])), 4)
        assert a == b


class TestWindowing:
    def test_first_pair_ordering(self):
        pairs = build_pairs(RawSeries([1, 2, 3, 4, 5, 6]), WindowConfig(nu=4, mu=0, gamma=1))
        assert len(pairs) == 2
        np.testing.assert_array_equal(pairs[0].u, [4, 3, 2, 1])
        np.testing.assert_array_equal(pairs[0].v, [5])
        assert pairs[0].origin_index == 3

    def test_twelve_step_horizon(self):
        pairs = build_pairs(RawSeries(np.arange(1, 18)), WindowConfig(nu=4, gamma=12))
        assert len(pairs) == 17 - 4 - 12 + 1
        np.testing.assert_array_equal(pairs[0].v, np.arange(5, 17))

    def test_exogenous_current_instant(self):
        s = RawSeries(np.arange(10.0), exogenous={"temp": 100 + np.arange(10.0)})
        pairs = build_pairs(s, WindowConfig(nu=4, mu=1, gamma=1))
        assert pairs[0].u.size == 5
        t = pairs[0].origin_index
        assert pairs[0].u[-1] == s.exogenous["temp"][t]

    def test_mu_larger_than_nu(self):
        s = RawSeries(np.arange(20.0), exogenous={"temp": np.arange(20.0) * 2})
        pairs = build_pairs(s, WindowConfig(nu=2, mu=5, gamma=1))
        assert pairs[0].origin_index == 4
        np.testing.assert_array_equal(pairs[0].u, [4, 3, 8, 6, 4, 2, 0])

    def test_too_short(self):
        with pytest.raises(WindowError, match="at least 5"):
            build_pairs(RawSeries([1, 2, 3, 4]), WindowConfig(nu=4, gamma=1))

    def test_mu_without_exogenous(self):
        with pytest.raises(WindowError):
            build_pairs(RawSeries(np.arange(10.0)), WindowConfig(nu=4, mu=1))

    def test_invalid_window(self):
        with pytest.raises(WindowError):
            WindowConfig(nu=0)
        with pytest.raises(WindowError):
            WindowConfig(gamma=0)

    @settings(max_examples=40)
    @given(st.integers(12, 60), st.integers(1, 5), st.integers(0, 3), st.integers(1, 6))
    def test_reconstruction(self, n, nu, mu, gamma):
        rng = np.random.default_rng(n * 100 + nu * 10 + gamma)
        s = RawSeries(rng.random(n), exogenous={"r": rng.random(n)})
        cfg = WindowConfig(nu=nu, mu=mu, gamma=gamma)
        if n < max(nu, mu) + gamma:
            return
        pairs = build_pairs(s, cfg)
        if mu <= nu:
            assert len(pairs) == n - nu - gamma + 1
        for pair in pairs:
            t = pair.origin_index
            expected_u = [s.values[t - i] for i in range(nu)] + [s.exogenous["r"][t - i] for i in range(mu)]
            assert pair.u.tolist() == expected_u
            assert pair.v.tolist() == [s.values[t + j] for j in range(1, gamma + 1)]

    def test_unit_horizon_targets_rebuild_series(self):
        x = np.random.default_rng(0).random(30)
        pairs = build_pairs(RawSeries(x), WindowConfig(nu=4, gamma=1))
        np.testing.assert_array_equal(np.concatenate([p.v for p in pairs]), x[4:])


class TestSplit:
    @pytest.mark.parametrize("fraction,expected", [(0.85, 85), (0.70, 70)])
    def test_benchmark_fractions(self, fraction, expected):
        train, test = split_stream(list(range(100)), fraction)
        assert (len(train), len(test)) == (expected, 100 - expected)

    def test_order_preserved(self):
        train, test = split_stream(list(range(10)), 0.5)
        assert train == [0, 1, 2, 3, 4] and test == [5, 6, 7, 8, 9]

    @pytest.mark.parametrize("fraction", [1.0, 0.0])
    def test_rejects_degenerate_fraction(self, fraction):
        with pytest.raises(SplitError):
            split_stream(list(range(10)), fraction)

    def test_rejects_empty_partition(self):
        with pytest.raises(SplitError):
            split_stream([1], 0.5)
