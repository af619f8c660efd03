from fractions import Fraction

import numpy as np
import pytest

from sseleak.corpus import BinaryIndex, KeywordUniverse, build_index, generate_zipf_corpus
from sseleak.leakage import (FrequencySeries, FrequencyVector, QueryTrace,
                             generate_trace, load_frequency_table, observe,
                             synthetic_frequency_series, window_frequency)


@pytest.fixture
def xy_universe():
    return KeywordUniverse(["x", "y"])


class TestLoadFrequencyTable:
    def test_dense_fill(self, tmp_path, xy_universe):
        f = tmp_path / "freq.csv"
        f.write_text("keyword,interval,count\nx,0,10\ny,0,30\n")
        series = load_frequency_table(f, xy_universe)
        assert series.intervals.tolist() == [[10.0, 30.0]]

    def test_missing_cells_zero(self, tmp_path, xy_universe):
        f = tmp_path / "freq.csv"
        f.write_text("keyword,interval,count\nx,0,10\ny,0,30\ny,1,5\n")
        series = load_frequency_table(f, xy_universe)
        assert series.intervals[1].tolist() == [0.0, 5.0]

    def test_unknown_keyword_named(self, tmp_path, xy_universe):
        f = tmp_path / "freq.csv"
        f.write_text("keyword,interval,count\nz,0,1\n")
        with pytest.raises(ValueError, match="'z'"):
            load_frequency_table(f, xy_universe)

    def test_negative_count_errors(self, tmp_path, xy_universe):
        f = tmp_path / "freq.csv"
        f.write_text("keyword,interval,count\nx,0,-2\n")
        with pytest.raises(ValueError, match="negative"):
            load_frequency_table(f, xy_universe)

    def test_bad_header_errors(self, tmp_path, xy_universe):
        f = tmp_path / "freq.csv"
        f.write_text("kw,week,n\nx,0,1\n")
        with pytest.raises(ValueError, match="header"):
            load_frequency_table(f, xy_universe)


class TestWindowFrequency:
    @pytest.fixture
    def series(self, xy_universe):
        return FrequencySeries(xy_universe, np.array([[1.0, 3.0], [1.0, 1.0]]))

    def test_two_interval_sum(self, series):
        vec = window_frequency(series, 0, 2)
        assert vec.probabilities.tolist() == [pytest.approx(1 / 3), pytest.approx(2 / 3)]

    def test_single_interval(self, series):
        vec = window_frequency(series, 0, 1)
        assert vec.probabilities.tolist() == [0.25, 0.75]

    def test_zero_window_errors(self, xy_universe):
        series = FrequencySeries(xy_universe, np.zeros((2, 2)))
        with pytest.raises(ValueError, match="mass"):
            window_frequency(series, 0, 2)

    def test_overrun_errors(self, series):
        with pytest.raises(ValueError, match="exceeds"):
            window_frequency(series, 1, 2)


class TestGenerateTrace:
    def test_degenerate_distribution(self):
        trace = generate_trace(FrequencyVector(np.array([1.0, 0.0])), 5, 3, seed=1)
        assert trace.queries.tolist() == [0] * 15

    def test_empirical_frequency_bound(self):
        # binomial: P(|p_hat - 0.5| > 0.01) at n=100000 is ~2e-10
        trace = generate_trace(FrequencyVector(np.array([0.5, 0.5])), 1000, 100, seed=2)
        p0 = np.mean(trace.queries == 0)
        assert abs(p0 - 0.5) < 0.01

    def test_deterministic(self):
        freq = FrequencyVector(np.array([0.25, 0.75]))
        a = generate_trace(freq, 10, 10, seed=5)
        b = generate_trace(freq, 10, 10, seed=5)
        assert np.array_equal(a.queries, b.queries)

    def test_param_validation(self):
        with pytest.raises(ValueError):
            generate_trace(FrequencyVector(np.array([1.0])), 0, 1, seed=0)


class TestObserve:
    def test_worked_example(self):
        universe = KeywordUniverse(["x", "y"])
        idx = BinaryIndex(universe, np.array([[1, 1, 0], [0, 1, 1]]))
        obs = observe(idx, QueryTrace(np.array([0, 1, 0])))
        assert obs.volumes.tolist() == [pytest.approx(2 / 3)] * 2
        assert obs.frequencies.tolist() == [pytest.approx(2 / 3), pytest.approx(1 / 3)]
        expected_c = [[2 / 3, 1 / 3], [1 / 3, 2 / 3]]
        assert np.allclose(obs.cooccurrence, expected_c)
        # brute-force pairwise document count oracle
        mat = idx.matrix
        for i in range(2):
            for j in range(2):
                both = sum(int(mat[i, d] and mat[j, d]) for d in range(3))
                assert obs.cooccurrence[i, j] == pytest.approx(both / 3)

    def test_single_distinct_query(self):
        idx = BinaryIndex(KeywordUniverse(["x"]), np.array([[1, 0, 1, 1]]))
        obs = observe(idx, QueryTrace(np.array([0, 0])))
        assert obs.cooccurrence.shape == (1, 1)
        assert obs.cooccurrence[0, 0] == pytest.approx(obs.volumes[0])

    def test_identical_rows_identical_cooccurrence(self):
        idx = BinaryIndex(KeywordUniverse(["x", "y"]), np.array([[1, 0, 1], [1, 0, 1]]))
        obs = observe(idx, QueryTrace(np.array([0, 1])))
        assert np.array_equal(obs.cooccurrence[0], obs.cooccurrence[1])

    def test_first_appearance_token_order(self):
        idx = BinaryIndex(KeywordUniverse(["a", "b", "c"]), np.eye(3, 4, dtype=np.uint8))
        obs = observe(idx, QueryTrace(np.array([2, 0, 2, 1])))
        assert obs._true_keywords.tolist() == [2, 0, 1]
        assert obs.frequencies.tolist() == [0.5, 0.25, 0.25]

    def test_empty_trace_errors(self):
        idx = BinaryIndex(KeywordUniverse(["x"]), np.array([[1]]))
        with pytest.raises(ValueError, match="empty"):
            observe(idx, QueryTrace(np.array([], dtype=np.int64)))

    def test_cooccurrence_against_brute_force(self, rng):
        # small random instances, double loop over documents
        for trial in range(5):
            corpus = generate_zipf_corpus(40, 15, 6, 1.0, seed=trial)
            universe = KeywordUniverse(sorted({kw for d in corpus for kw in d.keywords}))
            idx = build_index(corpus, universe)
            trace = QueryTrace(rng.integers(0, len(universe), size=30))
            obs = observe(idx, trace)
            seen = obs._true_keywords
            n = idx.n_docs
            for i, ki in enumerate(seen):
                for j, kj in enumerate(seen):
                    both = sum(int(idx.matrix[ki, d] and idx.matrix[kj, d])
                               for d in range(n))
                    assert obs.cooccurrence[i, j] == pytest.approx(both / n)

    def test_cooccurrence_bounds_and_symmetry(self, rng):
        corpus = generate_zipf_corpus(60, 20, 8, 1.0, seed=9)
        universe = KeywordUniverse(sorted({kw for d in corpus for kw in d.keywords}))
        idx = build_index(corpus, universe)
        obs = observe(idx, QueryTrace(rng.integers(0, len(universe), size=50)))
        c = obs.cooccurrence
        assert np.array_equal(c, c.T)
        v = obs.volumes
        pair_min = np.minimum(v[:, None], v[None, :])
        assert (c <= pair_min + 1e-12).all()
        assert (c >= 0).all()
        assert np.allclose(np.diag(c), v)

    def test_frequencies_exact_rationals(self):
        idx = BinaryIndex(KeywordUniverse(["a", "b", "c"]), np.eye(3, 5, dtype=np.uint8))
        trace = QueryTrace(np.array([0, 1, 0, 2, 0, 1, 0]))
        obs = observe(idx, trace)
        counts = {0: 4, 1: 2, 2: 1}
        assert float(obs.frequencies.sum()) == pytest.approx(1.0, abs=1e-12)
        for tok, kw in enumerate(obs._true_keywords):
            assert obs.frequencies[tok] == counts[int(kw)] / 7
        assert Fraction(4, 7) + Fraction(2, 7) + Fraction(1, 7) == 1


class TestSyntheticFrequency:
    def test_stationary_when_no_drift(self):
        uni = KeywordUniverse([f"k{i}" for i in range(10)])
        series = synthetic_frequency_series(uni, 1.0, 5, seed=1)
        assert np.array_equal(series.intervals[0], series.intervals[4])

    def test_drift_changes_intervals(self):
        uni = KeywordUniverse([f"k{i}" for i in range(10)])
        series = synthetic_frequency_series(uni, 1.0, 5, seed=1, drift=0.1)
        assert not np.array_equal(series.intervals[0], series.intervals[4])

    def test_aligned_ranks_without_jitter(self):
        uni = KeywordUniverse([f"k{i}" for i in range(6)])
        series = synthetic_frequency_series(uni, 1.0, 1, seed=1)
        weights = series.intervals[0]
        assert np.all(np.diff(weights) < 0)  # descending with universe order
