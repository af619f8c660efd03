"""Query-trace generation and the adversary-visible leakage of a trace.

The adversary never sees keywords: distinct queries are numbered 0, 1, 2, ...
in first-appearance order and those token numbers index every observation
array. The token-to-keyword map travels with the observation for scoring only
(`_true_keywords`); attack code must not read it.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import BinaryIndex, KeywordUniverse


@dataclass
class FrequencySeries:
    """Per-interval keyword weight vectors (a file stand-in for search-trend
    feeds); shape (n_intervals, |universe|)."""

    universe: KeywordUniverse
    intervals: np.ndarray

    def __post_init__(self):
        self.intervals = np.asarray(self.intervals, dtype=np.float64)
        if self.intervals.ndim != 2 or self.intervals.shape[1] != len(self.universe):
            raise ValueError("intervals must be n_intervals x |universe|")
        if self.intervals.size and self.intervals.min() < 0:
            raise ValueError("interval counts must be non-negative")

    @property
    def n_intervals(self) -> int:
        return int(self.intervals.shape[0])


@dataclass
class FrequencyVector:
    """Categorical query distribution over a keyword universe."""

    probabilities: np.ndarray

    def __post_init__(self):
        self.probabilities = np.asarray(self.probabilities, dtype=np.float64)
        if self.probabilities.ndim != 1:
            raise ValueError("probabilities must be a vector")
        if self.probabilities.size and self.probabilities.min() < 0:
            raise ValueError("probabilities must be non-negative")
        if abs(float(self.probabilities.sum()) - 1.0) > 1e-9:
            raise ValueError("probabilities must sum to 1")

    def __len__(self) -> int:
        return int(self.probabilities.shape[0])


@dataclass
class QueryTrace:
    """Ground-truth query sequence as keyword indices (hidden from attacks)."""

    queries: np.ndarray

    def __post_init__(self):
        self.queries = np.asarray(self.queries, dtype=np.int64)
        if self.queries.ndim != 1:
            raise ValueError("trace must be a flat sequence")

    def __len__(self) -> int:
        return int(self.queries.shape[0])


@dataclass
class LeakageObservation:
    """What the adversary sees for the distinct queries of one trace.

    volumes[i]      -- |D(td_i)| / |D|
    frequencies[i]  -- Count(td_i) / |trace|
    cooccurrence    -- ID ID^T / |D| restricted to the distinct queries
    """

    volumes: np.ndarray
    frequencies: np.ndarray
    cooccurrence: np.ndarray
    n_docs: int
    _true_keywords: np.ndarray  # token -> keyword index; evaluation only

    def __post_init__(self):
        l = self.volumes.shape[0]
        if not (self.frequencies.shape == (l,)
                and self.cooccurrence.shape == (l, l)
                and self._true_keywords.shape == (l,)):
            raise ValueError("observation arrays disagree on the query count")

    @property
    def n_queries(self) -> int:
        return int(self.volumes.shape[0])

    @property
    def tokens(self) -> np.ndarray:
        return np.arange(self.n_queries)


def load_frequency_table(path: str | Path, universe: KeywordUniverse) -> FrequencySeries:
    """Read a ``keyword,interval,count`` CSV into a dense series.

    Missing (keyword, interval) cells are zero; repeated cells accumulate.
    """
    path = Path(path)
    rows: list[tuple[int, int, float]] = []
    max_interval = -1
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["keyword", "interval", "count"]:
            raise ValueError(f"{path}: expected header 'keyword,interval,count'")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise ValueError(f"{path}:{lineno}: expected 3 fields")
            kw, interval_s, count_s = (c.strip() for c in row)
            if kw not in universe:
                raise ValueError(f"{path}:{lineno}: unknown keyword {kw!r}")
            interval = int(interval_s)
            if interval < 0:
                raise ValueError(f"{path}:{lineno}: negative interval index")
            count = float(count_s)
            if count < 0:
                raise ValueError(f"{path}:{lineno}: negative count for {kw!r}")
            rows.append((universe.index_of(kw), interval, count))
            max_interval = max(max_interval, interval)
    if max_interval < 0:
        raise ValueError(f"{path}: no data rows")
    dense = np.zeros((max_interval + 1, len(universe)), dtype=np.float64)
    for kw_idx, interval, count in rows:
        dense[interval, kw_idx] += count
    return FrequencySeries(universe, dense)


def window_frequency(series: FrequencySeries, start: int, length: int) -> FrequencyVector:
    """Sum the window [start, start+length) and normalize to a distribution."""
    if start < 0 or length < 1:
        raise ValueError("window start must be >= 0 and length >= 1")
    if start + length > series.n_intervals:
        raise ValueError(
            f"window [{start}, {start + length}) exceeds the "
            f"{series.n_intervals}-interval series")
    sums = series.intervals[start:start + length].sum(axis=0)
    total = float(sums.sum())
    if total <= 0:
        raise ValueError("window contains no query mass")
    return FrequencyVector(sums / total)


def synthetic_frequency_series(universe: KeywordUniverse, zipf_exponent: float,
                               n_intervals: int, seed: int,
                               rank_jitter: float = 0.0,
                               drift: float = 0.0) -> FrequencySeries:
    """Zipf-shaped weights with optional drift, for desk-scale experiments.

    Weight rank r is proportional to ``r**-zipf_exponent`` and is assigned to
    universe positions in order, after perturbing positions with Gaussian
    noise of scale ``rank_jitter`` (0 keeps frequency rank aligned with
    universe order, i.e. with volume rank when the universe is volume-sorted).
    Each interval multiplies the previous weights by a per-keyword lognormal
    step of scale ``drift``, so windows far apart drift apart smoothly.
    """
    if n_intervals < 1:
        raise ValueError("n_intervals must be >= 1")
    if zipf_exponent <= 0:
        raise ValueError("zipf_exponent must be > 0")
    rng = np.random.default_rng(seed)
    m = len(universe)
    base = np.arange(1, m + 1, dtype=np.float64) ** -zipf_exponent
    keys = np.arange(m, dtype=np.float64)
    if rank_jitter > 0:
        keys = keys + rank_jitter * rng.standard_normal(m)
    order = np.argsort(keys, kind="stable")
    weights = np.empty(m, dtype=np.float64)
    weights[order] = base

    rows = np.empty((n_intervals, m), dtype=np.float64)
    rows[0] = weights
    for t in range(1, n_intervals):
        if drift > 0:
            weights = weights * np.exp(drift * rng.standard_normal(m))
        rows[t] = weights
    return FrequencySeries(universe, rows)


def generate_trace(freq: FrequencyVector, eta: int, n_intervals: int,
                   seed: int) -> QueryTrace:
    """Draw ``eta * n_intervals`` i.i.d. queries from ``freq``."""
    if eta < 1 or n_intervals < 1:
        raise ValueError("eta and n_intervals must be >= 1")
    rng = np.random.default_rng(seed)
    queries = rng.choice(len(freq), size=eta * n_intervals, p=freq.probabilities)
    return QueryTrace(queries)


def observe(index: BinaryIndex, trace: QueryTrace) -> LeakageObservation:
    """Extract the leakage of a trace against an index.

    Volumes and co-occurrence are normalized by the server-side document
    count, which includes any fake documents injected by a padding defense.
    """
    if len(trace) == 0:
        raise ValueError("trace is empty")
    q = trace.queries
    uniq, first_pos, counts = np.unique(q, return_index=True, return_counts=True)
    appearance = np.argsort(first_pos, kind="stable")
    keywords = uniq[appearance]
    counts = counts[appearance]

    n = index.n_docs
    rows = index.matrix[keywords].astype(np.float64)
    volumes = rows.sum(axis=1) / n
    frequencies = counts.astype(np.float64) / len(trace)
    cooccurrence = (rows @ rows.T) / n
    return LeakageObservation(volumes=volumes, frequencies=frequencies,
                              cooccurrence=cooccurrence, n_docs=n,
                              _true_keywords=keywords.astype(np.int64))
