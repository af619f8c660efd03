"""Shared builders for observation/knowledge objects used across tests."""

from __future__ import annotations

import numpy as np
import pytest

from sseleak.corpus import KeywordUniverse
from sseleak.knowledge import SimilarKnowledge
from sseleak.leakage import LeakageObservation


def make_universe(m: int) -> KeywordUniverse:
    return KeywordUniverse(f"kw{i:03d}" for i in range(m))


def random_observation(rng: np.random.Generator, l: int,
                       n_docs: int = 100) -> LeakageObservation:
    """Observation with consistent co-occurrence built from a random index."""
    matrix = (rng.random((l, n_docs)) < rng.uniform(0.05, 0.6, size=(l, 1)))
    rows = matrix.astype(np.float64)
    volumes = rows.sum(axis=1) / n_docs
    freqs = rng.random(l) + 0.05
    freqs = freqs / freqs.sum()
    cooc = rows @ rows.T / n_docs
    return LeakageObservation(volumes=volumes, frequencies=freqs,
                              cooccurrence=cooc, n_docs=n_docs,
                              _true_keywords=np.arange(l, dtype=np.int64))


def random_knowledge(rng: np.random.Generator, m: int,
                     n_docs: int = 100) -> SimilarKnowledge:
    matrix = (rng.random((m, n_docs)) < rng.uniform(0.05, 0.6, size=(m, 1)))
    rows = matrix.astype(np.float64)
    volumes = rows.sum(axis=1) / n_docs
    freqs = rng.random(m) + 0.05
    freqs = freqs / freqs.sum()
    cooc = rows @ rows.T / n_docs
    return SimilarKnowledge(universe=make_universe(m), volumes=volumes,
                            frequencies=freqs, cooccurrence=cooc, n_docs=n_docs)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)
