"""Attacker priors built from similar data, plus per-defense adaptations.

The adaptations assume the attacker learned the defense parameters and
reshapes its similar data so that volumes and co-occurrence statistics match
what the defended index leaks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .corpus import BinaryIndex, Corpus, Document, KeywordUniverse, build_index
from .defenses import pad_cgpr, pad_cluster, pad_seal
from .leakage import FrequencyVector


@dataclass
class SimilarKnowledge:
    """Volumes, frequencies, and co-occurrence the attacker derives from a
    similar document set.

    ``co_absent`` is the co-occurrence of keyword *absence* pairs and is only
    materialized when the obfuscation adaptation will need it.
    """

    universe: KeywordUniverse
    volumes: np.ndarray
    frequencies: np.ndarray
    cooccurrence: np.ndarray
    n_docs: int
    co_absent: Optional[np.ndarray] = None


def build_similar_knowledge(similar_index: BinaryIndex, freq: FrequencyVector,
                            include_absence: bool = False) -> SimilarKnowledge:
    """Normalized volumes and co-occurrence from an index over similar data."""
    n = similar_index.n_docs
    if n == 0:
        raise ValueError("similar data contains no documents")
    if len(freq) != len(similar_index.universe):
        raise ValueError("frequency vector does not cover the universe")
    rows = similar_index.matrix.astype(np.float64)
    volumes = rows.sum(axis=1) / n
    cooccurrence = (rows @ rows.T) / n
    co_absent = None
    if include_absence:
        absent = 1.0 - rows
        co_absent = (absent @ absent.T) / n
    return SimilarKnowledge(universe=similar_index.universe, volumes=volumes,
                            frequencies=freq.probabilities.copy(),
                            cooccurrence=cooccurrence, n_docs=n,
                            co_absent=co_absent)


def adapt_cgpr(similar_index: BinaryIndex, k: int, n_docs_real: int,
               seed: int) -> BinaryIndex:
    """Pad the similar index with the multiple-of-k scheme, rescaling k by the
    dataset-size ratio (rounded half up, clamped to >= 1)."""
    if k < 1 or n_docs_real < 1 or similar_index.n_docs < 1:
        raise ValueError("k and document counts must be >= 1")
    k_sim = max(1, int(math.floor(k * similar_index.n_docs / n_docs_real + 0.5)))
    return pad_cgpr(similar_index, k_sim, seed)


def adapt_clrz(knowledge: SimilarKnowledge, tpr: float, fpr: float) -> SimilarKnowledge:
    """Push the Bernoulli obfuscation through the similar statistics.

    Off-diagonal entries mix presence/presence, absence/absence, and the mixed
    events by their survival probabilities; diagonal entries (and volumes)
    follow the single-keyword rule TPR*v + FPR*(1-v).
    """
    if knowledge.co_absent is None:
        raise ValueError("knowledge was built without absence co-occurrence; "
                         "rebuild with include_absence=True")
    if not 0.0 <= fpr <= tpr <= 1.0:
        raise ValueError("require 0 <= fpr <= tpr <= 1")
    c = knowledge.cooccurrence
    c_not = knowledge.co_absent
    adapted = (tpr * tpr * c + fpr * fpr * c_not
               + tpr * fpr * (1.0 - c - c_not))
    diag = tpr * np.diag(c) + fpr * np.diag(c_not)
    np.fill_diagonal(adapted, diag)
    volumes = tpr * knowledge.volumes + fpr * (1.0 - knowledge.volumes)
    return replace(knowledge, volumes=volumes, cooccurrence=adapted, co_absent=None)


def adapt_seal(similar_corpus: Corpus, universe: KeywordUniverse, x: int,
               n_docs_real: int, seed: int) -> BinaryIndex:
    """Expand the similar data to the real dataset's size with whole copies
    plus a sampled remainder, then apply the power-of-x padding."""
    if x < 2:
        raise ValueError("x must be >= 2")
    if n_docs_real < 1:
        raise ValueError("n_docs_real must be >= 1")
    n_sim = len(similar_corpus)
    copies, remainder = divmod(n_docs_real, n_sim)
    docs: list[Document] = []
    for c in range(copies):
        for d in similar_corpus:
            docs.append(Document(f"{d.doc_id}~copy{c}", d.keywords))
    if remainder:
        rng = np.random.default_rng(seed)
        picks = np.sort(rng.choice(n_sim, size=remainder, replace=False))
        for i in picks:
            d = similar_corpus.documents[i]
            docs.append(Document(f"{d.doc_id}~rem", d.keywords))
    expanded = Corpus(docs, provenance="derived")
    return pad_seal(build_index(expanded, universe), x, seed)


def adapt_cluster(similar_index: BinaryIndex, cluster_size: int,
                  seed: int) -> BinaryIndex:
    """Apply the volume-cluster padding to the similar index as-is."""
    return pad_cluster(similar_index, cluster_size, seed)
