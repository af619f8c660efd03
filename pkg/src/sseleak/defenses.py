"""Index-transforming defenses and their storage/communication overheads.

Padding defenses append columns for fake documents drawn from a shared pool;
the pool is sized by the largest per-keyword demand (the power-of-x scheme
overrides this with ``(x - 1) * n_docs``). Each keyword samples its pool slots
from an RNG stream derived from (seed, keyword index), so per-keyword work can
be parallelized without changing the output.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .corpus import BinaryIndex
from .leakage import QueryTrace

DEFENSE_KINDS = ("none", "cgpr_padding", "clrz_obfuscation", "seal_padding",
                 "cluster_padding")


@dataclass
class DefenseConfig:
    """Which defense to apply and its parameters; only the fields of the
    active kind are read."""

    kind: str = "none"
    k: Optional[int] = None
    tpr: Optional[float] = None
    fpr: Optional[float] = None
    x: Optional[int] = None
    cluster_size: Optional[int] = None
    seed: int = 0

    def validate(self) -> None:
        if self.kind not in DEFENSE_KINDS:
            raise ValueError(f"unknown defense kind {self.kind!r}")
        if self.seed < 0:
            raise ValueError("defense seed must be non-negative")
        if self.kind == "cgpr_padding" and (self.k is None or self.k < 1):
            raise ValueError("cgpr_padding requires k >= 1")
        if self.kind == "clrz_obfuscation":
            if self.tpr is None or self.fpr is None:
                raise ValueError("clrz_obfuscation requires tpr and fpr")
            if not 0.0 <= self.fpr <= self.tpr <= 1.0:
                raise ValueError("require 0 <= fpr <= tpr <= 1")
        if self.kind == "seal_padding" and (self.x is None or self.x < 2):
            raise ValueError("seal_padding requires x >= 2")
        if self.kind == "cluster_padding" and (
                self.cluster_size is None or self.cluster_size < 2):
            raise ValueError("cluster_padding requires cluster_size >= 2")

    def apply(self, index: BinaryIndex, seed: Optional[int] = None) -> BinaryIndex:
        """Apply the configured defense; ``seed`` overrides the stored one."""
        self.validate()
        s = self.seed if seed is None else seed
        if self.kind == "none":
            return index
        if self.kind == "cgpr_padding":
            return pad_cgpr(index, self.k, s)
        if self.kind == "clrz_obfuscation":
            return obfuscate_clrz(index, self.tpr, self.fpr, s)
        if self.kind == "seal_padding":
            return pad_seal(index, self.x, s)
        return pad_cluster(index, self.cluster_size, s)


@dataclass
class OverheadReport:
    storage_overhead: float
    communication_overhead: float


def _check_seed(seed: int) -> None:
    if seed < 0:
        raise ValueError("seed must be non-negative")


def _pad_to_targets(index: BinaryIndex, targets: np.ndarray, pool_size: int,
                    seed: int) -> BinaryIndex:
    """Append ``pool_size`` fake-document columns and raise each keyword's
    volume to its target by sampling pool slots without replacement."""
    if index.matrix.shape[0] == 0:
        return BinaryIndex(index.universe, index.matrix.copy(), fake_doc_count=0)
    volumes = index.volumes()
    demands = targets - volumes
    if demands.min() < 0:
        raise ValueError("padding cannot remove documents")
    if demands.max() > pool_size:
        raise ValueError(
            f"padding demand {int(demands.max())} exceeds the fake-document "
            f"pool of {pool_size} (inconsistent parameters)")
    if pool_size == 0:
        return BinaryIndex(index.universe, index.matrix.copy(), fake_doc_count=0)
    extra = np.zeros((index.matrix.shape[0], pool_size), dtype=np.uint8)
    for i, demand in enumerate(demands):
        if demand > 0:
            rng = np.random.default_rng([seed, i])
            extra[i, rng.choice(pool_size, size=int(demand), replace=False)] = 1
    matrix = np.hstack([index.matrix, extra])
    return BinaryIndex(index.universe, matrix, fake_doc_count=pool_size)


def next_multiple(volume: int, k: int) -> int:
    """Smallest multiple of k that is >= volume (exact multiples unchanged)."""
    return volume if volume % k == 0 else (volume // k + 1) * k


def next_power(volume: int, x: int) -> int:
    """Smallest x**p >= volume for volume >= 1; zero volumes stay zero."""
    if volume <= 0:
        return 0
    p = 1
    while p < volume:
        p *= x
    return p


def pad_cgpr(index: BinaryIndex, k: int, seed: int) -> BinaryIndex:
    """Pad every keyword's volume up to the next multiple of k."""
    if k < 1:
        raise ValueError("k must be >= 1")
    _check_seed(seed)
    volumes = index.volumes()
    targets = np.array([next_multiple(int(v), k) for v in volumes], dtype=np.int64)
    pool = int((targets - volumes).max()) if len(volumes) else 0
    return _pad_to_targets(index, targets, pool, seed)


def obfuscate_clrz(index: BinaryIndex, tpr: float, fpr: float, seed: int) -> BinaryIndex:
    """Per-entry Bernoulli obfuscation: keep real postings with probability
    ``tpr``, turn empty cells into postings with probability ``fpr``.

    Applied once at index setup; no fake documents are added.
    """
    if not 0.0 <= fpr <= tpr <= 1.0:
        raise ValueError("require 0 <= fpr <= tpr <= 1")
    _check_seed(seed)
    u = np.random.default_rng(seed).random(index.matrix.shape)
    ones = index.matrix == 1
    out = np.where(ones, u < tpr, u < fpr).astype(np.uint8)
    return BinaryIndex(index.universe, out, fake_doc_count=0)


def pad_seal(index: BinaryIndex, x: int, seed: int) -> BinaryIndex:
    """Pad every nonzero volume up to the next power of x.

    The fake pool holds ``(x - 1) * n_docs`` documents, i.e. the dataset grows
    to at most x times its size.
    """
    if x < 2:
        raise ValueError("x must be >= 2")
    _check_seed(seed)
    volumes = index.volumes()
    targets = np.array([next_power(int(v), x) for v in volumes], dtype=np.int64)
    pool = (x - 1) * index.n_docs
    return _pad_to_targets(index, targets, pool, seed)


def pad_cluster(index: BinaryIndex, cluster_size: int, seed: int) -> BinaryIndex:
    """Group keywords by ascending volume into runs of ``cluster_size`` and pad
    each keyword to its cluster's maximum volume.

    A remainder smaller than ``cluster_size`` is merged into the last full
    cluster, so every cluster has at least ``cluster_size`` members.
    """
    if cluster_size < 2:
        raise ValueError("cluster_size must be >= 2")
    _check_seed(seed)
    w = len(index.universe)
    if w < cluster_size:
        raise ValueError(f"universe of {w} keywords is smaller than one cluster")
    volumes = index.volumes()
    order = sorted(range(w), key=lambda i: (int(volumes[i]), index.universe[i]))
    n_full = w // cluster_size
    clusters = [order[c * cluster_size:(c + 1) * cluster_size] for c in range(n_full)]
    clusters[-1].extend(order[n_full * cluster_size:])

    targets = np.empty(w, dtype=np.int64)
    for members in clusters:
        peak = max(int(volumes[i]) for i in members)
        for i in members:
            targets[i] = peak
    pool = int((targets - volumes).max())
    return _pad_to_targets(index, targets, pool, seed)


def overhead_metrics(original: BinaryIndex, defended: BinaryIndex,
                     trace: QueryTrace) -> OverheadReport:
    """Storage ratio of document counts; communication ratio of documents
    returned over the trace."""
    if original.universe != defended.universe:
        raise ValueError("indexes are over different universes")
    counts = np.bincount(trace.queries, minlength=len(original.universe))
    if counts.shape[0] > len(original.universe):
        raise ValueError("trace references keywords outside the universe")
    returned_orig = int(counts @ original.volumes())
    if returned_orig == 0:
        raise ValueError("trace returns no documents against the original index")
    returned_def = int(counts @ defended.volumes())
    return OverheadReport(
        storage_overhead=defended.n_docs / original.n_docs,
        communication_overhead=returned_def / returned_orig,
    )
