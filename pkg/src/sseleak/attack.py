"""The three-stage query-recovery attack.

Stage 1 localizes the most isolated queries in (volume, frequency) space and
pairs each with its nearest keyword. Stage 2 cross-checks those pairs against
the co-occurrence matrices and keeps only the most consistent ones. Stage 3
iterates from that trusted seed, scoring every unknown query against every
still-unpaired keyword and committing the most clear-cut predictions first.

Tie rules are fixed everywhere so runs are reproducible: queries break ties by
token order (first appearance), keywords by universe order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Optional, Union

import numpy as np

from ._kernels import pairwise_l2, pairwise_vf
from .knowledge import SimilarKnowledge
from .leakage import LeakageObservation


@dataclass(frozen=True)
class GeometricRefSpeed:
    """Commit schedule that grows by a fixed factor each iteration."""

    initial: int
    growth: float

    def at(self, iteration: int) -> int:
        # rounds up, never below one commit per iteration
        return max(1, math.ceil(self.initial * self.growth ** iteration))


RefSpeed = Union[int, GeometricRefSpeed]


@dataclass
class AttackParams:
    """Knobs of the pipeline.

    alpha weighs volume against frequency in the point distances; beta weighs
    co-occurrence against that distance in the stage-3 score. base_rec and
    conf_rec are the stage-1/stage-2 prediction budgets (None resolves to
    "all observed queries" at attack time). epsilon floors the argument of
    the logarithm in the stage-3 score.
    """

    alpha: float = 0.3
    beta: float = 0.9
    base_rec: Optional[int] = 45
    conf_rec: Optional[int] = 35
    ref_speed: RefSpeed = 10
    epsilon: float = 1e-10

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must be in [0, 1]")
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError("beta must be in [0, 1]")
        if self.conf_rec is not None and self.conf_rec < 1:
            raise ValueError("conf_rec must be >= 1")
        if (self.base_rec is not None and self.conf_rec is not None
                and self.conf_rec > self.base_rec):
            raise ValueError("conf_rec cannot exceed base_rec")
        if isinstance(self.ref_speed, GeometricRefSpeed):
            if self.ref_speed.initial < 1 or self.ref_speed.growth <= 0:
                raise ValueError("geometric ref_speed needs initial >= 1, growth > 0")
        elif self.ref_speed < 1:
            raise ValueError("ref_speed must be >= 1")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be > 0")


def _speed_at(ref_speed: RefSpeed, iteration: int) -> int:
    if isinstance(ref_speed, GeometricRefSpeed):
        return ref_speed.at(iteration)
    return ref_speed


@dataclass(frozen=True)
class Prediction:
    token: int
    keyword: int
    certainty: Optional[float] = None


@dataclass
class PredictionSet:
    """Ordered query-token to keyword assignments."""

    entries: list[Prediction]

    def __post_init__(self):
        tokens = [e.token for e in self.entries]
        if len(set(tokens)) != len(tokens):
            raise ValueError("prediction set repeats a query token")

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[Prediction]:
        return iter(self.entries)

    def tokens(self) -> list[int]:
        return [e.token for e in self.entries]

    def keywords(self) -> list[int]:
        return [e.keyword for e in self.entries]

    def as_dict(self) -> dict[int, int]:
        return {e.token: e.keyword for e in self.entries}


def differential_distance(obs: LeakageObservation, alpha: float) -> np.ndarray:
    """Distance from each query to its nearest neighbor in (volume, frequency)
    space; large values mark isolated, easily identified queries."""
    if obs.n_queries < 2:
        raise ValueError("need at least two distinct queries")
    d = pairwise_vf(obs.volumes, obs.frequencies, obs.volumes, obs.frequencies, alpha)
    np.fill_diagonal(d, np.inf)
    return d.min(axis=1)


def recover_dq(obs: LeakageObservation, knowledge: SimilarKnowledge,
               alpha: float, base_rec: int) -> PredictionSet:
    """Stage 1: pair the ``base_rec`` most isolated queries with their nearest
    keywords.

    Every candidate keyword is considered for every query, so two queries may
    receive the same keyword here; exclusivity starts in stage 3.
    """
    l = obs.n_queries
    if not 0 <= base_rec <= l:
        raise ValueError(f"base_rec must be in [0, {l}]")
    if len(knowledge.volumes) < 1:
        raise ValueError("keyword universe is empty")
    dist = differential_distance(obs, alpha)
    order = np.lexsort((np.arange(l), -dist))  # distance desc, token asc
    s = pairwise_vf(obs.volumes, obs.frequencies,
                    knowledge.volumes, knowledge.frequencies, alpha)
    entries = [Prediction(int(t), int(np.argmin(s[t]))) for t in order[:base_rec]]
    return PredictionSet(entries)


def _row_normalize(m: np.ndarray) -> np.ndarray:
    """Divide each row by its sum; all-zero rows stay zero."""
    sums = m.sum(axis=1, keepdims=True)
    return np.divide(m, sums, out=np.zeros_like(m, dtype=np.float64), where=sums > 0)


def verify(pred: PredictionSet, obs: LeakageObservation,
           knowledge: SimilarKnowledge, conf_rec: int) -> PredictionSet:
    """Stage 2: drop the ``len(pred) - conf_rec`` predictions whose observed
    and similar co-occurrence rows disagree the most.

    Both matrices are restricted to the predicted queries/keywords (in
    prediction order) and row-normalized before comparison. Ties on the
    disagreement score evict the higher token first. Survivors keep their
    original order.
    """
    n = len(pred)
    if not 0 <= conf_rec <= n:
        raise ValueError(f"conf_rec must be in [0, {n}]")
    if conf_rec == n:
        return PredictionSet(list(pred.entries))
    toks = pred.tokens()
    kws = pred.keywords()
    c_obs = _row_normalize(obs.cooccurrence[np.ix_(toks, toks)])
    c_sim = _row_normalize(knowledge.cooccurrence[np.ix_(kws, kws)])
    revconf = np.linalg.norm(c_obs - c_sim, axis=1)
    eviction = sorted(range(n), key=lambda i: (-revconf[i], -toks[i]))
    removed = set(eviction[:n - conf_rec])
    return PredictionSet([e for i, e in enumerate(pred.entries) if i not in removed])


def candidate_certainties(scores: np.ndarray) -> np.ndarray:
    """Certainty of each candidate: its score minus the best competing score."""
    scores = np.asarray(scores, dtype=np.float64)
    if scores.shape[0] < 2:
        return np.full(scores.shape[0], np.inf)
    best_idx = int(np.argmax(scores))
    best = scores[best_idx]
    runner_up = np.copy(scores)
    runner_up[best_idx] = -np.inf
    second = runner_up.max()
    out = scores - best
    out[best_idx] = best - second
    return out


def recover_all(seed_pred: PredictionSet, obs: LeakageObservation,
                knowledge: SimilarKnowledge, params: AttackParams) -> PredictionSet:
    """Stage 3: iteratively extend the seed until every query is assigned.

    Each iteration scores every unknown query against every unpaired keyword:
    the co-occurrence rows against the already-recovered queries (and their
    paired keywords) are row-normalized and compared by Euclidean distance,
    mixed with the volume/frequency distance, and passed through -ln with the
    argument floored at ``params.epsilon``. The per-iteration commit budget
    comes from ``params.ref_speed``; commits are ordered by certainty (the gap
    between a query's best and second-best score). If a keyword was already
    taken earlier in the same batch, the later query falls back to its best
    still-unpaired keyword, keeping the final assignment injective.
    """
    l = obs.n_queries
    m = len(knowledge.volumes)
    seed_kws = seed_pred.keywords()
    if len(set(seed_kws)) != len(seed_kws):
        raise ValueError("seed predictions repeat a keyword")
    if m - len(seed_pred) < l - len(seed_pred):
        raise ValueError(f"only {m} keywords for {l} distinct queries")

    final = list(seed_pred.entries)
    recovered = [e.token for e in final]
    paired = [e.keyword for e in final]
    unknown = sorted(set(range(l)) - set(recovered))
    unpaired = sorted(set(range(m)) - set(paired))

    s_full = pairwise_vf(obs.volumes, obs.frequencies,
                         knowledge.volumes, knowledge.frequencies, params.alpha)

    iteration = 0
    while unknown:
        c_obs = _row_normalize(obs.cooccurrence[np.ix_(unknown, recovered)])
        c_sim = _row_normalize(knowledge.cooccurrence[np.ix_(unpaired, paired)])
        dist = pairwise_l2(c_obs, c_sim)
        arg = params.beta * dist + (1.0 - params.beta) * s_full[np.ix_(unknown, unpaired)]
        scores = -np.log(np.maximum(arg, params.epsilon))

        best_col = scores.argmax(axis=1)  # ties: lower keyword index
        best = scores[np.arange(len(unknown)), best_col]
        if len(unpaired) == 1:
            certainty = np.full(len(unknown), np.inf)
        else:
            masked = scores.copy()
            masked[np.arange(len(unknown)), best_col] = -np.inf
            certainty = best - masked.max(axis=1)

        batch = min(_speed_at(params.ref_speed, iteration), len(unknown))
        commit_order = np.lexsort((np.asarray(unknown), -certainty))[:batch]

        taken: set[int] = set()
        committed_tokens: set[int] = set()
        for row in commit_order:
            kw = unpaired[best_col[row]]
            if kw in taken:
                # keyword claimed by a more certain query this batch: take the
                # best remaining one from this query's score row
                for col in np.argsort(-scores[row], kind="stable"):
                    if unpaired[col] not in taken:
                        kw = unpaired[col]
                        break
            taken.add(kw)
            token = unknown[row]
            committed_tokens.add(token)
            final.append(Prediction(token, kw, float(certainty[row])))
            recovered.append(token)
            paired.append(kw)

        unknown = [t for t in unknown if t not in committed_tokens]
        unpaired = [k for k in unpaired if k not in taken]
        iteration += 1

    return PredictionSet(final)


def jigsaw_attack(obs: LeakageObservation, knowledge: SimilarKnowledge,
                  params: AttackParams) -> PredictionSet:
    """Run the full three-stage pipeline.

    Stage 1 may give the same keyword to several queries (likely under a
    defense that flattens volumes); stage 3 requires a keyword-injective seed,
    so only the first (most distinctive) claimant of each keyword is seeded
    and the rest are left for stage 3 to re-recover.
    """
    base_rec = obs.n_queries if params.base_rec is None else params.base_rec
    conf_rec = base_rec if params.conf_rec is None else params.conf_rec
    pred = recover_dq(obs, knowledge, params.alpha, base_rec)
    verified = verify(pred, obs, knowledge, conf_rec)
    if len(verified) == 0:
        raise ValueError("no seed predictions survived verification")
    seen: set[int] = set()
    seed = []
    for entry in verified:
        if entry.keyword not in seen:
            seen.add(entry.keyword)
            seed.append(entry)
    return recover_all(PredictionSet(seed), obs, knowledge, params)
