"""Scoring of prediction sets against the hidden ground truth."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .attack import PredictionSet
from .leakage import LeakageObservation, QueryTrace

QUADRANTS = ("HVHF", "HVLF", "LVHF", "LVLF")


class QuadrantStat(NamedTuple):
    accuracy: Optional[float]  # None when no quadrant member was predicted
    count: int


@dataclass
class MetricsReport:
    """accuracy and recovery_rate are trace-weighted (repeated queries count
    every occurrence); accuracy_unique counts distinct queries once."""

    accuracy: float
    recovery_rate: float
    correct_distinct: int
    accuracy_unique: float
    per_quadrant: Optional[dict[str, QuadrantStat]] = None

    def to_dict(self) -> dict:
        out = {
            "accuracy": self.accuracy,
            "recovery_rate": self.recovery_rate,
            "correct_distinct": self.correct_distinct,
            "accuracy_unique": self.accuracy_unique,
        }
        if self.per_quadrant is not None:
            out["per_quadrant"] = {
                q: {"accuracy": s.accuracy, "count": s.count}
                for q, s in self.per_quadrant.items()
            }
        return out


def _prediction_truth(pred: PredictionSet, obs: LeakageObservation):
    truth = obs._true_keywords
    tokens = np.asarray(pred.tokens(), dtype=np.int64)
    if tokens.size and (tokens.min() < 0 or tokens.max() >= obs.n_queries):
        raise ValueError("prediction references an unobserved query token")
    guessed = np.asarray(pred.keywords(), dtype=np.int64)
    return tokens, guessed == truth[tokens]


def score_predictions(pred: PredictionSet, obs: LeakageObservation,
                      trace: QueryTrace) -> MetricsReport:
    """Trace-weighted accuracy/recovery plus the distinct-query view."""
    if len(pred) == 0:
        raise ValueError("no queries were recovered")
    tokens, correct = _prediction_truth(pred, obs)
    kw_counts = np.bincount(trace.queries)
    token_counts = kw_counts[obs._true_keywords[tokens]]
    covered = int(token_counts.sum())
    if covered == 0:
        raise ValueError("recovered queries never occur in the trace")
    correct_occurrences = int(token_counts[correct].sum())
    return MetricsReport(
        accuracy=correct_occurrences / covered,
        recovery_rate=covered / len(trace),
        correct_distinct=int(correct.sum()),
        accuracy_unique=int(correct.sum()) / len(pred),
    )


def quadrant_accuracy(pred: PredictionSet, obs: LeakageObservation,
                      rv: float, rf: float) -> dict[str, QuadrantStat]:
    """Distinct-query accuracy split into volume/frequency quadrants.

    The top ceil(rv*l) queries by volume are high-volume, the top ceil(rf*l)
    by frequency are high-frequency (ties resolved by token order). Accuracy
    in a quadrant is over its *predicted* members; a quadrant with none is
    reported with accuracy None.
    """
    if not (0.0 < rv < 1.0 and 0.0 < rf < 1.0):
        raise ValueError("rv and rf must be in (0, 1)")
    l = obs.n_queries
    n_hv = math.ceil(rv * l)
    n_hf = math.ceil(rf * l)
    hv = set(np.lexsort((np.arange(l), -obs.volumes))[:n_hv].tolist())
    hf = set(np.lexsort((np.arange(l), -obs.frequencies))[:n_hf].tolist())

    tokens, correct = _prediction_truth(pred, obs)
    correct_by_token = dict(zip(tokens.tolist(), correct.tolist()))

    members: dict[str, list[int]] = {name: [] for name in QUADRANTS}
    for t in range(l):
        name = ("HV" if t in hv else "LV") + ("HF" if t in hf else "LF")
        members[name].append(t)

    out: dict[str, QuadrantStat] = {}
    for name in QUADRANTS:
        hits = [correct_by_token[t] for t in members[name] if t in correct_by_token]
        accuracy = (sum(hits) / len(hits)) if hits else None
        out[name] = QuadrantStat(accuracy=accuracy, count=len(members[name]))
    return out
