"""Volume+frequency nearest-neighbor baseline and the distinctive-query census."""

from __future__ import annotations

import numpy as np

from ._kernels import pairwise_vf
from .attack import Prediction, PredictionSet, differential_distance
from .knowledge import SimilarKnowledge
from .leakage import LeakageObservation


def simple_attack(obs: LeakageObservation, knowledge: SimilarKnowledge) -> PredictionSet:
    """Pair every query with the keyword closest in |dv| + |df|.

    Queries are matched independently, so keywords may repeat. Ties go to the
    lower keyword index.
    """
    if len(knowledge.volumes) < 1:
        raise ValueError("keyword universe is empty")
    # unit weights on both terms; the argmin is scale-invariant
    s = pairwise_vf(obs.volumes, obs.frequencies,
                    knowledge.volumes, knowledge.frequencies, 0.5)
    return PredictionSet([Prediction(t, int(np.argmin(s[t])))
                          for t in range(obs.n_queries)])


def distinctive_count(obs: LeakageObservation, alpha: float, lam: float) -> int:
    """Number of queries whose differential distance exceeds ``lam`` times the
    mean differential distance."""
    d = differential_distance(obs, alpha)
    mean = float(d.mean())
    if mean <= 0:
        raise ValueError("mean differential distance is zero")
    return int(np.count_nonzero(d / mean > lam))
