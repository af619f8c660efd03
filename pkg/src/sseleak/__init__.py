"""Workbench for searchable-symmetric-encryption leakage: simulates what a
server or eavesdropper observes, applies padding/obfuscation defenses, and
runs query-recovery attacks against the result."""

from ._kernels import active_backend
from .attack import (AttackParams, GeometricRefSpeed, Prediction,
                     PredictionSet, differential_distance, jigsaw_attack,
                     recover_all, recover_dq, verify)
from .baseline import distinctive_count, simple_attack
from .corpus import (BinaryIndex, Corpus, Document, KeywordUniverse,
                     build_index, generate_zipf_corpus, load_corpus,
                     split_corpus, top_volume_universe)
from .defenses import (DefenseConfig, OverheadReport, obfuscate_clrz,
                       overhead_metrics, pad_cgpr, pad_cluster, pad_seal)
from .experiment import (ExperimentConfig, RunReport, durability_sweep,
                         emit_reports, run_experiment)
from .knowledge import (SimilarKnowledge, adapt_cgpr, adapt_clrz,
                        adapt_cluster, adapt_seal, build_similar_knowledge)
from .leakage import (FrequencySeries, FrequencyVector, LeakageObservation,
                      QueryTrace, generate_trace, load_frequency_table,
                      observe, synthetic_frequency_series, window_frequency)
from .metrics import MetricsReport, QuadrantStat, quadrant_accuracy, score_predictions

__version__ = "0.1.0"
