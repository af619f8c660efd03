"""Config-driven experiment runner binding all modules.

A run is fully determined by its config (every random choice derives from the
master seed and the trial index), so repeating a run reproduces the reports
byte for byte. Trials are independent and may execute in a process pool.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Optional

import numpy as np

from .attack import AttackParams, GeometricRefSpeed, jigsaw_attack
from .baseline import simple_attack
from .corpus import (BinaryIndex, Corpus, KeywordUniverse, build_index,
                     generate_zipf_corpus, load_corpus, split_corpus,
                     top_volume_universe)
from .defenses import DefenseConfig, OverheadReport, overhead_metrics
from .knowledge import (adapt_cgpr, adapt_clrz, adapt_cluster, adapt_seal,
                        build_similar_knowledge)
from .leakage import (FrequencySeries, generate_trace, load_frequency_table,
                      observe, synthetic_frequency_series, window_frequency)
from .metrics import MetricsReport, quadrant_accuracy, score_predictions


def derive_seed(*parts: Any) -> int:
    """Stable non-negative 63-bit seed from a tuple of hashable parts."""
    text = "\x1f".join(str(p) for p in parts)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") >> 1


class ConfigError(ValueError):
    pass


@dataclass
class CorpusSource:
    """Where documents come from: a file/directory or the Zipf synthesizer."""

    kind: str  # jsonl | text_dir | synthetic
    path: Optional[str] = None
    n_docs: Optional[int] = None
    vocab_size: Optional[int] = None
    mean_doc_len: Optional[int] = None
    zipf_exponent: Optional[float] = None
    seed: Optional[int] = None

    def validate(self) -> None:
        if self.kind in ("jsonl", "text_dir"):
            if not self.path:
                raise ConfigError("corpus.path is required for file corpora")
        elif self.kind == "synthetic":
            for name in ("n_docs", "vocab_size", "mean_doc_len", "zipf_exponent"):
                if getattr(self, name) is None:
                    raise ConfigError(f"corpus.{name} is required for synthetic corpora")
            if self.seed is None:
                raise ConfigError("corpus.seed is required (seeds have no defaults)")
        else:
            raise ConfigError(f"unknown corpus kind {self.kind!r}")

    def load(self, stopwords: frozenset[str]) -> Corpus:
        self.validate()
        if self.kind == "synthetic":
            return generate_zipf_corpus(self.n_docs, self.vocab_size,
                                        self.mean_doc_len, self.zipf_exponent,
                                        self.seed)
        return load_corpus(self.path, self.kind, stopwords)


@dataclass
class FrequencySource:
    """Where query-frequency intervals come from: csv file or synthesizer."""

    kind: str  # csv | synthetic
    path: Optional[str] = None
    zipf_exponent: Optional[float] = None
    intervals: Optional[int] = None
    rank_jitter: float = 0.0
    drift: float = 0.0
    seed: Optional[int] = None

    def validate(self) -> None:
        if self.kind == "csv":
            if not self.path:
                raise ConfigError("frequency.path is required for csv frequency")
        elif self.kind == "synthetic":
            if self.zipf_exponent is None or self.intervals is None:
                raise ConfigError("frequency.zipf_exponent and frequency.intervals "
                                  "are required for synthetic frequency")
            if self.seed is None:
                raise ConfigError("frequency.seed is required (seeds have no defaults)")
        else:
            raise ConfigError(f"unknown frequency kind {self.kind!r}")

    def load(self, universe: KeywordUniverse) -> FrequencySeries:
        self.validate()
        if self.kind == "csv":
            return load_frequency_table(self.path, universe)
        return synthetic_frequency_series(universe, self.zipf_exponent,
                                          self.intervals, self.seed,
                                          rank_jitter=self.rank_jitter,
                                          drift=self.drift)


@dataclass
class ExperimentConfig:
    corpus: CorpusSource
    frequency: FrequencySource
    universe_size: int
    master_seed: int
    trials: int = 1
    stopwords_path: Optional[str] = None
    split_fraction: Optional[float] = 0.5  # None: attacker gets the real data
    window_start: int = 0
    window_length: int = 1
    tau: int = 0
    eta: int = 100
    n_intervals: int = 1
    defense: DefenseConfig = field(default_factory=DefenseConfig)
    adaptation: bool = False
    attack: str = "jigsaw"  # jigsaw | simple
    attack_params: AttackParams = field(default_factory=AttackParams)
    quadrants: Optional[tuple[float, float]] = None  # (rv, rf)
    save_predictions: bool = False
    workers: int = 1
    output_dir: Optional[str] = None

    def validate(self) -> None:
        self.corpus.validate()
        self.frequency.validate()
        self.defense.validate()
        if self.master_seed is None or self.master_seed < 0:
            raise ConfigError("master_seed must be a non-negative integer")
        if self.universe_size < 1:
            raise ConfigError("universe_size must be >= 1")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.split_fraction is not None and not 0.0 < self.split_fraction < 1.0:
            raise ConfigError("split_fraction must be in (0, 1) or null")
        if self.window_start < 0 or self.window_length < 1 or self.tau < 0:
            raise ConfigError("window_start/tau must be >= 0 and window_length >= 1")
        if self.eta < 1 or self.n_intervals < 1:
            raise ConfigError("eta and n_intervals must be >= 1")
        if self.attack not in ("jigsaw", "simple"):
            raise ConfigError(f"unknown attack {self.attack!r}")
        if self.quadrants is not None:
            rv, rf = self.quadrants
            if not (0.0 < rv < 1.0 and 0.0 < rf < 1.0):
                raise ConfigError("quadrants rv/rf must be in (0, 1)")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.frequency.kind == "synthetic":
            needed = self.window_start + self.tau + self.window_length
            if needed > self.frequency.intervals:
                raise ConfigError(
                    f"window plus tau needs {needed} intervals, "
                    f"series has {self.frequency.intervals}")

    # -- serialization ----------------------------------------------------

    def to_dict(self) -> dict:
        ap = self.attack_params
        ref = ap.ref_speed
        ref_repr = ({"initial": ref.initial, "growth": ref.growth}
                    if isinstance(ref, GeometricRefSpeed) else ref)
        return {
            "corpus": _strip_none(vars(self.corpus).copy()),
            "frequency": _strip_none(vars(self.frequency).copy()),
            "universe_size": self.universe_size,
            "stopwords_path": self.stopwords_path,
            "split_fraction": self.split_fraction,
            "window_start": self.window_start,
            "window_length": self.window_length,
            "tau": self.tau,
            "eta": self.eta,
            "n_intervals": self.n_intervals,
            "defense": _strip_none(vars(self.defense).copy()),
            "adaptation": self.adaptation,
            "attack": self.attack,
            "attack_params": {
                "alpha": ap.alpha, "beta": ap.beta,
                "base_rec": ap.base_rec, "conf_rec": ap.conf_rec,
                "ref_speed": ref_repr, "epsilon": ap.epsilon,
            },
            "quadrants": list(self.quadrants) if self.quadrants else None,
            "save_predictions": self.save_predictions,
            "trials": self.trials,
            "master_seed": self.master_seed,
            "workers": self.workers,
            "output_dir": self.output_dir,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {
            "corpus", "frequency", "universe_size", "stopwords_path",
            "split_fraction", "window_start", "window_length", "tau", "eta",
            "n_intervals", "defense", "adaptation", "attack", "attack_params",
            "quadrants", "save_predictions", "trials", "master_seed",
            "workers", "output_dir",
        }
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        for required in ("corpus", "frequency", "universe_size", "master_seed"):
            if required not in data:
                raise ConfigError(f"missing required config key {required!r}")

        ap_data = dict(data.get("attack_params", {}))
        ref = ap_data.get("ref_speed", 10)
        if isinstance(ref, dict):
            ap_data["ref_speed"] = GeometricRefSpeed(int(ref["initial"]),
                                                     float(ref["growth"]))
        defense_data = data.get("defense", {"kind": "none"})
        if defense_data.get("kind", "none") != "none" and "seed" not in defense_data:
            raise ConfigError("defense.seed is required (seeds have no defaults)")
        try:
            attack_params = AttackParams(**ap_data)
            corpus = CorpusSource(**data["corpus"])
            frequency = FrequencySource(**data["frequency"])
            defense = DefenseConfig(**defense_data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc
        quad = data.get("quadrants")
        try:
            config = cls(
                corpus=corpus,
                frequency=frequency,
                universe_size=int(data["universe_size"]),
                stopwords_path=data.get("stopwords_path"),
                split_fraction=data.get("split_fraction", 0.5),
                window_start=int(data.get("window_start", 0)),
                window_length=int(data.get("window_length", 1)),
                tau=int(data.get("tau", 0)),
                eta=int(data.get("eta", 100)),
                n_intervals=int(data.get("n_intervals", 1)),
                defense=defense,
                adaptation=bool(data.get("adaptation", False)),
                attack=data.get("attack", "jigsaw"),
                attack_params=attack_params,
                quadrants=tuple(quad) if quad else None,
                save_predictions=bool(data.get("save_predictions", False)),
                trials=int(data.get("trials", 1)),
                master_seed=int(data["master_seed"]),
                workers=int(data.get("workers", 1)),
                output_dir=data.get("output_dir"),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"malformed config value: {exc}") from exc
        config.validate()
        return config

    @classmethod
    def from_file(cls, path: str | Path) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}: invalid json ({exc})") from exc
        return cls.from_dict(data)


def _strip_none(d: dict) -> dict:
    return {k: v for k, v in d.items() if v is not None}


@dataclass
class TrialResult:
    trial: int
    seconds: float
    metrics: Optional[MetricsReport] = None
    overhead: Optional[OverheadReport] = None
    predictions: Optional[dict] = None
    error: Optional[str] = None

    def to_dict(self) -> dict:
        out: dict[str, Any] = {"trial": self.trial, "seconds": self.seconds}
        if self.error is not None:
            out["error"] = self.error
            return out
        out["metrics"] = self.metrics.to_dict()
        out["overhead"] = {
            "storage_overhead": self.overhead.storage_overhead,
            "communication_overhead": self.overhead.communication_overhead,
        }
        if self.predictions is not None:
            out["predictions"] = self.predictions
        return out


@dataclass
class RunReport:
    config: dict
    trials: list[TrialResult]
    aggregate: dict

    @property
    def failed_trials(self) -> int:
        return sum(1 for t in self.trials if t.error is not None)

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "trials": [t.to_dict() for t in self.trials],
            "aggregate": self.aggregate,
            "failed_trials": self.failed_trials,
        }


@dataclass
class _Prepared:
    """Inputs shared by every trial of an experiment."""

    corpus: Corpus
    universe: KeywordUniverse
    series: FrequencySeries
    attacker_freq_window: tuple[int, int]


def _load_stopwords(path: Optional[str]) -> frozenset[str]:
    if not path:
        return frozenset()
    words = Path(path).read_text(encoding="utf-8").split()
    return frozenset(w.strip().lower() for w in words if w.strip())


def prepare(config: ExperimentConfig) -> _Prepared:
    stopwords = _load_stopwords(config.stopwords_path)
    corpus = config.corpus.load(stopwords)
    universe = top_volume_universe(corpus, config.universe_size, stopwords)
    series = config.frequency.load(universe)
    return _Prepared(corpus=corpus, universe=universe, series=series,
                     attacker_freq_window=(config.window_start, config.window_length))


def _build_knowledge(config: ExperimentConfig, similar_corpus: Corpus,
                     similar_index: BinaryIndex, attacker_freq,
                     n_docs_real: int, seed: int):
    defense = config.defense
    if not config.adaptation or defense.kind == "none":
        return build_similar_knowledge(similar_index, attacker_freq)
    if defense.kind == "cgpr_padding":
        padded = adapt_cgpr(similar_index, defense.k, n_docs_real, seed)
        return build_similar_knowledge(padded, attacker_freq)
    if defense.kind == "clrz_obfuscation":
        base = build_similar_knowledge(similar_index, attacker_freq,
                                       include_absence=True)
        return adapt_clrz(base, defense.tpr, defense.fpr)
    if defense.kind == "seal_padding":
        padded = adapt_seal(similar_corpus, similar_index.universe, defense.x,
                            n_docs_real, seed)
        return build_similar_knowledge(padded, attacker_freq)
    padded = adapt_cluster(similar_index, defense.cluster_size, seed)
    return build_similar_knowledge(padded, attacker_freq)


def run_trial(prepared: _Prepared, config: ExperimentConfig, trial: int,
              seed_scope: tuple = ()) -> TrialResult:
    """One seeded simulation: split, defend, observe, attack, score."""
    started = time.perf_counter()
    scope = (config.master_seed,) + seed_scope + (trial,)
    try:
        if config.split_fraction is None:
            real_corpus = similar_corpus = prepared.corpus
        else:
            real_corpus, similar_corpus = split_corpus(
                prepared.corpus, config.split_fraction, derive_seed(*scope, "split"))
        real_index = build_index(real_corpus, prepared.universe)
        similar_index = build_index(similar_corpus, prepared.universe)

        defended = config.defense.apply(
            real_index, seed=derive_seed(*scope, "defense", config.defense.seed))

        start, length = prepared.attacker_freq_window
        attacker_freq = window_frequency(prepared.series, start, length)
        user_freq = window_frequency(prepared.series, start + config.tau, length)
        trace = generate_trace(user_freq, config.eta, config.n_intervals,
                               derive_seed(*scope, "trace"))
        obs = observe(defended, trace)

        knowledge = _build_knowledge(config, similar_corpus, similar_index,
                                     attacker_freq, real_index.n_docs,
                                     derive_seed(*scope, "adapt"))

        if config.attack == "jigsaw":
            pred = jigsaw_attack(obs, knowledge, config.attack_params)
        else:
            pred = simple_attack(obs, knowledge)

        metrics = score_predictions(pred, obs, trace)
        if config.quadrants is not None:
            rv, rf = config.quadrants
            metrics.per_quadrant = quadrant_accuracy(pred, obs, rv, rf)
        overhead = overhead_metrics(real_index, defended, trace)
        predictions = None
        if config.save_predictions:
            predictions = {
                "tokens": pred.tokens(),
                "keywords": pred.keywords(),
                "true_keywords": obs._true_keywords[pred.tokens()].tolist(),
            }
        return TrialResult(trial=trial, seconds=time.perf_counter() - started,
                           metrics=metrics, overhead=overhead,
                           predictions=predictions)
    except Exception as exc:  # recorded per trial; the run keeps going
        return TrialResult(trial=trial, seconds=time.perf_counter() - started,
                           error=f"{type(exc).__name__}: {exc}")


def _aggregate(trials: list[TrialResult]) -> dict:
    ok = [t for t in trials if t.error is None]
    fields = ("accuracy", "recovery_rate", "accuracy_unique")
    agg: dict[str, Any] = {"completed_trials": len(ok)}
    for name in fields:
        values = [getattr(t.metrics, name) for t in ok]
        agg[f"{name}_mean"] = float(np.mean(values)) if values else None
        agg[f"{name}_std"] = float(np.std(values)) if values else None
    for name in ("storage_overhead", "communication_overhead"):
        values = [getattr(t.overhead, name) for t in ok]
        agg[f"{name}_mean"] = float(np.mean(values)) if values else None
    return agg


def run_experiment(config: ExperimentConfig) -> RunReport:
    """Run all trials of a config and aggregate their metrics."""
    config.validate()
    prepared = prepare(config)
    indices = list(range(config.trials))
    if config.workers > 1 and config.trials > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            trials = list(pool.map(run_trial, [prepared] * len(indices),
                                   [config] * len(indices), indices))
    else:
        trials = [run_trial(prepared, config, t) for t in indices]
    trials.sort(key=lambda t: t.trial)
    return RunReport(config=config.to_dict(), trials=trials,
                     aggregate=_aggregate(trials))


def durability_sweep(config: ExperimentConfig,
                     taus: list[int]) -> list[tuple[int, MetricsReport]]:
    """Re-run the configured attack with the trace window shifted by each
    offset while the attacker's frequency window stays put.

    Each offset runs once with a freshly derived seed; offsets that push the
    trace window past the series raise up front.
    """
    config.validate()
    prepared = prepare(config)
    total = prepared.series.n_intervals
    for tau in taus:
        if config.window_start + tau + config.window_length > total:
            raise ValueError(f"tau={tau} pushes the trace window past the "
                             f"{total}-interval series")
    out = []
    for i, tau in enumerate(taus):
        shifted = replace(config, tau=tau)
        result = run_trial(prepared, shifted, trial=0,
                           seed_scope=("durability", i))
        if result.error is not None:
            raise RuntimeError(f"durability run at tau={tau} failed: {result.error}")
        out.append((tau, result.metrics))
    return out


# -- report files ---------------------------------------------------------

def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(f".tmp-{path.name}")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def emit_reports(report: RunReport, out_dir: str | Path) -> list[Path]:
    """Write report.json, metrics.csv, and (when enabled) quadrants.csv.

    Files are written atomically (temp file + rename). The metrics csv holds
    only seed-determined values so reruns of the same config are byte
    identical; wall-clock timings live in report.json.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    report_path = out / "report.json"
    _atomic_write(report_path,
                  json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
    written.append(report_path)

    metrics_path = out / "metrics.csv"
    header = ["trial", "accuracy", "recovery_rate", "accuracy_unique",
              "correct_distinct", "storage_overhead", "communication_overhead"]
    lines = [",".join(header)]
    for t in report.trials:
        if t.error is not None:
            lines.append(f"{t.trial},,,,,,")
            continue
        m, o = t.metrics, t.overhead
        lines.append(",".join([
            str(t.trial), repr(m.accuracy), repr(m.recovery_rate),
            repr(m.accuracy_unique), str(m.correct_distinct),
            repr(o.storage_overhead), repr(o.communication_overhead),
        ]))
    _atomic_write(metrics_path, "\n".join(lines) + "\n")
    written.append(metrics_path)

    if any(t.metrics is not None and t.metrics.per_quadrant is not None
           for t in report.trials):
        quad_path = out / "quadrants.csv"
        lines = ["trial,quadrant,accuracy,count"]
        for t in report.trials:
            if t.metrics is None or t.metrics.per_quadrant is None:
                continue
            for name, stat in t.metrics.per_quadrant.items():
                acc = "" if stat.accuracy is None else repr(stat.accuracy)
                lines.append(f"{t.trial},{name},{acc},{stat.count}")
        _atomic_write(quad_path, "\n".join(lines) + "\n")
        written.append(quad_path)
    return written
