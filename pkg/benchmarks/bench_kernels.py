#!/usr/bin/env python3
"""Timing comparison of the compiled and numpy pairwise kernels.

Runs the raw kernels on iterative-recovery-shaped inputs, then times a full
attack on a synthetic instance under each backend.

    python3 benchmarks/bench_kernels.py [--quick]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from sseleak import _kernels
from sseleak.attack import AttackParams, jigsaw_attack
from sseleak.corpus import build_index, generate_zipf_corpus, split_corpus, top_volume_universe
from sseleak.knowledge import build_similar_knowledge
from sseleak.leakage import generate_trace, observe, synthetic_frequency_series, window_frequency


def time_call(fn, *args, repeat=5):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def bench_raw(shapes, backends):
    rng = np.random.default_rng(1)
    print(f"{'kernel':<14} {'shape':<22} " + " ".join(f"{b:>12}" for b in backends)
          + f" {'winner':>9}")

    def row(name, shape_label, times):
        winner = backends[int(np.argmin(times))] if len(times) > 1 else "-"
        print(f"{name:<14} {shape_label:<22} "
              + " ".join(f"{t * 1e3:>10.2f}ms" for t in times)
              + f" {winner:>9}")

    for m, n, k in shapes:
        a = rng.random((m, k))
        b = rng.random((n, k))
        times = []
        for backend in backends:
            _kernels.set_backend(backend)
            times.append(time_call(_kernels.pairwise_l2, a, b))
        row("pairwise_l2", f"{m}x{n}x{k}", times)

        va, fa = rng.random(m), rng.random(m)
        vb, fb = rng.random(n), rng.random(n)
        times = []
        for backend in backends:
            _kernels.set_backend(backend)
            times.append(time_call(_kernels.pairwise_vf, va, fa, vb, fb, 0.3))
        row("pairwise_vf", f"{m}x{n}", times)


def bench_attack(backends, n_docs, universe_size, eta):
    corpus = generate_zipf_corpus(n_docs, universe_size, 50, 1.0, seed=100)
    uni = top_volume_universe(corpus, universe_size)
    series = synthetic_frequency_series(uni, 1.0, 50, seed=200, rank_jitter=10.0)
    freq = window_frequency(series, 0, 50)
    real_c, sim_c = split_corpus(corpus, 0.5, seed=7)
    obs = observe(build_index(real_c, uni), generate_trace(freq, eta, 50, seed=3))
    kn = build_similar_knowledge(build_index(sim_c, uni), freq)
    params = AttackParams(alpha=0.3, beta=0.9, base_rec=45, conf_rec=35, ref_speed=10)

    print(f"\nfull attack ({universe_size} keywords, {n_docs} docs, "
          f"{obs.n_queries} distinct queries)")
    for backend in backends:
        _kernels.set_backend(backend)
        elapsed = time_call(jigsaw_attack, obs, kn, params, repeat=3)
        print(f"  {backend:<8} {elapsed * 1e3:>10.2f}ms")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--quick", action="store_true",
                        help="small shapes only")
    args = parser.parse_args()

    initial = _kernels.active_backend()
    raw_backends = [b for b in ("cython", "python")
                    if b in _kernels.available_backends()]
    if raw_backends == ["python"]:
        print("compiled kernels not built; timing the numpy backend only")
    print(f"available backends: {', '.join(_kernels.available_backends())} "
          f"(default: {initial})\n")

    shapes = [(200, 200, 100), (500, 500, 300)]
    if not args.quick:
        shapes.append((1000, 1000, 600))
    bench_raw(shapes, raw_backends)

    attack_backends = list(_kernels.available_backends())
    if args.quick:
        bench_attack(attack_backends, n_docs=2000, universe_size=150, eta=500)
    else:
        bench_attack(attack_backends, n_docs=4000, universe_size=500, eta=2000)

    _kernels.set_backend(initial)


if __name__ == "__main__":
    main()
