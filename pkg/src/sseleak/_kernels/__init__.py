"""Pairwise-distance kernels with a compiled core and a numpy fallback.

Benchmarks (see benchmarks/bench_kernels.py) show the two hot kernels want
different homes: the element-wise volume/frequency kernel is ~50x faster
compiled (numpy pays for large broadcast temporaries), while the Euclidean
kernel is a matmul in disguise and the BLAS-backed numpy form wins by up to
15x. The default "hybrid" backend therefore routes each kernel to its faster
implementation; "python" and "cython" force one implementation for both
(used by the parity tests and the benchmark). Select via the
``SSELEAK_KERNELS`` environment variable or :func:`set_backend`.
"""

from __future__ import annotations

import os

import numpy as np

from . import _pairwise_py

try:
    from . import _pairwise_cy
except ImportError:
    _pairwise_cy = None

_BACKENDS = {"python": (_pairwise_py, _pairwise_py)}
if _pairwise_cy is not None:
    _BACKENDS["cython"] = (_pairwise_cy, _pairwise_cy)
    # fastest implementation of each kernel: (pairwise_l2, pairwise_vf)
    _BACKENDS["hybrid"] = (_pairwise_py, _pairwise_cy)

_active = "python"


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_BACKENDS))


def set_backend(name: str) -> None:
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"kernel backend {name!r} not available "
                         f"(have: {', '.join(available_backends())})")
    _active = name


def active_backend() -> str:
    return _active


def _c64(a) -> np.ndarray:
    return np.ascontiguousarray(a, dtype=np.float64)


def pairwise_l2(a, b) -> np.ndarray:
    """Matrix of Euclidean distances between rows of ``a`` and rows of ``b``."""
    return _BACKENDS[_active][0].pairwise_l2(_c64(a), _c64(b))


def pairwise_vf(vol_a, freq_a, vol_b, freq_b, alpha: float) -> np.ndarray:
    """Matrix of ``alpha*|dv| + (1-alpha)*|df|`` distances between two
    (volume, frequency) point sets."""
    return _BACKENDS[_active][1].pairwise_vf(_c64(vol_a), _c64(freq_a),
                                             _c64(vol_b), _c64(freq_b),
                                             float(alpha))


_requested = os.environ.get("SSELEAK_KERNELS", "").strip().lower()
if _requested in ("", "auto"):
    set_backend("hybrid" if "hybrid" in _BACKENDS else "python")
else:
    set_backend(_requested)
