"""Numpy implementations of the pairwise-distance kernels."""

import numpy as np


def pairwise_l2(a, b):
    """Euclidean distance between every row of ``a`` and every row of ``b``.

    Uses the inner-product expansion so the heavy lifting is a single BLAS
    matmul; squared distances are clamped at zero before the sqrt to absorb
    cancellation error on near-identical rows.
    """
    aa = np.einsum("ij,ij->i", a, a)
    bb = np.einsum("ij,ij->i", b, b)
    d2 = aa[:, None] + bb[None, :] - 2.0 * (a @ b.T)
    np.maximum(d2, 0.0, out=d2)
    return np.sqrt(d2, out=d2)


def pairwise_vf(vol_a, freq_a, vol_b, freq_b, alpha):
    """Weighted L1 volume/frequency distance for every (row, column) pair."""
    dv = np.abs(vol_a[:, None] - vol_b[None, :])
    df = np.abs(freq_a[:, None] - freq_b[None, :])
    return alpha * dv + (1.0 - alpha) * df
