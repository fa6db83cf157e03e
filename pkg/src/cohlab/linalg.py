"""Dense linear-algebra helpers shared across the package.

Rank decisions use a scale-aware cutoff: values below
max_dim * machine_eps * largest are treated as zero.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg


def scale_aware_cutoff(values: np.ndarray, max_dim: int) -> float:
    """Zero-threshold for singular or pivot values of a max_dim-sized problem."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return 0.0
    return float(max_dim * np.finfo(float).eps * np.max(np.abs(values)))


def orthonormal_columns(a: np.ndarray) -> tuple[np.ndarray, int]:
    """Orthonormal basis of the column space of ``a``.

    Uses column-pivoted QR and drops dependent columns whose pivot falls
    below the scale-aware cutoff.

    Returns
    -------
    (q, rank) : q has shape (n, rank); rank may be zero.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise ValueError("expected a 2-d array of column vectors")
    n, m = a.shape
    if m == 0 or not np.any(a):
        return np.zeros((n, 0)), 0
    q, r, _ = scipy.linalg.qr(a, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    rank = int(np.count_nonzero(diag > scale_aware_cutoff(diag, max(n, m))))
    return q[:, :rank], rank


def svd_column_basis(a: np.ndarray) -> tuple[np.ndarray, int]:
    """Orthonormal basis of the column space via SVD, with scale-aware rank.

    Prefer this over pivoted QR when the caller needs singular-value order,
    e.g. to cap the rank at a known dimension.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise ValueError("expected a 2-d array of column vectors")
    n, m = a.shape
    if m == 0 or not np.any(a):
        return np.zeros((n, 0)), 0
    u, s, _ = scipy.linalg.svd(a, full_matrices=False)
    rank = int(np.count_nonzero(s > scale_aware_cutoff(s, max(n, m))))
    return u, rank


def principal_angles(b1: np.ndarray, b2: np.ndarray) -> np.ndarray:
    """Principal angles between two spans given by orthonormal-column bases.

    Angles come from the singular values of b1.T @ b2, clamped to [-1, 1]
    before arccos.
    """
    b1 = np.asarray(b1, dtype=float)
    b2 = np.asarray(b2, dtype=float)
    if b1.shape[0] != b2.shape[0]:
        raise ValueError("bases live in different ambient spaces")
    s = scipy.linalg.svd(b1.T @ b2, compute_uv=False)
    return np.arccos(np.clip(s, -1.0, 1.0))


def grassmann_distance(b1: np.ndarray, b2: np.ndarray) -> float:
    """l2 norm of the principal-angle vector between two equal-dimension spans."""
    if b1.shape[1] != b2.shape[1]:
        raise ValueError("grassmann distance needs equal subspace dimensions")
    theta = principal_angles(b1, b2)
    return float(np.sqrt(np.sum(theta**2)))
