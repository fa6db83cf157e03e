"""Identifiability verdicts from masks and linear measurements.

A generic point of a model is identifiable from a coordinate mask (up to a
finite fiber) exactly when the mask rows of the tangent basis have full
column rank; for a dense linear map, when the mapped tangent basis does.
The contraction operator gives a sufficient spectral certificate: norm
below one forces the restricted rank to be full.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
import scipy.linalg

from .sampling import LinearMeasurement, SampleMask
from .varieties import Point, RankDeficientTangent, dimension, tangent_space

__all__ = [
    "IdentifyVerdict",
    "RankDeficientTangent",
    "identifiable_mask",
    "identifiable_linear",
    "contraction_norm",
    "restricted_rank",
]

DEFAULT_TOL = 1e-8


@dataclass(frozen=True)
class IdentifyVerdict:
    identifiable: bool
    tangent_dim: int
    projected_rank: int
    smallest_retained_singular_value: float
    tolerance_used: float

    def to_dict(self) -> dict:
        return asdict(self)


def restricted_rank(basis: np.ndarray, rows: np.ndarray, tol: float) -> tuple[int, float]:
    """Rank of a row restriction of an orthonormal basis.

    Singular values below tol * sigma_max count as zero. Returns the rank
    and the smallest retained singular value (0.0 when nothing is retained).
    """
    sub = np.asarray(basis, dtype=float)[np.asarray(rows, dtype=np.intp)]
    return _matrix_rank_and_floor(sub, tol)


def _matrix_rank_and_floor(mat: np.ndarray, tol: float) -> tuple[int, float]:
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    if mat.size == 0:
        return 0, 0.0
    s = scipy.linalg.svd(mat, compute_uv=False)
    kept = s[s > tol * s[0]] if s[0] > 0 else s[:0]
    if kept.size == 0:
        return 0, 0.0
    return int(kept.size), float(kept[-1])


def identifiable_mask(model, point: Point, mask: SampleMask, tol: float = DEFAULT_TOL) -> IdentifyVerdict:
    """Finite-fiber identifiability of a generic point from a coordinate mask."""
    if mask.ambient_dim != model.ambient_dim:
        raise ValueError(
            f"mask ambient dimension {mask.ambient_dim} does not match "
            f"model ambient dimension {model.ambient_dim}"
        )
    flat = tangent_space(model, point)
    rank, floor = restricted_rank(flat.basis, mask.indices, tol)
    return IdentifyVerdict(
        identifiable=rank == flat.dim,
        tangent_dim=flat.dim,
        projected_rank=rank,
        smallest_retained_singular_value=floor,
        tolerance_used=float(tol),
    )


def identifiable_linear(
    model, point: Point, measurement: LinearMeasurement, tol: float = DEFAULT_TOL
) -> IdentifyVerdict:
    """Identifiability of a generic point from a dense linear measurement."""
    if measurement.ambient_dim != model.ambient_dim:
        raise ValueError(
            f"measurement acts on R^{measurement.ambient_dim}, model lives "
            f"in R^{model.ambient_dim}"
        )
    flat = tangent_space(model, point)
    rank, floor = _matrix_rank_and_floor(measurement.matrix @ flat.basis, tol)
    return IdentifyVerdict(
        identifiable=rank == flat.dim,
        tangent_dim=flat.dim,
        projected_rank=rank,
        smallest_retained_singular_value=floor,
        tolerance_used=float(tol),
    )


def contraction_norm(model, point: Point, mask: SampleMask, rho: float) -> float:
    """Spectral norm of (1/rho) sum_{i in mask} b_i b_i^T - I on the tangent.

    b_i are the rows of the tangent basis. A value below one certifies that
    the mask identifies the point. rho must lie in (0, 1].
    """
    if not 0.0 < rho <= 1.0:
        raise ValueError(f"rho must lie in (0, 1], got {rho}")
    if mask.ambient_dim != model.ambient_dim:
        raise ValueError("mask ambient dimension does not match the model")
    basis = tangent_space(model, point).basis
    sub = basis[mask.indices]
    op = (sub.T @ sub) / rho - np.eye(basis.shape[1])
    return float(np.max(np.abs(scipy.linalg.eigvalsh(op))))
