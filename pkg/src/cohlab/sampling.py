"""Coordinate sampling masks, projections, and generic linear measurements.

Randomness uses the counter-based Philox generator keyed through
numpy SeedSequence spawn keys, so every draw is reproducible from
(base_seed, key path) alone and streams never collide.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

RNG_NAME = "numpy-philox4x64-seedseq"


def philox(base_seed: int, *path: int) -> np.random.Generator:
    """Independent generator for a seed and an integer key path."""
    seq = np.random.SeedSequence(base_seed, spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(seq))


@dataclass(frozen=True, eq=False)
class SampleMask:
    """A subset of ambient coordinates, kept sorted and duplicate-free."""

    ambient_dim: int
    indices: np.ndarray

    def __post_init__(self):
        idx = np.unique(np.asarray(self.indices, dtype=np.intp))
        if idx.size and (idx[0] < 0 or idx[-1] >= self.ambient_dim):
            raise ValueError(f"mask indices must lie in [0, {self.ambient_dim})")
        idx.setflags(write=False)
        object.__setattr__(self, "indices", idx)

    @property
    def size(self) -> int:
        return int(self.indices.size)

    @classmethod
    def from_indicator(cls, indicator: np.ndarray) -> "SampleMask":
        indicator = np.asarray(indicator, dtype=bool)
        return cls(ambient_dim=indicator.size, indices=np.flatnonzero(indicator))


@dataclass(frozen=True, eq=False)
class LinearMeasurement:
    """A dense measurement matrix applied to ambient vectors."""

    matrix: np.ndarray

    def __post_init__(self):
        mat = np.array(self.matrix, dtype=float)
        if mat.ndim != 2:
            raise ValueError("measurement matrix must be 2-d")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @property
    def n_measurements(self) -> int:
        return self.matrix.shape[0]

    @property
    def ambient_dim(self) -> int:
        return self.matrix.shape[1]


def draw_mask(n: int, rho: float, rng: np.random.Generator) -> SampleMask:
    """Bernoulli(rho) mask over n coordinates: keep i iff u_i < rho."""
    if not 0.0 <= rho <= 1.0:
        raise ValueError(f"rho must lie in [0, 1], got {rho}")
    if n < 1:
        raise ValueError("need n >= 1")
    return SampleMask.from_indicator(rng.random(n) < rho)


def project(mask: SampleMask, v: np.ndarray) -> np.ndarray:
    """Restrict a vector to the masked coordinates, in index order."""
    v = np.asarray(v, dtype=float)
    if v.shape != (mask.ambient_dim,):
        raise ValueError(f"vector must have shape ({mask.ambient_dim},)")
    return v[mask.indices]


def generic_linear_map(n: int, m: int, rng: np.random.Generator) -> LinearMeasurement:
    """Gaussian m x n measurement matrix (generic with probability one)."""
    if n < 1 or m < 1:
        raise ValueError("need n >= 1 and m >= 1")
    return LinearMeasurement(matrix=rng.standard_normal((m, n)))


def parse_mask(text: str, ambient_dim: int) -> SampleMask:
    """Parse a comma-separated index list like '0,3,7'."""
    text = text.strip()
    if not text:
        return SampleMask(ambient_dim=ambient_dim, indices=np.array([], dtype=np.intp))
    try:
        idx = [int(tok) for tok in text.split(",")]
    except ValueError:
        raise ValueError(f"bad mask index list: {text!r}") from None
    return SampleMask(ambient_dim=ambient_dim, indices=np.array(idx, dtype=np.intp))
