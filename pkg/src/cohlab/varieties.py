"""Variety models: embeddings, tangent flats, and coherence.

Each model embeds a parameter draw into a fixed ambient coordinate space:

* ``Linear``      -- an affine flat, parameters are basis coefficients.
* ``LowRank``     -- m x n matrices of rank <= r, flattened row-major.
* ``SymLowRank``  -- symmetric n x n matrices of rank <= r, upper triangle
                     including the diagonal, pairs (i, j) with i <= j in
                     lexicographic order.
* ``UnitDiagGram`` -- Gram matrices of n unit vectors in R^r, strict upper
                     triangle (the diagonal is identically 1 and carries no
                     information), pairs i < j lexicographic.
* ``CayleyMenger`` -- squared-distance matrices of n points in R^d, strict
                     upper triangle, pairs i < j lexicographic.
* ``MinkowskiSum`` -- pointwise sums of two models sharing an ambient space.

The coherence of a model at a smooth point is the coherence of its tangent
flat there; the tangent flat is the orthonormalized column space of the
embedding Jacobian.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .flats import Flat, coherence_of_flat, leverage_scores, max_incoherent_flat, read_flat
from .linalg import (
    grassmann_distance,
    orthonormal_columns,
    scale_aware_cutoff,
    svd_column_basis,
)

_POINT_TOL = 1e-10
_REDRAWS = 3
_MINKOWSKI_DIM_SEED = 0x1D5EED


class RankDeficientTangent(RuntimeError):
    """Tangent rank at a point fell below the model dimension."""

    def __init__(self, rank: int, expected: int):
        super().__init__(
            f"tangent space has numerical rank {rank}, expected {expected}; "
            "the point is not generic enough"
        )
        self.rank = rank
        self.expected = expected


def strict_upper_pairs(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Row/column indices of the strict upper triangle, (i, j) lexicographic."""
    return np.triu_indices(n, k=1)


def upper_pairs(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Row/column indices of the upper triangle with diagonal, lexicographic."""
    return np.triu_indices(n, k=0)


def pair_index(n: int, i: int, j: int, strict: bool = True) -> int:
    """Ambient index of the coordinate holding entry (i, j), i < j (or i <= j)."""
    if strict:
        if not 0 <= i < j < n:
            raise ValueError(f"need 0 <= i < j < n, got ({i}, {j}) with n={n}")
        return i * (n - 1) - i * (i - 1) // 2 + (j - i - 1)
    if not 0 <= i <= j < n:
        raise ValueError(f"need 0 <= i <= j < n, got ({i}, {j}) with n={n}")
    return i * n - i * (i - 1) // 2 + (j - i)


@dataclass(frozen=True)
class Linear:
    """An affine flat presented as a variety model."""

    flat: Flat

    @property
    def ambient_dim(self) -> int:
        return self.flat.ambient_dim

    def dimension(self) -> int:
        return self.flat.dim

    def validate_params(self, params) -> np.ndarray:
        t = np.asarray(params, dtype=float)
        if t.shape != (self.flat.dim,):
            raise ValueError(f"params must have shape ({self.flat.dim},)")
        return t

    def embed(self, params) -> np.ndarray:
        t = self.validate_params(params)
        return self.flat.offset + self.flat.basis @ t

    def jacobian(self, params) -> np.ndarray:
        self.validate_params(params)
        return np.array(self.flat.basis)

    def sample_params(self, rng) -> np.ndarray:
        return rng.standard_normal(self.flat.dim)


@dataclass(frozen=True)
class LowRank:
    """m x n matrices of rank at most r, coordinates row-major."""

    m: int
    n: int
    r: int

    def __post_init__(self):
        if not 1 <= self.r <= min(self.m, self.n):
            raise ValueError(f"need 1 <= r <= min(m, n), got {self}")

    @property
    def ambient_dim(self) -> int:
        return self.m * self.n

    def dimension(self) -> int:
        return self.r * (self.m + self.n - self.r)

    def index_of(self, i: int, j: int) -> int:
        if not (0 <= i < self.m and 0 <= j < self.n):
            raise ValueError(f"entry ({i}, {j}) outside {self.m} x {self.n}")
        return i * self.n + j

    def validate_params(self, params):
        u, v = params
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        if u.shape != (self.m, self.r) or v.shape != (self.n, self.r):
            raise ValueError(
                f"params must be factors of shapes ({self.m}, {self.r}) and "
                f"({self.n}, {self.r})"
            )
        return u, v

    def embed(self, params) -> np.ndarray:
        u, v = self.validate_params(params)
        return (u @ v.T).reshape(-1)

    def jacobian(self, params) -> np.ndarray:
        u, v = self.validate_params(params)
        # d(u v^T) = x v^T + u y^T; both column blocks ordered by the
        # row-major entries of the perturbed factor
        du = np.kron(np.eye(self.m), v)
        dv = np.kron(u, np.eye(self.n))
        perm = [b * self.n + c for c in range(self.n) for b in range(self.r)]
        return np.hstack([du, dv[:, perm]])

    def sample_params(self, rng):
        return rng.standard_normal((self.m, self.r)), rng.standard_normal((self.n, self.r))


@dataclass(frozen=True)
class SymLowRank:
    """Symmetric n x n matrices of rank at most r, upper triangle with diagonal.

    The default coordinates take each distinct entry once, unweighted; with
    ``isometric=True`` off-diagonal coordinates are scaled by sqrt(2) so the
    coordinate metric matches the Frobenius metric on symmetric matrices.
    """

    n: int
    r: int
    isometric: bool = False

    def __post_init__(self):
        if not 1 <= self.r <= self.n:
            raise ValueError(f"need 1 <= r <= n, got {self}")

    @property
    def ambient_dim(self) -> int:
        return self.n * (self.n + 1) // 2

    def dimension(self) -> int:
        return self.r * self.n - self.r * (self.r - 1) // 2

    def index_of(self, i: int, j: int) -> int:
        i, j = min(i, j), max(i, j)
        return pair_index(self.n, i, j, strict=False)

    def _offdiag_scale(self) -> np.ndarray:
        iu, ju = upper_pairs(self.n)
        scale = np.ones(iu.size)
        if self.isometric:
            scale[iu != ju] = np.sqrt(2.0)
        return scale

    def validate_params(self, params) -> np.ndarray:
        u = np.asarray(params, dtype=float)
        if u.shape != (self.n, self.r):
            raise ValueError(f"params must have shape ({self.n}, {self.r})")
        return u

    def embed(self, params) -> np.ndarray:
        u = self.validate_params(params)
        a = u @ u.T
        iu, ju = upper_pairs(self.n)
        return a[iu, ju] * self._offdiag_scale()

    def jacobian(self, params) -> np.ndarray:
        u = self.validate_params(params)
        n, r = self.n, self.r
        iu, ju = upper_pairs(n)
        scale = self._offdiag_scale()
        # column (a, b): e_a u_b^T + u_b e_a^T restricted to the upper triangle
        cols = np.empty((iu.size, n * r))
        for a in range(n):
            hit_i = (iu == a).astype(float)
            hit_j = (ju == a).astype(float)
            block = hit_i[:, None] * u[ju] + hit_j[:, None] * u[iu]
            cols[:, a * r : (a + 1) * r] = block * scale[:, None]
        return cols

    def sample_params(self, rng) -> np.ndarray:
        return rng.standard_normal((self.n, self.r))


@dataclass(frozen=True)
class UnitDiagGram:
    """Gram matrices of n unit vectors in R^r, strict upper triangle."""

    n: int
    r: int

    def __post_init__(self):
        if self.r < 2:
            raise ValueError("need r >= 2 (r = 1 leaves a zero-dimensional model)")
        if self.r > self.n:
            raise ValueError(f"need r <= n, got {self}")

    @property
    def ambient_dim(self) -> int:
        return self.n * (self.n - 1) // 2

    def dimension(self) -> int:
        return (self.r - 1) * self.n - self.r * (self.r - 1) // 2

    def index_of(self, i: int, j: int) -> int:
        i, j = min(i, j), max(i, j)
        return pair_index(self.n, i, j, strict=True)

    def validate_params(self, params) -> np.ndarray:
        x = np.asarray(params, dtype=float)
        if x.shape != (self.n, self.r):
            raise ValueError(f"params must have shape ({self.n}, {self.r})")
        norms = np.linalg.norm(x, axis=1)
        if np.max(np.abs(norms - 1.0)) > _POINT_TOL:
            raise ValueError("rows must be unit vectors")
        return x

    def embed(self, params) -> np.ndarray:
        x = self.validate_params(params)
        g = x @ x.T
        iu, ju = strict_upper_pairs(self.n)
        return g[iu, ju]

    def jacobian(self, params) -> np.ndarray:
        x = self.validate_params(params)
        n, r = self.n, self.r
        iu, ju = strict_upper_pairs(n)
        cols = []
        for a in range(n):
            # tangent directions at row a stay on the unit sphere
            q = scipy.linalg.null_space(x[a][None, :])  # (r, r-1)
            hit_i = (iu == a).astype(float)
            hit_j = (ju == a).astype(float)
            inner = x @ q  # (n, r-1), row k holds <x_k, q_c>
            cols.append(hit_i[:, None] * inner[ju] + hit_j[:, None] * inner[iu])
        return np.hstack(cols)

    def sample_params(self, rng) -> np.ndarray:
        x = rng.standard_normal((self.n, self.r))
        return x / np.linalg.norm(x, axis=1, keepdims=True)


@dataclass(frozen=True)
class CayleyMenger:
    """Squared-distance matrices of n points in R^d, strict upper triangle."""

    n: int
    d: int

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("need d >= 1")
        if self.d >= self.n:
            raise ValueError(f"need d < n, got {self}")

    @property
    def ambient_dim(self) -> int:
        return self.n * (self.n - 1) // 2

    def dimension(self) -> int:
        return self.d * self.n - (self.d + 1) * self.d // 2

    def index_of(self, i: int, j: int) -> int:
        i, j = min(i, j), max(i, j)
        return pair_index(self.n, i, j, strict=True)

    def validate_params(self, params) -> np.ndarray:
        x = np.asarray(params, dtype=float)
        if x.shape != (self.n, self.d):
            raise ValueError(f"params must have shape ({self.n}, {self.d})")
        return x

    def embed(self, params) -> np.ndarray:
        x = self.validate_params(params)
        iu, ju = strict_upper_pairs(self.n)
        diff = x[iu] - x[ju]
        return np.sum(diff**2, axis=1)

    def jacobian(self, params) -> np.ndarray:
        x = self.validate_params(params)
        n, d = self.n, self.d
        iu, ju = strict_upper_pairs(n)
        diff = x[iu] - x[ju]
        cols = np.empty((iu.size, n * d))
        for a in range(n):
            sign = (iu == a).astype(float) - (ju == a).astype(float)
            cols[:, a * d : (a + 1) * d] = 2.0 * sign[:, None] * diff
        return cols

    def sample_params(self, rng) -> np.ndarray:
        return rng.standard_normal((self.n, self.d))


@dataclass(frozen=True)
class MinkowskiSum:
    """Pointwise sums x + y with x, y drawn from two models in one ambient space."""

    left: object
    right: object

    def __post_init__(self):
        if self.left.ambient_dim != self.right.ambient_dim:
            raise ValueError("summands must share an ambient space")

    @property
    def ambient_dim(self) -> int:
        return self.left.ambient_dim

    def dimension(self) -> int:
        # no closed form in general; numerical rank at a fixed generic point
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(_MINKOWSKI_DIM_SEED)))
        params = self.sample_params(rng)
        _, rank = svd_column_basis(self.jacobian(params))
        return rank

    def validate_params(self, params):
        lp, rp = params
        return self.left.validate_params(lp), self.right.validate_params(rp)

    def embed(self, params) -> np.ndarray:
        lp, rp = params
        return self.left.embed(lp) + self.right.embed(rp)

    def jacobian(self, params) -> np.ndarray:
        lp, rp = params
        return np.hstack([self.left.jacobian(lp), self.right.jacobian(rp)])

    def sample_params(self, rng):
        return self.left.sample_params(rng), self.right.sample_params(rng)


@dataclass(frozen=True, eq=False)
class Point:
    """A parameter draw together with its ambient embedding."""

    model: object
    params: object
    ambient: np.ndarray

    def __post_init__(self):
        ambient = np.array(self.ambient, dtype=float)
        expected = self.model.embed(self.params)
        if ambient.shape != expected.shape or np.max(np.abs(ambient - expected)) > _POINT_TOL:
            raise ValueError("ambient coordinates disagree with the embedding")
        ambient.setflags(write=False)
        object.__setattr__(self, "ambient", ambient)


def _frozen_params(params):
    if isinstance(params, tuple):
        return tuple(_frozen_params(p) for p in params)
    arr = np.array(params, dtype=float)
    arr.setflags(write=False)
    return arr


def point_on(model, params) -> Point:
    """Embed validated parameters into a Point."""
    params = _frozen_params(model.validate_params(params))
    return Point(model=model, params=params, ambient=model.embed(params))


def embed(model, params) -> np.ndarray:
    """Ambient coordinates of the parameter draw."""
    return model.embed(model.validate_params(params))


def dimension(model) -> int:
    """Dimension of the model (closed form; numerical for MinkowskiSum)."""
    return model.dimension()


def sample_generic_point(model, rng) -> Point:
    """Draw a generic point; redraws a few times if the tangent is deficient."""
    last = None
    for _ in range(1 + _REDRAWS):
        point = point_on(model, model.sample_params(rng))
        try:
            tangent_space(model, point)
            return point
        except RankDeficientTangent as exc:  # pragma: no cover - measure zero
            last = exc
    raise last  # pragma: no cover


def tangent_space(model, point: Point, on_deficient: str = "raise") -> Flat:
    """Tangent flat at a point: orthonormalized Jacobian column space.

    With on_deficient="raise" (default) a numerical rank below the model
    dimension raises RankDeficientTangent; "allow" returns the deficient
    flat for diagnostics.
    """
    if on_deficient not in ("raise", "allow"):
        raise ValueError("on_deficient must be 'raise' or 'allow'")
    if isinstance(model, Linear):
        return Flat(basis=model.flat.basis, offset=point.ambient)
    u, rank = svd_column_basis(model.jacobian(point.params))
    expected = model.dimension()
    if rank < expected and on_deficient == "raise":
        raise RankDeficientTangent(rank, expected)
    if rank == 0:
        raise RankDeficientTangent(0, expected)
    # the image of the parameterization can never exceed the model dimension,
    # so surplus counted rank is rounding noise in the jacobian entries
    rank = min(rank, expected)
    return Flat(basis=u[:, :rank], offset=point.ambient)


def coherence_at(model, point: Point) -> float:
    """Coherence of the tangent flat at the point."""
    return coherence_of_flat(tangent_space(model, point))


def tangent_leverage(model, point: Point) -> np.ndarray:
    """Leverage scores of the tangent flat at the point."""
    return leverage_scores(tangent_space(model, point))


def matrix_coherence(a: np.ndarray, r: int, symmetric: bool = False) -> float:
    """Coherence of the rank-r matrix model at the matrix ``a``.

    Computed from the row and column spans: 1 - (1 - coh_col)(1 - coh_row),
    or 1 - (1 - coh_col)^2 when ``symmetric``. The numerical rank of ``a``
    must not exceed r.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise ValueError("expected a matrix")
    if symmetric:
        if a.shape[0] != a.shape[1] or np.max(np.abs(a - a.T)) > _POINT_TOL * max(
            1.0, float(np.max(np.abs(a)))
        ):
            raise ValueError("matrix is not symmetric")
    u, s, vt = scipy.linalg.svd(a, full_matrices=False)
    rank = int(np.count_nonzero(s > scale_aware_cutoff(s, max(a.shape))))
    if rank > r:
        raise ValueError(f"numerical rank {rank} exceeds r={r}")
    if rank == 0:
        return 0.0
    coh_col = float(np.max(np.sum(u[:, :rank] ** 2, axis=1)))
    if symmetric:
        return 1.0 - (1.0 - coh_col) ** 2
    coh_row = float(np.max(np.sum(vt[:rank] ** 2, axis=0)))
    return 1.0 - (1.0 - coh_col) * (1.0 - coh_row)


@dataclass(frozen=True)
class FormulaValue:
    """A closed-form (or documented-envelope) global coherence value."""

    value: float
    exact: bool


def coherence_formula(model) -> FormulaValue:
    """Global coherence by closed form where known.

    LowRank and SymLowRank values are exact. CayleyMenger and UnitDiagGram
    return the envelope C * d/n (resp. C * r/n) with the documented
    placeholder C = 3, flagged as not exact. MinkowskiSum is unsupported.
    """
    if isinstance(model, Linear):
        return FormulaValue(coherence_of_flat(model.flat), True)
    if isinstance(model, LowRank):
        m, n, r = model.m, model.n, model.r
        return FormulaValue(r * (m + n - r) / (m * n), True)
    if isinstance(model, SymLowRank):
        n, r = model.n, model.r
        return FormulaValue(r * (2 * n - r) / (n * n), True)
    if isinstance(model, CayleyMenger):
        return FormulaValue(min(1.0, 3.0 * model.d / model.n), False)
    if isinstance(model, UnitDiagGram):
        return FormulaValue(min(1.0, 3.0 * model.r / model.n), False)
    raise ValueError(f"no coherence formula for {type(model).__name__}")


@dataclass(frozen=True)
class CoherenceEstimate:
    """Monte Carlo infimum of pointwise coherence."""

    value: float
    samples: int


def estimate_coherence(model, samples: int, rng, include=()) -> CoherenceEstimate:
    """Infimum of coherence_at over generic sample points.

    ``include`` lists extra points folded into the infimum; passing a known
    minimizer (see tight_frame_point) pins the estimate to the true value
    instead of the random-draw floor, which stays well above it.
    """
    if samples < 1:
        raise ValueError("need at least one sample")
    best = np.inf
    for point in include:
        best = min(best, coherence_at(model, point))
    for _ in range(samples):
        best = min(best, coherence_at(model, sample_generic_point(model, rng)))
    return CoherenceEstimate(value=float(best), samples=samples + len(tuple(include)))


def tight_frame_point(model) -> Point:
    """A coherence-minimizing point built from maximally incoherent frames.

    The row and column spans are taken to be max_incoherent_flat directions,
    so every leverage score of each factor span is exactly dim/ambient and
    the pointwise coherence hits the closed-form model minimum.
    """
    if isinstance(model, LowRank):
        u = max_incoherent_flat(model.m, model.r).basis
        v = max_incoherent_flat(model.n, model.r).basis
        return point_on(model, (u, v))
    if isinstance(model, SymLowRank):
        u = max_incoherent_flat(model.n, model.r).basis
        return point_on(model, u)
    raise ValueError(f"no tight-frame construction for {type(model).__name__}")


def nu_h(x: np.ndarray, h: float) -> np.ndarray:
    """Spherical lift (x, h) / sqrt(x.x + h^2) of a point x in R^d."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError("expected a vector")
    lifted = np.append(x, float(h))
    norm = np.linalg.norm(lifted)
    if norm == 0.0:
        raise ValueError("nu_h is undefined at x = 0, h = 0")
    return lifted / norm


def tangent_limit_probe(config: np.ndarray, h_values) -> np.ndarray:
    """Distances between lifted-Gram and squared-distance tangents per h.

    ``config`` is an (n, d) point configuration. For each h the rows are
    lifted with nu_h onto the unit sphere in R^(d+1) and the tangent of the
    unit-diagonal Gram model is compared, by Grassmann distance, with the
    tangent of the squared-distance model at the original configuration.
    """
    config = np.asarray(config, dtype=float)
    if config.ndim != 2:
        raise ValueError("config must be an (n, d) array")
    n, d = config.shape
    h_values = np.asarray(h_values, dtype=float)
    if h_values.size == 0 or np.any(h_values <= 0):
        raise ValueError("h values must be positive")
    cm = CayleyMenger(n=n, d=d)
    t_dist = tangent_space(cm, point_on(cm, config))
    gram = UnitDiagGram(n=n, r=d + 1)
    out = np.empty(h_values.size)
    for idx, h in enumerate(h_values):
        lifted = np.array([nu_h(row, h) for row in config])
        t_gram = tangent_space(gram, point_on(gram, lifted))
        out[idx] = grassmann_distance(t_gram.basis, t_dist.basis)
    return out


def parse_model(descriptor: str):
    """Parse a model descriptor string.

    Forms: ``lowrank:m=20,n=30,r=2``, ``symlowrank:n=15,r=2``,
    ``unitgram:n=15,r=3``, ``cayley:n=40,d=3``, ``linear:@path/to/file.flat``.
    """
    if not isinstance(descriptor, str) or ":" not in descriptor:
        raise ValueError(f"bad model descriptor: {descriptor!r}")
    kind, _, rest = descriptor.partition(":")
    kind = kind.strip().lower()
    if kind == "linear":
        if not rest.startswith("@"):
            raise ValueError("linear model takes a flat file: linear:@file.flat")
        return Linear(flat=read_flat(rest[1:]))
    kv = {}
    for item in rest.split(","):
        if "=" not in item:
            raise ValueError(f"bad model parameter {item!r} in {descriptor!r}")
        key, _, val = item.partition("=")
        try:
            kv[key.strip()] = int(val)
        except ValueError:
            raise ValueError(f"model parameter {key!r} must be an integer") from None
    kinds = {
        "lowrank": (LowRank, {"m", "n", "r"}),
        "symlowrank": (SymLowRank, {"n", "r"}),
        "unitgram": (UnitDiagGram, {"n", "r"}),
        "cayley": (CayleyMenger, {"n", "d"}),
    }
    if kind not in kinds:
        raise ValueError(f"unknown model kind {kind!r}")
    cls, keys = kinds[kind]
    if set(kv) != keys:
        raise ValueError(f"{kind} needs parameters {sorted(keys)}, got {sorted(kv)}")
    return cls(**kv)
