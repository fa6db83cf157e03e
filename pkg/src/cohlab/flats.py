"""Affine flats, leverage scores, and coherence.

A flat is stored as an orthonormal basis of its direction space plus an
offset point. The leverage score of coordinate i is the squared norm of
row i of the basis, i.e. ||P(e_i) - P(0)||^2 for the projection P onto
the flat; coherence is the largest leverage score.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import orthonormal_columns

_GRAM_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class Flat:
    """A k-dimensional affine flat in R^n.

    Attributes
    ----------
    basis : (n, k) array with orthonormal columns.
    offset : (n,) array, a point on the flat.
    """

    basis: np.ndarray
    offset: np.ndarray

    def __post_init__(self):
        basis = np.array(self.basis, dtype=float)
        offset = np.array(self.offset, dtype=float)
        if basis.ndim != 2:
            raise ValueError("basis must be a 2-d array")
        n, k = basis.shape
        if not 1 <= k <= n:
            raise ValueError(f"need 1 <= dim <= ambient, got dim={k}, ambient={n}")
        if offset.shape != (n,):
            raise ValueError(f"offset must have shape ({n},)")
        gram = basis.T @ basis
        if np.max(np.abs(gram - np.eye(k))) > _GRAM_TOL:
            raise ValueError("basis columns are not orthonormal")
        basis.setflags(write=False)
        offset.setflags(write=False)
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "offset", offset)

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]


def make_flat(spanning_vectors, offset=None) -> Flat:
    """Build a flat from spanning vectors (not necessarily independent).

    Parameters
    ----------
    spanning_vectors : sequence of length-n vectors (a 2-d input is read as
        one vector per row). Dependent vectors are dropped by column-pivoted
        QR.
    offset : optional point on the flat; defaults to the origin.
    """
    a = np.asarray(spanning_vectors, dtype=float)
    if a.ndim == 1:
        a = a[None, :]
    if a.ndim != 2:
        raise ValueError("spanning_vectors must be a sequence of vectors")
    q, rank = orthonormal_columns(a.T)
    if rank == 0:
        raise ValueError("spanning set is all zero")
    n = a.shape[1]
    if offset is None:
        offset = np.zeros(n)
    return Flat(basis=q, offset=np.asarray(offset, dtype=float))


def leverage_scores(flat: Flat) -> np.ndarray:
    """Per-coordinate leverage scores; they sum to the flat dimension."""
    # accumulate one basis column at a time: each row's sum is then a fixed
    # left-to-right association, so appending zero coordinate rows cannot
    # perturb existing scores by even an ulp (numpy's axis reductions
    # re-batch across rows and do)
    acc = np.zeros(flat.ambient_dim)
    for col in flat.basis.T:
        acc += col * col
    return acc


def coherence_of_flat(flat: Flat) -> float:
    """Largest leverage score; always in [dim/ambient, 1]."""
    return float(np.max(leverage_scores(flat)))


def max_incoherent_flat(n: int, k: int) -> Flat:
    """A k-flat in R^n attaining the smallest possible coherence k/n.

    Uses the block construction when k divides n, otherwise a harmonic
    frame (sampled sine/cosine columns), which has exactly equal leverage
    scores for every k < n.
    """
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    if n % k == 0:
        block = n // k
        basis = np.zeros((n, k))
        for j in range(k):
            basis[j * block : (j + 1) * block, j] = 1.0 / np.sqrt(block)
        return Flat(basis=basis, offset=np.zeros(n))
    theta = 2.0 * np.pi * np.arange(n) / n
    cols = []
    if k % 2 == 1:
        cols.append(np.full(n, 1.0 / np.sqrt(n)))
    scale = np.sqrt(2.0 / n)
    for f in range(1, k // 2 + 1):
        cols.append(scale * np.cos(f * theta))
        cols.append(scale * np.sin(f * theta))
    return Flat(basis=np.column_stack(cols), offset=np.zeros(n))


def write_flat(flat: Flat, path) -> None:
    """Write a flat as text: 'n k' line, k basis-column lines, offset line."""
    lines = [f"{flat.ambient_dim} {flat.dim}"]
    for j in range(flat.dim):
        lines.append(" ".join(repr(float(x)) for x in flat.basis[:, j]))
    lines.append(" ".join(repr(float(x)) for x in flat.offset))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_flat(path) -> Flat:
    """Read a flat written by write_flat."""
    with open(path, "r", encoding="utf-8") as fh:
        rows = [ln.strip() for ln in fh if ln.strip()]
    if not rows:
        raise ValueError(f"{path}: empty flat file")
    head = rows[0].split()
    if len(head) != 2:
        raise ValueError(f"{path}: first line must be 'n k'")
    n, k = int(head[0]), int(head[1])
    if len(rows) != 1 + k + 1:
        raise ValueError(f"{path}: expected {k} basis lines plus an offset line")
    cols = []
    for j in range(k):
        col = np.array([float(x) for x in rows[1 + j].split()])
        if col.shape != (n,):
            raise ValueError(f"{path}: basis column {j} has wrong length")
        cols.append(col)
    offset = np.array([float(x) for x in rows[1 + k].split()])
    if offset.shape != (n,):
        raise ValueError(f"{path}: offset has wrong length")
    return Flat(basis=np.column_stack(cols), offset=offset)
