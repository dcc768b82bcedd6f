"""Tolerance-aware matrix kernel: rank, nullspace bases, pseudo-inverses and
subspace comparison.

Everything is built on deterministic LAPACK SVDs (no randomized
decompositions), so repeated runs on the same inputs give bit-identical
bases and certificates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

EPS = float(np.finfo(np.float64).eps)


@dataclass(frozen=True)
class Tolerance:
    """Numeric thresholds used by rank decisions and leakage checks.

    rel_rank_tol: singular values below ``rel_rank_tol * sigma_max`` count as
        zero.  ``None`` selects the per-matrix default
        ``max(rows, cols) * eps * 64``, which keeps the exactly-tight
        dimension counts of alignment certificates stable.
    leakage_tol: relative residual below which interference counts as nulled.
    """

    rel_rank_tol: float | None = None
    leakage_tol: float = 1e-8

    def __post_init__(self) -> None:
        if self.rel_rank_tol is not None and not 0.0 < self.rel_rank_tol < 1.0:
            raise InvalidInputError("rel_rank_tol must lie in (0, 1)")
        if not 0.0 < self.leakage_tol < 1.0:
            raise InvalidInputError("leakage_tol must lie in (0, 1)")

    def rank_cutoff(self, shape: tuple[int, int], smax: float) -> float:
        rel = self.rel_rank_tol
        if rel is None:
            rel = max(shape) * EPS * 64
        return rel * smax


DEFAULT_TOL = Tolerance()


def as_matrix(a, allow_empty: bool = False) -> np.ndarray:
    """Validate and return ``a`` as a 2-d float/complex ndarray."""
    arr = np.asarray(a)
    if arr.ndim != 2:
        raise InvalidInputError(f"expected a 2-d matrix, got ndim={arr.ndim}")
    if not allow_empty and (arr.shape[0] == 0 or arr.shape[1] == 0):
        raise InvalidInputError(f"matrix must be nonempty, got shape {arr.shape}")
    if not np.issubdtype(arr.dtype, np.inexact):
        arr = arr.astype(np.float64)
    if arr.size and not np.all(np.isfinite(arr)):
        raise InvalidInputError("matrix has non-finite entries")
    return arr


def rank(a, tol: Tolerance = DEFAULT_TOL) -> int:
    """Number of singular values above the relative rank cutoff."""
    arr = as_matrix(a)
    svals = np.linalg.svd(arr, compute_uv=False)
    smax = float(svals[0]) if svals.size else 0.0
    if smax == 0.0:
        return 0
    return int(np.sum(svals > tol.rank_cutoff(arr.shape, smax)))


def nullspace_basis(a, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of the right nullspace of ``a``.

    Returns a ``cols(a) x (cols(a) - rank(a))`` matrix whose columns are the
    right singular vectors attached to negligible singular values; the result
    may have zero columns for full-column-rank input.
    """
    arr = as_matrix(a)
    _, svals, vh = np.linalg.svd(arr, full_matrices=True)
    smax = float(svals[0]) if svals.size else 0.0
    if smax == 0.0:
        r = 0
    else:
        r = int(np.sum(svals > tol.rank_cutoff(arr.shape, smax)))
    return vh[r:].conj().T


def pseudo_inverse(a, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Moore-Penrose pseudo-inverse with the kernel's rank cutoff."""
    arr = as_matrix(a)
    u, svals, vh = np.linalg.svd(arr, full_matrices=False)
    smax = float(svals[0]) if svals.size else 0.0
    cut = tol.rank_cutoff(arr.shape, smax)
    inv = np.where(svals > cut, 1.0 / np.where(svals > cut, svals, 1.0), 0.0)
    return (vh.conj().T * inv) @ u.conj().T


def _check_orthonormal(b: np.ndarray, what: str) -> None:
    if b.shape[1] == 0:
        return
    gram = b.conj().T @ b
    dev = float(np.max(np.abs(gram - np.eye(b.shape[1]))))
    if dev > 1e-8:
        raise InvalidInputError(f"{what} does not have orthonormal columns (deviation {dev:.2e})")


def max_principal_angle(b1, b2, tol: Tolerance = DEFAULT_TOL) -> float:
    """Largest principal angle (radians) between the column spans of two
    orthonormal bases.

    Computed as ``arcsin`` of the spectral gap between the two orthogonal
    projectors, which is exact for equal-dimension spans and returns pi/2
    when the spans have different dimensions, so the result is 0 iff the
    spans coincide.
    """
    m1 = as_matrix(b1, allow_empty=True)
    m2 = as_matrix(b2, allow_empty=True)
    if m1.shape[0] != m2.shape[0]:
        raise InvalidInputError("bases must have equal row counts")
    _check_orthonormal(m1, "first basis")
    _check_orthonormal(m2, "second basis")
    p1 = m1 @ m1.conj().T
    p2 = m2 @ m2.conj().T
    gap = float(np.linalg.norm(p1 - p2, ord=2))
    return float(np.arcsin(min(1.0, gap)))


def unit_columns(a: np.ndarray) -> np.ndarray:
    """Scale every column of ``a`` to unit Euclidean norm."""
    arr = as_matrix(a, allow_empty=True)
    if arr.shape[1] == 0:
        return arr
    norms = np.linalg.norm(arr, axis=0)
    if np.any(norms < 1e-300):
        raise InvalidInputError("cannot normalize a zero column")
    return arr / norms
