"""Minimal dense linear-algebra kernels used by the solvers and generators.

Matrices are plain 2-D ``numpy.ndarray`` in row-major order; vectors are 1-D
arrays.  Everything here is a pure function of its inputs (the factorization
caches are immutable after construction), so concurrent use is safe.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .errors import InvalidParameterError, NumericError

__all__ = [
    "as_matrix",
    "as_vector",
    "matvec",
    "SpdFactor",
    "solve_spd",
    "GramRidgeSolver",
    "singular_extremes",
    "l2_ball_project",
]


def as_matrix(a) -> np.ndarray:
    """Validate and convert to a finite 2-D float array."""
    m = np.asarray(a, dtype=float)
    if m.ndim != 2:
        raise InvalidParameterError(f"expected a 2-D matrix, got ndim={m.ndim}")
    if not np.all(np.isfinite(m)):
        raise InvalidParameterError("matrix entries must be finite")
    return m


def as_vector(a) -> np.ndarray:
    """Validate and convert to a finite 1-D float array."""
    v = np.asarray(a, dtype=float)
    if v.ndim != 1:
        raise InvalidParameterError(f"expected a 1-D vector, got ndim={v.ndim}")
    if not np.all(np.isfinite(v)):
        raise InvalidParameterError("vector entries must be finite")
    return v


def matvec(A, x) -> np.ndarray:
    """Dense matrix-vector product A @ x with dimension checking."""
    A = as_matrix(A)
    x = as_vector(x)
    if A.shape[1] != x.shape[0]:
        raise InvalidParameterError(
            f"dimension mismatch: matrix is {A.shape[0]}x{A.shape[1]}, "
            f"vector has length {x.shape[0]}"
        )
    return A @ x


class SpdFactor:
    """Cached Cholesky factorization of a symmetric positive definite matrix.

    The factorization is computed once and reused for repeated right-hand
    sides, which is what the solvers need: the same normal matrix is solved
    against at every inner iteration.
    """

    def __init__(self, M):
        M = as_matrix(M)
        if M.shape[0] != M.shape[1]:
            raise InvalidParameterError("SPD solve requires a square matrix")
        try:
            self._factor = scipy.linalg.cho_factor(M, lower=True, check_finite=False)
        except scipy.linalg.LinAlgError as exc:
            raise NumericError(f"matrix is not positive definite: {exc}") from exc
        self.shape = M.shape

    def solve(self, r) -> np.ndarray:
        r = as_vector(r)
        if r.shape[0] != self.shape[0]:
            raise InvalidParameterError(
                f"right-hand side length {r.shape[0]} does not match "
                f"matrix order {self.shape[0]}"
            )
        return scipy.linalg.cho_solve(self._factor, r, check_finite=False)


def solve_spd(M, r) -> np.ndarray:
    """Solve M w = r for symmetric positive definite M."""
    return SpdFactor(M).solve(r)


class GramRidgeSolver:
    """Reusable solver for systems (rho * A^T A + zeta * I) x = r.

    For wide matrices (m < n) the matrix-inversion lemma keeps the cached
    factor at size m x m:

        (zeta I + rho A^T A)^-1 r
            = (r - A^T ((zeta/rho) I + A A^T)^-1 A r) / zeta

    which is both faster and better conditioned than factoring the n x n
    normal matrix when n is large.
    """

    def __init__(self, A, rho: float, zeta: float):
        A = as_matrix(A)
        if rho <= 0 or zeta <= 0:
            raise InvalidParameterError("rho and zeta must be positive")
        m, n = A.shape
        self._A = A
        self._zeta = zeta
        self._wide = m < n
        if self._wide:
            G = A @ A.T
            G[np.diag_indices(m)] += zeta / rho
            self._factor = SpdFactor(G)
        else:
            M = rho * (A.T @ A)
            M[np.diag_indices(n)] += zeta
            self._factor = SpdFactor(M)

    def solve(self, r) -> np.ndarray:
        r = as_vector(r)
        if self._wide:
            A = self._A
            return (r - A.T @ self._factor.solve(A @ r)) / self._zeta
        return self._factor.solve(r)


def singular_extremes(A) -> tuple[float, float]:
    """Smallest and largest singular values of a dense matrix."""
    A = as_matrix(A)
    if not np.any(A):
        raise InvalidParameterError("matrix must be nonzero")
    sv = np.linalg.svd(A, compute_uv=False)
    return float(sv[-1]), float(sv[0])


def l2_ball_project(v, tau: float) -> np.ndarray:
    """Euclidean projection of v onto the ball of radius tau.

    tau = 0 returns the zero vector exactly.
    """
    v = as_vector(v)
    if tau < 0:
        raise InvalidParameterError("ball radius must be nonnegative")
    if tau == 0.0:
        return np.zeros_like(v)
    nrm = float(np.linalg.norm(v))
    if nrm <= tau:
        return v.copy()
    return v * (tau / nrm)
