"""Dense real linear algebra, generic over double/extended precision.

Points are plain numpy vectors, symmetric matrices are full (n, n) arrays
kept exactly symmetric by construction (both triangles written from the
same value; packed storage buys nothing at these sizes).  Arrays of dtype
float64 run on the compiled kernels in ``_kernels``; arrays of dtype object
(mpmath.mpf entries) run on mpmath's deterministic routines, post-processed
to the same ordering and sign conventions:

* eigenvalues / singular values sorted descending,
* each eigenvector (and each right-singular vector) has its first nonzero
  component positive.

All tolerance formulas scale with the machine epsilon of the active
precision; rank decisions use rank_tol = max(p, q) * eps * sigma_max.
"""

from typing import NamedTuple

import mpmath
import numpy as np

from . import _kernels
from .errors import RankDeficient
from .precision import precision_of

__all__ = ["EigenPair", "sym_eigen", "nullspace_basis", "lstsq_min_norm",
           "svd", "rank_tol"]


class EigenPair(NamedTuple):
    """Descending eigenvalues and the matching orthonormal eigenvectors."""

    values: np.ndarray
    vectors: np.ndarray


def rank_tol(shape, sigma_max, eps):
    return max(shape) * eps * sigma_max


def _check_finite(a):
    a = np.asarray(a)
    if a.dtype == object:
        for x in a.reshape(-1):
            if not mpmath.isfinite(x):
                raise ValueError("non-finite entry in input array")
    elif a.size and not np.all(np.isfinite(a)):
        raise ValueError("non-finite entry in input array")


def _to_mpmatrix(a):
    m, n = a.shape
    M = mpmath.matrix(m, n)
    for i in range(m):
        for j in range(n):
            M[i, j] = a[i, j]
    return M


def _from_mpmatrix(M):
    out = np.empty((M.rows, M.cols), dtype=object)
    for i in range(M.rows):
        for j in range(M.cols):
            out[i, j] = M[i, j]
    return out


def _fix_column_signs(V, *, mate=None):
    """First nonzero component of each column positive; flip mate along."""
    n, k = V.shape
    for i in range(k):
        for r in range(n):
            x = V[r, i]
            if x != 0:
                if x < 0:
                    V[:, i] = -V[:, i]
                    if mate is not None:
                        mate[:, i] = -mate[:, i]
                break
    return V


def sym_eigen(S):
    """Symmetric eigendecomposition with fixed ordering/sign conventions.

    Deterministic for identical input bits.  Double precision runs the
    cyclic-Jacobi kernel; extended precision runs mpmath.eigsy.
    """
    S = np.asarray(S)
    _check_finite(S)
    n = S.shape[0]
    if S.shape != (n, n):
        raise ValueError("sym_eigen expects a square matrix")
    sym = (S + S.T) / 2  # exact no-op for exactly symmetric input
    if S.dtype != object:
        w, V = _kernels.eigh_jacobi(np.ascontiguousarray(sym, dtype=np.float64))
        return EigenPair(w, V)
    E, Q = mpmath.eigsy(_to_mpmatrix(sym))
    # eigsy sorts ascending; reverse to descending
    vals = np.empty(n, dtype=object)
    vecs = np.empty((n, n), dtype=object)
    for i in range(n):
        vals[i] = E[n - 1 - i]
        for r in range(n):
            vecs[r, i] = Q[r, n - 1 - i]
    _fix_column_signs(vecs)
    return EigenPair(vals, vecs)


def _svd_tall(B):
    """Economy SVD of a tall (n >= p) matrix, descending sigma."""
    n, p = B.shape
    if B.dtype != object:
        U, s, V = _kernels.onesided_svd(np.ascontiguousarray(B, dtype=np.float64))
        return U, s, V
    Um, Sm, Vm = mpmath.svd_r(_to_mpmatrix(B), full_matrices=False,
                              compute_uv=True)
    U = _from_mpmatrix(Um)
    V = _from_mpmatrix(Vm).T.copy()  # svd_r returns V^T
    s = np.empty(p, dtype=object)
    for i in range(p):
        s[i] = Sm[i]
    _fix_column_signs(V, mate=U)
    return U, s, V


def svd(A):
    """(U, sigma, V) with A = U @ diag(sigma) @ V.T, economy size."""
    A = np.asarray(A)
    _check_finite(A)
    p, q = A.shape
    if p >= q:
        return _svd_tall(A)
    Vt, s, Ut = _svd_tall(A.T.copy())
    return Ut, s, Vt


def nullspace_basis(A):
    """Orthonormal basis of ker(A) for a full-row-rank A (p x n, p <= n).

    Raises RankDeficient (carrying sigma_min) when the smallest singular
    value falls below rank_tol.  Built from the full Householder QR of A^T,
    which keeps ||A @ Z|| at the backward-stable O(eps * ||A||) level.
    """
    A = np.asarray(A)
    _check_finite(A)
    p, n = A.shape
    if p > n:
        # More rows than columns can never be full row rank; report it the
        # same way as a numerically rank-deficient system so callers treat
        # an over-constrained chart as a recoverable failure.
        raise RankDeficient(0.0)
    prec = precision_of(A)
    if p == 0:
        return prec.eye(n)
    _, s, _ = svd(A)
    tol = rank_tol((p, n), s[0], prec.eps)
    if s[p - 1] <= tol:
        raise RankDeficient(s[p - 1])
    if n == p:
        return prec.zeros((n, 0))
    if A.dtype != object:
        Q, _ = _kernels.qr_full(np.ascontiguousarray(A.T, dtype=np.float64))
        return Q[:, p:].copy()
    Qm, _ = mpmath.qr(_to_mpmatrix(A.T.copy()), mode="full")
    return _from_mpmatrix(Qm)[:, p:].copy()


def lstsq_min_norm(A, b):
    """Minimum-norm minimizer of ||A x - b||, any shape, always defined.

    Singular values at or below rank_tol are treated as zero (pseudo-inverse
    with numerical rank cutoff).
    """
    A = np.asarray(A)
    b = np.asarray(b).reshape(-1)
    _check_finite(A)
    _check_finite(b)
    p, q = A.shape
    if b.shape[0] != p:
        raise ValueError("shape mismatch in lstsq_min_norm")
    prec = precision_of(A) if A.dtype == object else precision_of(b)
    if p == 0 or q == 0:
        return prec.zeros(q)
    U, s, V = svd(A)
    tol = rank_tol((p, q), s[0], prec.eps)
    x = prec.zeros(q)
    for i in range(min(p, q)):
        if s[i] > tol:
            x = x + (np.dot(U[:, i], b) / s[i]) * V[:, i]
    return x
