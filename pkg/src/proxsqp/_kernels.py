"""Hot float64 kernels: cyclic Jacobi eigensolver, one-sided Jacobi SVD,
Householder QR, water-filling scan.

Each kernel exists once as plain Python source (the ``*_py`` names) and is
compiled with numba ``@njit`` when available.  The compiled and interpreted
paths execute the identical statements in the same order with no fastmath,
so results agree bitwise; ``benchmarks/kernel_bench.py`` compares their
speed.  Set ``PROXSQP_PURE_PYTHON=1`` to force the interpreted path.

These kernels are float64-only; the extended-precision path lives in
``numlin`` on top of mpmath.
"""

import math
import os

import numpy as np

__all__ = ["NUMBA_ENABLED", "eigh_jacobi", "eigh_jacobi_py",
           "onesided_svd", "onesided_svd_py", "qr_full", "qr_full_py",
           "waterfill", "waterfill_py"]


def _numba_enabled():
    flag = os.environ.get("PROXSQP_PURE_PYTHON", "").strip().lower()
    if flag in ("1", "true", "yes", "on"):
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


NUMBA_ENABLED = _numba_enabled()

_EPS = 2.220446049250313e-16  # np.finfo(float64).eps, literal for numba


def eigh_jacobi_py(S):
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi sweeps.

    Returns (w, V) with w descending and each eigenvector's first
    nonzero component positive; S = V @ diag(w) @ V.T.
    """
    n = S.shape[0]
    a = S.copy()
    v = np.eye(n)
    if n > 1:
        # Frobenius norm of the input fixes the absolute sweep tolerance.
        fro2 = 0.0
        for i in range(n):
            for j in range(n):
                fro2 += a[i, j] * a[i, j]
        tol = _EPS * math.sqrt(fro2)
        for _ in range(60):
            off2 = 0.0
            for p in range(n - 1):
                for q in range(p + 1, n):
                    off2 += a[p, q] * a[p, q]
            if math.sqrt(2.0 * off2) <= tol:
                break
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = a[p, q]
                    if abs(apq) <= 0.25 * tol / n:
                        continue
                    theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                    if theta >= 0.0:
                        t = 1.0 / (theta + math.sqrt(1.0 + theta * theta))
                    else:
                        t = -1.0 / (-theta + math.sqrt(1.0 + theta * theta))
                    c = 1.0 / math.sqrt(1.0 + t * t)
                    s = t * c
                    app = a[p, p]
                    aqq = a[q, q]
                    a[p, p] = app - t * apq
                    a[q, q] = aqq + t * apq
                    a[p, q] = 0.0
                    a[q, p] = 0.0
                    for k in range(n):
                        if k != p and k != q:
                            akp = a[k, p]
                            akq = a[k, q]
                            a[k, p] = c * akp - s * akq
                            a[p, k] = a[k, p]
                            a[k, q] = s * akp + c * akq
                            a[q, k] = a[k, q]
                    for k in range(n):
                        vkp = v[k, p]
                        vkq = v[k, q]
                        v[k, p] = c * vkp - s * vkq
                        v[k, q] = s * vkp + c * vkq
    w = np.empty(n)
    for i in range(n):
        w[i] = a[i, i]
    # Deterministic selection sort, descending; ties keep sweep order.
    order = np.empty(n, dtype=np.int64)
    for i in range(n):
        order[i] = i
    for i in range(n - 1):
        best = i
        for j in range(i + 1, n):
            if w[order[j]] > w[order[best]]:
                best = j
        if best != i:
            tmp = order[i]
            order[i] = order[best]
            order[best] = tmp
    wout = np.empty(n)
    vout = np.empty((n, n))
    for i in range(n):
        wout[i] = w[order[i]]
        for k in range(n):
            vout[k, i] = v[k, order[i]]
    # Sign convention: first nonzero component positive.
    for i in range(n):
        for k in range(n):
            if vout[k, i] != 0.0:
                if vout[k, i] < 0.0:
                    for l in range(n):
                        vout[l, i] = -vout[l, i]
                break
    return wout, vout


def onesided_svd_py(B):
    """One-sided Jacobi SVD of a tall matrix B (n x p, n >= p).

    Returns (U, sigma, V) with B = U @ diag(sigma) @ V.T, sigma descending
    (computed to high relative accuracy), U n x p with orthonormal nonzero
    columns, V p x p orthogonal.  Zero singular values give zero U columns.
    """
    n, p = B.shape
    w = B.copy()
    v = np.eye(p)
    for _ in range(60):
        rotated = False
        for i in range(p - 1):
            for j in range(i + 1, p):
                alpha = 0.0
                beta = 0.0
                gam = 0.0
                for k in range(n):
                    alpha += w[k, i] * w[k, i]
                    beta += w[k, j] * w[k, j]
                    gam += w[k, i] * w[k, j]
                if gam * gam <= (_EPS * _EPS) * alpha * beta:
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * gam)
                if zeta >= 0.0:
                    t = 1.0 / (zeta + math.sqrt(1.0 + zeta * zeta))
                else:
                    t = -1.0 / (-zeta + math.sqrt(1.0 + zeta * zeta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = c * t
                for k in range(n):
                    wi = w[k, i]
                    wj = w[k, j]
                    w[k, i] = c * wi - s * wj
                    w[k, j] = s * wi + c * wj
                for k in range(p):
                    vi = v[k, i]
                    vj = v[k, j]
                    v[k, i] = c * vi - s * vj
                    v[k, j] = s * vi + c * vj
        if not rotated:
            break
    sigma = np.empty(p)
    for i in range(p):
        acc = 0.0
        for k in range(n):
            acc += w[k, i] * w[k, i]
        sigma[i] = math.sqrt(acc)
    order = np.empty(p, dtype=np.int64)
    for i in range(p):
        order[i] = i
    for i in range(p - 1):
        best = i
        for j in range(i + 1, p):
            if sigma[order[j]] > sigma[order[best]]:
                best = j
        if best != i:
            tmp = order[i]
            order[i] = order[best]
            order[best] = tmp
    u = np.zeros((n, p))
    sout = np.empty(p)
    vout = np.empty((p, p))
    for i in range(p):
        src = order[i]
        sout[i] = sigma[src]
        for k in range(p):
            vout[k, i] = v[k, src]
        if sigma[src] > 0.0:
            for k in range(n):
                u[k, i] = w[k, src] / sigma[src]
    # Sign convention on V columns (first nonzero positive); flip U to match.
    for i in range(p):
        for k in range(p):
            if vout[k, i] != 0.0:
                if vout[k, i] < 0.0:
                    for l in range(p):
                        vout[l, i] = -vout[l, i]
                    for l in range(n):
                        u[l, i] = -u[l, i]
                break
    return u, sout, vout


def qr_full_py(B):
    """Householder QR with full Q.  B is n x p with p <= n.

    Returns (Q, R), Q n x n orthogonal, R n x p upper triangular,
    B = Q @ R.  Reflector signs are fixed (sign(0) = +1) so the result is
    deterministic.
    """
    n, p = B.shape
    r = B.copy()
    q = np.eye(n)
    for k in range(p):
        norm2 = 0.0
        for i in range(k, n):
            norm2 += r[i, k] * r[i, k]
        normx = math.sqrt(norm2)
        if normx == 0.0:
            continue
        if r[k, k] >= 0.0:
            alpha = -normx
        else:
            alpha = normx
        vnorm2 = norm2 - 2.0 * alpha * r[k, k] + alpha * alpha
        if vnorm2 == 0.0:
            continue
        # v = x - alpha*e1; v0 here, tail shared with column k of R, which
        # must stay untouched until every use of the reflector is done.
        v0 = r[k, k] - alpha
        # apply H = I - 2 v v^T / (v^T v) to the columns right of k
        for j in range(k + 1, p):
            dot = v0 * r[k, j]
            for i in range(k + 1, n):
                dot += r[i, k] * r[i, j]
            fac = 2.0 * dot / vnorm2
            r[k, j] -= fac * v0
            for i in range(k + 1, n):
                r[i, j] -= fac * r[i, k]
        # accumulate Q <- Q H (right-multiplication)
        for i in range(n):
            dot = q[i, k] * v0
            for j in range(k + 1, n):
                dot += q[i, j] * r[j, k]
            fac = 2.0 * dot / vnorm2
            q[i, k] -= fac * v0
            for j in range(k + 1, n):
                q[i, j] -= fac * r[j, k]
        r[k, k] = alpha
        for i in range(k + 1, n):
            r[i, k] = 0.0
    return q, r


def waterfill_py(y_sorted, gamma):
    """Water level of the max-prox for a descending-sorted vector.

    Finds the unique level s with sum over the k largest entries of
    (y_i - s) = gamma and returns (s, k).  The count is chosen by
    comparing accumulated gap sums against gamma -- never by comparing
    entries against the rounded level itself -- so a gamma far below the
    spacing of the entries still yields k = 1 instead of a level that
    rounds back onto y_sorted[0].
    """
    m = y_sorted.shape[0]
    zero = y_sorted[0] - y_sorted[0]
    spend = zero  # cost of flattening the top j entries down to entry j
    prefix = y_sorted[0]
    k = m
    for j in range(1, m):
        spend = spend + j * (y_sorted[j - 1] - y_sorted[j])
        if spend >= gamma:
            k = j
            break
        prefix = prefix + y_sorted[j]
    return (prefix - gamma) / k, k


if NUMBA_ENABLED:
    from numba import njit

    eigh_jacobi = njit(cache=True)(eigh_jacobi_py)
    onesided_svd = njit(cache=True)(onesided_svd_py)
    qr_full = njit(cache=True)(qr_full_py)
    waterfill = njit(cache=True)(waterfill_py)
else:  # pragma: no cover - exercised via the env flag / fallback tests
    eigh_jacobi = eigh_jacobi_py
    onesided_svd = onesided_svd_py
    qr_full = qr_full_py
    waterfill = waterfill_py
