"""One equality-constrained SQP step: multiplier, direction, correction.

The quadratic model min_d <grad, d> + 1/2 d^T H d subject to h + Jh d = 0
is solved by the reduced-system approach: a min-norm range-space step
restores the linearized constraint, then the reduced Hessian Z^T H Z acts
on the tangential coordinates.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import numlin
from .errors import IndefiniteReducedHessian
from .precision import precision_of, inf_norm


@dataclass
class SQPStep:
    d_sqp: np.ndarray
    d_corr: np.ndarray
    multiplier: np.ndarray
    kkt_residual: float
    reduced_hessian_min_eig: float


def multiplier_ls(grad_f, Jh):
    """Least-squares multiplier: argmin_lam ||grad_f + Jh^T lam||."""
    grad_f = np.asarray(grad_f)
    Jh = np.asarray(Jh)
    if Jh.shape[0] == 0:
        return precision_of(grad_f).zeros(0)
    return numlin.lstsq_min_norm(Jh.T, -grad_f)


def sqp_direction(x, grad_f, H, h, Jh):
    """(d, min_eig, kkt_residual) for the equality-constrained QP at x.

    d = d_N + Z d_T with d_N the min-norm solution of Jh d = -h and d_T
    from the reduced system (Z^T H Z) d_T = -Z^T (grad_f + H d_N).
    Raises IndefiniteReducedHessian when the reduced Hessian has a
    nonpositive eigenvalue; the caller owns the fallback.
    """
    x = np.asarray(x)
    grad_f = np.asarray(grad_f)
    H = np.asarray(H)
    h = np.asarray(h)
    Jh = np.asarray(Jh)
    prec = precision_of(grad_f)
    n = grad_f.shape[0]

    Z = numlin.nullspace_basis(Jh if Jh.size else prec.zeros((0, n)))
    d_N = numlin.lstsq_min_norm(Jh, -h) if Jh.shape[0] else prec.zeros(n)

    if Z.shape[1] == 0:
        d = d_N
        min_eig = float("inf")
    else:
        R = Z.T @ (H @ Z)
        R = (R + R.T) / 2
        w, Q = numlin.sym_eigen(R)
        min_eig = w[Z.shape[1] - 1]
        if min_eig <= 0:
            raise IndefiniteReducedHessian(float(min_eig))
        rhs = -(Z.T @ (grad_f + H @ d_N))
        d_T = Q @ ((Q.T @ rhs) / w)
        d = d_N + Z @ d_T

    mult = multiplier_ls(grad_f + H @ d, Jh)
    kkt_grad = grad_f + H @ d + (Jh.T @ mult if Jh.shape[0] else 0)
    kkt_lin = h + Jh @ d if Jh.shape[0] else prec.zeros(0)
    kkt = max(float(inf_norm(kkt_grad)), float(inf_norm(kkt_lin)))
    return d, float(min_eig) if min_eig != float("inf") else min_eig, kkt


def second_order_correction(manifold, x, d_sqp, Jh, rule="classic"):
    """Range-space correction d_corr = argmin{||h_eval + Jh d|| : d in Im Jh^T}.

    ``classic`` evaluates the constraints at x + d_sqp (the standard
    correction); ``literal`` reuses h(x).
    """
    if rule not in ("classic", "literal"):
        raise ValueError(f"unknown correction rule {rule!r}")
    x = np.asarray(x)
    if manifold.p == 0:
        return precision_of(x).zeros(x.shape[0])
    h_eval = manifold.h(x + d_sqp) if rule == "classic" else manifold.h(x)
    return numlin.lstsq_min_norm(Jh, -h_eval)


def lagrangian_hessian(instance, manifold, x, lam):
    """Hessian of F~ + <lam, h> at x (delegates to the working manifold)."""
    return manifold.lagrangian_hessian(x, lam)
