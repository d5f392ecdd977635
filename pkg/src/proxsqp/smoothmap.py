"""Smooth inner maps c and assembly of composite instances F(x) = g(c(x)).

Three map families cover the experiments: quadratic families into R^m,
affine matrix maps into the symmetric matrices, and the hard-coded analytic
pair used by the two-dimensional demo.  Each map exposes values, first and
second directional derivatives, and the adjoint of the differential, which
is all the identification and SQP layers ever need.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import nsfun
from .precision import precision_of


def _sym_check(A, what):
    if A.shape[-1] != A.shape[-2] or not np.allclose(A, np.swapaxes(A, -1, -2)):
        raise ValueError(f"{what} must be symmetric")


class QuadraticFamily:
    """c_i(x) = 1/2 x^T A_i x + b_i^T x + c0_i for i = 0..m-1.

    Parameters
    ----------
    A : (m, n, n) array, each slice symmetric
    b : (m, n) array
    c0 : (m,) array
    """

    codomain = "vector"

    def __init__(self, A, b, c0):
        A = np.asarray(A, dtype=float)
        b = np.asarray(b, dtype=float)
        c0 = np.asarray(c0, dtype=float)
        if A.ndim != 3 or b.shape != A.shape[:2] or c0.shape != A.shape[:1]:
            raise ValueError("inconsistent quadratic family dimensions")
        _sym_check(A, "every A_i")
        self.A = A
        self.b = b
        self.c0 = c0
        self.m, self.n = b.shape

    def value(self, x):
        x = np.asarray(x)
        prec = precision_of(x)
        out = prec.zeros(self.m)
        for i in range(self.m):
            Ax = self.A[i] @ x
            out[i] = (x @ Ax) / 2 + self.b[i] @ x + prec.scalar(self.c0[i])
        return out

    def jacobian(self, x):
        """Rows (A_i x + b_i)^T, stacked (m, n)."""
        x = np.asarray(x)
        prec = precision_of(x)
        J = prec.zeros((self.m, self.n))
        for i in range(self.m):
            J[i] = self.A[i] @ x + prec.asarray(self.b[i])
        return J

    def second_directional(self, x, u, v):
        u = np.asarray(u)
        v = np.asarray(v)
        prec = precision_of(u)
        out = prec.zeros(self.m)
        for i in range(self.m):
            out[i] = u @ (self.A[i] @ v)
        return out

    def hessian_weighted(self, x, w):
        """sum_i w_i A_i: the map-curvature block of a Lagrangian Hessian."""
        w = np.asarray(w)
        prec = precision_of(w)
        H = prec.zeros((self.n, self.n))
        for i in range(self.m):
            H = H + w[i] * prec.asarray(self.A[i])
        return H


class AffineMatrixMap:
    """c(x) = A_0 + sum_i x_i A_i into the m x m symmetric matrices.

    mats holds A_0..A_n as an (n+1, m, m) stack of symmetric matrices.
    """

    codomain = "matrix"

    def __init__(self, mats):
        mats = np.asarray(mats, dtype=float)
        if mats.ndim != 3:
            raise ValueError("mats must be a stack of square matrices")
        _sym_check(mats, "every A_i")
        self.mats = mats
        self.n = mats.shape[0] - 1
        self.m = mats.shape[1]

    def value(self, x):
        x = np.asarray(x)
        prec = precision_of(x)
        Y = prec.asarray(self.mats[0])
        for i in range(self.n):
            Y = Y + x[i] * prec.asarray(self.mats[i + 1])
        return Y

    def second_directional(self, x, u, v):
        prec = precision_of(np.asarray(u))
        return prec.zeros((self.m, self.m))

    def hessian_weighted(self, x, W):
        prec = precision_of(np.asarray(W))
        return prec.zeros((self.n, self.n))


class AnalyticPair:
    """The two-piece demo map c(x) = (2.6 x1^2 + 4 (x2-1)^2 - 4,
    x1^2 + 4 (x2+1)^2 - 4)."""

    codomain = "vector"
    n = 2
    m = 2

    def value(self, x):
        x = np.asarray(x)
        prec = precision_of(x)
        out = prec.zeros(2)
        four = prec.scalar(4)
        out[0] = prec.scalar(2.6) * x[0] * x[0] + four * (x[1] - 1) ** 2 - four
        out[1] = x[0] * x[0] + four * (x[1] + 1) ** 2 - four
        return out

    def jacobian(self, x):
        x = np.asarray(x)
        prec = precision_of(x)
        J = prec.zeros((2, 2))
        J[0, 0] = prec.scalar(5.2) * x[0]
        J[0, 1] = prec.scalar(8) * (x[1] - 1)
        J[1, 0] = 2 * x[0]
        J[1, 1] = prec.scalar(8) * (x[1] + 1)
        return J

    # constant Hessians of the two pieces
    _H = (np.diag([5.2, 8.0]), np.diag([2.0, 8.0]))

    def second_directional(self, x, u, v):
        u = np.asarray(u)
        v = np.asarray(v)
        prec = precision_of(u)
        out = prec.zeros(2)
        out[0] = u @ (self._H[0] @ v)
        out[1] = u @ (self._H[1] @ v)
        return out

    def hessian_weighted(self, x, w):
        w = np.asarray(w)
        prec = precision_of(w)
        return w[0] * prec.asarray(self._H[0]) + w[1] * prec.asarray(self._H[1])


class Differential:
    """Dc(x) packaged as apply/adjoint callables (matrix form when available)."""

    def __init__(self, apply, adjoint, matrix=None):
        self.apply = apply
        self.adjoint = adjoint
        self.matrix = matrix


def eval_map(c, x):
    return c.value(x)


def differential(c, x):
    """The differential Dc(x) and its adjoint.

    Vector-codomain maps carry an explicit Jacobian matrix; the affine
    matrix map applies u -> sum u_i A_i with the Frobenius adjoint
    S -> (<A_i, S>)_i.
    """
    if c.codomain == "vector":
        J = c.jacobian(x)
        return Differential(lambda u: J @ np.asarray(u),
                            lambda w: J.T @ np.asarray(w),
                            matrix=J)
    mats = c.mats

    def apply(u):
        u = np.asarray(u)
        prec = precision_of(u)
        out = u[0] * prec.asarray(mats[1])
        for i in range(1, c.n):
            out = out + u[i] * prec.asarray(mats[i + 1])
        return out

    def adjoint(W):
        W = np.asarray(W)
        prec = precision_of(W)
        out = prec.zeros(c.n)
        for i in range(c.n):
            out[i] = (prec.asarray(mats[i + 1]) * W).sum()
        return out

    return Differential(apply, adjoint)


def second_directional(c, x, u, v):
    return c.second_directional(x, u, v)


@dataclass
class CompositeInstance:
    """A named problem F(x) = outer(map(x)) plus optional reference data."""

    name: str
    map: object
    outer: object
    known_manifold: object = None
    reference: Optional[object] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        m = getattr(self.outer, "m", None)
        if m is not None and m != self.map.m:
            raise ValueError("outer dimension does not match map codomain")

    @property
    def n(self):
        return self.map.n


def composite_value(instance, x):
    return nsfun.value(instance.outer, eval_map(instance.map, x))


def composite_subgradient(instance, x):
    """An extreme-point subgradient of F at x and a differentiability flag.

    The intermediate subgradient is e_i for the first maximal entry (max)
    or u1 u1^T for the leading eigenvector (lammax), pulled back through
    the adjoint differential.
    """
    y = eval_map(instance.map, x)
    fval = nsfun.value(instance.outer, y)
    tie_tol = 1e-12 * (1 + abs(fval))
    w, differentiable = nsfun.subgradient_extreme(instance.outer, y, tie_tol)
    v = differential(instance.map, x).adjoint(w)
    return v, differentiable


def first_order(instance, x):
    """(F(x), subgradient, differentiable): the oracle the baselines consume."""
    y = eval_map(instance.map, x)
    fval = nsfun.value(instance.outer, y)
    tie_tol = 1e-12 * (1 + abs(fval))
    w, differentiable = nsfun.subgradient_extreme(instance.outer, y, tie_tol)
    v = differential(instance.map, x).adjoint(w)
    return fval, v, differentiable


# ---------------------------------------------------------------------------
# (de)serialization — JSON-friendly dicts, bit-exact via hex floats

def _encode_floats(a, hex_floats):
    flat = np.asarray(a, dtype=float).ravel().tolist()
    return [v.hex() for v in flat] if hex_floats else flat


def _decode_floats(data, shape):
    vals = [float.fromhex(v) if isinstance(v, str) else float(v) for v in data]
    return np.array(vals, dtype=float).reshape(shape)


def map_to_config(c, hex_floats=False):
    if isinstance(c, QuadraticFamily):
        return {"kind": "quadratic_family", "n": c.n, "m": c.m,
                "A": _encode_floats(c.A, hex_floats),
                "b": _encode_floats(c.b, hex_floats),
                "c0": _encode_floats(c.c0, hex_floats)}
    if isinstance(c, AffineMatrixMap):
        return {"kind": "affine_matrix_map", "n": c.n, "m": c.m,
                "mats": _encode_floats(c.mats, hex_floats)}
    if isinstance(c, AnalyticPair):
        return {"kind": "analytic_pair"}
    raise ValueError(f"unserializable map type {type(c).__name__}")


def map_from_config(cfg):
    kind = cfg["kind"]
    if kind == "quadratic_family":
        n, m = cfg["n"], cfg["m"]
        return QuadraticFamily(_decode_floats(cfg["A"], (m, n, n)),
                               _decode_floats(cfg["b"], (m, n)),
                               _decode_floats(cfg["c0"], (m,)))
    if kind == "affine_matrix_map":
        n, m = cfg["n"], cfg["m"]
        return AffineMatrixMap(_decode_floats(cfg["mats"], (n + 1, m, m)))
    if kind == "analytic_pair":
        return AnalyticPair()
    raise ValueError(f"unknown map kind {kind!r}")


def outer_to_config(g):
    if isinstance(g, nsfun.Max):
        return {"kind": "max", "m": g.m}
    if isinstance(g, nsfun.LamMax):
        return {"kind": "lammax", "m": g.m}
    raise ValueError(f"unserializable outer function {type(g).__name__}")


def outer_from_config(cfg):
    kind = cfg["kind"]
    if kind == "max":
        return nsfun.Max(cfg["m"])
    if kind == "lammax":
        return nsfun.LamMax(cfg["m"])
    raise ValueError(f"unknown outer kind {kind!r}")


def instance_to_config(instance, hex_floats=False):
    return {"name": instance.name,
            "map": map_to_config(instance.map, hex_floats),
            "outer": outer_to_config(instance.outer),
            "meta": dict(instance.meta)}


def instance_from_config(cfg):
    return CompositeInstance(name=cfg["name"],
                             map=map_from_config(cfg["map"]),
                             outer=outer_from_config(cfg["outer"]),
                             meta=dict(cfg.get("meta", {})))
