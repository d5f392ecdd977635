"""Scalar-precision plumbing: double (float64) and extended (mpmath) modes.

All numerical code in the package works on numpy arrays that are either
dtype float64 (double) or dtype object holding ``mpmath.mpf`` scalars
(extended).  A :class:`Precision` object carries the machine epsilon of the
active mode and the conversion helpers; tolerance formulas everywhere are
written in terms of ``prec.eps`` so they scale with the working precision.

mpf scalars contaminate upward under mixed arithmetic (float * mpf -> mpf),
so converting the *inputs* of a computation is enough to run the whole
pipeline in extended precision.
"""

import contextlib
import math

import mpmath
import numpy as np

__all__ = ["Precision", "DOUBLE", "extended", "precision_of", "psqrt",
           "vec_norm2", "fro_norm", "inf_norm"]


class Precision:
    """Active scalar precision: epsilon, dtype and conversions."""

    def __init__(self, name, eps, dtype, dps=None):
        self.name = name
        self.eps = eps
        self.dtype = dtype
        self.dps = dps

    def __repr__(self):
        return f"Precision({self.name}, eps={self.eps})"

    @property
    def is_double(self):
        return self.dtype == np.float64

    def scalar(self, x):
        """Convert a number to the active scalar type (exact from float)."""
        if self.is_double:
            return float(x)
        with mpmath.workdps(self.dps):
            return mpmath.mpf(x)

    def asarray(self, a):
        a = np.asarray(a)
        if self.is_double:
            return a.astype(np.float64)
        out = np.empty(a.shape, dtype=object)
        flat_in = a.reshape(-1)
        flat_out = out.reshape(-1)
        with mpmath.workdps(self.dps):
            for i in range(flat_in.size):
                flat_out[i] = mpmath.mpf(float(flat_in[i]) if a.dtype != object
                                         else flat_in[i])
        return out

    def zeros(self, shape):
        if self.is_double:
            return np.zeros(shape, dtype=np.float64)
        out = np.empty(shape, dtype=object)
        out.reshape(-1)[:] = [mpmath.mpf(0)] * out.size
        return out

    def eye(self, n):
        out = self.zeros((n, n))
        one = self.scalar(1)
        for i in range(n):
            out[i, i] = one
        return out

    def to_float(self, x):
        return float(x)

    def ctx(self):
        """Context manager pinning the mpmath working precision (no-op for
        double)."""
        if self.is_double:
            return contextlib.nullcontext()
        return mpmath.workdps(self.dps)


DOUBLE = Precision("double", float(np.finfo(np.float64).eps), np.float64)


def extended(dps=50):
    """Extended software precision with ``dps`` significant decimal digits."""
    eps = mpmath.mpf(10) ** (1 - dps)
    return Precision("extended", eps, object, dps=dps)


def precision_of(a):
    """Infer the Precision from an array's dtype (extended uses mp.dps)."""
    if np.asarray(a).dtype == object:
        return extended(mpmath.mp.dps)
    return DOUBLE


def psqrt(x):
    """Square root matching the scalar type (math.sqrt or mpmath.sqrt)."""
    if isinstance(x, mpmath.mpf):
        return mpmath.sqrt(x)
    return math.sqrt(x)


def vec_norm2(v):
    v = np.asarray(v)
    if v.size == 0:
        return 0.0
    return psqrt(np.dot(v.reshape(-1), v.reshape(-1)))


def fro_norm(a):
    return vec_norm2(np.asarray(a).reshape(-1))


def inf_norm(v):
    v = np.asarray(v).reshape(-1)
    if v.size == 0:
        return 0.0
    return max(abs(x) for x in v)
