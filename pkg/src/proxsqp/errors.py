"""Exception types shared across the solver stack."""


class ProxSQPError(Exception):
    """Base class for package errors."""


class RankDeficient(ProxSQPError):
    """A matrix that must have full row rank does not.

    Carries the offending smallest singular value in ``sigma_min``.
    """

    def __init__(self, sigma_min, message=None):
        self.sigma_min = sigma_min
        super().__init__(message or f"rank-deficient matrix (sigma_min={sigma_min!r})")


class GapCollapse(ProxSQPError):
    """Eigenvalue gap below the chart-validity tolerance.

    The manifold chart (fixed top-eigenvalue multiplicity) cannot be
    evaluated where the separating eigengap closes.
    """

    def __init__(self, gap, tol, message=None):
        self.gap = gap
        self.tol = tol
        super().__init__(message or f"eigengap {gap!r} below chart tolerance {tol!r}")


class IndefiniteReducedHessian(ProxSQPError):
    """Reduced Hessian Z'HZ is not positive definite.

    The caller decides the fallback (the driver adds tau*I).
    """

    def __init__(self, min_eig):
        self.min_eig = min_eig
        super().__init__(f"reduced Hessian not positive definite (min_eig={min_eig!r})")


class ChartFailure(ProxSQPError):
    """Too many consecutive chart errors inside the solve loop."""
