"""Structure-exploiting solver for nonsmooth composite minimization.

Minimizes F(x) = g(c(x)) for g in {max of m reals, maximum eigenvalue}
and smooth c.  The proximity operator of g both takes the descent step
and certifies the smooth substructure the iterates are heading to; once
the certified manifold stabilizes, equality-constrained SQP steps on it
converge quadratically.

Main entry points:

- :func:`proxsqp.driver.solve` — the identification-SQP loop.
- :func:`proxsqp.nsfun.prox` — prox with a structure certificate.
- :func:`proxsqp.registry.get_instance` — bundled test problems.
- :mod:`proxsqp.bench` — experiment harness and self-check suite.

The ``proxsqp`` console script exposes ``solve``, ``scan-gamma``,
``bench`` and ``verify`` subcommands.
"""

from .driver import SolveOptions, SolveTrace, solve, reference_solve
from .errors import (GapCollapse, IndefiniteReducedHessian, ProxSQPError,
                     RankDeficient)
from .nsfun import (EigMult, LamMax, Max, MaxActive, ProxOutcome, prox,
                    prox_lammax, prox_max)
from .registry import get_instance, instance_names
from .smoothmap import CompositeInstance

__version__ = "0.1.0"

__all__ = [
    "SolveOptions", "SolveTrace", "solve", "reference_solve",
    "GapCollapse", "IndefiniteReducedHessian", "ProxSQPError",
    "RankDeficient",
    "EigMult", "LamMax", "Max", "MaxActive", "ProxOutcome", "prox",
    "prox_lammax", "prox_max",
    "get_instance", "instance_names", "CompositeInstance",
    "__version__",
]
