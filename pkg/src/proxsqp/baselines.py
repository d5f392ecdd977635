"""First-order comparison methods sharing the composite subgradient oracle.

Both methods consume only (F(x), v in dF(x), differentiability flag): a
gradient-sampling loop with a shrinking ball and min-norm descent
direction, and a full-memory BFGS on the subgradient oracle with a weak
Wolfe line search.  They are faithful-in-spirit reimplementations used as
comparison scaffolding, not replications of the originals.
"""

import time
from dataclasses import dataclass

import numpy as np

from . import smoothmap
from .driver import IterationRecord, SolveTrace
from .precision import inf_norm

CURVATURE_SKIP = 1e-12


@dataclass
class BaselineOptions:
    max_iter: int = 500
    rng_seed: int = 0
    # gradient sampling
    sample_count: int = 0              # 0 -> 2n
    sample_radius: float = 0.1
    radius_shrink: float = 0.5
    opt_tol: float = 1e-12
    radius_tol: float = 1e-12
    armijo: float = 1e-4
    max_backtracks: int = 40
    # nonsmooth BFGS
    wolfe_c1: float = 1e-4
    wolfe_c2: float = 0.9
    ls_max_steps: int = 60

    def __post_init__(self):
        if self.max_iter <= 0 or self.sample_radius <= 0:
            raise ValueError("positive parameters required")
        if not (0 < self.wolfe_c1 < self.wolfe_c2 < 1):
            raise ValueError("need 0 < c1 < c2 < 1")


def _project_simplex(v):
    """Euclidean projection onto the probability simplex (sort-based)."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1
    ks = np.arange(1, len(v) + 1)
    valid = u - css / ks > 0
    rho = np.max(ks[valid])
    theta = css[rho - 1] / rho
    return np.maximum(v - theta, 0.0)


def _min_norm_hull(G, iters=400):
    """Min-norm point of conv{columns of G} by projected gradient."""
    n, N = G.shape
    M = G.T @ G
    lam_max = float(np.linalg.eigvalsh(M)[-1]) if N > 1 else float(M[0, 0])
    if lam_max <= 0:
        return np.zeros(n)
    step = 1.0 / lam_max
    alpha = np.full(N, 1.0 / N)
    for _ in range(iters):
        alpha = _project_simplex(alpha - step * (M @ alpha))
    return G @ alpha


def gradient_sampling(instance, x0, opts=None):
    """Shrinking-ball gradient sampling with backtracking on F."""
    opts = opts or BaselineOptions()
    rng = np.random.default_rng(np.random.Philox(opts.rng_seed))
    x = np.asarray(x0, dtype=float).copy()
    n = x.shape[0]
    count = opts.sample_count or 2 * n
    if count < n + 1:
        raise ValueError("sample_count must be at least n + 1")

    f, g, _ = smoothmap.first_order(instance, x)
    eps = opts.sample_radius
    records, xs = [], []
    status = "MaxIter"
    for k in range(opts.max_iter):
        t0 = time.perf_counter_ns()
        if eps < opts.radius_tol:
            status = "Converged"
            break
        grads = [g]
        for _ in range(count):
            for _attempt in range(5):
                u = rng.standard_normal(n)
                nrm = float(np.linalg.norm(u))
                if nrm < 1e-15:
                    continue
                radius = eps * rng.uniform() ** (1.0 / n)
                _, gs, ok = smoothmap.first_order(instance, x + radius * u / nrm)
                if ok:
                    break
            grads.append(gs)
        d = -_min_norm_hull(np.column_stack(grads))
        dn = float(np.linalg.norm(d))
        moved = False
        if dn > opts.opt_tol:
            t = 1.0
            for _ in range(opts.max_backtracks):
                f_new, g_new, _ = smoothmap.first_order(instance, x + t * d)
                if f_new < f - opts.armijo * t * dn * dn:
                    x = x + t * d
                    f, g = f_new, g_new
                    moved = True
                    break
                t *= 0.5
        if not moved:
            eps *= opts.radius_shrink
        records.append(IterationRecord(
            k, float("nan"), "", float(f),
            float(t * dn) if moved else 0.0, float("nan"),
            float(np.linalg.norm(g)), moved, moved,
            time.perf_counter_ns() - t0))
        xs.append(x)
    return SolveTrace(instance=instance.name, method="gradient_sampling",
                      status=status, records=records, x_final=x, f_final=f,
                      xs=xs, options={"rng_seed": opts.rng_seed,
                                      "sample_count": count,
                                      "sample_radius": opts.sample_radius,
                                      "max_iter": opts.max_iter})


def nonsmooth_bfgs(instance, x0, opts=None):
    """Full-memory BFGS on the subgradient oracle with weak Wolfe search."""
    opts = opts or BaselineOptions()
    x = np.asarray(x0, dtype=float).copy()
    n = x.shape[0]
    Hinv = np.eye(n)
    f, g, _ = smoothmap.first_order(instance, x)
    records, xs = [], []
    status = "MaxIter"
    for k in range(opts.max_iter):
        t0 = time.perf_counter_ns()
        d = -(Hinv @ g)
        gd = float(g @ d)
        if gd >= 0:
            Hinv = np.eye(n)
            d = -g
            gd = -float(g @ g)
        if gd == 0.0:
            status = "Converged"
            break
        t, lo, hi = 1.0, 0.0, float("inf")
        f_t, g_t = f, g
        ok = False
        for _ in range(opts.ls_max_steps):
            f_t, g_t, _ = smoothmap.first_order(instance, x + t * d)
            if f_t > f + opts.wolfe_c1 * t * gd:
                hi = t
            elif float(g_t @ d) < opts.wolfe_c2 * gd:
                lo = t
            else:
                ok = True
                break
            t = (lo + hi) / 2 if hi < float("inf") else 2 * t
        if not ok:
            status = "LineSearchFailure"
            records.append(IterationRecord(
                k, float("nan"), "", float(f), 0.0, float("nan"),
                float(np.linalg.norm(g)), False, False,
                time.perf_counter_ns() - t0, error="LineSearchFailure"))
            xs.append(x)
            break
        s = t * np.asarray(d)
        y = g_t - g
        sy = float(s @ y)
        if sy > CURVATURE_SKIP * float(np.linalg.norm(s) * np.linalg.norm(y)):
            rho = 1.0 / sy
            V = np.eye(n) - rho * np.outer(s, y)
            Hinv = V @ Hinv @ V.T + rho * np.outer(s, s)
        x = x + s
        f, g = f_t, g_t
        records.append(IterationRecord(
            k, float("nan"), "", float(f), float(inf_norm(s)), float("nan"),
            float(np.linalg.norm(g)), True, True,
            time.perf_counter_ns() - t0))
        xs.append(x)
    return SolveTrace(instance=instance.name, method="nsbfgs", status=status,
                      records=records, x_final=x, f_final=f, xs=xs,
                      options={"max_iter": opts.max_iter,
                               "wolfe_c1": opts.wolfe_c1,
                               "wolfe_c2": opts.wolfe_c2})


def warm_start(instance, iters=50, x_init=None):
    """The benchmark warm-start protocol: a short subgradient-BFGS run."""
    if x_init is None:
        from .registry import default_start
        x_init = default_start(instance)
    opts = BaselineOptions(max_iter=iters)
    return nonsmooth_bfgs(instance, x_init, opts).x_final
