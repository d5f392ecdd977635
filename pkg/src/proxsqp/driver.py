"""The identification-SQP loop: halve gamma, detect, step, test decrease.

Each iteration first shrinks gamma, reruns detection at the current
iterate, takes one SQP step with second-order correction on the detected
working manifold, and keeps the step only when the composite value does
not increase.  Everything is traced: per-iteration gamma, manifold code,
norms, acceptance, and wall time.
"""

import csv
import json
import time
from dataclasses import dataclass, field, asdict
from typing import Optional, Union

import numpy as np

from . import identify, nsfun, smoothmap, sqp
from .errors import GapCollapse, IndefiniteReducedHessian, RankDeficient
from .precision import DOUBLE, extended, inf_norm

TRACE_SCHEMA = "proxsqp-trace/1"
CONSECUTIVE_FAIL_LIMIT = 20
HESSIAN_FLOOR = 1e-8

CSV_COLUMNS = ("k", "gamma", "manifold", "f_value", "step_norm", "h_norm",
               "stat_norm", "decrease", "accepted", "wall_time_ns", "error")


@dataclass
class SolveOptions:
    gamma0: Union[str, float] = "auto"
    gamma_factor: float = 0.5
    max_iter: int = 60
    tol_step: float = 1e-9
    tol_feas: float = 1e-9
    tol_stat: float = 1e-9
    soc_rule: str = "classic"          # classic | literal
    decrease_rule: str = "full"        # full step | sqp (test x + d_sqp only)
    precision: str = "double"          # double | extended
    dps: int = 50

    def __post_init__(self):
        if not (0 < self.gamma_factor < 1):
            raise ValueError("gamma_factor must lie in (0, 1)")
        if min(self.tol_step, self.tol_feas, self.tol_stat) <= 0:
            raise ValueError("tolerances must be positive")
        if self.soc_rule not in ("classic", "literal"):
            raise ValueError(f"unknown soc_rule {self.soc_rule!r}")
        if self.decrease_rule not in ("full", "sqp"):
            raise ValueError(f"unknown decrease_rule {self.decrease_rule!r}")
        if self.precision not in ("double", "extended"):
            raise ValueError(f"unknown precision {self.precision!r}")


@dataclass
class IterationRecord:
    k: int
    gamma: float
    manifold: str
    f_value: float
    step_norm: float
    h_norm: float
    stat_norm: float
    decrease: bool
    accepted: bool
    wall_time_ns: int
    error: str = ""


@dataclass
class SolveTrace:
    instance: str
    method: str
    status: str
    records: list
    x_final: np.ndarray
    f_final: object
    descriptor_final: object = None
    xs: list = field(default_factory=list)
    options: dict = field(default_factory=dict)

    @property
    def iterations(self):
        return len(self.records)

    def accepted_indices(self):
        return [r.k for r in self.records if r.accepted]

    def to_json_dict(self):
        return {
            "schema": TRACE_SCHEMA,
            "instance": self.instance,
            "method": self.method,
            "status": self.status,
            "options": self.options,
            "f_final": float(self.f_final),
            "x_final": [float(v) for v in np.asarray(self.x_final).ravel()],
            "descriptor_final": (self.descriptor_final.code()
                                 if self.descriptor_final is not None else ""),
            "iterations": [asdict(r) for r in self.records],
            "iterates": [[float(v) for v in np.asarray(x).ravel()]
                         for x in self.xs],
        }

    def to_json(self, path):
        with open(path, "w") as f:
            json.dump(self.to_json_dict(), f, indent=1)
            f.write("\n")

    def to_csv(self, path, include_time=True):
        cols = CSV_COLUMNS if include_time else tuple(
            c for c in CSV_COLUMNS if c != "wall_time_ns")
        with open(path, "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(cols)
            for r in self.records:
                row = []
                for c in cols:
                    v = getattr(r, c)
                    if isinstance(v, bool):
                        row.append("true" if v else "false")
                    elif isinstance(v, float):
                        row.append(repr(v))
                    else:
                        row.append(str(v))
                w.writerow(row)


def _precision_for(opts):
    return DOUBLE if opts.precision == "double" else extended(opts.dps)


def solve(instance, x0, opts=None):
    """Run the halving-identification-SQP loop from x0."""
    opts = opts or SolveOptions()
    prec = _precision_for(opts)
    with prec.ctx():
        return _solve_inner(instance, x0, opts, prec)


def _solve_inner(instance, x0, opts, prec):
    x = prec.asarray(np.asarray(x0))
    n = x.shape[0]
    if opts.gamma0 == "auto":
        gamma = identify.gamma_init(instance, x)
    else:
        gamma = float(opts.gamma0)
        if gamma <= 0:
            raise ValueError("gamma0 must be positive")
    f_x = smoothmap.composite_value(instance, x)

    records = []
    xs = []
    status = "MaxIter"
    descriptor = None
    fails = 0
    for k in range(opts.max_iter):
        t0 = time.perf_counter_ns()
        gamma = gamma * opts.gamma_factor
        try:
            outcome, M = identify.detect(instance, x, gamma)
            grad = M.ftilde_gradient(x)
            Jh = M.h_jacobian(x)
            hval = M.h(x)
            lam = sqp.multiplier_ls(grad, Jh)
            H = M.lagrangian_hessian(x, lam)
            try:
                d, min_eig, kkt = sqp.sqp_direction(x, grad, H, hval, Jh)
            except IndefiniteReducedHessian as e:
                tau = max(0.0, HESSIAN_FLOOR - e.min_eig)
                d, min_eig, kkt = sqp.sqp_direction(
                    x, grad, H + tau * prec.eye(n), hval, Jh)
            d_corr = sqp.second_order_correction(M, x, d, Jh, opts.soc_rule)
        except (GapCollapse, RankDeficient, IndefiniteReducedHessian) as e:
            fails += 1
            records.append(IterationRecord(
                k, float(gamma), "", float(f_x), float("nan"), float("nan"),
                float("nan"), False, False, time.perf_counter_ns() - t0,
                error=type(e).__name__))
            xs.append(x)
            if fails >= CONSECUTIVE_FAIL_LIMIT:
                status = "ChartFailure"
                break
            continue
        fails = 0
        descriptor = M.descriptor

        cand = x + d + d_corr if opts.decrease_rule == "full" else x + d
        f_cand = smoothmap.composite_value(instance, cand)
        decrease = bool(f_cand <= f_x)
        step_norm = float(inf_norm(d))
        h_norm = float(inf_norm(hval)) if M.p else 0.0
        stat_vec = grad + (Jh.T @ lam if M.p else 0)
        stat_norm = float(inf_norm(stat_vec))
        if decrease:
            x = cand
            f_x = f_cand
        # The three-part test is evaluated every iteration, accepted or not:
        # near roundoff the decrease test can reject a negligible step even
        # though the iterate already satisfies the optimality measures.
        converged = (step_norm <= opts.tol_step and h_norm <= opts.tol_feas
                     and stat_norm <= opts.tol_stat)
        records.append(IterationRecord(
            k, float(gamma), M.descriptor.code(), float(f_x), step_norm,
            h_norm, stat_norm, decrease, decrease,
            time.perf_counter_ns() - t0))
        xs.append(x)
        if converged:
            status = "Converged"
            break

    return SolveTrace(instance=instance.name, method="proxsqp", status=status,
                      records=records, x_final=x, f_final=f_x,
                      descriptor_final=descriptor, xs=xs,
                      options=_options_dict(opts))


def _options_dict(opts):
    d = asdict(opts)
    d["gamma0"] = opts.gamma0 if isinstance(opts.gamma0, str) else float(opts.gamma0)
    return d


def reference_solve(instance, x0, dps=50, max_iter=200, gamma0="auto"):
    """High-precision solve used as the ground-truth oracle.

    Runs the loop in extended precision with tolerances 1e-2 * sqrt(eps_ext)
    and returns (x_star, f_star, descriptor_star), or None when the run does
    not converge (dependent consumers then skip with an explicit notice).
    gamma0 may seed the stepsize from an earlier double-precision run so the
    expensive extended iterations skip the initial walk-down.
    """
    ext = extended(dps)
    tol = 1e-2 * float(ext.eps) ** 0.5
    opts = SolveOptions(precision="extended", dps=dps, max_iter=max_iter,
                        tol_step=tol, tol_feas=tol, tol_stat=tol,
                        gamma0=gamma0)
    trace = solve(instance, x0, opts)
    if trace.status != "Converged":
        return None
    return trace.x_final, trace.f_final, trace.descriptor_final
