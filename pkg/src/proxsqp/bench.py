"""Experiment runners and artifact writers.

Three entry points drive everything the CLI exposes: suboptimality-vs-time
series against the baselines (one row per iteration, all solvers started
from the same warm point), stepsize-window scans along an identification
run, and the verification suite (prox optimality inclusions, finite
difference oracles, normal-ascent and curve checkers, transversality
diagnostics).

Artifacts are deterministic for a fixed (config, seed, precision): wall
clock readings go to *_time.csv sidecars which are excluded from the
checksum manifest.
"""

import csv
import hashlib
import json
import os

import numpy as np

from . import baselines, driver, identify, nsfun, numlin, registry, smoothmap

VERIFY_SCHEMA = "proxsqp-verify/1"
BENCH_SCHEMA = "proxsqp-bench/1"

SUBOPT_SOLVERS = ("proxsqp", "gradient_sampling", "nsbfgs")

GAMMA_BRACKET_FLOOR = 1e-16


# ---------------------------------------------------------------------------
# deterministic writers

def _cell(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)  # round-trip exact, '.' decimal
    return str(v)


def write_csv(path, header, rows):
    """CSV with '.' decimal, LF endings, floats via repr (round-trip exact).

    Fields containing the separator (manifold codes like ``max:1,2,3,4``)
    are quoted by the csv module.
    """
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(v) for v in row])


def write_json(path, obj):
    with open(path, "w", newline="\n") as f:
        json.dump(obj, f, indent=1, sort_keys=True)
        f.write("\n")


def file_sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def write_checksums(out_dir, names):
    """Manifest of the deterministic artifacts (timing sidecars excluded)."""
    sums = {n: file_sha256(os.path.join(out_dir, n)) for n in sorted(names)}
    write_json(os.path.join(out_dir, "checksums.json"), sums)
    return sums


# ---------------------------------------------------------------------------
# experiment configuration

def default_config():
    """Desk-scale experiment matrix reproducing both figure families."""
    return {
        "experiments": [
            {"kind": "subopt", "instance": "maxquad", "warm_iters": 50,
             "budget": 40, "solvers": list(SUBOPT_SOLVERS), "seed": 0},
            {"kind": "subopt", "instance": "eigmax", "warm_iters": 10,
             "budget": 40, "solvers": list(SUBOPT_SOLVERS), "seed": 0},
            {"kind": "gamma_window", "instance": "maxquad"},
        ],
    }


def _load_config(config):
    if isinstance(config, dict):
        return config
    if config == "default":
        return default_config()
    with open(config) as f:
        return json.load(f)


def _warm_point(inst, warm_iters):
    if warm_iters:
        return baselines.warm_start(inst, iters=warm_iters)
    return registry.default_start(inst)


def _solver_trace(name, inst, x0, budget, seed):
    if name == "proxsqp":
        opts = driver.SolveOptions(max_iter=budget,
                                   gamma0=inst.meta.get("gamma0", "auto"))
        return driver.solve(inst, x0, opts)
    if name == "gradient_sampling":
        return baselines.gradient_sampling(
            inst, x0, baselines.BaselineOptions(max_iter=budget,
                                                rng_seed=seed))
    if name == "nsbfgs":
        return baselines.nonsmooth_bfgs(
            inst, x0, baselines.BaselineOptions(max_iter=budget))
    raise ValueError(f"unknown solver {name!r}; known: "
                     f"{', '.join(SUBOPT_SOLVERS)}")


# ---------------------------------------------------------------------------
# runners

def run_subopt_vs_time(exp, out_dir):
    """Per-solver (iteration, suboptimality) series from one warm start."""
    inst = registry.get_instance(exp["instance"], exp.get("instance_seed"))
    stem = f"{inst.name}_subopt"
    if inst.reference is None:
        name = f"{stem}_skip.json"
        write_json(os.path.join(out_dir, name),
                   {"schema": BENCH_SCHEMA, "instance": inst.name,
                    "skipped": "no reference solution recorded"})
        return [name]
    fstar = inst.reference.value
    warm = _warm_point(inst, exp.get("warm_iters", 0))
    budget = exp.get("budget", 40)
    solvers = exp.get("solvers", list(SUBOPT_SOLVERS))

    rows, time_rows, summary = [], [], {}
    for solver in solvers:
        trace = _solver_trace(solver, inst, warm, budget, exp.get("seed", 0))
        cum = 0
        for rec in trace.records:
            rows.append((solver, rec.k, rec.f_value, rec.f_value - fstar))
            cum += rec.wall_time_ns
            time_rows.append((solver, rec.k, cum / 1e9))
        summary[solver] = {
            "status": trace.status,
            "iterations": len(trace.records),
            "f_final": float(trace.f_final),
            "subopt_final": float(trace.f_final) - fstar,
        }

    write_csv(os.path.join(out_dir, stem + ".csv"),
              ("solver", "iter", "f_value", "subopt"), rows)
    write_csv(os.path.join(out_dir, stem + "_time.csv"),
              ("solver", "iter", "cum_seconds"), time_rows)
    write_json(os.path.join(out_dir, stem + "_summary.json"),
               {"schema": BENCH_SCHEMA, "instance": inst.name,
                "f_star": fstar, "warm_iters": exp.get("warm_iters", 0),
                "budget": budget, "solvers": summary})
    return [stem + ".csv", stem + "_summary.json"]


# per-instance warm-start length for the stepsize-window experiment (the
# suboptimality protocol lands too close to x* to leave mid-range points)
WINDOW_PROTOCOL = {
    "maxquad": {"warm_iters": 20, "max_iter": 60},
    "eigmax": {"warm_iters": 10, "max_iter": 60},
}

GAMMA_WINDOW_HEADER = ("iter", "gamma_k", "gamma_low", "gamma_up",
                       "manifold", "dist")


def gamma_window_rows(exp):
    """Stepsize versus identification window along an Algorithm-1 run.

    Returns (instance, rows) where each row is (iter, gamma_k, gamma_low,
    gamma_up, manifold, dist); the window columns are NaN when the scan
    finds no gamma producing the reference descriptor from that iterate.
    Raises ValueError when the instance has no recorded reference.
    """
    inst = registry.get_instance(exp["instance"], exp.get("instance_seed"))
    if inst.reference is None:
        raise ValueError(f"{inst.name} has no reference solution recorded")
    proto = WINDOW_PROTOCOL.get(exp["instance"], {})
    target = inst.reference.descriptor
    xstar = inst.reference.x
    warm = _warm_point(inst, exp.get("warm_iters",
                                     proto.get("warm_iters", 0)))
    opts = driver.SolveOptions(
        max_iter=exp.get("max_iter", proto.get("max_iter", 60)),
        gamma0=inst.meta.get("gamma0", "auto"))
    trace = driver.solve(inst, warm, opts)

    rows = []
    x_pre = warm
    for rec in trace.records:
        hi = 2 * identify.gamma_init(inst, x_pre)
        window = identify.gamma_range_scan(inst, x_pre, target,
                                           (GAMMA_BRACKET_FLOOR, hi))
        lo, up = window if window is not None else (float("nan"),
                                                    float("nan"))
        dist = float(np.linalg.norm(np.asarray(x_pre, dtype=float) - xstar))
        rows.append((rec.k, rec.gamma, lo, up, rec.manifold, dist))
        x_pre = trace.xs[rec.k]
    return inst, rows


def run_gamma_window(exp, out_dir):
    """Bench wrapper: write the window table (or a skip record) to out_dir."""
    try:
        inst, rows = gamma_window_rows(exp)
    except ValueError as e:
        inst = registry.get_instance(exp["instance"], exp.get("instance_seed"))
        name = f"{inst.name}_gamma_window_skip.json"
        write_json(os.path.join(out_dir, name),
                   {"schema": BENCH_SCHEMA, "instance": inst.name,
                    "skipped": str(e)})
        return [name]
    name = f"{inst.name}_gamma_window.csv"
    write_csv(os.path.join(out_dir, name), GAMMA_WINDOW_HEADER, rows)
    return [name]


def run_bench(config, out_dir):
    """Dispatch the experiment matrix and write the checksum manifest."""
    cfg = _load_config(config)
    os.makedirs(out_dir, exist_ok=True)
    produced = []
    for exp in cfg.get("experiments", []):
        kind = exp.get("kind")
        if kind == "subopt":
            produced += run_subopt_vs_time(exp, out_dir)
        elif kind == "gamma_window":
            produced += run_gamma_window(exp, out_dir)
        else:
            raise ValueError(f"unknown experiment kind {kind!r}")
    return write_checksums(out_dir, produced)


# ---------------------------------------------------------------------------
# verification suite

def _check(name, passed, **detail):
    rec = {"name": name, "passed": bool(passed)}
    for k, v in detail.items():
        rec[k] = float(v) if isinstance(v, (np.floating, np.integer)) else v
    return rec


def _prox_inclusion_max(n_inputs, rng):
    worst_incl = 0.0
    worst_budget = 0.0
    for _ in range(n_inputs):
        m = int(rng.integers(2, 12))
        y = rng.standard_normal(m) * float(rng.uniform(0.5, 20))
        gamma = float(10 ** rng.uniform(-2, 2))
        out = nsfun.prox(nsfun.Max(m), y, gamma)
        u, cert = out.point, out.certificate
        w = (y - u) / gamma
        active = set(out.manifold.indices)
        viol = abs(float(np.sum(w)) - 1.0)
        viol = max(viol, float(-np.min(w)))
        inactive = [w[i] for i in range(m) if i not in active]
        if inactive:
            viol = max(viol, float(np.max(np.abs(inactive))))
        worst_incl = max(worst_incl, viol)
        budget = abs(sum(y[i] - cert.s for i in active) - gamma)
        worst_budget = max(
            worst_budget, budget / (1e-12 * (1 + float(np.linalg.norm(y)))))
    return worst_incl, worst_budget


def _prox_inclusion_lammax(n_inputs, rng):
    worst = 0.0
    for _ in range(n_inputs):
        m = int(rng.integers(2, 9))
        raw = rng.standard_normal((m, m)) * float(rng.uniform(0.5, 10))
        y = (raw + raw.T) / 2
        gamma = float(10 ** rng.uniform(-2, 2))
        out = nsfun.prox(nsfun.LamMax(m), y, gamma)
        u = out.point
        w_mat = (y - u) / gamma
        lam, E = numlin.sym_eigen(w_mat)
        viol = abs(float(np.trace(w_mat)) - 1.0)
        viol = max(viol, float(-lam[-1]))
        r = out.manifold.r
        lu, Eu = numlin.sym_eigen(u)
        P = Eu[:, :r] @ Eu[:, :r].T
        viol = max(viol, float(numlin.svd(w_mat - P @ w_mat @ P)[1][0]))
        worst = max(worst, viol)
    return worst


def _fd_jacobian(fun, jac, x, h):
    n = x.shape[0]
    cols = []
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        cols.append((np.asarray(fun(x + e)) - np.asarray(fun(x - e)))
                    / (2 * h))
    J_fd = np.stack(cols, axis=-1)
    J = np.asarray(jac(x))
    scale = max(1.0, float(np.max(np.abs(J))))
    return float(np.max(np.abs(J - J_fd))) / scale


def _verify_fd_checks(checks, rng):
    h = float(np.finfo(float).eps) ** (1 / 3)

    fam = registry.maxquad().map
    x = rng.standard_normal(fam.n)
    err = _fd_jacobian(fam.value, fam.jacobian, x, h)
    checks.append(_check("fd_jacobian_maxquad", err <= 1e-6, rel_error=err))

    pair = smoothmap.AnalyticPair()
    xp = rng.standard_normal(2)
    err = _fd_jacobian(pair.value, pair.jacobian, xp, h)
    checks.append(_check("fd_jacobian_pair", err <= 1e-6, rel_error=err))

    # smooth extension of the top-eigenvalue mean: gradient and H*v by FD
    m, r = 7, 2
    raw = rng.standard_normal((m, m))
    y = (raw + raw.T) / 2
    g = nsfun.LamMax(m)
    lam0, E0 = numlin.sym_eigen(y)
    desc = nsfun.EigMult(r, np.asarray(E0[:, :r]))
    ext = nsfun.smooth_extension(g, desc)
    grad_fd = np.zeros((m, m))
    for i in range(m):
        for j in range(m):
            e = np.zeros((m, m))
            e[i, j] = h
            e = (e + e.T) / 2
            grad_fd += ((ext.value(y + e) - ext.value(y - e)) / (2 * h)
                        ) * _sym_basis(m, i, j)
    gerr = float(np.max(np.abs(np.asarray(ext.gradient(y)) - grad_fd)))
    checks.append(_check("fd_gradient_eig_extension", gerr <= 1e-6,
                         abs_error=gerr))

    eta = rng.standard_normal((m, m))
    eta = (eta + eta.T) / 2
    hv = np.asarray(ext.hess_vec(y, eta))
    hv_fd = (np.asarray(ext.gradient(y + h * eta))
             - np.asarray(ext.gradient(y - h * eta))) / (2 * h)
    scale = max(1.0, float(np.max(np.abs(hv))))
    herr = float(np.max(np.abs(hv - hv_fd))) / scale
    checks.append(_check("fd_hessvec_eig_extension", herr <= 1e-6,
                         rel_error=herr))

    # defining map pulled back through the instance: h_k = h o c
    inst = registry.eigmax_affine()
    xw = inst.reference.x if inst.reference is not None \
        else registry.default_start(inst)
    _, M = identify.detect(inst, xw, 0.05)
    if M.p:
        err = _fd_jacobian(M.h, M.h_jacobian, np.asarray(xw, dtype=float), h)
        checks.append(_check("fd_jacobian_working_manifold", err <= 1e-6,
                             rel_error=err, manifold=M.descriptor.code()))


def _sym_basis(m, i, j):
    E = np.zeros((m, m))
    E[i, j] = 1.0
    return (E + E.T) / 2 if i != j else E


def _verify_ascent_curve(checks, rng):
    # equal-entry manifold in R^4, active pair {0, 1}
    desc_max = nsfun.MaxActive((0, 1))
    p_max = np.array([3.0, 3.0, 1.0, -2.0])
    rep = nsfun.check_normal_ascent(nsfun.Max(4), desc_max, p_max,
                                    n_samples=64, rng_seed=0)
    checks.append(_check("normal_ascent_max", rep.passed,
                         min_derivative=rep.min_derivative))

    m, r = 6, 2
    raw = rng.standard_normal((m, m))
    y0 = (raw + raw.T) / 2
    lam, E = numlin.sym_eigen(y0)
    desc_eig = nsfun.EigMult(r, np.asarray(E[:, :r]))
    p_eig = nsfun._project_manifold(nsfun.LamMax(m), desc_eig, y0)
    rep = nsfun.check_normal_ascent(nsfun.LamMax(m), desc_eig, p_eig,
                                    n_samples=64, rng_seed=0)
    checks.append(_check("normal_ascent_lammax", rep.passed,
                         min_derivative=rep.min_derivative))

    fix = registry.normal_ascent_fixture()
    p_fix = np.array([1.0, 0.0])
    rep = nsfun.check_normal_ascent(fix.outer, None, p_fix, n_samples=8,
                                    rng_seed=0)
    checks.append(_check("normal_ascent_counterexample_fails",
                         not rep.passed, min_derivative=rep.min_derivative))

    y_near = p_max + np.array([1e-3, -1e-3, 0.0, 0.0])
    rep = nsfun.check_curve_property(nsfun.Max(4), desc_max, y_near,
                                     rng_seed=0)
    checks.append(_check("curve_property_max",
                         rep.passed and rep.max_excess == 0.0,
                         max_excess=rep.max_excess))

    y_eig = p_eig + 1e-3 * _sym_rand(rng, m)
    rep = nsfun.check_curve_property(nsfun.LamMax(m), desc_eig, y_eig,
                                     rng_seed=0)
    expo = rep.fitted_exponent
    checks.append(_check("curve_property_lammax",
                         rep.passed and expo is not None and expo >= 1.9,
                         fitted_exponent=expo, max_excess=rep.max_excess))


def _sym_rand(rng, m):
    raw = rng.standard_normal((m, m))
    return (raw + raw.T) / 2


def _verify_transversality(checks):
    for name in ("maxquad", "eigmax"):
        inst = registry.get_instance(name)
        if inst.reference is None:
            checks.append(_check(f"transversality_{name}", False,
                                 skipped="no reference solution"))
            continue
        x = inst.reference.x
        M = identify.WorkingManifold(inst, inst.reference.descriptor)
        rep = identify.transversality_check(inst, x, M)
        checks.append(_check(f"transversality_{name}", rep.passed,
                             sigma_min=rep.sigma_min))

    # duplicated inner pieces make the constraint Jacobian rank deficient
    base = registry.maxquad().map
    dup = smoothmap.QuadraticFamily(
        np.stack([base.A[0], base.A[0]]), np.stack([base.b[0], base.b[0]]),
        np.array([base.c0[0], base.c0[0]]))
    inst = smoothmap.CompositeInstance("dup_fixture", dup, nsfun.Max(2),
                                       meta={"x0": [0.0] * base.n})
    x = np.full(base.n, 0.3)
    M = identify.WorkingManifold(inst, nsfun.MaxActive((0, 1)))
    rep = identify.transversality_check(inst, x, M)
    checks.append(_check("transversality_degenerate_fails", not rep.passed,
                         sigma_min=rep.sigma_min))


def run_verify(full=False):
    """Execute the checker suite; returns a machine-readable report."""
    rng = np.random.default_rng(np.random.Philox(2024))
    n_inputs = 1000 if full else 300
    checks = []

    incl, budget = _prox_inclusion_max(n_inputs, rng)
    checks.append(_check("prox_inclusion_max", incl <= 1e-10,
                         worst_violation=incl, n_inputs=n_inputs))
    checks.append(_check("prox_budget_max", budget <= 1.0,
                         worst_scaled_violation=budget, n_inputs=n_inputs))
    incl = _prox_inclusion_lammax(n_inputs // 2, rng)
    checks.append(_check("prox_inclusion_lammax", incl <= 1e-10,
                         worst_violation=incl, n_inputs=n_inputs // 2))

    _verify_fd_checks(checks, rng)
    _verify_ascent_curve(checks, rng)
    _verify_transversality(checks)

    if full:
        inst = registry.get_instance("eigmax_full")
        warm = baselines.warm_start(inst, iters=40)
        trace = driver.solve(inst, warm, driver.SolveOptions(max_iter=80))
        desc = trace.descriptor_final
        checks.append(_check(
            "eigmax_paper_solve", trace.status == "Converged",
            status=trace.status, iterations=len(trace.records),
            descriptor=desc.code() if desc is not None else "",
            f_final=float(trace.f_final)))

    return {"schema": VERIFY_SCHEMA, "full": bool(full),
            "passed": all(c["passed"] for c in checks), "checks": checks}
