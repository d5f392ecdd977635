"""Shared fixtures: instances, warm starts, solved traces, bench artifacts.

Expensive artifacts are session-scoped so the acceptance tests and the
unit tests share one solve/bench run each.
"""

import math

import numpy as np
import pytest

from proxsqp import baselines, bench, driver, registry


@pytest.fixture(scope="session")
def maxquad():
    return registry.maxquad()


@pytest.fixture(scope="session")
def eigmax():
    return registry.get_instance("eigmax")


@pytest.fixture(scope="session")
def pair_demo():
    return registry.pair_demo()


@pytest.fixture(scope="session")
def maxquad_warm50(maxquad):
    """The suboptimality-protocol start: 50 subgradient-BFGS iterations."""
    return baselines.warm_start(maxquad, iters=50)


@pytest.fixture(scope="session")
def eigmax_warm10(eigmax):
    return baselines.warm_start(eigmax, iters=10)


@pytest.fixture(scope="session")
def maxquad_trace(maxquad, maxquad_warm50):
    return driver.solve(maxquad, maxquad_warm50, driver.SolveOptions())


@pytest.fixture(scope="session")
def eigmax_trace(eigmax, eigmax_warm10):
    return driver.solve(eigmax, eigmax_warm10, driver.SolveOptions())


@pytest.fixture(scope="session")
def bench_dir(tmp_path_factory):
    """One default-config bench run shared by format and acceptance tests."""
    out = tmp_path_factory.mktemp("bench")
    bench.run_bench("default", str(out))
    return out


@pytest.fixture(scope="session")
def verify_report():
    return bench.run_verify()


def loglog_slope(pairs):
    """Least-squares slope of log(y) against log(x) over (x, y) pairs."""
    lx = [math.log(x) for x, _ in pairs]
    ly = [math.log(y) for _, y in pairs]
    n = len(pairs)
    mx, my = sum(lx) / n, sum(ly) / n
    return (sum((a - mx) * (b - my) for a, b in zip(lx, ly))
            / sum((a - mx) ** 2 for a in lx))


def dist_to(x, x_star):
    return float(np.linalg.norm(np.asarray(x, dtype=float) - x_star))
