"""Dense linear algebra layer: eigen, nullspace, least squares."""

import mpmath
import numpy as np
import pytest

from proxsqp import numlin
from proxsqp.errors import RankDeficient
from proxsqp.precision import extended


def _rand_sym(rng, n):
    A = rng.standard_normal((n, n))
    return (A + A.T) / 2


class TestSymEigen:
    def test_diagonal(self):
        lam, E = numlin.sym_eigen(np.diag([2.0, 0.0]))
        assert np.allclose(lam, [2.0, 0.0])
        assert np.allclose(np.abs(E), np.eye(2))

    def test_offdiag_pair(self):
        lam, _ = numlin.sym_eigen(np.array([[0.0, 1.0], [1.0, 0.0]]))
        assert np.allclose(lam, [1.0, -1.0], atol=1e-14)

    def test_descending_and_reconstruction(self):
        rng = np.random.default_rng(1)
        S = _rand_sym(rng, 5)
        lam, E = numlin.sym_eigen(S)
        assert np.all(lam[:-1] >= lam[1:])
        assert np.allclose(E @ np.diag(lam) @ E.T, S, atol=1e-12)

    def test_reconstruction_sweep(self):
        # spec-level bound: relative max-norm residual <= 1e-12 over seeded
        # symmetric matrices up to m = 50
        rng = np.random.default_rng(123)
        worst = 0.0
        for _ in range(300):
            n = int(rng.integers(2, 51))
            S = _rand_sym(rng, n)
            lam, E = numlin.sym_eigen(S)
            resid = np.abs(E @ np.diag(lam) @ E.T - S).max()
            worst = max(worst, resid / np.abs(S).max())
        assert worst <= 1e-12

    def test_sign_convention_deterministic(self):
        rng = np.random.default_rng(9)
        S = _rand_sym(rng, 6)
        lam1, E1 = numlin.sym_eigen(S)
        lam2, E2 = numlin.sym_eigen(S.copy())
        assert np.array_equal(lam1, lam2)
        assert np.array_equal(E1, E2)

    def test_extended_precision_path(self):
        with mpmath.workdps(50):
            S = extended(50).asarray(np.array([[2.0, 1.0], [1.0, 2.0]]))
            lam, E = numlin.sym_eigen(S)
            assert lam[0] > lam[1]
            resid = max(abs(x) for x in
                        np.asarray(E @ np.diag(lam) @ E.T - S).ravel())
            assert resid < mpmath.mpf(10) ** (-40)


class TestNullspaceBasis:
    def test_one_row(self):
        Z = numlin.nullspace_basis(np.array([[1.0, 1.0]]))
        assert Z.shape == (2, 1)
        v = Z[:, 0]
        assert abs(abs(v[0]) - 1 / np.sqrt(2)) < 1e-12
        assert abs(v[0] + v[1]) < 1e-12

    def test_identity_rows(self):
        Z = numlin.nullspace_basis(np.eye(3))
        assert Z.shape == (3, 0)

    def test_coordinate_kernel(self):
        Z = numlin.nullspace_basis(np.array([[1.0, 0.0, 0.0]]))
        assert Z.shape == (3, 2)
        assert np.allclose(Z[0], 0.0, atol=1e-12)
        assert np.allclose(Z.T @ Z, np.eye(2), atol=1e-12)

    def test_orthonormal_and_annihilated(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            p = int(rng.integers(1, 5))
            n = int(rng.integers(p + 1, 9))
            A = rng.standard_normal((p, n))
            Z = numlin.nullspace_basis(A)
            assert Z.shape == (n, n - p)
            assert np.allclose(Z.T @ Z, np.eye(n - p), atol=1e-12)
            assert np.abs(A @ Z).max() <= 1e-10 * max(np.abs(A).max(), 1.0)

    def test_rank_deficient_raises(self):
        A = np.array([[1.0, 2.0], [2.0, 4.0]])
        with pytest.raises(RankDeficient):
            numlin.nullspace_basis(A)

    def test_more_rows_than_columns_raises(self):
        # over-constrained charts report rank deficiency so the driver can
        # treat them as a recoverable detection failure
        A = np.ones((4, 2))
        with pytest.raises(RankDeficient):
            numlin.nullspace_basis(A)


class TestLstsqMinNorm:
    def test_identity(self):
        b = np.array([3.0, -1.0])
        assert np.allclose(numlin.lstsq_min_norm(np.eye(2), b), b)

    def test_overdetermined(self):
        A = np.array([[1.0], [1.0]])
        x = numlin.lstsq_min_norm(A, np.array([1.0, 3.0]))
        assert np.allclose(x, [2.0], atol=1e-12)

    def test_min_norm_on_line(self):
        A = np.array([[1.0, 1.0]])
        x = numlin.lstsq_min_norm(A, np.array([2.0]))
        assert np.allclose(x, [1.0, 1.0], atol=1e-12)
