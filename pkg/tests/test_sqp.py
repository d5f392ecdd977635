"""The equality-constrained SQP step and its second-order correction."""

import numpy as np
import pytest

from proxsqp import identify, nsfun, numlin, smoothmap, sqp
from proxsqp.errors import IndefiniteReducedHessian


class TestMultiplier:
    def test_zero_gradient(self):
        lam = sqp.multiplier_ls(np.zeros(3), np.array([[1.0, 1.0, 0.0]]))
        assert np.array_equal(lam, np.zeros(1))

    def test_aligned_gradient(self):
        lam = sqp.multiplier_ls(np.array([1.0, 1.0]),
                                np.array([[1.0, 1.0]]))
        assert lam[0] == pytest.approx(-1.0, abs=1e-14)

    def test_orthogonal_gradient(self):
        lam = sqp.multiplier_ls(np.array([1.0, -1.0]),
                                np.array([[1.0, 1.0]]))
        assert abs(lam[0]) <= 1e-14

    def test_empty_rows(self):
        assert sqp.multiplier_ls(np.ones(4), np.zeros((0, 4))).shape == (0,)

    def test_closed_form_on_chart(self, maxquad):
        # full row rank: lam = -(Jh Jh^T)^{-1} Jh grad
        x = maxquad.reference.x
        wm = identify.WorkingManifold(maxquad, nsfun.MaxActive((1, 2, 3, 4)))
        Jh = wm.h_jacobian(x)
        g = wm.ftilde_gradient(x)
        lam = sqp.multiplier_ls(g, Jh)
        closed = -np.linalg.solve(Jh @ Jh.T, Jh @ g)
        assert np.abs(lam - closed).max() <= 1e-12


class TestDirection:
    def test_hand_fixture(self):
        # min d^T d  s.t.  [1 1] d = 1  ->  d = (1/2, 1/2)
        d, min_eig, kkt = sqp.sqp_direction(
            np.zeros(2), np.zeros(2), 2 * np.eye(2),
            np.array([-1.0]), np.array([[1.0, 1.0]]))
        assert np.abs(d - 0.5).max() <= 1e-14
        assert min_eig == pytest.approx(2.0)
        assert kkt <= 1e-13

    def test_zero_at_kkt_point(self):
        d, _, kkt = sqp.sqp_direction(
            np.array([0.5, 0.5]), np.array([1.0, 1.0]), 2 * np.eye(2),
            np.array([0.0]), np.array([[1.0, 1.0]]))
        assert np.abs(d).max() <= 1e-14
        assert kkt <= 1e-13

    def test_unconstrained_newton(self):
        H = np.diag([2.0, 4.0])
        d, min_eig, kkt = sqp.sqp_direction(
            np.zeros(2), np.array([2.0, 4.0]), H,
            np.zeros(0), np.zeros((0, 2)))
        assert np.allclose(d, [-1.0, -1.0], atol=1e-14)
        assert min_eig == pytest.approx(2.0)
        assert kkt <= 1e-13

    def test_one_step_exactness(self):
        # quadratic objective, affine constraint: one step is exact
        rng = np.random.default_rng(12)
        x = rng.standard_normal(2) * 3
        grad = 2 * x
        d, _, _ = sqp.sqp_direction(
            x, grad, 2 * np.eye(2),
            np.array([x.sum() - 1.0]), np.array([[1.0, 1.0]]))
        assert np.abs((x + d) - 0.5).max() <= 1e-12

    def test_indefinite_raises(self):
        with pytest.raises(IndefiniteReducedHessian) as excinfo:
            sqp.sqp_direction(
                np.zeros(2), np.array([1.0, 0.0]), -np.eye(2),
                np.array([0.0]), np.array([[1.0, 1.0]]))
        assert excinfo.value.min_eig == pytest.approx(-1.0)


class TestCorrection:
    def test_affine_chart_zero_after_exact_step(self):
        # linear inner map: h is affine, so classic correction vanishes
        fam = smoothmap.QuadraticFamily(
            np.zeros((2, 2, 2)), np.array([[1.0, 0.0], [0.0, 1.0]]),
            np.zeros(2))
        inst = smoothmap.CompositeInstance("lin", fam, nsfun.Max(2))
        wm = identify.WorkingManifold(inst, nsfun.MaxActive((0, 1)))
        x = np.array([0.7, 0.7])
        Jh = wm.h_jacobian(x)
        d, _, _ = sqp.sqp_direction(x, wm.ftilde_gradient(x), np.eye(2),
                                    wm.h(x), Jh)
        corr = sqp.second_order_correction(wm, x, d, Jh, "classic")
        assert np.abs(corr).max() <= 1e-14

    def test_literal_zero_on_manifold(self, maxquad):
        x = maxquad.reference.x
        wm = identify.WorkingManifold(maxquad, nsfun.MaxActive((1, 2, 3, 4)))
        Jh = wm.h_jacobian(x)
        d = 1e-2 * numlin.nullspace_basis(Jh)[:, 0]
        corr = sqp.second_order_correction(wm, x, d, Jh, "literal")
        assert np.abs(corr).max() <= 1e-8

    def test_classic_kills_quadratic_residual(self, maxquad):
        x = maxquad.reference.x
        wm = identify.WorkingManifold(maxquad, nsfun.MaxActive((1, 2, 3, 4)))
        Jh = wm.h_jacobian(x)
        d = 1e-2 * numlin.nullspace_basis(Jh)[:, 0]
        before = np.abs(wm.h(x + d)).max()
        corr = sqp.second_order_correction(wm, x, d, Jh, "classic")
        after = np.abs(wm.h(x + d + corr)).max()
        assert before > 1e-7  # tangent step leaves a genuine residual
        assert after <= 0.05 * before

    def test_correction_in_row_space(self, maxquad):
        x = maxquad.reference.x
        wm = identify.WorkingManifold(maxquad, nsfun.MaxActive((1, 2, 3, 4)))
        Jh = wm.h_jacobian(x)
        d = 1e-2 * numlin.nullspace_basis(Jh)[:, 1]
        corr = sqp.second_order_correction(wm, x, d, Jh, "classic")
        Z = numlin.nullspace_basis(Jh)
        assert np.abs(Z.T @ corr).max() <= 1e-12

    def test_unknown_rule_raises(self, maxquad):
        wm = identify.WorkingManifold(maxquad, nsfun.MaxActive((1,)))
        with pytest.raises(ValueError):
            sqp.second_order_correction(wm, np.zeros(10), np.zeros(10),
                                        np.zeros((0, 10)), "midpoint")


class TestLagrangianHessian:
    def test_weighted_sum_formula(self, maxquad):
        idx = (1, 2, 3, 4)
        wm = identify.WorkingManifold(maxquad, nsfun.MaxActive(idx))
        lam = np.array([0.3, -0.1, 0.7])
        x = maxquad.reference.x
        H = sqp.lagrangian_hessian(maxquad, wm, x, lam)
        w = np.zeros(5)
        for i in idx:
            w[i] = 0.25
        for j, l in enumerate(lam):
            w[idx[j]] += l
            w[idx[-1]] -= l
        expected = np.einsum("i,ijk->jk", w, maxquad.map.A)
        assert np.abs(H - expected).max() <= 1e-12

    def test_linear_map_zero(self):
        fam = smoothmap.QuadraticFamily(
            np.zeros((3, 2, 2)), np.arange(6.0).reshape(3, 2), np.zeros(3))
        inst = smoothmap.CompositeInstance("lin3", fam, nsfun.Max(3))
        wm = identify.WorkingManifold(inst, nsfun.MaxActive((0, 2)))
        H = wm.lagrangian_hessian(np.ones(2), np.array([0.0]))
        assert np.array_equal(H, np.zeros((2, 2)))

    def test_eig_chart_fd(self, eigmax):
        # value-based second differences of L = F~ + <lam, h> at the chart
        # anchor; the chart must be frozen at the evaluation point, exactly
        # as the solver freezes it at each detection
        rng = np.random.default_rng(13)
        x = eigmax.reference.x
        y = smoothmap.eval_map(eigmax.map, x)
        _, E = numlin.sym_eigen(y)
        wm = identify.WorkingManifold(eigmax, nsfun.EigMult(2, E[:, :2]))
        lam = 0.1 * rng.standard_normal(wm.p)

        def L(z):
            return float(wm.ftilde(z) + lam @ wm.h(z))

        H = wm.lagrangian_hessian(x, lam)
        h = np.finfo(float).eps ** 0.25
        for a, b in [(0, 0), (0, 1), (2, 4)]:
            ea, eb = np.zeros(6), np.zeros(6)
            ea[a], eb[b] = h, h
            fd = (L(x + ea + eb) - L(x + ea - eb)
                  - L(x - ea + eb) + L(x - ea - eb)) / (4 * h * h)
            assert H[a, b] == pytest.approx(fd, abs=1e-5 * (1 + abs(fd)))
