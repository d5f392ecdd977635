"""Outer functions: prox certificates, defining maps, extensions, checkers."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from proxsqp import nsfun, numlin, registry


def _seeded_orthogonal(seed, n):
    rng = np.random.default_rng(seed)
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    return Q


class TestValues:
    def test_max(self):
        assert nsfun.value(nsfun.Max(3), np.array([3.0, 2.0, 1.0])) == 3.0

    def test_lammax_diagonal(self):
        assert nsfun.value(nsfun.LamMax(2), np.diag([2.0, 0.0])) == \
            pytest.approx(2.0)

    def test_lammax_offdiag(self):
        Y = np.array([[0.0, 1.0], [1.0, 0.0]])
        assert nsfun.value(nsfun.LamMax(2), Y) == pytest.approx(1.0)


def _max_inclusion_residuals(y, out):
    """Prop-2.1 style optimality certificate for the max prox.

    (y - p)/gamma must be a simplex vector supported on the active set.
    """
    w = (np.asarray(y) - out.point) / out.gamma
    active = set(out.manifold.indices)
    off = max((abs(w[i]) for i in range(len(y)) if i not in active),
              default=0.0)
    return abs(w.sum() - 1.0), -min(w[i] for i in active), off


class TestProxMax:
    def test_tied_pair(self):
        out = nsfun.prox_max(np.array([0.0, 0.0]), 1.0)
        assert np.allclose(out.point, [-0.5, -0.5])
        assert out.manifold.indices == (0, 1)
        assert out.certificate.s == pytest.approx(-0.5)

    def test_merge_two(self):
        out = nsfun.prox_max(np.array([3.0, 2.0, 1.0]), 2.0)
        assert np.allclose(out.point, [1.5, 1.5, 1.0])
        assert out.manifold.indices == (0, 1)
        for resid in _max_inclusion_residuals([3.0, 2.0, 1.0], out):
            assert resid <= 1e-12

    def test_singleton(self):
        out = nsfun.prox_max(np.array([3.0, 2.0, 1.0]), 0.5)
        assert np.allclose(out.point, [2.5, 2.0, 1.0])
        assert out.manifold.indices == (0,)

    def test_merge_all(self):
        out = nsfun.prox_max(np.array([3.0, 2.0, 1.0]), 3.5)
        assert out.manifold.indices == (0, 1, 2)
        assert out.certificate.s == pytest.approx((6.0 - 3.5) / 3)
        assert abs(sum(v - out.certificate.s for v in (3.0, 2.0, 1.0))
                   - 3.5) <= 1e-12

    def test_unsorted_input_indices(self):
        out = nsfun.prox_max(np.array([1.0, 3.0, 2.0]), 2.0)
        assert out.manifold.indices == (1, 2)
        assert np.allclose(out.point, [1.0, 1.5, 1.5])

    def test_rejects_nonpositive_gamma(self):
        with pytest.raises(ValueError):
            nsfun.prox_max(np.array([1.0, 0.0]), 0.0)

    @given(st.integers(2, 9), st.integers(0, 10 ** 6),
           st.floats(-6.0, 3.0))
    @settings(max_examples=120, deadline=None)
    def test_inclusion_property(self, m, seed, log_gamma):
        rng = np.random.default_rng(seed)
        y = rng.standard_normal(m) * 10 ** rng.uniform(-1, 2)
        gamma = 10.0 ** log_gamma
        out = nsfun.prox_max(y, gamma)
        # forming w = (y - p)/gamma cancels catastrophically once gamma is
        # far below ||y||, so the certificate bound carries that ratio
        tol = 1e-10 + np.finfo(float).eps * np.abs(y).sum() / gamma
        for resid in _max_inclusion_residuals(y, out):
            assert resid <= tol
        # point lies on the certified manifold exactly
        vals = {repr(float(out.point[i])) for i in out.manifold.indices}
        assert len(vals) == 1

    @given(st.integers(0, 10 ** 6))
    @settings(max_examples=60, deadline=None)
    def test_structure_monotone_in_gamma(self, seed):
        rng = np.random.default_rng(seed)
        y = rng.standard_normal(6)
        sizes = [len(nsfun.prox_max(y, g).manifold.indices)
                 for g in np.logspace(-8, 3, 50)]
        assert sizes == sorted(sizes)
        # active sets are nested, not merely growing in size
        prev = set()
        for g in np.logspace(-8, 3, 50):
            cur = set(nsfun.prox_max(y, g).manifold.indices)
            assert prev <= cur
            prev = cur


class TestProxLamMax:
    def test_single_eig(self):
        out = nsfun.prox_lammax(np.diag([2.0, 0.0]), 1.0)
        assert np.allclose(out.point, np.diag([1.0, 0.0]), atol=1e-14)
        assert out.manifold.r == 1

    def test_merged_pair(self):
        out = nsfun.prox_lammax(np.diag([2.0, 0.0]), 2.5)
        assert np.allclose(out.point, np.diag([-0.25, -0.25]), atol=1e-14)
        assert out.manifold.r == 2

    def test_orthogonal_invariance(self):
        Q = _seeded_orthogonal(8, 3)
        Y = Q @ np.diag([3.0, 2.0, 1.0]) @ Q.T
        out = nsfun.prox_lammax((Y + Y.T) / 2, 2.0)
        expect = Q @ np.diag([1.5, 1.5, 1.0]) @ Q.T
        assert np.abs(out.point - expect).max() <= 1e-10
        assert out.manifold.r == 2

    def test_inclusion(self):
        rng = np.random.default_rng(21)
        for _ in range(25):
            m = int(rng.integers(2, 8))
            A = rng.standard_normal((m, m))
            Y = (A + A.T) / 2
            gamma = 10.0 ** rng.uniform(-2, 2)
            out = nsfun.prox_lammax(Y, gamma)
            W = (Y - out.point) / gamma
            lam, E = numlin.sym_eigen(out.point)
            r = out.manifold.r
            U = E[:, :r]
            assert abs(np.trace(W) - 1.0) <= 1e-10
            assert numlin.sym_eigen(W)[0][-1] >= -1e-10
            assert np.abs(W - U @ (U.T @ W @ U) @ U.T).max() <= 1e-8


class TestDefiningMaps:
    def test_max_on_manifold(self):
        h = nsfun.defining_map_max(nsfun.MaxActive((0, 1)), 3)
        assert np.allclose(h.value(np.array([5.0, 5.0, 0.0])), [0.0])

    def test_max_off_manifold(self):
        h = nsfun.defining_map_max(nsfun.MaxActive((0, 1)), 3)
        assert np.allclose(h.value(np.array([5.0, 4.0, 0.0])), [1.0])

    def test_eig_equal_block(self):
        h = nsfun.defining_map_eig(2, np.eye(3)[:, :2], 3)
        out = h.value(np.diag([3.0, 3.0, 1.0]))
        assert np.allclose(out, np.zeros(2), atol=1e-14)

    def test_eig_offdiag_and_gap(self):
        h = nsfun.defining_map_eig(2, np.eye(3)[:, :2], 3)
        out = h.value(np.diag([3.0, 2.5, 1.0]))
        # packing order: off-diagonal entries first, then diagonal
        # differences against the last block entry
        assert np.allclose(out, [0.0, 0.5], atol=1e-14)

    def test_zero_iff_equal_top_eigs(self):
        h = nsfun.defining_map_eig(2, np.eye(3)[:, :2], 3)
        Q = _seeded_orthogonal(3, 3)
        Y = Q @ np.diag([4.0, 4.0, -1.0]) @ Q.T
        # reference basis must track the subspace: rebuild at Y
        lam, E = numlin.sym_eigen((Y + Y.T) / 2)
        h2 = nsfun.defining_map_eig(2, E[:, :2], 3)
        assert np.abs(h2.value((Y + Y.T) / 2)).max() <= 1e-12

    def test_eig_second_contraction_fd(self):
        # <W, D^2 B[eta_a, eta_b]> against value-based second differences
        # at an exactly degenerate anchor where the alignment is identity
        rng = np.random.default_rng(0)
        m, r = 6, 2
        Q, _ = np.linalg.qr(rng.standard_normal((m, m)))
        Y0 = Q @ np.diag([3.0, 3.0, 1.5, 0.7, -0.2, -1.1]) @ Q.T
        Y0 = (Y0 + Y0.T) / 2
        _, E = numlin.sym_eigen(Y0)
        dm = nsfun.defining_map_eig(r, E[:, :r], m)
        W = rng.standard_normal((r, r))
        W = (W + W.T) / 2

        def phi(Y):
            U, _, _ = dm.aligned_basis(Y)
            B = U.T @ Y @ U
            return float((W * (B + B.T) / 2).sum())

        etas = []
        for _ in range(3):
            e = rng.standard_normal((m, m))
            etas.append((e + e.T) / 2)
        H = dm.second_contraction(Y0, W, etas)
        h = np.finfo(float).eps ** 0.25
        for a in range(3):
            for b in range(3):
                fd = (phi(Y0 + h * etas[a] + h * etas[b])
                      - phi(Y0 + h * etas[a] - h * etas[b])
                      - phi(Y0 - h * etas[a] + h * etas[b])
                      + phi(Y0 - h * etas[a] - h * etas[b])) / (4 * h * h)
                assert H[a, b] == pytest.approx(fd, abs=1e-5 * (1 + abs(fd)))


class TestSmoothExtensions:
    def test_max_agreement_on_manifold(self):
        ext = nsfun.smooth_extension(nsfun.Max(3), nsfun.MaxActive((0, 1)))
        y = np.array([4.0, 4.0, 0.0])
        assert ext.value(y) == pytest.approx(4.0)
        assert np.allclose(ext.gradient(y), [0.5, 0.5, 0.0])

    def test_lammax_hand_case(self):
        ext = nsfun.smooth_extension(nsfun.LamMax(3),
                                     nsfun.EigMult(2, np.eye(3)[:, :2]))
        Y = np.diag([3.0, 3.0, 0.0])
        assert ext.value(Y) == pytest.approx(3.0)
        assert np.allclose(ext.gradient(Y), np.diag([0.5, 0.5, 0.0]),
                           atol=1e-12)

    def test_lammax_hessvec_fd(self):
        rng = np.random.default_rng(5)
        m, r = 5, 2
        A = rng.standard_normal((m, m))
        Y = (A + A.T) / 2
        lam, E = numlin.sym_eigen(Y)
        desc = nsfun.EigMult(r, E[:, :r])
        ext = nsfun.smooth_extension(nsfun.LamMax(m), desc)
        eta = rng.standard_normal((m, m))
        eta = (eta + eta.T) / 2
        h = np.finfo(float).eps ** (1 / 3)
        fd = (ext.gradient(Y + h * eta) - ext.gradient(Y - h * eta)) / (2 * h)
        hv = ext.hess_vec(Y, eta)
        assert np.abs(hv - fd).max() <= 1e-6 * (1 + np.abs(fd).max())


class TestRiemannianGradient:
    def test_pair_whole_space(self):
        # projection of the extension gradient onto the tangent of the
        # diagonal line is the gradient itself
        g = nsfun.riemannian_gradient(nsfun.Max(2), nsfun.MaxActive((0, 1)),
                                      np.array([4.0, 4.0]))
        assert np.allclose(g, [0.5, 0.5])

    def test_pair_with_spectator(self):
        g = nsfun.riemannian_gradient(nsfun.Max(3), nsfun.MaxActive((0, 1)),
                                      np.array([4.0, 4.0, 0.0]))
        assert np.allclose(g, [0.5, 0.5, 0.0])

    def test_orthogonal_to_defining_rows(self):
        desc = nsfun.MaxActive((0, 2, 3))
        p = np.array([2.0, -1.0, 2.0, 2.0, 0.0])
        g = nsfun.riemannian_gradient(nsfun.Max(5), desc, p)
        J = nsfun.defining_map_max(desc, 5).jacobian(p)
        assert np.abs(J @ g).max() <= 1e-10

    def test_full_multiplicity_is_scaled_identity(self):
        m = 3
        desc = nsfun.EigMult(m, np.eye(m))
        G = nsfun.riemannian_gradient(nsfun.LamMax(m), desc,
                                      2.0 * np.eye(m))
        assert np.allclose(G, np.eye(m) / m, atol=1e-12)

    def test_off_manifold_rejected(self):
        with pytest.raises(ValueError):
            nsfun.riemannian_gradient(nsfun.Max(2), nsfun.MaxActive((0, 1)),
                                      np.array([4.0, 3.0]))


class TestPropertyCheckers:
    def test_ascent_max_pair(self):
        rep = nsfun.check_normal_ascent(nsfun.Max(4), nsfun.MaxActive((0, 1)),
                                        np.array([3.0, 3.0, 1.0, -2.0]))
        assert rep.passed
        assert rep.min_derivative > 0

    def test_ascent_lammax(self):
        rng = np.random.default_rng(2024)
        m, r = 6, 2
        raw = rng.standard_normal((m, m))
        y0 = (raw + raw.T) / 2
        _, E = numlin.sym_eigen(y0)
        desc = nsfun.EigMult(r, np.asarray(E[:, :r]))
        p = nsfun._project_manifold(nsfun.LamMax(m), desc, y0)
        rep = nsfun.check_normal_ascent(nsfun.LamMax(m), desc, p)
        assert rep.passed

    def test_ascent_counterexample_fails(self):
        fix = registry.normal_ascent_fixture()
        rep = nsfun.check_normal_ascent(fix.outer, None,
                                        np.array([1.0, 0.0]), n_samples=8)
        assert not rep.passed
        assert rep.min_derivative < 0

    def test_curve_max_exactly_affine(self):
        desc = nsfun.MaxActive((0, 1))
        y = np.array([3.0, 3.0, 1.0, -2.0]) + \
            np.array([1e-3, -1e-3, 0.0, 0.0])
        rep = nsfun.check_curve_property(nsfun.Max(4), desc, y)
        assert rep.passed
        assert rep.max_excess == 0.0

    def test_curve_lammax_exponent(self):
        rng = np.random.default_rng(77)
        m, r = 6, 2
        raw = rng.standard_normal((m, m))
        y0 = (raw + raw.T) / 2
        _, E = numlin.sym_eigen(y0)
        desc = nsfun.EigMult(r, np.asarray(E[:, :r]))
        p = nsfun._project_manifold(nsfun.LamMax(m), desc, y0)
        bend = rng.standard_normal((m, m))
        y = p + 1e-3 * (bend + bend.T) / 2
        rep = nsfun.check_curve_property(nsfun.LamMax(m), desc, y)
        assert rep.passed
        assert rep.fitted_exponent is not None
        assert rep.fitted_exponent >= 1.9
