"""Structure detection and the gamma machinery.

Detection runs the prox of the outer function at the intermediate point
c(x) and reads the structure certificate; the detected intermediate-space
manifold is pulled back to the input space as a working manifold carrying
the constraint map h = h_inter o c, the smooth extension F~ = g~ o c, and
the Lagrangian-Hessian oracle the SQP step consumes.
"""

from dataclasses import dataclass

import numpy as np

from . import nsfun, numlin, smoothmap
from .precision import precision_of, vec_norm2, fro_norm

GAMMA_SEED_SCALE = 1e-6
BISECT_REL_TOL = 1e-6
DOUBLING_LIMIT = 200


class WorkingManifold:
    """Input-space view of a detected intermediate-space manifold.

    Carries h(x) = h_inter(c(x)) with its Jacobian, the smooth extension
    F~(x) = g~(c(x)) with gradient, and the assembled Hessian of the
    Lagrangian F~ + <lam, h>.  Charts are frozen at the detection point;
    Jacobians are exact there, which is the only place the SQP step ever
    evaluates them.
    """

    def __init__(self, instance, descriptor):
        self.instance = instance
        self.descriptor = descriptor
        m = instance.outer.m
        self.defmap = nsfun.defining_map(descriptor, m)
        self.extension = nsfun.smooth_extension(instance.outer, descriptor)
        self.p = self.defmap.p

    def _y(self, x):
        return smoothmap.eval_map(self.instance.map, x)

    def h(self, x):
        return self.defmap.value(self._y(x))

    def h_jacobian(self, x):
        y = self._y(x)
        D = smoothmap.differential(self.instance.map, x)
        G = self.defmap.gradient_mats(y)
        prec = precision_of(np.asarray(x))
        n = self.instance.map.n
        J = prec.zeros((self.p, n))
        for j in range(self.p):
            J[j] = D.adjoint(G[j])
        return J

    def ftilde(self, x):
        return self.extension.value(self._y(x))

    def ftilde_gradient(self, x):
        y = self._y(x)
        D = smoothmap.differential(self.instance.map, x)
        return D.adjoint(self.extension.gradient(y))

    def lagrangian_hessian(self, x, lam):
        """Hessian of F~ + <lam, h> at x by the chain rule.

        D^2(phi o c)[u,v] = D^2 phi[Dc u, Dc v] + <grad phi, D^2 c[u,v]>;
        the first term vanishes for max charts (g~ and h affine in y), the
        second for affine matrix maps.
        """
        x = np.asarray(x)
        y = self._y(x)
        prec = precision_of(x)
        lam = prec.asarray(np.asarray(lam)) if self.p else prec.zeros(0)
        if isinstance(self.instance.outer, nsfun.Max):
            idx = self.descriptor.indices
            w = prec.zeros(self.instance.outer.m)
            share = prec.scalar(1) / len(idx)
            for i in idx:
                w[i] = share
            last = idx[-1]
            for j in range(self.p):
                w[idx[j]] = w[idx[j]] + lam[j]
                w[last] = w[last] - lam[j]
            return self.instance.map.hessian_weighted(x, w)
        r = self.descriptor.r
        W = _weight_total(r, lam, prec)
        D = smoothmap.differential(self.instance.map, x)
        etas = [D.apply(_basis_vec(len(x), a, prec)) for a in range(len(x))]
        H = self.defmap.second_contraction(y, W, etas)
        _, E = self.extension._eigen_checked(y)
        U0 = E[:, :r]
        W_amb = U0 @ W @ U0.T
        return H + self.instance.map.hessian_weighted(x, (W_amb + W_amb.T) / 2)


def _basis_vec(n, a, prec):
    e = prec.zeros(n)
    e[a] = prec.scalar(1)
    return e


def _weight_total(r, lam, prec):
    """I/r plus the multiplier-weighted output gradients of the block map.

    The packing order matches the defining map: off-diagonal entries (i<j)
    row-major, then diagonal differences against entry r-1.
    """
    W = prec.eye(r) / r
    k = 0
    half = prec.scalar(0.5)
    for i in range(r):
        for j in range(i + 1, r):
            W[i, j] = W[i, j] + lam[k] * half
            W[j, i] = W[j, i] + lam[k] * half
            k += 1
    for i in range(r - 1):
        W[i, i] = W[i, i] + lam[k]
        W[r - 1, r - 1] = W[r - 1, r - 1] - lam[k]
        k += 1
    return W


def detect(instance, x, gamma):
    """Run the prox certificate at c(x) and build the working manifold."""
    y = smoothmap.eval_map(instance.map, x)
    outcome = nsfun.prox(instance.outer, y, gamma)
    return outcome, WorkingManifold(instance, outcome.manifold)


def _intermediate_norm(instance, y):
    if isinstance(instance.outer, nsfun.Max):
        return vec_norm2(y)
    return fro_norm(y)


def _structure_at(instance, y, gamma):
    return nsfun.structure_size(nsfun.prox(instance.outer, y, gamma).manifold)


def gamma_init(instance, x0):
    """Smallest gamma whose certificate at c(x0) is maximal.

    Doubling search from a scale-aware seed, then bisection to relative
    tolerance 1e-6.  Maximal structure is always reached for finite y, at
    the scale of sum(y_i - min y).
    """
    y = smoothmap.eval_map(instance.map, x0)
    m = instance.outer.m
    seed = GAMMA_SEED_SCALE * (1 + float(_intermediate_norm(instance, y)))
    if _structure_at(instance, y, seed) == m:
        return seed
    lo, hi = seed, 2 * seed
    for _ in range(DOUBLING_LIMIT):
        if _structure_at(instance, y, hi) == m:
            break
        lo, hi = hi, 2 * hi
    while hi - lo > BISECT_REL_TOL * hi:
        mid = (lo + hi) / 2
        if _structure_at(instance, y, mid) == m:
            hi = mid
        else:
            lo = mid
    return hi


def gamma_range_scan(instance, x, target, bracket):
    """Edges of the gamma interval whose detection equals ``target``.

    Exploits monotone structure growth in gamma: the structure count at
    c(x) is nondecreasing, so {gamma : count = target count} is an
    interval; both edges are located by bisection to relative tolerance
    1e-6 inside ``bracket``.  Returns (gamma_low, gamma_up), or None when
    no gamma in the bracket detects the target (including the case where
    the count skips the target size, or the descriptor at the window
    midpoint differs from the target despite an equal count).
    """
    y = smoothmap.eval_map(instance.map, x)
    lo, hi = bracket
    if not (0 < lo <= hi):
        raise ValueError("bracket must satisfy 0 < lo <= hi")
    want = nsfun.structure_size(target)
    s_lo = _structure_at(instance, y, lo)
    s_hi = _structure_at(instance, y, hi)
    if want < s_lo or want > s_hi:
        return None

    def bisect(pred, a, b):
        # pred is False at a, True at b; returns the crossing edge (a, b)
        while b - a > BISECT_REL_TOL * b:
            mid = (a + b) / 2
            if pred(mid):
                b = mid
            else:
                a = mid
        return a, b

    if s_lo >= want:
        g_low = lo
    else:
        g_low = bisect(lambda g: _structure_at(instance, y, g) >= want, lo, hi)[1]
    if s_hi <= want:
        g_up = hi
    else:
        g_up = bisect(lambda g: _structure_at(instance, y, g) > want, lo, hi)[0]
    if g_low > g_up:
        return None
    mid = (g_low + g_up) / 2
    if nsfun.prox(instance.outer, y, mid).manifold != target:
        return None
    return g_low, g_up


@dataclass(frozen=True)
class TransversalityReport:
    sigma_min: float
    passed: bool


def transversality_check(instance, x, manifold):
    """Full-rank surrogate: smallest singular value of the h Jacobian at x."""
    Jh = manifold.h_jacobian(x)
    if manifold.p == 0:
        return TransversalityReport(float("inf"), True)
    s = numlin.svd(Jh)[1]
    prec = precision_of(np.asarray(Jh))
    tol = numlin.rank_tol(Jh.shape, s[0], prec.eps)
    return TransversalityReport(float(s[-1]), bool(s[-1] > tol))
