"""Named problem instances and their recorded reference solutions.

maxquad loads from a checksummed bundled data file; the eigenvalue
instances are regenerated bit-for-bit from a counter-based seeded RNG; the
two-dimensional demo and the ascent counterexample fixture are hard coded.
Reference solutions (computed once by the high-precision solver, see
scripts/make_references.py) are attached when the bundled record exists.
"""

import hashlib
import json
import os
from dataclasses import dataclass

import numpy as np

from . import nsfun, numlin, smoothmap

_DATA_DIR = os.path.join(os.path.dirname(__file__), "data")

EIGMAX_DESK = {"seed": 42, "n": 6, "m": 12}
EIGMAX_PAPER = {"seed": 42, "n": 25, "m": 50}


@dataclass
class ReferenceSolution:
    x: np.ndarray
    value: float
    value_str: str
    descriptor: object
    gamma0: float = None


def _load_json(name):
    with open(os.path.join(_DATA_DIR, name)) as f:
        return json.load(f)


def _descriptor_from_record(rec):
    if rec["kind"] == "max":
        return nsfun.MaxActive(tuple(rec["indices"]))
    basis = smoothmap._decode_floats(rec["basis"], (rec["m"], rec["r"]))
    return nsfun.EigMult(rec["r"], basis)


def attach_reference(instance):
    """Attach the bundled reference solution to the instance, if recorded."""
    path = os.path.join(_DATA_DIR, "references.json")
    if not os.path.exists(path):
        return instance
    refs = _load_json(path)
    rec = refs.get(instance.name)
    if rec is None:
        return instance
    x = smoothmap._decode_floats(rec["x"], (len(rec["x"]),))
    instance.reference = ReferenceSolution(
        x=x, value=float(rec["f"]), value_str=rec["f"],
        descriptor=_descriptor_from_record(rec["descriptor"]),
        gamma0=rec.get("gamma0"))
    return instance


def maxquad():
    """The 10-variable, 5-piece max-of-convex-quadratics test problem."""
    raw = _load_json("maxquad.json")
    canon = json.dumps(raw["payload"], sort_keys=True, separators=(",", ":"))
    digest = hashlib.sha256(canon.encode()).hexdigest()
    if digest != raw["sha256"]:
        raise ValueError("maxquad data file failed its checksum")
    fam = smoothmap.map_from_config(raw["payload"]["map"])
    for i in range(fam.m):
        w, _ = numlin.sym_eigen(fam.A[i])
        if w[-1] < -1e-10:
            raise ValueError(f"maxquad piece {i} is not convex")
    inst = smoothmap.CompositeInstance(
        "maxquad", fam, nsfun.Max(fam.m),
        meta={"x0": [1.0] * fam.n, "convex": True})
    return attach_reference(inst)


def eigmax_affine(seed=42, n=6, m=12):
    """Maximum eigenvalue of a random affine symmetric-matrix map.

    Each matrix keeps the upper triangle (diagonal included) of an
    entrywise standard-normal draw and mirrors it below, so every stored
    entry is a unit-variance Gaussian.  Philox keeps the draw reproducible
    bit-for-bit across platforms.
    """
    rng = np.random.default_rng(np.random.Philox(seed))
    raw = rng.standard_normal((n + 1, m, m))
    upper = np.triu(raw)
    mats = upper + np.swapaxes(np.triu(raw, 1), 1, 2)
    name = f"eigmax_n{n}_m{m}_s{seed}"
    inst = smoothmap.CompositeInstance(
        name, smoothmap.AffineMatrixMap(mats), nsfun.LamMax(m),
        meta={"x0": [0.0] * n, "seed": seed, "convex": True})
    return attach_reference(inst)


def pair_demo():
    """The two-dimensional max-of-two-ellipses demo."""
    # gamma0: from any start with a single active piece, the model step
    # jumps to that ellipse's center and is always rejected, so the first
    # detection must already merge both pieces; 8 clears the merge
    # threshold at the default start with room for the initial halving.
    inst = smoothmap.CompositeInstance(
        "pair_demo", smoothmap.AnalyticPair(), nsfun.Max(2),
        meta={"x0": [0.7, 0.2], "convex": False, "gamma0": 8.0})
    return attach_reference(inst)


class SplitLinearOuter:
    """g(y) = y1 + max(y2, y2/4): partly smooth along {y2 = 0} but with a
    normal direction of strict descent (slope -1/4), so the normal ascent
    property must fail."""

    m = 2
    kind = "custom"

    def value(self, y):
        return y[0] + max(y[1], y[1] / 4)

    def normal_directions(self, p, rng, count):
        # the normal space of {y2 = 0} is spanned by e2; alternate signs
        out = []
        for i in range(count):
            d = np.zeros(2)
            d[1] = 1.0 if i % 2 == 0 else -1.0
            out.append(d)
        return out

    def directional_derivative(self, p, d):
        return d[0] + max(d[1], d[1] / 4)


def normal_ascent_fixture():
    """Composite counterexample: F(x) = (2 - x) + max(2x, x/2)."""
    A = np.zeros((2, 1, 1))
    b = np.array([[-1.0], [2.0]])
    c0 = np.array([2.0, 0.0])
    inst = smoothmap.CompositeInstance(
        "ascent_fixture", smoothmap.QuadraticFamily(A, b, c0),
        SplitLinearOuter(), meta={"x0": [1.0], "convex": True})
    return inst


_BUILDERS = {
    "maxquad": maxquad,
    "eigmax": lambda seed=None: eigmax_affine(
        seed if seed is not None else EIGMAX_DESK["seed"],
        EIGMAX_DESK["n"], EIGMAX_DESK["m"]),
    "eigmax_full": lambda seed=None: eigmax_affine(
        seed if seed is not None else EIGMAX_PAPER["seed"],
        EIGMAX_PAPER["n"], EIGMAX_PAPER["m"]),
    "pair_demo": pair_demo,
    "ascent_fixture": normal_ascent_fixture,
}


def instance_names():
    return sorted(_BUILDERS)


def get_instance(name, seed=None):
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise KeyError(f"unknown instance {name!r}; known: "
                       f"{', '.join(instance_names())}") from None
    if name in ("eigmax", "eigmax_full"):
        return builder(seed)
    return builder()


def default_start(instance):
    return np.array(instance.meta["x0"], dtype=float)
