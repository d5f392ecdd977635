"""Generate the bundled reference solutions (src/proxsqp/data/references.json).

For each registered instance with a reference protocol: run the warm-start
(nsBFGS), solve in double precision, then hand the double solution to the
extended-precision reference solver, seeding its stepsize with the final
gamma of the double run so the expensive iterations skip the initial
walk-down.  The record keeps x* as hex doubles (bit-exact round trip), F*
as a 40-digit decimal string, the certified structure descriptor, and the
gamma seed.

Rerunning the script reproduces the file bit-for-bit.
"""

import json
import os
import sys

import mpmath
import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from proxsqp import baselines, driver, nsfun, registry, smoothmap  # noqa: E402

OUT = os.path.join(os.path.dirname(__file__), "..", "src", "proxsqp", "data",
                   "references.json")

# instance name -> (builder, nsBFGS warm-start length)
PROTOCOLS = [
    ("maxquad", registry.maxquad, 50),
    ("eigmax", lambda: registry.eigmax_affine(**registry.EIGMAX_DESK), 10),
    ("pair_demo", registry.pair_demo, 0),
]


def descriptor_record(desc):
    if isinstance(desc, nsfun.MaxActive):
        return {"kind": "max", "indices": [int(i) for i in desc.indices]}
    basis = np.asarray([[float(v) for v in row] for row in desc.ref_basis])
    return {"kind": "eig", "r": int(desc.r), "m": basis.shape[0],
            "basis": smoothmap._encode_floats(basis, True)}


def main():
    refs = {}
    for label, build, warm_iters in PROTOCOLS:
        inst = build()
        inst.reference = None  # ignore any previously bundled record
        if warm_iters:
            x_start = baselines.warm_start(inst, iters=warm_iters)
        else:
            x_start = registry.default_start(inst)
        gamma0 = inst.meta.get("gamma0", "auto")
        trace = driver.solve(inst, x_start,
                             driver.SolveOptions(gamma0=gamma0))
        if trace.status != "Converged":
            raise SystemExit(f"{inst.name}: double-precision run ended "
                             f"{trace.status}; no reference recorded")
        gamma_seed = trace.records[-1].gamma
        result = driver.reference_solve(inst, trace.x_final,
                                        gamma0=gamma_seed)
        if result is None:
            raise SystemExit(f"{inst.name}: extended-precision run did not "
                             "converge; no reference recorded")
        x_star, f_star, desc = result
        with mpmath.workdps(50):
            f_str = mpmath.nstr(f_star, 40, strip_zeros=False)
        x_dbl = np.asarray([float(v) for v in x_star])
        refs[inst.name] = {
            "x": smoothmap._encode_floats(x_dbl, True),
            "f": f_str,
            "descriptor": descriptor_record(desc),
            "gamma0": gamma_seed,
            "warm_iters": warm_iters,
            "dps": 50,
        }
        print(f"{inst.name}: F* = {f_str}  descriptor = {desc.code()}  "
              f"gamma seed = {gamma_seed:.6e}")
    with open(OUT, "w") as f:
        json.dump(refs, f, indent=1, sort_keys=True)
        f.write("\n")
    print(f"wrote {os.path.relpath(OUT)}")


if __name__ == "__main__":
    main()
