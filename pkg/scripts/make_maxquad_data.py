"""Generate the bundled maxquad data file from its standard construction.

The five quadratic pieces on R^10 are f_k(x) = x^T A_k x - b_k^T x with
(1-based indices)

    A_k[i,j] = exp(i/j) cos(i j) sin(k)              for i < j, symmetric
    A_k[i,i] = i/10 |sin(k)| + sum_{j != i} |A_k[i,j]|
    b_k[i]   = exp(i/k) sin(i k)

The diagonal dominates the absolute off-diagonal row sums, so every A_k is
positive semidefinite by Gershgorin and the instance is convex.  Pieces are
stored as a quadratic family (1/2 x^T A' x + b'^T x + c0 with A' = 2 A_k,
b' = -b_k, c0 = 0) in hex floats with a sha256 over the canonical payload.

Run from the repository root:  python3 scripts/make_maxquad_data.py
"""

import hashlib
import json
import math
import os
import sys

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from proxsqp import smoothmap

N, M = 10, 5


def build_pieces():
    A = np.zeros((M, N, N))
    b = np.zeros((M, N))
    for k in range(1, M + 1):
        for i in range(1, N + 1):
            for j in range(1, N + 1):
                if i < j:
                    v = math.exp(i / j) * math.cos(i * j) * math.sin(k)
                    A[k - 1, i - 1, j - 1] = v
                    A[k - 1, j - 1, i - 1] = v
            b[k - 1, i - 1] = math.exp(i / k) * math.sin(i * k)
        for i in range(N):
            off = sum(abs(A[k - 1, i, j]) for j in range(N) if j != i)
            A[k - 1, i, i] = (i + 1) / 10 * abs(math.sin(k)) + off
    return A, b


def main():
    A, b = build_pieces()
    fam = smoothmap.QuadraticFamily(2 * A, -b, np.zeros(M))
    payload = {
        "name": "maxquad",
        "map": smoothmap.map_to_config(fam, hex_floats=True),
        "outer": {"kind": "max", "m": M},
    }
    canon = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    digest = hashlib.sha256(canon.encode()).hexdigest()
    out = {"payload": payload, "sha256": digest}
    dest = os.path.join(os.path.dirname(__file__), "..", "src", "proxsqp",
                        "data", "maxquad.json")
    os.makedirs(os.path.dirname(dest), exist_ok=True)
    with open(dest, "w") as f:
        json.dump(out, f, indent=1)
        f.write("\n")
    print(f"wrote {os.path.normpath(dest)} sha256={digest}")


if __name__ == "__main__":
    main()
