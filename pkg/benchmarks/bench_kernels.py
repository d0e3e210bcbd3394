"""Compare the compiled and pure-numpy kernel backends.

Runs the design-matrix assembly and the LASSO coordinate descent in a
subprocess per backend (the backend is chosen at import time via the
PDDRDO_NO_NUMBA environment variable) and reports wall times.

Usage: python3 benchmarks/bench_kernels.py [--samples M] [--degree m]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import time

WORKER = """
import json, os, sys, time
import numpy as np
from pddrdo import _kernels
from pddrdo.measures import InputLaw
from pddrdo.pdd import build_index_set, design_matrix
from pddrdo.qoi import NOMINAL_MEANS, reference_law, synthetic_qoi
from pddrdo.regression import lasso
from pddrdo.surrogate import build_bases, transform_x_to_z

M, m = json.loads(sys.argv[1])
law = reference_law()
r = 1.0 / NOMINAL_MEANS
X = law.sample_lhs(M, seed=0)
Z = transform_x_to_z(X, r)
h = synthetic_qoi(X)
bases = build_bases(list(law.marginals), r, m)
idx = build_index_set(5, 2, m)

design_matrix(list(bases), idx, Z[:2])            # warm up / compile
t0 = time.perf_counter()
reps = 20
for _ in range(reps):
    A = design_matrix(list(bases), idx, Z)
t_design = (time.perf_counter() - t0) / reps

lasso(A[:, :50], h, 1e-3)                          # warm up
t0 = time.perf_counter()
c = lasso(A, h, 1e-3)
t_lasso = time.perf_counter() - t0

print(json.dumps({
    "backend": _kernels.backend_name(),
    "design_matrix_s": t_design,
    "lasso_s": t_lasso,
    "checksum": float(np.sum(A) + np.sum(c)),
}))
"""


def run_backend(no_numba: bool, size) -> dict:
    env = dict(os.environ, PDDRDO_NO_NUMBA="1" if no_numba else "0")
    out = subprocess.run(
        [sys.executable, "-c", WORKER, json.dumps(size)],
        env=env, capture_output=True, text=True, check=True,
    )
    return json.loads(out.stdout.strip().splitlines()[-1])


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--samples", type=int, default=200)
    parser.add_argument("--degree", type=int, default=11)
    args = parser.parse_args()

    size = (args.samples, args.degree)
    print(f"M={args.samples} samples, degree m={args.degree}")
    results = [run_backend(False, size), run_backend(True, size)]
    for res in results:
        print(
            f"{res['backend']:>6}: design_matrix {res['design_matrix_s'] * 1e3:8.2f} ms"
            f"   lasso {res['lasso_s'] * 1e3:8.2f} ms"
        )
    if abs(results[0]["checksum"] - results[1]["checksum"]) > 1e-6 * (
        1.0 + abs(results[0]["checksum"])
    ):
        print("warning: backend checksums disagree", file=sys.stderr)
        return 1
    speed = results[1]["lasso_s"] / results[0]["lasso_s"]
    print(f"lasso speedup (compiled vs numpy): {speed:.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
