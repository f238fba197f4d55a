"""Compare the numba and pure-numpy kernel backends.

Runs the same short solver workload in two subprocesses (one per backend,
selected through MHDNUDGE_NO_NUMBA) and reports wall time per step plus
microbenchmarks of the two hot kernels.

Usage: python benchmarks/bench_kernels.py [--n 64] [--steps 200]
"""

import argparse
import json
import os
import subprocess
import sys

_WORKER = r"""
import json, sys, time
import numpy as np
from mhdnudge import _kernels
from mhdnudge.spectral import Grid, random_divfree_field
from mhdnudge.dynamics import ForcingSpec, MhdStepper, derive_elsasser_params

n, steps = int(sys.argv[1]), int(sys.argv[2])
grid = Grid(n)
params = derive_elsasser_params(5.0, 5.0)
f = random_divfree_field(grid, 100, 2.0, 2)
stepper = MhdStepper(grid, params, ForcingSpec(f, f.copy()), 2e-3)
init = random_divfree_field(grid, 0, 2.0)
stepper.set_state(init.coef, init.coef, 0.0)
stepper.advance()  # warm-up (triggers jit compilation on the numba path)

t0 = time.perf_counter()
for _ in range(steps):
    stepper.advance()
step_time = (time.perf_counter() - t0) / steps

rng = np.random.default_rng(0)
mats = np.ascontiguousarray(
    rng.standard_normal((n * n, 4, 4)) + 1j * rng.standard_normal((n * n, 4, 4)))
rhs = np.ascontiguousarray(
    rng.standard_normal((n * n, 4)) + 1j * rng.standard_normal((n * n, 4)))
_kernels.mode_solve(mats, rhs)
t0 = time.perf_counter()
for _ in range(100):
    _kernels.mode_solve(mats, rhs)
solve_time = (time.perf_counter() - t0) / 100

fields = rng.standard_normal((6, n, n))
_kernels.advect_products(*fields)
t0 = time.perf_counter()
for _ in range(100):
    _kernels.advect_products(*fields)
advect_time = (time.perf_counter() - t0) / 100

print(json.dumps({"backend": _kernels.BACKEND, "step_us": step_time * 1e6,
                  "mode_solve_us": solve_time * 1e6,
                  "advect_us": advect_time * 1e6}))
"""


def run_backend(no_numba, n, steps):
    env = dict(os.environ, MHDNUDGE_NO_NUMBA="1" if no_numba else "0")
    out = subprocess.run([sys.executable, "-c", _WORKER, str(n), str(steps)],
                         env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=64)
    ap.add_argument("--steps", type=int, default=200)
    args = ap.parse_args()
    rows = [run_backend(False, args.n, args.steps),
            run_backend(True, args.n, args.steps)]
    print(f"grid {args.n}x{args.n}, {args.steps} steps")
    print(f"{'backend':<8} {'step':>12} {'mode_solve':>12} {'advect':>12}")
    for r in rows:
        print(f"{r['backend']:<8} {r['step_us']:>10.1f}us "
              f"{r['mode_solve_us']:>10.1f}us {r['advect_us']:>10.1f}us")
    if rows[0]["backend"] == "numba":
        speedup = rows[1]["step_us"] / rows[0]["step_us"]
        print(f"numba step speedup over numpy: {speedup:.2f}x")


if __name__ == "__main__":
    main()
