"""Benchmark the interior-point kernel: numba against the numpy fallback.

The backend is fixed per process by the LASSOZERO_JIT environment
variable, so each variant is timed in a subprocess. The workload is the
extended l1 solve at the default experiment size (the hot path during
Monte Carlo calibration) plus one large segmentation solve.

Run:

    python benchmarks/bench_bp.py
"""

import json
import os
import statistics
import subprocess
import sys

_WORKER = r"""
import json, sys, time
import numpy as np
from lassozero._jit import JIT_ENABLED
from lassozero.bp import solve_bp, solve_extended_bp
from lassozero.design import mean_center_projection
from lassozero.simulate import segmentation_design

rng = np.random.default_rng(12345)
n, p, q = 50, 100, 50
X = rng.standard_normal((n, p))
problems = [(rng.standard_normal((n, q)), rng.standard_normal(n)) for _ in range(30)]

# warm-up (JIT compile / cache load), excluded from timing
solve_extended_bp(X, problems[0][0], problems[0][1])

t0 = time.perf_counter()
objs = []
for G, y in problems:
    sol = solve_extended_bp(X, G, y)
    objs.append(sol.objective)
t1 = time.perf_counter()

raw = segmentation_design(300)
beta0 = np.zeros(299); beta0[[74, 149, 224]] = 2.5
Xs, yseg = mean_center_projection(raw, raw @ beta0 + rng.standard_normal(300))
t2 = time.perf_counter()
seg = solve_bp(Xs, yseg)
t3 = time.perf_counter()

print(json.dumps({
    "jit": JIT_ENABLED,
    "extended_ms": (t1 - t0) / len(problems) * 1e3,
    "segmentation_ms": (t3 - t2) * 1e3,
    "objective_digest": sum(objs),
    "seg_objective": seg.objective,
}))
"""


def run_variant(jit: bool) -> dict:
    env = dict(os.environ, LASSOZERO_JIT="1" if jit else "0")
    out = subprocess.run(
        [sys.executable, "-c", _WORKER], env=env, capture_output=True, text=True, check=True
    )
    return json.loads(out.stdout.strip().splitlines()[-1])


def main() -> None:
    results = [run_variant(jit=True), run_variant(jit=False)]
    print(f"{'backend':>8s} {'extended BP (ms)':>18s} {'segmentation (ms)':>19s}")
    for r in results:
        name = "numba" if r["jit"] else "numpy"
        print(f"{name:>8s} {r['extended_ms']:18.2f} {r['segmentation_ms']:19.2f}")
    if abs(results[0]["objective_digest"] - results[1]["objective_digest"]) > 1e-9:
        print("warning: backends disagree on objectives; check numerical drift")
    speedup = results[1]["extended_ms"] / results[0]["extended_ms"]
    print(f"\nspeedup (numpy / numba) on the hot path: {speedup:.2f}x")


if __name__ == "__main__":
    main()
