"""The numba kernel and the pure-numpy fallback must agree.

The backend is chosen at import time from LASSOZERO_JIT, so the fallback
runs in a subprocess and its results are compared against the in-process
numba path.
"""

import json
import os
import subprocess
import sys

import numpy as np
import pytest

from lassozero._jit import JIT_ENABLED
from lassozero.bp import solve_bp, solve_extended_bp

_WORKER = r"""
import json, sys
import numpy as np
from lassozero._jit import JIT_ENABLED
from lassozero.bp import solve_bp, solve_extended_bp

rng = np.random.default_rng(314)
X = rng.standard_normal((12, 30))
y = rng.standard_normal(12)
G = rng.standard_normal((12, 12))
sol = solve_bp(X, y)
ext = solve_extended_bp(X, G, y)
print(json.dumps({
    "jit": JIT_ENABLED,
    "beta": sol.beta.tolist(),
    "objective": sol.objective,
    "ext_beta": ext.beta.tolist(),
    "ext_gamma": ext.gamma.tolist(),
}))
"""


@pytest.mark.slow
def test_fallback_matches_numba_backend():
    assert JIT_ENABLED, "tests expect the numba backend by default"
    env = dict(os.environ, LASSOZERO_JIT="0")
    out = subprocess.run(
        [sys.executable, "-c", _WORKER], env=env, capture_output=True, text=True, check=True
    )
    doc = json.loads(out.stdout.strip().splitlines()[-1])
    assert doc["jit"] is False

    rng = np.random.default_rng(314)
    X = rng.standard_normal((12, 30))
    y = rng.standard_normal(12)
    G = rng.standard_normal((12, 12))
    sol = solve_bp(X, y)
    ext = solve_extended_bp(X, G, y)

    np.testing.assert_allclose(sol.beta, doc["beta"], atol=1e-9)
    assert sol.objective == pytest.approx(doc["objective"], abs=1e-10)
    np.testing.assert_allclose(ext.beta, doc["ext_beta"], atol=1e-9)
    np.testing.assert_allclose(ext.gamma, doc["ext_gamma"], atol=1e-9)
