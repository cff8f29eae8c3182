"""Independent brute-force oracles used to cross-check the solvers.

These deliberately avoid the package's interior-point kernel: the l1
oracle enumerates candidate supports and solves each exactly, relying on
the fact that a minimal-l1 exact fit is attained at a vertex, i.e. on at
most n linearly independent columns.
"""

from itertools import combinations

import numpy as np


def l1_oracle(X: np.ndarray, y: np.ndarray, residual_tol: float = 1e-9):
    """Exact minimum-l1 solution of X beta = y by support enumeration.

    Returns (objective, beta). Only valid for tiny instances.
    """
    n, p = X.shape
    if np.max(np.abs(y), initial=0.0) < residual_tol:
        return 0.0, np.zeros(p)
    best = None
    for k in range(1, min(n, p) + 1):
        for support in combinations(range(p), k):
            cols = X[:, list(support)]
            sol, *_ = np.linalg.lstsq(cols, y, rcond=None)
            if np.max(np.abs(y - cols @ sol)) < residual_tol:
                obj = float(np.abs(sol).sum())
                if best is None or obj < best[0]:
                    beta = np.zeros(p)
                    beta[list(support)] = sol
                    best = (obj, beta)
    assert best is not None, "oracle found no exact solution; instance infeasible?"
    return best


def uniform_ir_by_enumeration(X: np.ndarray, support) -> float:
    """Sign-vertex enumeration of the irrepresentability maximum."""
    from itertools import product

    S = sorted(support)
    comp = [j for j in range(X.shape[1]) if j not in set(S)]
    if not S or not comp:
        return 0.0
    B = X[:, comp].T @ X[:, S] @ np.linalg.inv(X[:, S].T @ X[:, S])
    best = 0.0
    for signs in product((-1.0, 1.0), repeat=len(S)):
        value = float(np.max(np.abs(B @ np.array(signs))))
        best = max(best, value)
    return best
