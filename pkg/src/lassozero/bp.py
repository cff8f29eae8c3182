"""Basis pursuit by linear programming, with verifiable optimality.

``solve_bp`` minimizes the l1 norm subject to an exact linear fit;
``solve_extended_bp`` does the same over the design concatenated with a
noise dictionary. Both use the standard positive/negative split of each
coefficient, solve the resulting LP with the interior-point kernel, and
return the dual vector as an optimality certificate:

* feasibility:   max |y - A beta|           <= feas_tol
* dual scaling:  max |A' dual|              <= 1 + cert_tol
* strong duality: |dual'y - l1(solution)|   <= cert_tol * (1 + l1)

Columns are equilibrated internally through the LP cost vector (this does
not change the problem), so designs with wildly different column norms,
like the cumulative-sum segmentation design, stay well conditioned.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _ipm
from .design import DesignMatrix, as_response
from .errors import Infeasible, NotConverged


@dataclass(frozen=True)
class ToleranceConfig:
    feas_tol: float = 1e-8
    cert_tol: float = 1e-7
    zero_tol: float = 1e-8
    max_iterations: int = 200
    ipm_tol: float = 1e-9


DEFAULT_TOL = ToleranceConfig()


@dataclass(frozen=True)
class BpSolution:
    beta: np.ndarray
    dual: np.ndarray
    residual_norm: float
    iterations: int
    objective: float


@dataclass(frozen=True)
class ExtendedBpSolution:
    beta: np.ndarray
    gamma: np.ndarray
    dual: np.ndarray
    residual_norm: float
    iterations: int
    objective: float


def _as_values(X) -> np.ndarray:
    if isinstance(X, DesignMatrix):
        return X.values
    a = np.ascontiguousarray(X, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError("design must be a matrix")
    return a


def _snap(v: np.ndarray, zero_tol: float) -> np.ndarray:
    out = v.copy()
    out[np.abs(out) <= zero_tol] = 0.0
    return out


def _solve_l1(A: np.ndarray, y: np.ndarray, tol: ToleranceConfig):
    """Minimize the l1 norm of coef subject to A @ coef = y.

    Returns (coef, dual, iterations). The response is normalized to unit
    2-norm and each column enters the LP with cost 1/its norm; both
    rescalings are undone before returning, and leave the dual unchanged.
    """
    n, k = A.shape
    ynorm = float(np.linalg.norm(y))
    if ynorm == 0.0:
        return np.zeros(k), np.zeros(n), 0

    col_norms = np.linalg.norm(A, axis=0)
    scale = np.where(col_norms > 0, col_norms, 1.0)
    A_eq = A / scale
    b = y / ynorm
    cost_half = 1.0 / scale

    A_lp = np.hstack((A_eq, -A_eq))
    c = np.concatenate((cost_half, cost_half))
    res = _ipm.solve_standard_form(A_lp, b, c, tol=tol.ipm_tol, maxiter=tol.max_iterations)

    if res.status == _ipm.STATUS_INFEASIBLE:
        raise Infeasible("no coefficient vector satisfies the equality constraints")
    if not res.dehomogenized:
        raise NotConverged(
            f"interior point failed after {res.iterations} iterations (status {res.status})",
            iterations=res.iterations,
        )
    # Stalled/capped runs fall through: the caller verifies the candidate
    # against the feasibility and dual-certificate tolerances, which is the
    # actual contract, and raises if those fail.
    coef = (res.x[:k] - res.x[k:]) / scale * ynorm
    dual = res.dual
    return coef, dual, res.iterations


def _feas_inf_norm(A: np.ndarray, coef: np.ndarray, y: np.ndarray) -> float:
    return float(np.max(np.abs(y - A @ coef))) if y.size else 0.0


def _polish(A: np.ndarray, coef: np.ndarray, y: np.ndarray, dual: np.ndarray, tol: ToleranceConfig):
    """Snap tiny entries to exact zeros, then refit exactly on the support.

    A minimal-l1 vertex lives on at most n linearly independent columns,
    so the candidate support is pruned to the n largest magnitudes before
    the exact refit; interior-point junk slightly above the snap level
    disappears in the refit. The refit is accepted only when it stays
    feasible and keeps the l1 norm equal to the certified optimum;
    otherwise the snapped iterate is kept.
    """
    n = A.shape[0]
    snapped = _snap(coef, tol.zero_tol)
    opt = float(np.dot(dual, y))

    support = np.flatnonzero(snapped)
    if support.size > n:
        order = np.argsort(np.abs(snapped[support]))
        support = np.sort(support[order[-n:]])
    if support.size:
        refit = np.zeros_like(coef)
        sol, *_ = np.linalg.lstsq(A[:, support], y, rcond=None)
        refit[support] = sol
        refit = _snap(refit, tol.zero_tol)
        feas = _feas_inf_norm(A, refit, y)
        gap = abs(float(np.sum(np.abs(refit))) - opt)
        if feas <= tol.feas_tol and gap <= tol.cert_tol * (1.0 + abs(opt)):
            return refit

    if _feas_inf_norm(A, snapped, y) <= tol.feas_tol:
        return snapped
    return coef


def _certificate_report(A: np.ndarray, coef: np.ndarray, dual: np.ndarray, y: np.ndarray, tol: ToleranceConfig):
    objective = float(np.sum(np.abs(coef)))
    feas = _feas_inf_norm(A, coef, y)
    dual_scaling = float(np.max(np.abs(A.T @ dual))) if A.size else 0.0
    gap = abs(float(np.dot(dual, y)) - objective)
    report = {
        "feasibility_violation": max(0.0, feas - tol.feas_tol),
        "dual_scaling_violation": max(0.0, dual_scaling - (1.0 + tol.cert_tol)),
        "duality_gap_violation": max(0.0, gap - tol.cert_tol * (1.0 + objective)),
        "residual_inf_norm": feas,
        "dual_scaling": dual_scaling,
        "duality_gap": gap,
        "objective": objective,
    }
    ok = (
        report["feasibility_violation"] == 0.0
        and report["dual_scaling_violation"] == 0.0
        and report["duality_gap_violation"] == 0.0
    )
    return ok, report


def solve_bp(X, y, tol: ToleranceConfig = DEFAULT_TOL) -> BpSolution:
    """l1-minimal beta with X @ beta = y, plus its dual certificate.

    Requires the system to be feasible (rank(X) = n suffices). Entries
    with magnitude at or below ``tol.zero_tol`` are snapped to exact 0.
    """
    A = _as_values(X)
    yv = as_response(y, A.shape[0])
    coef, dual, iterations = _solve_l1(A, yv, tol)
    coef = _polish(A, coef, yv, dual, tol)
    ok, report = _certificate_report(A, coef, dual, yv, tol)
    if not ok:
        raise NotConverged(
            "solution failed its own certificate: "
            + ", ".join(f"{k}={v:.3e}" for k, v in report.items() if v > 0),
            iterations=iterations,
        )
    return BpSolution(
        beta=coef,
        dual=dual,
        residual_norm=report["residual_inf_norm"],
        iterations=iterations,
        objective=report["objective"],
    )


def solve_extended_bp(X, G, y, tol: ToleranceConfig = DEFAULT_TOL) -> ExtendedBpSolution:
    """Joint l1-minimal (beta, gamma) with X @ beta + G @ gamma = y.

    With q = 0 columns in G this reduces to :func:`solve_bp`.
    """
    A = _as_values(X)
    Gv = np.ascontiguousarray(G, dtype=np.float64)
    if Gv.ndim != 2 or Gv.shape[0] != A.shape[0]:
        raise ValueError("noise dictionary must have the same number of rows as X")
    yv = as_response(y, A.shape[0])
    p = A.shape[1]

    stacked = np.hstack((A, Gv)) if Gv.shape[1] else A
    coef, dual, iterations = _solve_l1(stacked, yv, tol)
    coef = _polish(stacked, coef, yv, dual, tol)
    ok, report = _certificate_report(stacked, coef, dual, yv, tol)
    if not ok:
        raise NotConverged(
            "solution failed its own certificate: "
            + ", ".join(f"{k}={v:.3e}" for k, v in report.items() if v > 0),
            iterations=iterations,
        )
    return ExtendedBpSolution(
        beta=coef[:p],
        gamma=coef[p:],
        dual=dual,
        residual_norm=report["residual_inf_norm"],
        iterations=iterations,
        objective=report["objective"],
    )


def check_certificate(solution, X, y, G=None, tol: ToleranceConfig = DEFAULT_TOL):
    """Re-verify a solution's feasibility and dual certificate.

    Returns ``(ok, report)`` where the report carries the maximal violation
    of each invariant (zero when satisfied).
    """
    A = _as_values(X)
    yv = as_response(y, A.shape[0])
    if G is not None and np.asarray(G).size:
        Gv = np.ascontiguousarray(G, dtype=np.float64)
        A = np.hstack((A, Gv))
        coef = np.concatenate((solution.beta, solution.gamma))
    elif hasattr(solution, "gamma"):
        coef = np.concatenate((solution.beta, np.asarray(solution.gamma).reshape(-1)))
    else:
        coef = solution.beta
    return _certificate_report(A, coef, solution.dual, yv, tol)
