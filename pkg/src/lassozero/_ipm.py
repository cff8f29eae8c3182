"""Dense interior-point kernel for standard-form linear programs.

Solves  min c'x  s.t.  Ax = b, x >= 0  with the homogeneous self-dual
embedding and Mehrotra predictor-corrector steps. The embedding is
big-M-free and needs no separate feasibility phase: primal infeasibility
is detected through the homogenizing variables instead of a phase-1 pass.

The whole iteration is one numba kernel (see :mod:`._jit` for the numpy
fallback switch). Search directions come from the normal equations
``M = A diag(x/z) A'``; a tiny ridge is always added to M's diagonal and
escalated if a solve produces non-finite values.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from ._jit import njit

STATUS_OPTIMAL = 0
STATUS_ITERATION_LIMIT = 1
STATUS_INFEASIBLE = 2
STATUS_UNBOUNDED = 3
STATUS_NUMERICAL = 4

_STEP_BACKOFF = 0.99995  # fraction of the distance to the boundary


@njit(cache=True, nogil=True)
def _max_step(x, dx, z, dz, tau, dtau, kappa, dkappa, backoff):
    # Largest alpha <= 1 keeping (x, z, tau, kappa) strictly positive.
    alpha = 1.0
    for i in range(x.shape[0]):
        if dx[i] < 0.0:
            a = -x[i] / dx[i] * backoff
            if a < alpha:
                alpha = a
        if dz[i] < 0.0:
            a = -z[i] / dz[i] * backoff
            if a < alpha:
                alpha = a
    if dtau < 0.0:
        a = -tau / dtau * backoff
        if a < alpha:
            alpha = a
    if dkappa < 0.0:
        a = -kappa / dkappa * backoff
        if a < alpha:
            alpha = a
    return alpha


@njit(cache=True, nogil=True)
def _all_finite(v):
    for i in range(v.shape[0]):
        if not np.isfinite(v[i]):
            return False
    return True


@njit(cache=True, nogil=True)
def _kkt_solve(M, A, At, dinv, r1, r2):
    # Reduced KKT solve: v = M^{-1}(r2 + A(dinv*r1)), u = dinv*(A'v - r1).
    rhs = r2 + A @ (dinv * r1)
    v = np.linalg.solve(M, rhs)
    u = dinv * (At @ v - r1)
    return u, v


@njit(cache=True, nogil=True)
def _hsd_core(A, At, b, c, tol, maxiter):
    m, n = A.shape
    x = np.ones(n)
    y = np.zeros(m)
    z = np.ones(n)
    tau = 1.0
    kappa = 1.0

    denom_p = max(1.0, np.linalg.norm(b - A @ x))
    denom_d = max(1.0, np.linalg.norm(c - z))
    denom_g = max(1.0, abs(1.0 + np.dot(c, x)))
    mu0 = (np.dot(x, z) + 1.0) / (n + 1.0)

    # Best iterate seen so far; past the numerical floor the indicators can
    # bounce around instead of decreasing, so keep the best and stop when
    # several consecutive iterations fail to improve it.
    best_score = np.inf
    best_x = x.copy()
    best_y = y.copy()
    best_z = z.copy()
    best_tau = tau
    best_kappa = kappa
    stall = 0

    status = STATUS_ITERATION_LIMIT
    niter = 0
    for _ in range(maxiter):
        rp = b * tau - A @ x
        rd = c * tau - At @ y - z
        rg = kappa + np.dot(c, x) - np.dot(b, y)
        mu = (np.dot(x, z) + tau * kappa) / (n + 1.0)
        by = np.dot(b, y)

        rho_p = np.linalg.norm(rp) / denom_p
        rho_d = np.linalg.norm(rd) / denom_d
        rho_a = abs(np.dot(c, x) - by) / (tau + abs(by))
        rho_g = abs(rg) / denom_g
        rho_mu = mu / mu0

        score = max(rho_p, max(rho_d, rho_a))
        if score < 0.9 * best_score:
            best_score = score
            best_x = x.copy()
            best_y = y.copy()
            best_z = z.copy()
            best_tau = tau
            best_kappa = kappa
            stall = 0
        else:
            stall += 1

        if score <= tol:
            status = STATUS_OPTIMAL
            break
        feas_converged = rho_p <= tol and rho_d <= tol and rho_g <= tol
        if (feas_converged and tau <= tol * max(1.0, kappa)) or (
            rho_mu <= tol and tau <= tol * min(1.0, kappa)
        ):
            status = STATUS_INFEASIBLE if by > tol else STATUS_UNBOUNDED
            break
        if stall >= 8:
            status = STATUS_NUMERICAL
            break

        niter += 1
        dinv = x / z
        M = (A * dinv) @ At
        diag_scale = 0.0
        for i in range(m):
            if M[i, i] > diag_scale:
                diag_scale = M[i, i]
        if diag_scale <= 0.0 or not np.isfinite(diag_scale):
            status = STATUS_NUMERICAL
            break

        stepped = False
        for attempt in range(6):
            ridge = diag_scale * 1e-14 * 100.0**attempt
            Mreg = M.copy()
            for i in range(m):
                Mreg[i, i] += ridge

            pu, pv = _kkt_solve(Mreg, A, At, dinv, c, b)
            if not (_all_finite(pu) and _all_finite(pv)):
                continue
            denom_tau = kappa / tau + (-np.dot(c, pu) + np.dot(b, pv))
            if denom_tau == 0.0 or not np.isfinite(denom_tau):
                continue

            # Predictor (affine scaling): gamma = 0, eta = 1.
            rxs = -(x * z)
            rtk = -(tau * kappa)
            u, v = _kkt_solve(Mreg, A, At, dinv, rd - rxs / x, rp)
            if not (_all_finite(u) and _all_finite(v)):
                continue
            dtau = (rg + rtk / tau - (-np.dot(c, u) + np.dot(b, v))) / denom_tau
            dx = u + pu * dtau
            dy = v + pv * dtau
            dz = (rxs - z * dx) / x
            dkappa = (rtk - kappa * dtau) / tau

            alpha = _max_step(x, dx, z, dz, tau, dtau, kappa, dkappa, 1.0)
            gamma = (1.0 - alpha) ** 2 * min(0.1, 1.0 - alpha)
            eta = 1.0 - gamma

            # Corrector: recenter and compensate the affine cross terms.
            rxs = gamma * mu - x * z - dx * dz
            rtk = gamma * mu - tau * kappa - dtau * dkappa
            u, v = _kkt_solve(Mreg, A, At, dinv, eta * rd - rxs / x, eta * rp)
            if not (_all_finite(u) and _all_finite(v)):
                continue
            dtau = (eta * rg + rtk / tau - (-np.dot(c, u) + np.dot(b, v))) / denom_tau
            dx = u + pu * dtau
            dy = v + pv * dtau
            dz = (rxs - z * dx) / x
            dkappa = (rtk - kappa * dtau) / tau
            if not (
                _all_finite(dx)
                and _all_finite(dy)
                and _all_finite(dz)
                and np.isfinite(dtau)
                and np.isfinite(dkappa)
            ):
                continue

            alpha = _max_step(x, dx, z, dz, tau, dtau, kappa, dkappa, _STEP_BACKOFF)
            x = x + alpha * dx
            y = y + alpha * dy
            z = z + alpha * dz
            tau = tau + alpha * dtau
            kappa = kappa + alpha * dkappa
            stepped = True
            break

        if not stepped:
            status = STATUS_NUMERICAL
            break

    if status == STATUS_NUMERICAL or status == STATUS_ITERATION_LIMIT:
        # Fall back to the best iterate; it may well satisfy the tolerance
        # even though the last few steps wandered off.
        x, y, z = best_x, best_y, best_z
        tau, kappa = best_tau, best_kappa
        if best_score <= tol:
            status = STATUS_OPTIMAL

    return x, y, z, tau, kappa, status, niter


class LpResult(NamedTuple):
    x: np.ndarray
    dual: np.ndarray
    slack: np.ndarray
    status: int
    iterations: int
    dehomogenized: bool


def solve_standard_form(
    A: np.ndarray,
    b: np.ndarray,
    c: np.ndarray,
    tol: float = 1e-10,
    maxiter: int = 200,
) -> LpResult:
    """Run the kernel and de-homogenize the iterate when one exists.

    Stalled or capped runs still return their best de-homogenized iterate
    (often within a hair of the tolerance); callers must verify it against
    their own acceptance criteria. Without a usable tau the raw iterates
    come back for diagnostics only.
    """
    A = np.ascontiguousarray(A, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    c = np.ascontiguousarray(c, dtype=np.float64)
    if A.ndim != 2 or b.ndim != 1 or c.ndim != 1:
        raise ValueError("A must be a matrix, b and c vectors")
    m, n = A.shape
    if b.shape[0] != m or c.shape[0] != n:
        raise ValueError("inconsistent LP dimensions")
    At = np.ascontiguousarray(A.T)
    x, y, z, tau, kappa, status, niter = _hsd_core(A, At, b, c, float(tol), int(maxiter))
    usable = (
        status in (STATUS_OPTIMAL, STATUS_ITERATION_LIMIT, STATUS_NUMERICAL)
        and np.isfinite(tau)
        and tau > tol * max(1.0, kappa)
    )
    if usable:
        return LpResult(x / tau, y / tau, z / tau, status, niter, True)
    return LpResult(x, y, z, status, niter, False)
