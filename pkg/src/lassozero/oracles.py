"""Exact desk-scale verification of the recovery theory.

Every check here is an oracle: small enough to be solved exactly (kernel
enumeration, least-squares over all supports) so it can serve as ground
truth against the estimator's behavior.

* ``snsp_constant``: the smallest rho such that every kernel vector of X
  carries at most rho times as much l1 mass on the target support as off
  it. Computed exactly by enumerating the sign patterns on the support
  and solving one small LP per pattern.
* ``uniform_ir_constant``: the worst-case irrepresentability value over
  all sign vectors on the support. The maximum over the sign cube is a
  row-sum norm, so it has a closed form.
* ``verify_theorem1``: the deterministic sign-recovery guarantee of
  thresholded l1 fits: when the smallest signal coefficient exceeds
  2(3+rho)/(1-rho) times the l1 norm of the pure-noise fit, the
  constructive threshold (3+rho)/(1-rho) times that norm recovers signs.
* ``verify_prop2``: irrepresentability theta < 1 implies the kernel
  property holds for every rho > theta, hence rho_star <= theta.
* ``verify_prop3``: with a full-column-rank design and the known-noise
  threshold, thresholding controls the family-wise error at alpha for any
  coefficient vector.
* ``l0_oracle``: brute-force sparsest exact solution on tiny instances.

The small LPs use scipy's HiGHS so the oracle route stays independent of
the interior-point kernel it is used to cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product

import numpy as np
from scipy.optimize import linprog

from .bp import DEFAULT_TOL, ToleranceConfig, solve_bp
from .design import DesignMatrix, GroundTruth
from .errors import EnumerationTooLarge, NotFound, SingularGram
from .estimator import apply_threshold
from .rng import SeededRng

_MAX_KERNEL_DIM = 12
_MAX_SIGN_SUPPORT = 8
_KERNEL_SV_CUTOFF = 1e-10


def _as_values(X) -> np.ndarray:
    return X.values if isinstance(X, DesignMatrix) else np.asarray(X, dtype=np.float64)


def kernel_basis(X, sv_cutoff: float = _KERNEL_SV_CUTOFF) -> np.ndarray:
    """Orthonormal basis of ker(X) as columns, via full SVD.

    Singular values at or below ``sv_cutoff`` times the largest are treated
    as zero so numerical rank deficiencies do not leak into the kernel.
    """
    A = _as_values(X)
    _, sv, vt = np.linalg.svd(A, full_matrices=True)
    top = sv[0] if sv.size else 0.0
    rank = int(np.sum(sv > sv_cutoff * top)) if top > 0 else 0
    return vt[rank:].T.copy()


@dataclass(frozen=True)
class SnspReport:
    rho_star: float  # may be inf when the kernel meets the support subspace
    kernel_dim: int
    witness: np.ndarray | None  # kernel vector attaining the ratio


def snsp_constant(X, support) -> SnspReport:
    """Exact worst kernel mass ratio on/off the support.

    Maximizes l1(beta restricted to S) over kernel vectors with
    l1(beta off S) <= 1: one LP per sign pattern of the on-support part
    (antipodal patterns coincide, so half the cube is enumerated). An
    unbounded LP means a nonzero kernel vector vanishes off S, reported
    as rho_star = inf.
    """
    A = _as_values(X)
    p = A.shape[1]
    S = sorted(int(j) for j in support)
    if any(j < 0 or j >= p for j in S):
        raise ValueError("support indices out of range")
    comp = [j for j in range(p) if j not in set(S)]

    N = kernel_basis(A)
    d = N.shape[1]
    if d == 0:
        return SnspReport(rho_star=0.0, kernel_dim=0, witness=None)
    if d > _MAX_KERNEL_DIM:
        raise EnumerationTooLarge(f"kernel dimension {d} exceeds the bound {_MAX_KERNEL_DIM}")
    if len(S) > _MAX_SIGN_SUPPORT:
        raise EnumerationTooLarge(
            f"support size {len(S)} exceeds the sign-enumeration bound {_MAX_SIGN_SUPPORT}"
        )
    if not S:
        return SnspReport(rho_star=0.0, kernel_dim=d, witness=None)

    N_s = N[S, :]
    N_c = N[comp, :]

    # Kernel vectors supported entirely on S make the ratio infinite.
    if comp:
        _, sv_c, vt_c = np.linalg.svd(N_c, full_matrices=True)
        rank_c = int(np.sum(sv_c > _KERNEL_SV_CUTOFF * (sv_c[0] if sv_c.size else 1.0)))
        if rank_c < d:
            z0 = vt_c[rank_c:].T[:, 0]
            return SnspReport(rho_star=np.inf, kernel_dim=d, witness=N @ z0)
    else:
        return SnspReport(rho_star=np.inf, kernel_dim=d, witness=N @ np.eye(d)[:, 0])

    nc = len(comp)
    # variables (z, t): maximize s' N_s z  s.t.  |N_c z| <= t, sum t <= 1
    a_ub = np.zeros((2 * nc + 1, d + nc))
    a_ub[:nc, :d] = N_c
    a_ub[:nc, d:] = -np.eye(nc)
    a_ub[nc : 2 * nc, :d] = -N_c
    a_ub[nc : 2 * nc, d:] = -np.eye(nc)
    a_ub[2 * nc, d:] = 1.0
    b_ub = np.zeros(2 * nc + 1)
    b_ub[2 * nc] = 1.0
    bounds = [(None, None)] * d + [(0, None)] * nc

    rho_star = 0.0
    best_z = None
    for pattern in product((1.0, -1.0), repeat=len(S) - 1):
        s = np.array((1.0,) + pattern)
        cost = np.zeros(d + nc)
        cost[:d] = -(N_s.T @ s)
        res = linprog(cost, A_ub=a_ub, b_ub=b_ub, bounds=bounds, method="highs")
        if res.status == 3:  # unbounded: should have been caught above
            return SnspReport(rho_star=np.inf, kernel_dim=d, witness=None)
        if res.status != 0:
            raise SingularGram(f"sign-pattern LP failed: {res.message}")
        value = -res.fun
        if value > rho_star:
            rho_star = value
            best_z = res.x[:d]

    witness = None if best_z is None else N @ best_z
    return SnspReport(rho_star=float(rho_star), kernel_dim=d, witness=witness)


def uniform_ir_constant(X, support) -> float:
    """Worst-case irrepresentability over all sign vectors on the support.

    max over sign vectors s of the sup-norm of
    X_offᵀ X_on (X_onᵀ X_on)^{-1} s, which equals the maximal row l1 norm
    of that matrix since the sign cube's maximum sits at a vertex.
    """
    A = _as_values(X)
    p = A.shape[1]
    S = sorted(int(j) for j in support)
    if any(j < 0 or j >= p for j in S):
        raise ValueError("support indices out of range")
    if len(S) > _MAX_KERNEL_DIM:
        raise EnumerationTooLarge(f"support size {len(S)} exceeds the bound {_MAX_KERNEL_DIM}")
    comp = [j for j in range(p) if j not in set(S)]
    if not S or not comp:
        return 0.0
    X_s = A[:, S]
    X_c = A[:, comp]
    gram = X_s.T @ X_s
    cond = np.linalg.cond(gram)
    if not np.isfinite(cond) or cond > 1e12:
        raise SingularGram(f"support Gram matrix is singular (cond={cond:.2e})")
    B = X_c.T @ X_s @ np.linalg.inv(gram)
    return float(np.max(np.abs(B).sum(axis=1)))


def signs_match(a: np.ndarray, b: np.ndarray) -> bool:
    return bool(np.array_equal(np.sign(a), np.sign(b)))


@dataclass(frozen=True)
class Theorem1Record:
    rho_star: float
    c_rho: float
    noise_fit_l1: float
    beta_min: float
    premise_held: bool
    constructive_tau: float
    constructive_ok: bool
    sweep_ok: bool


def verify_theorem1(
    X,
    beta0: np.ndarray,
    noise: np.ndarray,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> Theorem1Record:
    """Check the deterministic sign-recovery guarantee on one instance.

    Computes rho_star for the support of beta0, the pure-noise fit's l1
    norm, and whether min |beta0| on the support exceeds
    C_rho = 2(3+rho)/(1-rho) times it. Sign recovery is then tested both
    at the constructive threshold (3+rho)/(1-rho) times the noise fit's
    l1 norm and across a full sweep of candidate thresholds.
    """
    A = _as_values(X)
    beta0 = np.asarray(beta0, dtype=np.float64)
    noise = np.asarray(noise, dtype=np.float64)
    support = np.flatnonzero(beta0)

    report = snsp_constant(A, support)
    rho = report.rho_star
    if not np.isfinite(rho) or rho >= 1.0:
        raise ValueError("the guarantee needs a finite kernel ratio below one")
    c_rho = 2.0 * (3.0 + rho) / (1.0 - rho)

    if np.max(np.abs(noise)) == 0.0:
        noise_fit_l1 = 0.0
    else:
        noise_fit_l1 = solve_bp(A, noise, tol).objective
    beta_min = float(np.min(np.abs(beta0[support]))) if support.size else np.inf
    premise = beta_min > c_rho * noise_fit_l1

    y = A @ beta0 + noise
    beta_bp = solve_bp(A, y, tol).beta

    constructive_tau = (3.0 + rho) / (1.0 - rho) * noise_fit_l1
    constructive_ok = signs_match(apply_threshold(beta_bp, constructive_tau), beta0)

    sweep_ok = False
    for tau in [0.0] + sorted(set(np.abs(beta_bp[beta_bp != 0.0]).tolist())):
        if signs_match(apply_threshold(beta_bp, tau), beta0):
            sweep_ok = True
            break

    return Theorem1Record(
        rho_star=rho,
        c_rho=c_rho,
        noise_fit_l1=noise_fit_l1,
        beta_min=beta_min,
        premise_held=bool(premise),
        constructive_tau=constructive_tau,
        constructive_ok=constructive_ok,
        sweep_ok=sweep_ok,
    )


@dataclass(frozen=True)
class Prop2Record:
    theta: float
    rho_star: float
    vacuous: bool  # theta >= 1: no claim to check
    ok: bool


def verify_prop2(X, support, slack: float = 1e-6) -> Prop2Record:
    """Irrepresentability below one must cap the kernel ratio at theta."""
    theta = uniform_ir_constant(X, support)
    report = snsp_constant(X, support)
    if theta >= 1.0:
        return Prop2Record(theta=theta, rho_star=report.rho_star, vacuous=True, ok=True)
    ok = report.rho_star <= theta + slack
    return Prop2Record(theta=theta, rho_star=report.rho_star, vacuous=False, ok=bool(ok))


def l0_oracle(X, y, k_max: int, residual_tol: float = 1e-8):
    """Sparsest exact solution by exhaustive support search.

    Scans supports of size 0..k_max in order and returns the first exact
    fit (max residual below ``residual_tol``) as ``(beta, support)``.
    """
    A = _as_values(X)
    yv = np.asarray(y, dtype=np.float64).reshape(-1)
    p = A.shape[1]
    if p > 20:
        raise EnumerationTooLarge("exhaustive search is limited to p <= 20")
    if k_max > 6:
        raise EnumerationTooLarge("exhaustive search is limited to k_max <= 6")

    if float(np.max(np.abs(yv), initial=0.0)) < residual_tol:
        return np.zeros(p), frozenset()
    for k in range(1, k_max + 1):
        for S in combinations(range(p), k):
            cols = A[:, list(S)]
            sol, *_ = np.linalg.lstsq(cols, yv, rcond=None)
            if float(np.max(np.abs(yv - cols @ sol))) < residual_tol:
                beta = np.zeros(p)
                beta[list(S)] = sol
                return beta, frozenset(int(j) for j in S)
    raise NotFound(f"no exact solution with support size <= {k_max}")


def theorem1_campaign(
    n_instances: int,
    n: int,
    p: int,
    s0: int,
    rng: SeededRng,
    noise_scale: float = 0.5,
    margin: float = 1.5,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> list[Theorem1Record]:
    """Random premise-satisfying instances for the sign-recovery guarantee.

    Draws Gaussian designs, keeps those with a finite kernel ratio below
    one, and scales the planted coefficients to ``margin`` times the
    guarantee's lower bound so the premise holds by construction.
    """
    records = []
    attempts = 0
    idx = 0
    while len(records) < n_instances:
        attempts += 1
        if attempts > 100 * n_instances:
            raise RuntimeError("could not generate enough premise-satisfying instances")
        inst = rng.child(idx)
        idx += 1
        gen = inst.generator()
        A = gen.standard_normal((n, p))
        support = gen.choice(p, size=s0, replace=False)
        report = snsp_constant(A, support)
        if not np.isfinite(report.rho_star) or report.rho_star >= 1.0:
            continue
        noise = noise_scale * gen.standard_normal(n)
        noise_fit_l1 = solve_bp(A, noise, tol).objective
        c_rho = 2.0 * (3.0 + report.rho_star) / (1.0 - report.rho_star)
        amplitude = margin * max(c_rho * noise_fit_l1, 1e-6)
        beta0 = np.zeros(p)
        beta0[support] = amplitude * gen.choice((-1.0, 1.0), size=s0)
        records.append(verify_theorem1(A, beta0, noise, tol))
    return records


def prop2_campaign(
    n_instances: int,
    n: int,
    p: int,
    s0_choices,
    rng: SeededRng,
) -> list[Prop2Record]:
    """Random designs with irrepresentability below one, checked one by one."""
    records = []
    attempts = 0
    idx = 0
    s0_choices = list(s0_choices)
    while len(records) < n_instances:
        attempts += 1
        if attempts > 100 * n_instances:
            raise RuntimeError("could not generate enough instances with theta < 1")
        inst = rng.child(idx)
        idx += 1
        gen = inst.generator()
        A = gen.standard_normal((n, p))
        s0 = int(gen.choice(s0_choices))
        support = gen.choice(p, size=s0, replace=False)
        record = verify_prop2(A, support)
        if record.vacuous:
            continue
        records.append(record)
    return records


def verify_prop3(
    X,
    beta0: np.ndarray,
    sigma: float,
    alpha: float,
    n_runs: int,
    rng: SeededRng,
    calibration_draws: int = 2000,
) -> float:
    """Empirical family-wise error of the thresholded least-squares fit.

    Requires a full-column-rank design. The pre-threshold coefficients are
    the least-squares solution (the exact-fit l1 program is generically
    infeasible when n > p; least squares is its natural limit there), the
    threshold is the Monte Carlo upper-alpha quantile of the sup-norm of
    the least-squares fit to pure noise at the known level.
    """
    A = _as_values(X)
    n, p = A.shape
    if np.linalg.matrix_rank(A) < p:
        raise ValueError("the guarantee needs a full-column-rank design")
    beta0 = np.asarray(beta0, dtype=np.float64).reshape(-1)
    truth = GroundTruth(beta0=beta0, sigma=sigma)

    pinv = np.linalg.pinv(A)

    noise_draws = sigma * rng.child(0).generator().standard_normal((n, calibration_draws))
    t_samples = np.max(np.abs(pinv @ noise_draws), axis=0)
    k = int(np.ceil((1.0 - alpha) * calibration_draws))
    tau = float(np.sort(t_samples)[min(max(k, 1), calibration_draws) - 1])

    run_noise = sigma * rng.child(1).generator().standard_normal((n, n_runs))
    coefs = pinv @ (A @ beta0)[:, None] + pinv @ run_noise
    discoveries = np.abs(coefs) > tau
    false_mask = np.ones(p, dtype=bool)
    false_mask[list(truth.support)] = False
    any_false = discoveries[false_mask, :].any(axis=0)
    return float(any_false.mean())
