"""The noise-dictionary estimator.

Fitting proceeds in three steps: solve the extended l1 problem once per
random Gaussian dictionary, take the componentwise median of the design
coefficients across dictionaries, then threshold. With no dictionary
(q = 0) the estimate is simply the thresholded l1-minimal fit.

Dictionary columns are put on the same scale as the design columns before
solving: matched standard deviation when the design is standardized, or a
common l2 norm matched through noise quantiles when it is not (see
:func:`scale_dictionary`).
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from ._parallel import thread_map
from .bp import DEFAULT_TOL, ToleranceConfig, solve_bp, solve_extended_bp
from .design import DesignMatrix, as_response
from .errors import LassoZeroError
from .rng import SeededRng, gaussian_matrix, gaussian_vector

# Stream ids reserved within a fit's parent stream.
_SCALING_STREAM = 2**20

# Namespaces under the config seed.
FIT_NAMESPACE = 0
CALIBRATION_NAMESPACE = 1


@dataclass(frozen=True)
class LassoZeroConfig:
    """Estimator parameters.

    ``n_noise_cols`` is the dictionary width q (None means "use n");
    ``n_dictionaries`` is the number M of independent dictionaries whose
    coefficient vectors get median-aggregated. With q = 0 the number of
    dictionaries is forced to 1, since replicates would be identical.
    """

    n_noise_cols: int | None = None
    n_dictionaries: int = 30
    threshold_rule: str = "hard"
    scaling: str = "auto"  # auto | match_standardized | match_quantile
    quantile_match_alpha: float = 0.05
    quantile_match_draws: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.n_noise_cols is not None and self.n_noise_cols < 0:
            raise ValueError("dictionary width must be nonnegative")
        if self.n_dictionaries < 1:
            raise ValueError("need at least one dictionary replicate")
        if self.threshold_rule not in ("hard", "soft"):
            raise ValueError("threshold_rule must be 'hard' or 'soft'")
        if self.scaling not in ("auto", "match_standardized", "match_quantile"):
            raise ValueError(f"unknown dictionary scaling rule {self.scaling!r}")
        if not 0.0 < self.quantile_match_alpha < 1.0:
            raise ValueError("quantile_match_alpha must be in (0, 1)")
        if self.n_noise_cols == 0 and self.n_dictionaries != 1:
            object.__setattr__(self, "n_dictionaries", 1)

    def width_for(self, n: int) -> int:
        return n if self.n_noise_cols is None else self.n_noise_cols

    def replicates_for(self, n: int) -> int:
        return 1 if self.width_for(n) == 0 else self.n_dictionaries

    def scaling_for(self, X: DesignMatrix) -> str:
        if self.scaling != "auto":
            return self.scaling
        return "match_standardized" if X.standardized else "match_quantile"


@dataclass(frozen=True)
class LassoZeroFit:
    """Aggregated estimate, per-dictionary coefficients, and the final support."""

    beta_l1: np.ndarray
    replicate_betas: np.ndarray  # (M, p)
    replicate_gammas: np.ndarray  # (M, q)
    tau: float
    beta_hat: np.ndarray
    support: frozenset[int]
    threshold_rule: str = "hard"


class ReplicateFailure(LassoZeroError):
    """A per-dictionary solve failed; carries the replicate index."""

    def __init__(self, replicate: int, cause: Exception):
        self.replicate = replicate
        self.cause = cause
        super().__init__(f"dictionary replicate {replicate} failed: {cause}")


def apply_threshold(beta: np.ndarray, tau: float, rule: str = "hard") -> np.ndarray:
    """Zero out entries with |x| <= tau; keep (hard) or shrink (soft) the rest."""
    if tau < 0:
        raise ValueError("threshold must be nonnegative")
    beta = np.asarray(beta, dtype=np.float64)
    if rule == "hard":
        return np.where(np.abs(beta) <= tau, 0.0, beta)
    if rule == "soft":
        return np.sign(beta) * np.maximum(np.abs(beta) - tau, 0.0)
    raise ValueError(f"unknown threshold rule {rule!r}")


def median_aggregate(replicate_betas: np.ndarray) -> np.ndarray:
    """Componentwise median; even counts use the midpoint of the central pair."""
    betas = np.asarray(replicate_betas, dtype=np.float64)
    if betas.ndim != 2 or betas.shape[0] < 1:
        raise ValueError("expected an M-by-p matrix with M >= 1")
    return np.median(betas, axis=0)


def _mc_noise_quantile_target(X: DesignMatrix, alpha: float, draws: int, rng: SeededRng):
    """Shared noise draws E and the upper alpha quantile of max |X' e|."""
    E = gaussian_matrix(rng, X.n, draws)
    stats = np.max(np.abs(X.values.T @ E), axis=0)
    return E, _upper_quantile(stats, alpha)


def _upper_quantile(samples: np.ndarray, alpha: float) -> float:
    s = np.sort(np.asarray(samples, dtype=np.float64))
    k = int(np.ceil((1.0 - alpha) * s.shape[0]))
    return float(s[min(max(k, 1), s.shape[0]) - 1])


def _match_quantile_scale(G: np.ndarray, E: np.ndarray, target: float, alpha: float) -> np.ndarray:
    norms = np.linalg.norm(G, axis=0)
    norms[norms == 0] = 1.0
    G1 = G / norms
    own = _upper_quantile(np.max(np.abs(G1.T @ E), axis=0), alpha)
    return G1 * (target / own)


def scale_dictionary(
    G: np.ndarray,
    X: DesignMatrix,
    rule: str = "match_standardized",
    rng: SeededRng | None = None,
    alpha: float = 0.05,
    mc_draws: int = 1000,
) -> np.ndarray:
    """Bring raw Gaussian dictionary columns onto the design's scale.

    ``match_standardized`` scales each column to sd 1 (n-1 divisor) like
    the design's columns. Column means are deliberately kept: a
    standardized design spans only the mean-zero directions, so the
    dictionary must retain the constant direction for the exact-fit
    constraint to stay feasible on uncentered responses.

    ``match_quantile`` rescales all columns to the common l2 norm at
    which the Monte Carlo upper-alpha quantile of max |G' e| equals that
    of max |X' e| over shared draws e ~ N(0, I); both statistics are
    linear in the noise level, so the matched norm does not depend on it.
    """
    G = np.ascontiguousarray(G, dtype=np.float64)
    if G.shape[0] != X.n:
        raise ValueError("dictionary must have n rows")
    if rule == "match_standardized":
        sd = G.std(axis=0, ddof=1)
        sd[sd == 0] = 1.0
        return G / sd
    if rule == "match_quantile":
        if rng is None:
            raise ValueError("match_quantile scaling needs an rng for the shared draws")
        E, target = _mc_noise_quantile_target(X, alpha, mc_draws, rng)
        return _match_quantile_scale(G, E, target, alpha)
    raise ValueError(f"unknown dictionary scaling rule {rule!r}")


def aggregate_fit(
    X: DesignMatrix,
    y: np.ndarray,
    cfg: LassoZeroConfig,
    rng: SeededRng,
    tol: ToleranceConfig = DEFAULT_TOL,
    threads: int | None = 1,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Steps 1-2 of the estimator: per-dictionary solves plus the median.

    Returns ``(beta_l1, replicate_betas, replicate_gammas)``. Dictionary k
    draws from ``rng.child(k)``; the quantile-matching noise draws come
    from a dedicated substream shared by all replicates.
    """
    yv = as_response(y, X.n)
    q = cfg.width_for(X.n)
    m = cfg.replicates_for(X.n)

    if q == 0:
        sol = solve_bp(X, yv, tol)
        betas = sol.beta[None, :].copy()
        gammas = np.zeros((1, 0))
        return sol.beta.copy(), betas, gammas

    rule = cfg.scaling_for(X)
    if rule == "match_quantile":
        E, target = _mc_noise_quantile_target(
            X, cfg.quantile_match_alpha, cfg.quantile_match_draws, rng.child(_SCALING_STREAM)
        )

    def one(k: int):
        G = gaussian_matrix(rng.child(k), X.n, q)
        if rule == "match_standardized":
            Gs = scale_dictionary(G, X, rule)
        else:
            Gs = _match_quantile_scale(G, E, target, cfg.quantile_match_alpha)
        try:
            sol = solve_extended_bp(X, Gs, yv, tol)
        except LassoZeroError as exc:
            raise ReplicateFailure(k, exc) from exc
        return sol.beta, sol.gamma

    results = thread_map(one, range(m), threads)
    betas = np.vstack([b for b, _ in results])
    gammas = np.vstack([g for _, g in results])
    return median_aggregate(betas), betas, gammas


def fit(
    X: DesignMatrix,
    y: np.ndarray,
    cfg: LassoZeroConfig,
    tau: float,
    rng: SeededRng | None = None,
    tol: ToleranceConfig = DEFAULT_TOL,
    threads: int | None = 1,
) -> LassoZeroFit:
    """Run the full estimator at a fixed threshold ``tau``.

    With q = 0 and M = 1 this is exactly the thresholded l1-minimal fit.
    Identical inputs (including the config seed) give bit-identical fits.
    """
    if tau < 0:
        raise ValueError("threshold must be nonnegative")
    if rng is None:
        rng = SeededRng(cfg.seed).child(FIT_NAMESPACE)
    beta_l1, betas, gammas = aggregate_fit(X, y, cfg, rng, tol, threads)
    beta_hat = apply_threshold(beta_l1, tau, cfg.threshold_rule)
    return LassoZeroFit(
        beta_l1=beta_l1,
        replicate_betas=betas,
        replicate_gammas=gammas,
        tau=float(tau),
        beta_hat=beta_hat,
        support=frozenset(int(j) for j in np.flatnonzero(beta_hat)),
        threshold_rule=cfg.threshold_rule,
    )


def refit_threshold(fit_result: LassoZeroFit, tau: float, rule: str | None = None) -> LassoZeroFit:
    """Re-threshold an existing fit without re-solving anything."""
    rule = fit_result.threshold_rule if rule is None else rule
    beta_hat = apply_threshold(fit_result.beta_l1, tau, rule)
    return dataclasses.replace(
        fit_result,
        tau=float(tau),
        beta_hat=beta_hat,
        support=frozenset(int(j) for j in np.flatnonzero(beta_hat)),
        threshold_rule=rule,
    )


def fit_qut(
    X: DesignMatrix,
    y: np.ndarray,
    cfg: LassoZeroConfig,
    calibration,
    use_gev: bool | None = None,
    rng: SeededRng | None = None,
    tol: ToleranceConfig = DEFAULT_TOL,
    threads: int | None = 1,
) -> LassoZeroFit:
    """Fit with the data-dependent threshold from a pivotal calibration."""
    from .qut import threshold_from_calibration  # local import to avoid a cycle

    fit0 = fit(X, y, cfg, tau=0.0, rng=rng, tol=tol, threads=threads)
    tau = threshold_from_calibration(calibration, fit0, use_gev=use_gev)
    return refit_threshold(fit0, tau)


def noise_response(rng: SeededRng, n: int, sigma: float = 1.0) -> np.ndarray:
    """Pure-noise response used by calibration."""
    return sigma * gaussian_vector(rng, n)
