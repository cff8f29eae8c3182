"""Threshold calibration.

The threshold is chosen so the estimator returns the empty model with
probability 1 - alpha under the global null. Its scale-free form divides
the max aggregated coefficient obtained on pure noise by a robust spread
of the nonzero noise-dictionary coefficients,

    P = max_j |beta_l1_j(eps)| / s(eps),

where s pools the nonzero dictionary coefficients across all replicates
and takes their MAD. Both parts scale linearly in the noise level, so the
law of P is noise-level-free and can be simulated once per design with
unit noise. The data-dependent threshold is then s(y) times an upper
quantile of P (empirical, or from a GEV fit when only few Monte Carlo
replications are affordable).

When the noise level is known, the simpler statistic max_j |beta_l1_j|
is simulated directly at that level and its quantile used as-is.
"""

from __future__ import annotations

import hashlib
import json
import warnings
from dataclasses import dataclass

import numpy as np

from ._parallel import thread_map
from .bp import DEFAULT_TOL, ToleranceConfig
from .design import DesignMatrix
from .errors import CalibrationError, DegenerateNoiseFit, FitFailed, LassoZeroError
from .estimator import (
    CALIBRATION_NAMESPACE,
    LassoZeroConfig,
    LassoZeroFit,
    aggregate_fit,
    noise_response,
)
from .gev import GevParams, fit_gev, gev_upper_quantile
from .rng import SeededRng

MAD_CONSISTENCY = 1.4826


@dataclass(frozen=True)
class PivotalCalibration:
    """Monte Carlo sample of the calibration statistic plus its quantiles."""

    samples: np.ndarray  # sorted ascending
    alpha: float
    q_alpha_empirical: float
    gev: GevParams | None
    q_alpha_gev: float | None
    seed: int
    n_requested: int
    n_failed: int
    statistic: str = "pivotal"  # or "max_coef" for the known-noise variant

    @property
    def n_samples(self) -> int:
        return int(self.samples.shape[0])

    def quantile(self, use_gev: bool | None = None) -> float:
        """Upper-alpha quantile; ``None`` prefers the GEV fit whenever the
        sample is too small to resolve the tail (R < 20 / alpha)."""
        if use_gev is None:
            use_gev = self.n_samples < 20.0 / self.alpha and self.q_alpha_gev is not None
        if use_gev:
            if self.q_alpha_gev is None:
                raise FitFailed("calibration carries no GEV quantile")
            return self.q_alpha_gev
        return self.q_alpha_empirical


def empirical_upper_quantile(samples: np.ndarray, alpha: float, warn: bool = True) -> float:
    """Order-statistic estimate of the upper-alpha quantile.

    Uses the ceil((1 - alpha) R)-th smallest value. Warns when that lands
    on the sample maximum: the tail is then beyond the sample's resolution.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must be in (0, 1)")
    s = np.sort(np.asarray(samples, dtype=np.float64))
    r = s.shape[0]
    if r == 0:
        raise ValueError("no samples")
    k = int(np.ceil((1.0 - alpha) * r))
    k = min(max(k, 1), r)
    if warn and k >= r:
        warnings.warn(
            f"upper-{alpha:g} quantile falls on the sample maximum at R={r}; "
            "increase replications or use the GEV fit",
            stacklevel=2,
        )
    return float(s[k - 1])


def noise_scale_s(gammas: np.ndarray, zero_tol: float = DEFAULT_TOL.zero_tol) -> float:
    """MAD of the pooled nonzero dictionary coefficients.

    Pools entries with |gamma| > zero_tol across all replicates and returns
    median(|v - median(v)|) * 1.4826. The consistency constant cancels out
    of the final threshold because calibration divides by the same s.
    """
    g = np.asarray(gammas, dtype=np.float64).reshape(-1)
    nonzero = g[np.abs(g) > zero_tol]
    if nonzero.shape[0] < 2:
        raise DegenerateNoiseFit(
            "fewer than two nonzero dictionary coefficients; "
            "was the estimator run without a noise dictionary?"
        )
    med = np.median(nonzero)
    s = float(np.median(np.abs(nonzero - med))) * MAD_CONSISTENCY
    if s == 0.0:
        raise DegenerateNoiseFit("nonzero dictionary coefficients have zero spread")
    return s


def pivotal_statistic(
    X: DesignMatrix,
    noise: np.ndarray,
    cfg: LassoZeroConfig,
    rng: SeededRng,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> float:
    """One realization of P on a given noise vector."""
    beta_l1, _, gammas = aggregate_fit(X, noise, cfg, rng, tol)
    return float(np.max(np.abs(beta_l1))) / noise_scale_s(gammas, tol.zero_tol)


def _simulate_statistic(
    X: DesignMatrix,
    cfg: LassoZeroConfig,
    n_draws: int,
    rng: SeededRng,
    sigma: float,
    pivotal: bool,
    tol: ToleranceConfig,
    threads: int | None,
) -> tuple[np.ndarray, int]:
    def one(r: int):
        parent = rng.child(r)
        eps = noise_response(parent.child(2**20 + 1), X.n, sigma)
        try:
            beta_l1, _, gammas = aggregate_fit(X, eps, cfg, parent, tol)
            value = float(np.max(np.abs(beta_l1)))
            if pivotal:
                value /= noise_scale_s(gammas, tol.zero_tol)
            return value
        except LassoZeroError:
            return None

    results = thread_map(one, range(n_draws), threads)
    kept = np.array([v for v in results if v is not None], dtype=np.float64)
    failed = n_draws - kept.shape[0]
    if failed > 0.05 * n_draws:
        raise CalibrationError(
            f"{failed} of {n_draws} calibration replications failed (> 5%)"
        )
    kept.sort()
    return kept, failed


def simulate_pivotal(
    X: DesignMatrix,
    cfg: LassoZeroConfig,
    n_draws: int,
    rng: SeededRng | None = None,
    fit_gev_tail: bool = True,
    alpha: float = 0.05,
    tol: ToleranceConfig = DEFAULT_TOL,
    threads: int | None = None,
) -> PivotalCalibration:
    """Monte Carlo calibration of P over ``n_draws`` noise replications.

    Each replication draws fresh noise and fresh dictionaries. Noise is
    drawn at unit level, which by scale-freeness covers every noise level.
    Failed replications (solver non-convergence) are dropped, not retried;
    more than 5% failures aborts. Samples come back sorted so any parallel
    schedule yields the identical calibration.
    """
    if cfg.width_for(X.n) < 1:
        raise ValueError("the scale-free statistic needs at least one dictionary column")
    if n_draws < 1:
        raise ValueError("need at least one replication")
    if rng is None:
        rng = SeededRng(cfg.seed).child(CALIBRATION_NAMESPACE)
    samples, failed = _simulate_statistic(
        X, cfg, n_draws, rng, sigma=1.0, pivotal=True, tol=tol, threads=threads
    )
    gev = None
    q_gev = None
    if fit_gev_tail:
        try:
            gev = fit_gev(samples)
            q_gev = gev_upper_quantile(gev, alpha)
        except FitFailed:
            gev = None
            q_gev = None
    return PivotalCalibration(
        samples=samples,
        alpha=alpha,
        q_alpha_empirical=empirical_upper_quantile(samples, alpha, warn=not fit_gev_tail),
        gev=gev,
        q_alpha_gev=q_gev,
        seed=rng.seed,
        n_requested=n_draws,
        n_failed=failed,
        statistic="pivotal",
    )


def threshold_from_calibration(
    calibration: PivotalCalibration,
    fit_on_data: LassoZeroFit,
    use_gev: bool | None = None,
    zero_tol: float = DEFAULT_TOL.zero_tol,
) -> float:
    """Data-dependent threshold: s(y) times the calibrated upper quantile."""
    if calibration.statistic != "pivotal":
        raise ValueError("threshold_from_calibration needs a pivotal calibration")
    s_y = noise_scale_s(fit_on_data.replicate_gammas, zero_tol)
    return s_y * calibration.quantile(use_gev)


def known_sigma_threshold(
    X: DesignMatrix,
    cfg: LassoZeroConfig,
    sigma: float,
    alpha: float,
    n_draws: int,
    rng: SeededRng | None = None,
    tol: ToleranceConfig = DEFAULT_TOL,
    threads: int | None = None,
) -> float:
    """Threshold for known noise level: upper-alpha quantile of the max
    aggregated coefficient simulated at that level."""
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    if rng is None:
        rng = SeededRng(cfg.seed).child(CALIBRATION_NAMESPACE)
    samples, _ = _simulate_statistic(
        X, cfg, n_draws, rng, sigma=sigma, pivotal=False, tol=tol, threads=threads
    )
    return empirical_upper_quantile(samples, alpha)


def known_sigma_calibration(
    X: DesignMatrix,
    cfg: LassoZeroConfig,
    sigma: float,
    alpha: float,
    n_draws: int,
    rng: SeededRng | None = None,
    fit_gev_tail: bool = True,
    tol: ToleranceConfig = DEFAULT_TOL,
    threads: int | None = None,
) -> PivotalCalibration:
    """Full calibration record for the known-noise statistic (CLI artifact)."""
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    if rng is None:
        rng = SeededRng(cfg.seed).child(CALIBRATION_NAMESPACE)
    samples, failed = _simulate_statistic(
        X, cfg, n_draws, rng, sigma=sigma, pivotal=False, tol=tol, threads=threads
    )
    gev = None
    q_gev = None
    if fit_gev_tail:
        try:
            gev = fit_gev(samples)
            q_gev = gev_upper_quantile(gev, alpha)
        except FitFailed:
            pass
    return PivotalCalibration(
        samples=samples,
        alpha=alpha,
        q_alpha_empirical=empirical_upper_quantile(samples, alpha, warn=not fit_gev_tail),
        gev=gev,
        q_alpha_gev=q_gev,
        seed=rng.seed,
        n_requested=n_draws,
        n_failed=failed,
        statistic="max_coef",
    )


def design_hash(X: DesignMatrix) -> str:
    """Stable identifier of a design's shape and exact contents."""
    h = hashlib.sha256()
    h.update(np.asarray(X.values.shape, dtype=np.int64).tobytes())
    h.update(np.ascontiguousarray(X.values).tobytes())
    return h.hexdigest()


def calibration_to_json(
    calibration: PivotalCalibration,
    X: DesignMatrix,
    cfg: LassoZeroConfig,
    alphas: tuple[float, ...] | None = None,
) -> str:
    """Serialize a calibration for reuse across fits on the same design."""
    alphas = (calibration.alpha,) if alphas is None else tuple(alphas)
    quantiles = {}
    for a in alphas:
        entry = {"empirical": empirical_upper_quantile(calibration.samples, a, warn=False)}
        if calibration.gev is not None:
            entry["gev"] = gev_upper_quantile(calibration.gev, a)
        quantiles[f"{a:g}"] = entry
    doc = {
        "design_hash": design_hash(X),
        "config": {
            "n_noise_cols": cfg.width_for(X.n),
            "n_dictionaries": cfg.replicates_for(X.n),
            "threshold_rule": cfg.threshold_rule,
            "scaling": cfg.scaling_for(X),
            "seed": cfg.seed,
        },
        "seed": calibration.seed,
        "statistic": calibration.statistic,
        "alpha": calibration.alpha,
        "n_requested": calibration.n_requested,
        "n_failed": calibration.n_failed,
        "samples": calibration.samples.tolist(),
        "gev": None
        if calibration.gev is None
        else {
            "location": calibration.gev.location,
            "scale": calibration.gev.scale,
            "shape": calibration.gev.shape,
            "log_likelihood": calibration.gev.log_likelihood,
        },
        "quantiles": quantiles,
    }
    return json.dumps(doc, sort_keys=True, indent=2)


def calibration_from_json(text: str) -> tuple[PivotalCalibration, str]:
    """Rebuild a calibration record; returns it with the stored design hash."""
    doc = json.loads(text)
    gev = None
    if doc.get("gev") is not None:
        g = doc["gev"]
        gev = GevParams(g["location"], g["scale"], g["shape"], g["log_likelihood"])
    samples = np.asarray(doc["samples"], dtype=np.float64)
    alpha = float(doc["alpha"])
    cal = PivotalCalibration(
        samples=samples,
        alpha=alpha,
        q_alpha_empirical=empirical_upper_quantile(samples, alpha, warn=False),
        gev=gev,
        q_alpha_gev=None if gev is None else gev_upper_quantile(gev, alpha),
        seed=int(doc["seed"]),
        n_requested=int(doc["n_requested"]),
        n_failed=int(doc["n_failed"]),
        statistic=doc["statistic"],
    )
    return cal, doc["design_hash"]
