"""Simulation settings and the campaign loop.

Three design families:

* ``iid_gaussian`` - standard normal entries, columns standardized;
  generated once per campaign by default (flag to redraw per instance).
* ``csv_design`` - an external matrix loaded from CSV, then standardized.
* ``segmentation`` - the cumulative-sum design X[i, j] = 1 if i > j whose
  sparse coefficients are the jumps of a piecewise-constant signal; the
  design and response are mean-centered (never standardized) and the jump
  positions split the signal into equal segments.

A campaign calibrates the threshold once per distinct design, then runs
independent instances per sparsity level and averages the realized
support metrics into FDR / TPR / FWER / exact-recovery rows.
"""

from __future__ import annotations

import dataclasses
import time
from dataclasses import dataclass

import numpy as np

from ._parallel import thread_map
from .bp import DEFAULT_TOL, ToleranceConfig
from .design import DesignMatrix, GroundTruth, load_design_csv, mean_center_projection, standardize
from .errors import LassoZeroError
from .estimator import LassoZeroConfig, fit, refit_threshold
from .metrics import score_support
from .qut import design_hash, simulate_pivotal, threshold_from_calibration
from .rng import SeededRng

_KINDS = ("iid_gaussian", "csv_design", "segmentation")

# Stream namespaces under a campaign root.
_DESIGN_NS = 0
_CALIBRATION_NS = 1
_INSTANCE_NS = 2


@dataclass(frozen=True)
class SimulationSetting:
    kind: str
    n: int
    p: int
    s0: int
    amplitude: float = 1.0
    sign_rule: str = "random"  # random | fixed_positive
    sigma: float = 1.0
    support_rule: str = "uniform_random"  # uniform_random | equispaced
    csv_path: str | None = None
    csv_skip_header: bool = False

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown setting kind {self.kind!r}; valid: {_KINDS}")
        if self.kind == "segmentation":
            # jumps of a length-n signal live on n-1 columns, equally spaced
            object.__setattr__(self, "p", self.n - 1)
            object.__setattr__(self, "support_rule", "equispaced")
        if self.n < 2 or self.p < 1:
            raise ValueError("need n >= 2 and p >= 1")
        if not 0 <= self.s0 <= self.p:
            raise ValueError("sparsity must lie in [0, p]")
        if not self.amplitude > 0:
            raise ValueError("amplitude must be positive")
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if self.sign_rule not in ("random", "fixed_positive"):
            raise ValueError("sign_rule must be 'random' or 'fixed_positive'")
        if self.support_rule not in ("uniform_random", "equispaced"):
            raise ValueError("support_rule must be 'uniform_random' or 'equispaced'")
        if self.kind == "csv_design" and self.csv_path is None:
            raise ValueError("csv_design needs csv_path")


def segmentation_design(n: int) -> np.ndarray:
    """Raw cumulative-sum design: column j is 1 for rows i > j (0-based)."""
    return (np.arange(n)[:, None] > np.arange(n - 1)[None, :]).astype(np.float64)


def equispaced_support(n_cols: int, s0: int) -> frozenset[int]:
    """Jump columns splitting n_cols + 1 samples into s0 + 1 equal segments."""
    n = n_cols + 1
    step = n / (s0 + 1)
    return frozenset(int(round(step * (k + 1))) - 1 for k in range(s0))


def make_design(setting: SimulationSetting, rng: SeededRng) -> DesignMatrix:
    """Draw (or load) the design for a setting. Segmentation is centered here."""
    if setting.kind == "iid_gaussian":
        raw = rng.generator().standard_normal((setting.n, setting.p))
        return standardize(raw)
    if setting.kind == "csv_design":
        X = load_design_csv(setting.csv_path, setting.csv_skip_header)
        if X.n != setting.n or X.p != setting.p:
            raise ValueError(
                f"CSV design is {X.n}x{X.p}, setting expects {setting.n}x{setting.p}"
            )
        return standardize(X)
    X = segmentation_design(setting.n)
    centered, _ = mean_center_projection(X, np.zeros(setting.n))
    return centered


def draw_truth(setting: SimulationSetting, rng: SeededRng) -> GroundTruth:
    gen = rng.generator()
    beta0 = np.zeros(setting.p)
    if setting.s0 > 0:
        if setting.support_rule == "equispaced":
            support = sorted(equispaced_support(setting.p, setting.s0))
        else:
            support = np.sort(gen.choice(setting.p, size=setting.s0, replace=False))
        signs = (
            gen.choice((-1.0, 1.0), size=setting.s0)
            if setting.sign_rule == "random"
            else np.ones(setting.s0)
        )
        beta0[list(support)] = setting.amplitude * signs
    return GroundTruth(beta0=beta0, sigma=setting.sigma)


def generate_instance(
    setting: SimulationSetting,
    rng: SeededRng,
    design: DesignMatrix | None = None,
) -> tuple[DesignMatrix, np.ndarray, GroundTruth]:
    """One (X, y, truth) draw; pass ``design`` to reuse a fixed matrix.

    For the segmentation setting the noisy signal is built on the raw
    cumulative-sum design and then the response and design are both
    mean-centered, mirroring how intercepts are removed in practice.
    """
    truth = draw_truth(setting, rng.child(0))
    noise = truth.sigma * rng.child(1).generator().standard_normal(setting.n)
    if setting.kind == "segmentation":
        raw = segmentation_design(setting.n)
        y_raw = raw @ truth.beta0 + noise
        X, y = mean_center_projection(raw, y_raw)
        if design is not None:
            X = design  # identical by construction; reuse the shared object
        return X, y, truth
    if design is None:
        design = make_design(setting, rng.child(2))
    y = design.values @ truth.beta0 + noise
    return design, y, truth


@dataclass(frozen=True)
class CampaignRow:
    s0: int
    fdr: float
    fdr_se: float
    tpr: float
    tpr_se: float
    fwer: float
    p_exact: float
    p_exact_se: float
    n_replications: int
    n_failed: int


@dataclass(frozen=True)
class CampaignResult:
    rows: tuple[CampaignRow, ...]
    manifest: dict

    def to_csv(self) -> str:
        header = "s0,fdr,fdr_se,tpr,tpr_se,fwer,p_exact,p_exact_se"
        lines = [header]
        for r in self.rows:
            lines.append(
                f"{r.s0},{r.fdr:.10g},{r.fdr_se:.10g},{r.tpr:.10g},{r.tpr_se:.10g},"
                f"{r.fwer:.10g},{r.p_exact:.10g},{r.p_exact_se:.10g}"
            )
        return "\n".join(lines) + "\n"


def _mean_and_se(values: np.ndarray) -> tuple[float, float]:
    r = values.shape[0]
    mean = float(values.mean())
    if r < 2:
        return mean, float("nan")
    return mean, float(values.std(ddof=1) / np.sqrt(r))


def _proportion_and_se(flags: np.ndarray) -> tuple[float, float]:
    r = flags.shape[0]
    prop = float(flags.mean())
    if r < 2:
        return prop, float("nan")
    return prop, float(np.sqrt(prop * (1.0 - prop) / r))


def run_campaign(
    setting: SimulationSetting,
    cfg: LassoZeroConfig,
    alpha: float,
    s0_grid,
    replications: int,
    rng: SeededRng | None = None,
    calibration_draws: int = 200,
    use_gev: bool | None = None,
    regenerate_design: bool = False,
    threads: int | None = None,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> CampaignResult:
    """FDR / TPR / FWER / exact-recovery table over a sparsity grid.

    The design is drawn once and shared by every instance unless
    ``regenerate_design`` is set (in which case each instance pays its own
    calibration; slow, for robustness studies only). Instances within a
    cell run concurrently; rows are assembled by cell index so the table
    is identical for any thread count.
    """
    if replications < 1:
        raise ValueError("need at least one replication")
    if rng is None:
        rng = SeededRng(cfg.seed)
    s0_grid = [int(s) for s in s0_grid]

    start = time.monotonic()
    calibrations: dict[str, object] = {}

    def calibration_for(design: DesignMatrix):
        key = design_hash(design)
        if key not in calibrations:
            calibrations[key] = simulate_pivotal(
                design,
                cfg,
                calibration_draws,
                rng=rng.child(_CALIBRATION_NS),
                alpha=alpha,
                tol=tol,
                threads=threads,
            )
        return calibrations[key]

    shared_design = None
    if not regenerate_design:
        shared_design = make_design(setting, rng.child(_DESIGN_NS))
        calibration_for(shared_design)

    rows = []
    for cell_index, s0 in enumerate(s0_grid):
        cell_setting = dataclasses.replace(setting, s0=s0)

        def one(i: int, _setting=cell_setting, _cell=cell_index):
            instance_rng = rng.child(_INSTANCE_NS, _cell, i)
            X, y, truth = generate_instance(_setting, instance_rng, design=shared_design)
            try:
                cal = calibration_for(X)
                fit0 = fit(X, y, cfg, tau=0.0, rng=instance_rng.child(3), tol=tol, threads=1)
                tau = threshold_from_calibration(cal, fit0, use_gev=use_gev)
                result = refit_threshold(fit0, tau)
            except LassoZeroError:
                return None
            return score_support(result.support, truth)

        if regenerate_design:
            # calibration inside the worker would race; run sequentially
            scored = [one(i) for i in range(replications)]
        else:
            scored = thread_map(one, range(replications), threads)
        kept = [s for s in scored if s is not None]
        n_failed = replications - len(kept)
        if not kept:
            raise LassoZeroError(f"all replications failed in cell s0={s0}")

        fdp = np.array([s.fdp for s in kept])
        tpp = np.array([s.tpp for s in kept])
        any_false = np.array([s.any_false for s in kept], dtype=np.float64)
        exact = np.array([s.exact for s in kept], dtype=np.float64)
        fdr, fdr_se = _mean_and_se(fdp)
        tpr, tpr_se = _mean_and_se(tpp)
        p_exact, p_exact_se = _proportion_and_se(exact)
        rows.append(
            CampaignRow(
                s0=s0,
                fdr=fdr,
                fdr_se=fdr_se,
                tpr=tpr,
                tpr_se=tpr_se,
                fwer=float(any_false.mean()),
                p_exact=p_exact,
                p_exact_se=p_exact_se,
                n_replications=len(kept),
                n_failed=n_failed,
            )
        )

    manifest = {
        "setting": {
            "kind": setting.kind,
            "n": setting.n,
            "p": setting.p,
            "amplitude": setting.amplitude,
            "sign_rule": setting.sign_rule,
            "sigma": setting.sigma,
            "support_rule": setting.support_rule,
            "csv_path": setting.csv_path,
        },
        "config": {
            "n_noise_cols": cfg.n_noise_cols,
            "n_dictionaries": cfg.n_dictionaries,
            "threshold_rule": cfg.threshold_rule,
            "scaling": cfg.scaling,
            "seed": cfg.seed,
        },
        "alpha": alpha,
        "s0_grid": s0_grid,
        "replications": replications,
        "calibration_draws": calibration_draws,
        "use_gev": use_gev,
        "regenerate_design": regenerate_design,
        "seed": rng.seed,
        "design_hashes": sorted(calibrations.keys()),
        "wall_time_seconds": time.monotonic() - start,
    }
    return CampaignResult(rows=tuple(rows), manifest=manifest)
