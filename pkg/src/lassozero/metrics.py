"""Support-recovery metrics.

Realized per-instance quantities; campaign code averages them into FDR,
TPR, FWER and exact-recovery estimates.
"""

from __future__ import annotations

from dataclasses import dataclass

from .design import GroundTruth


@dataclass(frozen=True)
class SupportMetrics:
    fdp: float  # |S_hat \ S0| / max(|S_hat|, 1)
    tpp: float  # |S_hat & S0| / |S0|, vacuously 1 when S0 is empty
    any_false: bool
    exact: bool


def score_support(estimated, truth: GroundTruth) -> SupportMetrics:
    """Compare an estimated support against the ground truth."""
    est = frozenset(int(j) for j in estimated)
    if est and (min(est) < 0 or max(est) >= truth.p):
        raise ValueError("estimated support contains out-of-range indices")
    true_support = truth.support

    false_hits = len(est - true_support)
    true_hits = len(est & true_support)
    fdp = false_hits / max(len(est), 1)
    tpp = true_hits / len(true_support) if true_support else 1.0
    return SupportMetrics(
        fdp=fdp,
        tpp=tpp,
        any_false=false_hits > 0,
        exact=est == true_support,
    )
