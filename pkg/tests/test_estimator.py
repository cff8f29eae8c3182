import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lassozero.bp import solve_bp
from lassozero.design import standardize
from lassozero.estimator import (
    LassoZeroConfig,
    apply_threshold,
    fit,
    median_aggregate,
    refit_threshold,
    scale_dictionary,
)
from lassozero.rng import SeededRng, gaussian_matrix


class TestApplyThreshold:
    def test_hard_boundary_is_inclusive(self):
        # a coefficient exactly at the threshold is removed
        assert apply_threshold(np.array([0.4]), 0.4, "hard")[0] == 0.0
        assert apply_threshold(np.array([-0.4]), 0.4, "hard")[0] == 0.0
        assert apply_threshold(np.array([0.41]), 0.4, "hard")[0] == pytest.approx(0.41)

    def test_soft_shrinks(self):
        out = apply_threshold(np.array([1.0, -1.0, 0.2]), 0.4, "soft")
        np.testing.assert_allclose(out, [0.6, -0.6, 0.0], atol=1e-14)

    def test_zero_threshold_keeps_signs(self):
        x = np.array([-2.0, 0.0, 0.5])
        for rule in ("hard", "soft"):
            out = apply_threshold(x, 0.0, rule)
            np.testing.assert_array_equal(np.sign(out), np.sign(x))

    @given(
        st.lists(st.floats(-10, 10), min_size=1, max_size=12),
        st.floats(0, 5),
        st.floats(0, 5),
        st.sampled_from(["hard", "soft"]),
    )
    @settings(max_examples=200, deadline=None)
    def test_support_monotone_and_sign_preserving(self, xs, tau1, tau2, rule):
        x = np.array(xs)
        lo, hi = sorted((tau1, tau2))
        s_lo = set(np.flatnonzero(apply_threshold(x, lo, rule)))
        s_hi = set(np.flatnonzero(apply_threshold(x, hi, rule)))
        assert s_hi <= s_lo
        out = apply_threshold(x, lo, rule)
        assert all(s in (0.0, np.sign(x[j])) for j, s in enumerate(np.sign(out)))


class TestMedianAggregate:
    def test_single_replicate_identity(self):
        b = np.array([[1.0, -2.0, 0.0]])
        np.testing.assert_array_equal(median_aggregate(b), b[0])

    def test_even_count_midpoint(self):
        assert median_aggregate(np.array([[1.0], [3.0]]))[0] == 2.0

    def test_majority_zeros_win(self):
        col = np.array([[5.0], [-5.0], [0.0], [0.0], [0.0]])
        assert median_aggregate(col)[0] == 0.0

    def test_odd_count_median(self):
        col = np.array([[-1.0], [0.0], [2.0]])
        assert median_aggregate(col)[0] == 0.0


class TestConfig:
    def test_zero_width_forces_single_dictionary(self):
        cfg = LassoZeroConfig(n_noise_cols=0, n_dictionaries=30)
        assert cfg.n_dictionaries == 1

    def test_default_width_is_n(self):
        cfg = LassoZeroConfig()
        assert cfg.width_for(17) == 17
        assert LassoZeroConfig(n_noise_cols=5).width_for(17) == 5

    def test_validation(self):
        with pytest.raises(ValueError):
            LassoZeroConfig(n_dictionaries=0)
        with pytest.raises(ValueError):
            LassoZeroConfig(threshold_rule="clip")
        with pytest.raises(ValueError):
            LassoZeroConfig(scaling="bogus")


class TestScaleDictionary:
    def test_match_standardized_unit_sd(self, rng, small_standardized_design):
        G = gaussian_matrix(rng.child(1), 25, 10) * 3.0
        Gs = scale_dictionary(G, small_standardized_design, "match_standardized")
        np.testing.assert_allclose(Gs.std(axis=0, ddof=1), np.ones(10), atol=1e-10)

    def test_match_quantile_self_recovers_common_norm(self, rng):
        # matching a design against itself recovers its own column norm
        G = gaussian_matrix(rng.child(2), 40, 30)
        G = G / np.linalg.norm(G, axis=0) * 3.7
        from lassozero.design import DesignMatrix

        X = DesignMatrix(G)
        Gs = scale_dictionary(G, X, "match_quantile", rng=rng.child(3), mc_draws=400)
        norms = np.linalg.norm(Gs, axis=0)
        assert np.allclose(norms, norms[0], atol=1e-9)
        assert norms[0] == pytest.approx(3.7, rel=0.02)

    def test_match_quantile_noise_level_cancels(self, rng, small_standardized_design):
        # the matched norm is a ratio of two statistics that are both
        # linear in the noise scale, so it is exactly scale-free
        G = gaussian_matrix(rng.child(4), 25, 25)
        a = scale_dictionary(
            G, small_standardized_design, "match_quantile", rng=rng.child(5), mc_draws=200
        )
        b = scale_dictionary(
            G, small_standardized_design, "match_quantile", rng=rng.child(5), mc_draws=200
        )
        np.testing.assert_array_equal(a, b)

    def test_match_quantile_needs_rng(self, small_standardized_design):
        with pytest.raises(ValueError):
            scale_dictionary(np.ones((25, 2)), small_standardized_design, "match_quantile")


class TestFit:
    def test_plain_reduction_at_zero_width(self, rng, small_standardized_design):
        X = small_standardized_design
        beta0 = np.zeros(40)
        beta0[[2, 11]] = 3.0
        y = X.values @ beta0  # noiseless keeps the plain problem feasible
        cfg = LassoZeroConfig(n_noise_cols=0, seed=9)
        result = fit(X, y, cfg, tau=0.0)
        np.testing.assert_allclose(result.beta_hat, solve_bp(X, y).beta, atol=1e-12)
        assert result.replicate_gammas.shape == (1, 0)

    def test_huge_threshold_empties_support(self, rng, small_standardized_design):
        X = small_standardized_design
        y = rng.child(10).generator().standard_normal(25)
        cfg = LassoZeroConfig(n_noise_cols=10, n_dictionaries=3, seed=9)
        f0 = fit(X, y, cfg, tau=0.0)
        f1 = refit_threshold(f0, float(np.max(np.abs(f0.beta_l1))))
        assert f1.support == frozenset()
        np.testing.assert_array_equal(f1.beta_hat, np.zeros(40))

    def test_fit_invariants_and_determinism(self, rng, small_standardized_design):
        X = small_standardized_design
        beta0 = np.zeros(40)
        beta0[[5, 20, 33]] = 2.5
        y = X.values @ beta0 + rng.child(11).generator().standard_normal(25)
        cfg = LassoZeroConfig(n_noise_cols=25, n_dictionaries=4, seed=3)
        a = fit(X, y, cfg, tau=0.3)
        b = fit(X, y, cfg, tau=0.3, threads=2)
        np.testing.assert_array_equal(a.beta_l1, b.beta_l1)
        np.testing.assert_array_equal(a.replicate_betas, b.replicate_betas)
        # aggregated estimate is the componentwise median, exactly
        np.testing.assert_array_equal(a.beta_l1, np.median(a.replicate_betas, axis=0))
        # thresholding invariants
        assert a.support == frozenset(np.flatnonzero(a.beta_hat))
        dropped = np.abs(a.beta_l1) <= a.tau
        assert np.all(a.beta_hat[dropped] == 0.0)
        kept = ~dropped
        np.testing.assert_array_equal(np.sign(a.beta_hat[kept]), np.sign(a.beta_l1[kept]))

    def test_support_monotone_in_threshold(self, rng, small_standardized_design):
        X = small_standardized_design
        y = rng.child(12).generator().standard_normal(25)
        cfg = LassoZeroConfig(n_noise_cols=25, n_dictionaries=3, seed=4)
        f0 = fit(X, y, cfg, tau=0.0)
        taus = np.linspace(0, float(np.max(np.abs(f0.beta_l1))), 7)
        supports = [refit_threshold(f0, t).support for t in taus]
        for small, big in zip(supports, supports[1:]):
            assert big <= small


def test_fit_rejects_negative_threshold(small_standardized_design):
    with pytest.raises(ValueError):
        fit(small_standardized_design, np.zeros(25), LassoZeroConfig(), tau=-0.1)
