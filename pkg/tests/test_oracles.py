import numpy as np
import pytest

from lassozero.errors import EnumerationTooLarge, NotFound, SingularGram
from lassozero.oracles import (
    kernel_basis,
    l0_oracle,
    prop2_campaign,
    snsp_constant,
    theorem1_campaign,
    uniform_ir_constant,
    verify_prop2,
    verify_prop3,
    verify_theorem1,
)
from lassozero.rng import SeededRng
from oracle_utils import uniform_ir_by_enumeration


class TestSnsp:
    def test_two_column_equal_weights(self):
        # kernel of [1 1] is spanned by (1, -1): on/off mass ratio is 1
        report = snsp_constant(np.array([[1.0, 1.0]]), [0])
        assert report.rho_star == pytest.approx(1.0, abs=1e-8)
        assert report.kernel_dim == 1

    def test_two_column_unequal_weights(self):
        # kernel of [1 2] is spanned by (2, -1): mass on {1} over {0} is 1/2
        report = snsp_constant(np.array([[1.0, 2.0]]), [1])
        assert report.rho_star == pytest.approx(0.5, abs=1e-8)

    def test_trivial_kernel(self):
        report = snsp_constant(np.eye(3), [0, 1])
        assert report.rho_star == 0.0
        assert report.kernel_dim == 0

    def test_kernel_meeting_support_subspace_is_infinite(self):
        # column 2 is a copy of column 0, support contains both: the kernel
        # vector (1, 0, -1) lives entirely on the support
        X = np.array([[1.0, 0.0, 1.0], [0.0, 1.0, 0.0]])
        report = snsp_constant(X, [0, 2])
        assert np.isinf(report.rho_star)
        assert report.witness is not None
        w = report.witness
        assert np.max(np.abs(X @ w)) < 1e-8
        assert np.abs(w[1]) < 1e-8 and np.max(np.abs(w)) > 1e-8

    def test_witness_certifies_ratio(self):
        rng = np.random.default_rng(0)
        for trial in range(10):
            X = rng.standard_normal((6, 10))
            support = rng.choice(10, size=2, replace=False)
            report = snsp_constant(X, support)
            w = report.witness
            assert w is not None
            # witness is in the kernel and attains the reported ratio
            assert np.max(np.abs(X @ w)) <= 1e-8
            on = np.abs(w[sorted(support)]).sum()
            comp = [j for j in range(10) if j not in set(support)]
            off = np.abs(w[comp]).sum()
            assert on == pytest.approx(report.rho_star * off, abs=1e-6)

    def test_ratio_upper_bounds_random_kernel_vectors(self):
        rng = np.random.default_rng(1)
        X = rng.standard_normal((6, 10))
        support = [1, 4, 7]
        report = snsp_constant(X, support)
        N = kernel_basis(X)
        comp = [j for j in range(10) if j not in set(support)]
        for _ in range(200):
            v = N @ rng.standard_normal(N.shape[1])
            on = np.abs(v[support]).sum()
            off = np.abs(v[comp]).sum()
            assert on <= report.rho_star * off + 1e-7

    def test_empty_support(self):
        report = snsp_constant(np.array([[1.0, 1.0]]), [])
        assert report.rho_star == 0.0

    def test_enumeration_bounds(self):
        rng = np.random.default_rng(2)
        with pytest.raises(EnumerationTooLarge):
            snsp_constant(rng.standard_normal((2, 20)), [0])
        with pytest.raises(EnumerationTooLarge):
            snsp_constant(rng.standard_normal((8, 18)), list(range(9)))


class TestUniformIr:
    def test_orthogonal_columns(self):
        assert uniform_ir_constant(np.eye(5), [0, 2]) == 0.0

    def test_no_complement(self):
        rng = np.random.default_rng(3)
        X = rng.standard_normal((5, 3))
        assert uniform_ir_constant(X, [0, 1, 2]) == 0.0

    def test_two_columns_at_angle(self):
        for phi in (0.3, 1.0, 2.2):
            X = np.array([[1.0, np.cos(phi)], [0.0, np.sin(phi)]])
            assert uniform_ir_constant(X, [0]) == pytest.approx(abs(np.cos(phi)), abs=1e-12)

    def test_matches_sign_enumeration(self):
        rng = np.random.default_rng(4)
        for _ in range(10):
            X = rng.standard_normal((8, 12))
            support = sorted(rng.choice(12, size=3, replace=False))
            closed_form = uniform_ir_constant(X, support)
            enumerated = uniform_ir_by_enumeration(X, support)
            assert closed_form == pytest.approx(enumerated, rel=1e-10)

    def test_singular_gram(self):
        X = np.array([[1.0, 1.0, 0.3], [2.0, 2.0, -0.4]])
        with pytest.raises(SingularGram):
            uniform_ir_constant(X, [0, 1])


class TestTheorem1:
    def test_noiseless_recovery(self):
        rng = np.random.default_rng(5)
        X = rng.standard_normal((8, 16))
        beta0 = np.zeros(16)
        beta0[[3, 9]] = [1.0, -2.0]
        record = verify_theorem1(X, beta0, np.zeros(8))
        assert record.noise_fit_l1 == 0.0
        assert record.premise_held
        assert record.constructive_ok and record.sweep_ok

    def test_premise_forced_instances_recover(self):
        records = theorem1_campaign(10, n=8, p=16, s0=2, rng=SeededRng(99))
        assert all(r.premise_held for r in records)
        assert all(r.constructive_ok for r in records)
        assert all(r.sweep_ok for r in records)

    def test_premise_failure_recorded_not_raised(self):
        rng = np.random.default_rng(6)
        X = rng.standard_normal((8, 16))
        report = snsp_constant(X, [0, 1])
        if not np.isfinite(report.rho_star) or report.rho_star >= 1:
            pytest.skip("instance draw happened to violate the kernel condition")
        beta0 = np.zeros(16)
        beta0[[0, 1]] = 1e-6  # far below the premise bound
        record = verify_theorem1(X, beta0, 0.5 * rng.standard_normal(8))
        assert not record.premise_held

    def test_c_rho_formula(self):
        rng = np.random.default_rng(7)
        X = rng.standard_normal((8, 16))
        beta0 = np.zeros(16)
        beta0[[2, 5]] = 50.0
        record = verify_theorem1(X, beta0, 0.1 * rng.standard_normal(8))
        expected = 2.0 * (3.0 + record.rho_star) / (1.0 - record.rho_star)
        assert record.c_rho == pytest.approx(expected, rel=1e-12)
        assert record.constructive_tau == pytest.approx(
            record.c_rho / 2.0 * record.noise_fit_l1, rel=1e-12
        )


class TestProp2:
    def test_orthogonal_design(self):
        record = verify_prop2(np.eye(6), [1, 3])
        assert record.theta == 0.0 and record.rho_star == 0.0 and record.ok

    def test_random_instances_no_violation(self):
        records = prop2_campaign(15, n=10, p=15, s0_choices=(1, 2, 3), rng=SeededRng(7))
        assert all(not r.vacuous for r in records)
        assert all(r.theta < 1 for r in records)
        assert all(r.ok for r in records)

    def test_vacuous_marker_when_theta_large(self):
        # nearly collinear support and complement columns push theta past 1
        X = np.array([[1.0, 0.0, 0.999], [0.0, 1.0, 0.9], [0.0, 0.0, 0.01]])
        record = verify_prop2(X[:, [0, 2, 1]], [0])
        if record.theta >= 1:
            assert record.vacuous and record.ok
        else:
            assert not record.vacuous


class TestL0Oracle:
    def test_planted_single_column(self):
        rng = np.random.default_rng(8)
        X = rng.standard_normal((6, 12))
        beta, support = l0_oracle(X, X[:, 4] * 2.5, k_max=2)
        assert support == frozenset({4})
        assert beta[4] == pytest.approx(2.5)

    def test_zero_response(self):
        beta, support = l0_oracle(np.eye(3), np.zeros(3), k_max=1)
        assert support == frozenset()
        np.testing.assert_array_equal(beta, np.zeros(3))

    def test_prefers_combined_column(self):
        rng = np.random.default_rng(9)
        base = rng.standard_normal((6, 2))
        X = np.column_stack([base[:, 0], base[:, 1], base.sum(axis=1), rng.standard_normal(6)])
        beta, support = l0_oracle(X, base.sum(axis=1), k_max=2)
        assert support == frozenset({2})

    def test_not_found(self):
        rng = np.random.default_rng(10)
        X = rng.standard_normal((6, 8))
        with pytest.raises(NotFound):
            l0_oracle(X, rng.standard_normal(6), k_max=1)

    def test_bounds(self):
        with pytest.raises(EnumerationTooLarge):
            l0_oracle(np.ones((2, 21)), np.ones(2), k_max=1)
        with pytest.raises(EnumerationTooLarge):
            l0_oracle(np.ones((2, 5)), np.ones(2), k_max=7)


class TestProp3:
    def test_null_model_matches_alpha(self):
        rng = SeededRng(11)
        X = rng.child(0).generator().standard_normal((40, 8))
        fwer = verify_prop3(X, np.zeros(8), sigma=1.0, alpha=0.1, n_runs=400, rng=rng.child(1))
        se = np.sqrt(0.1 * 0.9 / 400)
        assert abs(fwer - 0.1) <= 3 * se

    def test_alpha_tiny_no_discoveries(self):
        rng = SeededRng(12)
        X = rng.child(0).generator().standard_normal((30, 5))
        fwer = verify_prop3(X, np.zeros(5), sigma=1.0, alpha=0.002, n_runs=50, rng=rng.child(1))
        assert fwer == 0.0

    def test_requires_full_column_rank(self):
        X = np.ones((10, 2))
        with pytest.raises(ValueError):
            verify_prop3(X, np.zeros(2), sigma=1.0, alpha=0.05, n_runs=10, rng=SeededRng(0))


def test_bp_support_matches_l0_oracle_on_planted_instances():
    # when the kernel condition identifies a unique sparsest solution, the
    # l1 fit must land on the same support the exhaustive search finds
    from lassozero.bp import solve_bp

    rng = np.random.default_rng(14)
    checked = 0
    while checked < 10:
        X = rng.standard_normal((6, 12))
        support = sorted(rng.choice(12, size=2, replace=False))
        if snsp_constant(X, support).rho_star >= 1:
            continue
        beta0 = np.zeros(12)
        beta0[support] = rng.choice([-1.0, 1.0], size=2) * (1 + rng.random(2))
        y = X @ beta0
        _, l0_support = l0_oracle(X, y, k_max=2)
        bp_support = frozenset(np.flatnonzero(solve_bp(X, y).beta))
        assert bp_support <= l0_support
        assert bp_support == frozenset(int(j) for j in support)
        checked += 1


def test_noiseless_bp_exactness_under_kernel_condition():
    # the noiseless anchor: when the kernel ratio is below one for the
    # support, the l1 fit to X beta0 is beta0 itself
    from lassozero.bp import solve_bp

    rng = np.random.default_rng(13)
    found = 0
    for _ in range(20):
        X = rng.standard_normal((8, 16))
        support = rng.choice(16, size=2, replace=False)
        report = snsp_constant(X, support)
        if not np.isfinite(report.rho_star) or report.rho_star >= 1:
            continue
        found += 1
        beta0 = np.zeros(16)
        beta0[support] = rng.choice([-1.0, 1.0], size=2) * (1 + rng.random(2))
        sol = solve_bp(X, X @ beta0)
        np.testing.assert_allclose(sol.beta, beta0, atol=1e-7)
    assert found >= 10
