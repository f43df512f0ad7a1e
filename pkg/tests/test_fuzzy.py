import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import augmented_lstsq, central_difference_jacobian, random_model

from evofis import fuzzy
from evofis.fuzzy import (
    FisModel,
    FuzzyRule,
    UninitializedModelError,
    ekf_jacobian,
    ekf_update_nearest,
    fire,
    infer,
    rls_update_global,
    rls_update_local,
    rule_outputs,
)


class TestFiring:
    def test_center_fires_one(self):
        model = FisModel(2, 1, [FuzzyRule([0.3, 0.4], 0.5, np.zeros((1, 3)))])
        assert fire(model, [0.3, 0.4]).raw[0] == 1.0

    def test_single_rule_normalizes_to_one(self, rng):
        model = random_model(rng, R=1)
        np.testing.assert_array_equal(fire(model, rng.random(model.input_dim)).normalized, [1.0])

    def test_symmetric_rules(self):
        model = FisModel(1, 1, [
            FuzzyRule([0.2], 0.3, np.zeros((1, 2))),
            FuzzyRule([0.6], 0.3, np.zeros((1, 2))),
        ])
        np.testing.assert_allclose(fire(model, [0.4]).normalized, [0.5, 0.5], atol=1e-15)

    def test_empty_model(self):
        with pytest.raises(UninitializedModelError):
            fire(FisModel(1, 1), [0.0])

    def test_far_input_stays_normalized(self):
        model = FisModel(1, 1, [
            FuzzyRule([0.0], 0.01, np.array([[1.0, 0.0]])),
            FuzzyRule([1.0], 0.01, np.array([[3.0, 0.0]])),
        ])
        lam = fire(model, [50.0]).normalized
        assert np.all(np.isfinite(lam)) and lam.sum() == pytest.approx(1.0)
        assert infer(model, [50.0])[0] == pytest.approx(3.0)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 10_000))
    def test_normalized_sums_to_one(self, seed):
        rng = np.random.default_rng(seed)
        model = random_model(rng)
        lam = fire(model, 2 * rng.random(model.input_dim) - 0.5).normalized
        assert abs(lam.sum() - 1.0) < 1e-12


class TestInference:
    def test_constant_consequent(self, rng):
        model = FisModel(2, 1, [FuzzyRule([0, 0], 1, np.array([[3.0, 0.0, 0.0]]))])
        assert infer(model, rng.random(2))[0] == 3.0

    def test_equal_consequents(self, rng):
        C = np.array([[0.5, 1.0, -2.0]])
        model = FisModel(2, 1, [FuzzyRule(rng.random(2), 0.3, C) for _ in range(3)])
        u = rng.random(2)
        assert infer(model, u)[0] == pytest.approx(C @ np.r_[1, u], abs=1e-14)

    def test_two_rule_average(self):
        model = FisModel(1, 1, [
            FuzzyRule([0.2], 0.3, np.array([[0.0, 0.0]])),
            FuzzyRule([0.6], 0.3, np.array([[1.0, 0.0]])),
        ])
        assert infer(model, [0.4])[0] == pytest.approx(0.5, abs=1e-15)

    def test_dimension_check(self):
        model = FisModel(2, 1, [FuzzyRule([0, 0], 1, np.zeros((1, 3)))])
        with pytest.raises(ValueError):
            infer(model, [1.0])

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 10_000))
    def test_convex_combination(self, seed):
        rng = np.random.default_rng(seed)
        model = random_model(rng)
        u = rng.random(model.input_dim)
        y = infer(model, u)
        outs = rule_outputs(model, u)
        assert np.all(y >= outs.min(axis=0) - 1e-12)
        assert np.all(y <= outs.max(axis=0) + 1e-12)


class TestRLS:
    def linear_stream(self, rng, n=50):
        u = rng.random(n)
        return u, 2 * u + 1

    def test_global_recovers_line(self, rng):
        model = FisModel(1, 1, [FuzzyRule([0.5], 1.0, np.zeros((1, 2)))])
        fuzzy.init_global_covariance(model, omega=1e8)
        U, V = self.linear_stream(rng)
        for u, v in zip(U, V):
            rls_update_global(model, [u], [v])
        np.testing.assert_allclose(model.rules[0].consequent, [[1.0, 2.0]], atol=1e-6)

    def test_local_recovers_line(self, rng):
        rule = FuzzyRule([0.5], 1.0, np.zeros((1, 2)), 1e8 * np.eye(2))
        U, V = self.linear_stream(rng)
        for u, v in zip(U, V):
            rls_update_local(rule, 1.0, [u], [v])
        np.testing.assert_allclose(rule.consequent, [[1.0, 2.0]], atol=1e-6)

    def test_zero_innovation(self):
        model = FisModel(1, 1, [FuzzyRule([0.5], 1.0, np.array([[1.0, 2.0]]))])
        fuzzy.init_global_covariance(model)
        P0 = model.global_covariance.copy()
        rls_update_global(model, [0.3], infer(model, [0.3]))
        np.testing.assert_array_equal(model.rules[0].consequent, [[1.0, 2.0]])
        assert np.trace(model.global_covariance) < np.trace(P0)

    def test_zero_weight_leaves_rule(self):
        rule = FuzzyRule([0.5], 1.0, np.array([[0.1, 0.2]]), 1000 * np.eye(2))
        before = rule.copy()
        rls_update_local(rule, 0.0, [0.9], [5.0])
        np.testing.assert_array_equal(rule.consequent, before.consequent)
        np.testing.assert_array_equal(rule.covariance, before.covariance)

    @pytest.mark.parametrize("seed", range(5))
    def test_local_weight_one_equals_global_single_rule(self, seed):
        rng = np.random.default_rng(seed)
        d, m = 3, 2
        rule = FuzzyRule(rng.random(d), 0.7, np.zeros((m, d + 1)), 1000 * np.eye(d + 1))
        model = FisModel(d, m, [rule.copy()])
        fuzzy.init_global_covariance(model, 1000)
        for _ in range(60):
            u, v = rng.random(d), rng.random(m)
            rls_update_local(rule, 1.0, u, v)
            rls_update_global(model, u, v)
        np.testing.assert_allclose(rule.consequent, model.rules[0].consequent, atol=1e-9)

    @pytest.mark.parametrize("seed", range(10))
    def test_global_equals_batch_least_squares(self, seed):
        rng = np.random.default_rng(seed)
        model = random_model(rng)
        for r in model.rules:
            r.consequent[:] = 0.0
        fuzzy.init_global_covariance(model)
        n = int(rng.integers(20, 100))
        U, V = rng.random((n, model.input_dim)), rng.random((n, model.output_dim))
        X = np.array([fuzzy.stacked_regressor(model, u) for u in U])
        for u, v in zip(U, V):
            rls_update_global(model, u, v)
        expected = augmented_lstsq(X, V, fuzzy.DEFAULT_OMEGA)
        np.testing.assert_allclose(fuzzy.stacked_consequents(model), expected, atol=1e-6)

    @pytest.mark.parametrize("seed", range(10))
    def test_weighted_local_equals_weighted_least_squares(self, seed):
        rng = np.random.default_rng(100 + seed)
        d, m, n = 2, 1, 40
        rule = FuzzyRule(rng.random(d), 0.5, np.zeros((m, d + 1)), 1000 * np.eye(d + 1))
        U, V, W = rng.random((n, d)), rng.random((n, m)), rng.random(n)
        for u, v, w in zip(U, V, W):
            rls_update_local(rule, w, u, v)
        X = np.hstack([np.ones((n, 1)), U]) * np.sqrt(W)[:, None]
        expected = augmented_lstsq(X, V * np.sqrt(W)[:, None], 1000)
        np.testing.assert_allclose(rule.consequent.T, expected, atol=1e-6)

    def test_covariance_stays_symmetric(self, rng):
        model = random_model(rng, R=3)
        fuzzy.init_global_covariance(model)
        for _ in range(200):
            rls_update_global(model, rng.random(model.input_dim), rng.random(model.output_dim))
        P = model.global_covariance
        assert np.abs(P - P.T).max() < 1e-10

    def test_dimension_mismatch(self, rng):
        model = random_model(rng, d=2, m=1)
        fuzzy.init_global_covariance(model)
        with pytest.raises(ValueError):
            rls_update_global(model, [0.1, 0.2], [0.1, 0.2])


class TestEKF:
    @pytest.mark.parametrize("seed", range(100))
    def test_jacobian_matches_finite_differences(self, seed):
        rng = np.random.default_rng(seed)
        model = random_model(rng)
        i = int(rng.integers(model.n_rules))
        u = rng.random(model.input_dim)
        J = ekf_jacobian(model, i, u)
        J_fd = central_difference_jacobian(model, i, u)
        scale = np.maximum(np.abs(J), np.abs(J_fd))
        assert np.all(np.abs(J - J_fd) <= 1e-4 * scale + 1e-9)

    def test_consequent_only_block(self, rng):
        model = random_model(rng, d=2, m=2, R=2)
        u = rng.random(2)
        full = ekf_jacobian(model, 1, u)
        part = ekf_jacobian(model, 1, u, consequent_only=True)
        np.testing.assert_array_equal(full[:, :part.shape[1]], part)

    def test_zero_innovation(self, rng):
        model = random_model(rng, with_ekf_cov=True)
        u = rng.random(model.input_dim)
        before = model.copy()
        ekf_update_nearest(model, 0, u, infer(model, u))
        for a, b in zip(model.rules, before.rules):
            np.testing.assert_array_equal(a.consequent, b.consequent)
            np.testing.assert_array_equal(a.center, b.center)
            np.testing.assert_array_equal(a.width, b.width)

    def test_monotone_error_on_single_rule(self):
        p = fuzzy.ekf_parameter_count(2, 1)
        model = FisModel(2, 1, [FuzzyRule([0.2, 0.3], 0.5, np.zeros((1, 3)), np.eye(p))])
        u, v = np.array([0.6, 0.1]), np.array([0.9])
        errors = []
        for _ in range(20):
            ekf_update_nearest(model, 0, u, v)
            errors.append(abs(v[0] - infer(model, u)[0]))
        assert all(b < a for a, b in zip(errors, errors[1:]))
        assert errors[-1] < errors[0]

    def test_widths_stay_above_floor(self, rng):
        model = random_model(rng, d=2, m=1, R=2, with_ekf_cov=True)
        for r in model.rules:
            r.covariance *= 1e4
        for _ in range(200):
            u = rng.random(2)
            ekf_update_nearest(model, 0, u, rng.normal(size=1) * 10)
            assert all(np.all(r.width >= fuzzy.WIDTH_FLOOR) for r in model.rules)
            P = model.rules[0].covariance
            assert np.abs(P - P.T).max() < 1e-10

    def test_invalid_index(self, rng):
        model = random_model(rng, with_ekf_cov=True)
        with pytest.raises(IndexError):
            ekf_update_nearest(model, 99, rng.random(model.input_dim), np.zeros(model.output_dim))


class TestSerialization:
    def test_json_round_trip_is_bit_exact(self, rng):
        model = random_model(rng, d=3, m=2, R=3, with_ekf_cov=True)
        fuzzy.init_global_covariance(model)
        back = FisModel.from_json(model.to_json())
        assert back.to_json() == model.to_json()
        for a, b in zip(model.rules, back.rules):
            assert a.consequent.tobytes() == b.consequent.tobytes()
            assert a.covariance.tobytes() == b.covariance.tobytes()

    def test_document_shape(self, rng):
        doc = random_model(rng, d=2, m=1, R=1).to_dict()
        assert set(doc) == {"input_dim", "output_dim", "rules"}
        assert set(doc["rules"][0]) == {"center", "width", "consequent"}

    def test_rejects_bad_width(self):
        with pytest.raises(ValueError):
            FuzzyRule([0.0], 0.0, np.zeros((1, 2)))
