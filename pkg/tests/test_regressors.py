"""Regressor behavior, hand-computed cases, and the CART split oracle."""

import itertools

import numpy as np
import pytest

from fagc.errors import (
    DimensionMismatch,
    EmptyTrainingSet,
    NonFinite,
    NotFitted,
    ParamOutOfRange,
)
from fagc.regressors import (
    REGRESSOR_KINDS,
    AdaBoostR2Regressor,
    BaggingRegressor,
    DecisionTreeRegressor,
    ExtraTreeRegressor,
    KNNRegressor,
    LinearRegressor,
    make_regressor,
)

ALL_MODELS = [
    LinearRegressor(),
    KNNRegressor(),
    DecisionTreeRegressor(),
    ExtraTreeRegressor(seed=7),
    BaggingRegressor(seed=7),
    AdaBoostR2Regressor(seed=7),
]


def brute_force_split(X, y, min_leaf=1):
    """Naive best split: enumerate every feature and midpoint threshold,
    minimize the summed child SSE (ties keep the first candidate scanned)."""
    def sse(values):
        s = float(np.sum(values))
        sq = float(np.sum(values * values))
        return sq - s * s / values.size

    best = None
    best_score = np.inf
    for f in range(X.shape[1]):
        levels = sorted(set(X[:, f]))
        for a, b in zip(levels, levels[1:]):
            t = (a + b) / 2.0
            if t == b:  # same rounding guard as the implementation
                t = a
            mask = X[:, f] <= t
            n_left = int(mask.sum())
            if n_left < min_leaf or y.size - n_left < min_leaf:
                continue
            score = sse(y[mask]) + sse(y[~mask])
            if score < best_score:
                best_score = score
                best = (f, t)
    return best


def walk_internal_nodes(tree, X, idx=None):
    """Yield (node, subset_indices) for every internal node of a fitted tree."""
    if idx is None:
        idx = np.arange(X.shape[0])
    if "value" in tree:
        return
    yield tree, idx
    mask = X[idx, tree["feature"]] <= tree["threshold"]
    yield from walk_internal_nodes(tree["left"], X, idx[mask])
    yield from walk_internal_nodes(tree["right"], X, idx[~mask])


class TestFitPredictContract:
    @pytest.mark.parametrize("model", ALL_MODELS, ids=lambda m: m.kind)
    def test_predict_before_fit_rejected(self, model):
        with pytest.raises(NotFitted):
            model.predict([[1.0, 2.0]])

    @pytest.mark.parametrize("model", ALL_MODELS, ids=lambda m: m.kind)
    def test_fit_returns_new_instance(self, model, rng):
        X = rng.normal(size=(10, 3))
        y = rng.normal(size=10)
        fitted = model.fit(X, y)
        assert fitted is not model
        assert not model.is_fitted
        assert fitted.is_fitted

    @pytest.mark.parametrize("model", ALL_MODELS, ids=lambda m: m.kind)
    def test_refit_leaves_first_fit_untouched(self, model, rng):
        X = rng.normal(size=(10, 3))
        y = rng.normal(size=10)
        first = model.fit(X, y)
        before = first.predict(X).copy()
        second = first.fit(X[:5], y[:5] + 100.0)
        assert second is not first
        np.testing.assert_array_equal(first.predict(X), before)

    @pytest.mark.parametrize("model", ALL_MODELS, ids=lambda m: m.kind)
    def test_dimension_checks(self, model, rng):
        X = rng.normal(size=(8, 4))
        y = rng.normal(size=8)
        fitted = model.fit(X, y)
        with pytest.raises(DimensionMismatch):
            fitted.predict(rng.normal(size=(3, 5)))
        with pytest.raises(DimensionMismatch):
            model.fit(X, y[:-1])

    def test_empty_training_set(self):
        with pytest.raises(EmptyTrainingSet):
            LinearRegressor().fit(np.empty((0, 3)), np.empty(0))

    def test_non_finite_rejected(self):
        with pytest.raises(NonFinite):
            LinearRegressor().fit([[1.0], [np.nan]], [0.0, 1.0])

    @pytest.mark.parametrize("model", ALL_MODELS, ids=lambda m: m.kind)
    def test_predictions_finite(self, model, rng):
        X = rng.normal(size=(12, 5))
        y = rng.normal(size=12) * 40 + 100
        assert np.isfinite(model.fit(X, y).predict(rng.normal(size=(30, 5)))).all()


class TestLinear:
    def test_two_points_determine_a_line(self):
        fitted = LinearRegressor().fit([[0.0], [1.0]], [1.0, 3.0])
        assert fitted.state["coef"][0] == pytest.approx(2.0, abs=1e-6)
        assert fitted.state["intercept"] == pytest.approx(1.0, abs=1e-6)
        assert fitted.predict([[2.0]])[0] == pytest.approx(5.0, abs=1e-6)

    def test_wide_data_uses_same_ridge_solution(self, rng):
        # Dual and primal routes both solve the jittered normal equations.
        X = rng.normal(size=(5, 40))
        y = rng.normal(size=5)
        fitted = LinearRegressor().fit(X, y)
        np.testing.assert_allclose(fitted.predict(X), y, atol=1e-4)

    def test_from_weights_constant_teacher(self):
        model = LinearRegressor.from_weights(np.zeros(4), 5.0)
        np.testing.assert_array_equal(model.predict(np.ones((3, 4))), [5.0] * 3)


class TestKNN:
    def test_k1_reproduces_training_labels(self, rng):
        X = rng.normal(size=(9, 3))
        y = rng.normal(size=9)
        fitted = KNNRegressor(k=1).fit(X, y)
        np.testing.assert_array_equal(fitted.predict(X), y)

    def test_hand_computed_five_points(self):
        X = [[0.0], [1.0], [2.0], [10.0], [11.0]]
        y = [0.0, 1.0, 2.0, 10.0, 11.0]
        fitted = KNNRegressor(k=3).fit(X, y)
        # Neighbors of 0.6 are x=1, 0, 2 -> mean 1; of 10.4: 10, 11, 2 -> 23/3.
        np.testing.assert_allclose(fitted.predict([[0.6], [10.4]]),
                                   [1.0, 23.0 / 3.0])

    def test_distance_ties_break_by_training_index(self):
        X = [[0.0], [2.0], [2.0], [2.0]]
        y = [0.0, 10.0, 20.0, 30.0]
        fitted = KNNRegressor(k=2).fit(X, y)
        # Query at 2.0: all three duplicates tie; the two earliest win.
        assert fitted.predict([[2.0]])[0] == pytest.approx(15.0)

    def test_k_capped_at_training_size(self):
        fitted = KNNRegressor(k=5).fit([[0.0], [1.0]], [2.0, 4.0])
        assert fitted.predict([[0.5]])[0] == pytest.approx(3.0)


class TestDecisionTree:
    def test_two_point_fit_is_exact(self):
        fitted = DecisionTreeRegressor().fit([[0.0], [1.0]], [0.0, 1.0])
        np.testing.assert_array_equal(fitted.predict([[0.0], [1.0]]), [0.0, 1.0])

    def test_single_split_at_half(self):
        fitted = DecisionTreeRegressor().fit([[0.0], [1.0]], [0.0, 1.0])
        assert fitted.state["tree"]["threshold"] == 0.5
        assert fitted.predict([[0.9]])[0] == 1.0

    def test_perfect_fit_on_distinct_inputs(self, rng):
        X = rng.normal(size=(25, 4))
        y = rng.normal(size=25)
        fitted = DecisionTreeRegressor().fit(X, y)
        np.testing.assert_allclose(fitted.predict(X), y, atol=1e-12)

    def test_xor_pattern_is_fit_exactly(self):
        # Every single split has zero variance reduction, yet the tree must
        # keep splitting to reach pure leaves.
        X = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
        y = np.array([0.0, 1.0, 1.0, 0.0])
        fitted = DecisionTreeRegressor().fit(X, y)
        np.testing.assert_array_equal(fitted.predict(X), y)

    def test_max_depth_limits_tree(self):
        X = np.arange(8.0).reshape(-1, 1)
        y = np.arange(8.0)
        fitted = DecisionTreeRegressor(max_depth=1).fit(X, y)
        tree = fitted.state["tree"]
        assert "value" in tree["left"] and "value" in tree["right"]

    def test_splits_match_brute_force_on_integer_grids(self):
        # 1-D integer datasets: every internal node's split must equal the
        # naive enumeration on that node's subset.
        checked = 0
        for n in (2, 3, 4):
            for xs in itertools.combinations(range(5), n):
                for ys in itertools.product((0, 1, 2), repeat=n):
                    X = np.array(xs, dtype=float).reshape(-1, 1)
                    y = np.array(ys, dtype=float)
                    fitted = DecisionTreeRegressor().fit(X, y)
                    for node, idx in walk_internal_nodes(fitted.state["tree"], X):
                        expected = brute_force_split(X[idx], y[idx])
                        assert expected == (node["feature"], node["threshold"])
                        checked += 1
        assert checked > 200


class TestExtraTree:
    def test_perfect_fit_on_distinct_inputs(self, rng):
        X = rng.normal(size=(20, 3))
        y = rng.normal(size=20)
        fitted = ExtraTreeRegressor(seed=3).fit(X, y)
        np.testing.assert_allclose(fitted.predict(X), y, atol=1e-12)

    def test_same_seed_same_tree(self, rng):
        X = rng.normal(size=(30, 5))
        y = rng.normal(size=30)
        a = ExtraTreeRegressor(seed=11).fit(X, y)
        b = ExtraTreeRegressor(seed=11).fit(X, y)
        assert a.state == b.state
        np.testing.assert_array_equal(a.predict(X), b.predict(X))

    def test_different_seed_usually_differs(self, rng):
        X = rng.normal(size=(30, 5))
        y = rng.normal(size=30)
        a = ExtraTreeRegressor(seed=1).fit(X, y)
        b = ExtraTreeRegressor(seed=2).fit(X, y)
        assert a.state != b.state


class TestEnsembles:
    @pytest.mark.parametrize("model", [BaggingRegressor(seed=5),
                                       AdaBoostR2Regressor(seed=5)],
                             ids=lambda m: m.kind)
    def test_predictions_within_training_range(self, model, rng):
        X = rng.normal(size=(25, 4))
        y = rng.uniform(50.0, 90.0, size=25)
        fitted = model.fit(X, y)
        preds = fitted.predict(rng.normal(size=(200, 4)) * 3)
        assert preds.min() >= y.min() - 1e-12
        assert preds.max() <= y.max() + 1e-12

    @pytest.mark.parametrize("cls", [BaggingRegressor, AdaBoostR2Regressor])
    def test_bitwise_determinism(self, cls, rng):
        X = rng.normal(size=(20, 3))
        y = rng.normal(size=20)
        a = cls(seed=9).fit(X, y)
        b = cls(seed=9).fit(X, y)
        assert a.state == b.state
        np.testing.assert_array_equal(a.predict(X), b.predict(X))

    def test_bagging_is_mean_of_members(self, rng):
        from fagc.regressors import _tree_predict

        X = rng.normal(size=(15, 2))
        y = rng.normal(size=15)
        fitted = BaggingRegressor(n_estimators=10, seed=2).fit(X, y)
        member = np.vstack([_tree_predict(t, X) for t in fitted.state["trees"]])
        np.testing.assert_allclose(fitted.predict(X), member.mean(axis=0))

    def test_adaboost_perfect_stage_stops_early(self):
        # A depth-3 tree fits two points exactly, so boosting stops after one
        # stage with weight 1.
        fitted = AdaBoostR2Regressor(seed=0).fit([[0.0], [1.0]], [0.0, 1.0])
        assert len(fitted.state["stages"]) == 1
        assert fitted.state["stages"][0]["weight"] == 1.0

    def test_adaboost_weighted_median_single_stage(self, rng):
        X = rng.normal(size=(6, 2))
        y = rng.normal(size=6)
        fitted = AdaBoostR2Regressor(n_estimators=1, seed=4).fit(X, y)
        from fagc.regressors import _tree_predict

        expected = _tree_predict(fitted.state["stages"][0]["tree"], X)
        np.testing.assert_array_equal(fitted.predict(X), expected)


class TestRegistry:
    def test_all_kinds_constructible(self):
        for kind in REGRESSOR_KINDS:
            assert make_regressor(kind).kind == kind

    def test_unknown_kind(self):
        with pytest.raises(ParamOutOfRange):
            make_regressor("svm")

    def test_registry_has_paper_model_set(self):
        assert set(REGRESSOR_KINDS) == {"linear", "knn", "adaboost", "extra_tree",
                                        "decision_tree", "bagging"}
