"""From-scratch regression models used as pseudo-label teachers and students.

Six model families: ordinary least squares (with a ridge jitter so the
normal equations stay solvable when dimensions exceed samples), k-nearest
neighbors, CART regression trees, extremely randomized trees, bootstrap
bagging, and Drucker's AdaBoost.R2.

``fit`` never mutates the instance it is called on: it returns a fitted
copy, so a configured model can be reused across folds. Fitted state is a
plain nested structure of Python ints/floats/lists/dicts, which makes model
persistence a straight JSON dump with exact float round-trips.
"""

from __future__ import annotations

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyTrainingSet,
    NonFinite,
    NotFitted,
    ParamOutOfRange,
)


def _validate_training(X, y) -> tuple[np.ndarray, np.ndarray]:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2:
        raise DimensionMismatch(f"X must be a 2-D matrix, got shape {X.shape}")
    if X.shape[0] == 0:
        raise EmptyTrainingSet("cannot fit on zero samples")
    if y.ndim != 1 or y.size != X.shape[0]:
        raise DimensionMismatch(
            f"y has length {y.size}, expected {X.shape[0]}"
        )
    if not (np.isfinite(X).all() and np.isfinite(y).all()):
        raise NonFinite("training data contains NaN or Inf")
    return X, y


def _validate_query(X, feature_dim: int) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise DimensionMismatch(f"X must be a 2-D matrix, got shape {X.shape}")
    if X.shape[1] != feature_dim:
        raise DimensionMismatch(
            f"model was fitted on {feature_dim} features, got {X.shape[1]}"
        )
    if not np.isfinite(X).all():
        raise NonFinite("query data contains NaN or Inf")
    return X


class Regressor:
    """Common fit/predict plumbing; subclasses implement the algorithms."""

    kind: str = ""

    def __init__(self):
        self._state: dict | None = None
        self._feature_dim: int | None = None

    @property
    def is_fitted(self) -> bool:
        return self._state is not None

    @property
    def feature_dim(self) -> int:
        if self._feature_dim is None:
            raise NotFitted(f"{self.kind} model has not been fitted")
        return self._feature_dim

    @property
    def state(self) -> dict:
        """The fitted state as a JSON-serializable structure."""
        if self._state is None:
            raise NotFitted(f"{self.kind} model has not been fitted")
        return self._state

    def get_params(self) -> dict:
        raise NotImplementedError

    def clone(self) -> "Regressor":
        """An unfitted copy with the same hyperparameters."""
        return type(self)(**self.get_params())

    def fit(self, X, y) -> "Regressor":
        """Return a fitted copy; ``self`` stays untouched."""
        X, y = _validate_training(X, y)
        fitted = self.clone()
        fitted._state = fitted._fit_state(X, y)
        fitted._feature_dim = X.shape[1]
        return fitted

    def predict(self, X) -> np.ndarray:
        if self._state is None:
            raise NotFitted(f"{self.kind} model has not been fitted")
        X = _validate_query(X, self._feature_dim)
        return self._predict(X)

    def _fit_state(self, X: np.ndarray, y: np.ndarray) -> dict:
        raise NotImplementedError

    def _predict(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    @classmethod
    def _restore(cls, params: dict, state: dict, feature_dim: int) -> "Regressor":
        model = cls(**params)
        model._state = state
        model._feature_dim = feature_dim
        return model

    def __repr__(self):
        status = "fitted" if self.is_fitted else "unfitted"
        return f"{type(self).__name__}({self.get_params()}, {status})"


# ---------------------------------------------------------------------------
# Linear least squares
# ---------------------------------------------------------------------------

class LinearRegressor(Regressor):
    """Ordinary least squares via the normal equations.

    A ridge jitter on the diagonal keeps the system solvable when the Gram
    matrix is rank deficient, the normal situation here where feature
    dimension far exceeds the sample count. When that is the case, the
    algebraically identical dual form is solved instead (an n-by-n system
    rather than D-by-D).
    """

    kind = "linear"

    def __init__(self, jitter: float = 1e-8):
        super().__init__()
        self.jitter = float(jitter)

    def get_params(self) -> dict:
        return {"jitter": self.jitter}

    def _fit_state(self, X, y):
        n, d = X.shape
        ones = np.ones((n, 1))
        xa = np.hstack([X, ones])
        if d + 1 <= n:
            gram = xa.T @ xa + self.jitter * np.eye(d + 1)
            beta = np.linalg.solve(gram, xa.T @ y)
        else:
            # beta = Xa' (Xa Xa' + jitter I)^-1 y  (same ridge solution)
            gram = xa @ xa.T + self.jitter * np.eye(n)
            beta = xa.T @ np.linalg.solve(gram, y)
        return {"coef": [float(c) for c in beta[:d]], "intercept": float(beta[d])}

    def _predict(self, X):
        coef = np.asarray(self._state["coef"], dtype=float)
        return X @ coef + self._state["intercept"]

    @classmethod
    def from_weights(cls, weights, bias: float) -> "LinearRegressor":
        """Build a fitted linear model from externally supplied weights."""
        weights = np.asarray(weights, dtype=float)
        if weights.ndim != 1 or weights.size < 1:
            raise DimensionMismatch("weights must be a non-empty 1-D vector")
        if not (np.isfinite(weights).all() and np.isfinite(bias)):
            raise NonFinite("weights or bias contain NaN or Inf")
        state = {"coef": [float(w) for w in weights], "intercept": float(bias)}
        return cls._restore({"jitter": 1e-8}, state, weights.size)


# ---------------------------------------------------------------------------
# k-nearest neighbors
# ---------------------------------------------------------------------------

class KNNRegressor(Regressor):
    """Unweighted mean of the k nearest training labels (Euclidean metric).

    Distance ties resolve to the lower training index; k is capped at the
    training-set size.
    """

    kind = "knn"

    def __init__(self, k: int = 3):
        super().__init__()
        if k < 1:
            raise ParamOutOfRange(f"k must be >= 1, got {k}")
        self.k = int(k)

    def get_params(self) -> dict:
        return {"k": self.k}

    def _fit_state(self, X, y):
        return {"X": X.tolist(), "y": y.tolist()}

    def _predict(self, X):
        train_x = np.asarray(self._state["X"], dtype=float)
        train_y = np.asarray(self._state["y"], dtype=float)
        k = min(self.k, train_y.size)
        out = np.empty(X.shape[0])
        for i, q in enumerate(X):
            d2 = ((train_x - q) ** 2).sum(axis=1)
            nearest = np.argsort(d2, kind="stable")[:k]
            out[i] = train_y[nearest].mean()
        return out


# ---------------------------------------------------------------------------
# Regression trees
# ---------------------------------------------------------------------------

def _sse_parts(total_sum, total_sq, left_sum, left_sq, n_left, n_right):
    """Sum of squared errors of the two children of a split."""
    sse_left = left_sq - left_sum * left_sum / n_left
    right_sum = total_sum - left_sum
    sse_right = (total_sq - left_sq) - right_sum * right_sum / n_right
    return sse_left + sse_right


def _best_split_exhaustive(X, y, min_leaf):
    """CART split: scan midpoints between consecutive distinct sorted values.

    Minimizes the summed child SSE (equivalently, maximizes weighted variance
    reduction). Ties keep the lowest feature index, then the lowest
    threshold. Returns (feature, threshold) or None when no split is valid.
    """
    n = y.size
    best_score = np.inf
    best = None
    positions = np.arange(min_leaf, n - min_leaf + 1)
    if positions.size == 0:
        return None
    for f in range(X.shape[1]):
        order = np.argsort(X[:, f], kind="stable")
        sv = X[order, f]
        sy = y[order]
        usable = sv[positions - 1] < sv[positions]
        if not usable.any():
            continue
        pos = positions[usable]
        csum = np.cumsum(sy)
        csq = np.cumsum(sy * sy)
        scores = _sse_parts(csum[-1], csq[-1], csum[pos - 1], csq[pos - 1],
                            pos, n - pos)
        k = int(np.argmin(scores))  # first minimum -> lowest threshold
        if scores[k] < best_score:
            best_score = scores[k]
            split_pos = int(pos[k])
            threshold = (sv[split_pos - 1] + sv[split_pos]) / 2.0
            if threshold == sv[split_pos]:  # midpoint rounded onto the right value
                threshold = sv[split_pos - 1]
            best = (f, float(threshold))
    return best


def _best_split_random(X, y, min_leaf, rng):
    """Extremely randomized split: one uniform threshold per feature,
    best summed child SSE wins (ties keep the lowest feature index)."""
    n = y.size
    total_sum = float(y.sum())
    total_sq = float((y * y).sum())
    best_score = np.inf
    best = None
    for f in range(X.shape[1]):
        vals = X[:, f]
        lo = vals.min()
        hi = vals.max()
        if lo == hi:
            continue
        t = float(rng.uniform(lo, hi))  # in [lo, hi): both sides non-empty
        if not lo <= t < hi:  # guards float rounding at the interval edge
            continue
        mask = vals <= t
        n_left = int(mask.sum())
        if n_left < min_leaf or n - n_left < min_leaf:
            continue
        left = y[mask]
        score = _sse_parts(total_sum, total_sq, float(left.sum()),
                           float((left * left).sum()), n_left, n - n_left)
        if score < best_score:
            best_score = score
            best = (f, t)
    return best


def _grow_tree(X, y, max_depth, min_leaf, choose_split):
    """Grow a binary regression tree iteratively (no recursion limits).

    A node becomes a leaf when it is pure, hits the depth cap, or admits no
    valid split; otherwise it takes the splitter's choice even at zero
    variance reduction, so distinct inputs always end in pure leaves.
    """
    root: dict = {}
    stack = [(root, np.arange(y.size), 0)]
    while stack:
        node, idx, depth = stack.pop()
        sub_y = y[idx]
        depth_capped = max_depth is not None and depth >= max_depth
        if depth_capped or idx.size < 2 * min_leaf or sub_y.min() == sub_y.max():
            node["value"] = float(sub_y.mean())
            continue
        split = choose_split(X[idx], sub_y)
        if split is None:
            node["value"] = float(sub_y.mean())
            continue
        feature, threshold = split
        mask = X[idx, feature] <= threshold
        if mask.all() or not mask.any():  # degenerate split; never recurse on it
            node["value"] = float(sub_y.mean())
            continue
        node["feature"] = int(feature)
        node["threshold"] = float(threshold)
        node["left"] = {}
        node["right"] = {}
        stack.append((node["right"], idx[~mask], depth + 1))
        stack.append((node["left"], idx[mask], depth + 1))
    return root


def _tree_predict(root, X):
    out = np.empty(X.shape[0])
    stack = [(root, np.arange(X.shape[0]))]
    while stack:
        node, idx = stack.pop()
        if idx.size == 0:
            continue
        if "value" in node:
            out[idx] = node["value"]
            continue
        mask = X[idx, node["feature"]] <= node["threshold"]
        stack.append((node["left"], idx[mask]))
        stack.append((node["right"], idx[~mask]))
    return out


class DecisionTreeRegressor(Regressor):
    """CART regression tree grown by variance reduction.

    Candidate thresholds are midpoints between consecutive distinct sorted
    values; defaults are unbounded depth and single-sample leaves, which
    drive training error to zero whenever inputs are distinct.
    """

    kind = "decision_tree"

    def __init__(self, max_depth: int | None = None, min_samples_leaf: int = 1):
        super().__init__()
        if max_depth is not None and max_depth < 1:
            raise ParamOutOfRange(f"max_depth must be >= 1 or None, got {max_depth}")
        if min_samples_leaf < 1:
            raise ParamOutOfRange(f"min_samples_leaf must be >= 1, got {min_samples_leaf}")
        self.max_depth = max_depth
        self.min_samples_leaf = int(min_samples_leaf)

    def get_params(self) -> dict:
        return {"max_depth": self.max_depth, "min_samples_leaf": self.min_samples_leaf}

    def _fit_state(self, X, y):
        def chooser(sub_x, sub_y):
            return _best_split_exhaustive(sub_x, sub_y, self.min_samples_leaf)

        return {"tree": _grow_tree(X, y, self.max_depth, self.min_samples_leaf, chooser)}

    def _predict(self, X):
        return _tree_predict(self._state["tree"], X)


class ExtraTreeRegressor(Regressor):
    """Single extremely randomized tree.

    Each node draws one uniform random threshold per non-constant feature and
    keeps the candidate with the best variance reduction. Fully deterministic
    given the seed.
    """

    kind = "extra_tree"

    def __init__(self, max_depth: int | None = None, min_samples_leaf: int = 1,
                 seed: int = 0):
        super().__init__()
        if max_depth is not None and max_depth < 1:
            raise ParamOutOfRange(f"max_depth must be >= 1 or None, got {max_depth}")
        if min_samples_leaf < 1:
            raise ParamOutOfRange(f"min_samples_leaf must be >= 1, got {min_samples_leaf}")
        self.max_depth = max_depth
        self.min_samples_leaf = int(min_samples_leaf)
        self.seed = int(seed)

    def get_params(self) -> dict:
        return {"max_depth": self.max_depth,
                "min_samples_leaf": self.min_samples_leaf,
                "seed": self.seed}

    def _fit_state(self, X, y):
        rng = np.random.default_rng(self.seed)

        def chooser(sub_x, sub_y):
            return _best_split_random(sub_x, sub_y, self.min_samples_leaf, rng)

        return {"tree": _grow_tree(X, y, self.max_depth, self.min_samples_leaf, chooser)}

    def _predict(self, X):
        return _tree_predict(self._state["tree"], X)


# ---------------------------------------------------------------------------
# Ensembles
# ---------------------------------------------------------------------------

class BaggingRegressor(Regressor):
    """Mean of unbounded CART trees fitted on bootstrap resamples."""

    kind = "bagging"

    def __init__(self, n_estimators: int = 10, seed: int = 0):
        super().__init__()
        if n_estimators < 1:
            raise ParamOutOfRange(f"n_estimators must be >= 1, got {n_estimators}")
        self.n_estimators = int(n_estimators)
        self.seed = int(seed)

    def get_params(self) -> dict:
        return {"n_estimators": self.n_estimators, "seed": self.seed}

    def _fit_state(self, X, y):
        rng = np.random.default_rng(self.seed)
        n = y.size
        trees = []
        for _ in range(self.n_estimators):
            idx = rng.integers(0, n, size=n)
            trees.append(_grow_tree(X[idx], y[idx], None, 1,
                                    lambda sx, sy: _best_split_exhaustive(sx, sy, 1)))
        return {"trees": trees}

    def _predict(self, X):
        preds = np.vstack([_tree_predict(t, X) for t in self._state["trees"]])
        return preds.mean(axis=0)


class AdaBoostR2Regressor(Regressor):
    """Drucker's AdaBoost.R2 with linear loss and weighted-median output.

    Weak learners are depth-capped CART trees fitted on weight-proportional
    bootstrap resamples. Boosting stops early when a stage's weighted loss
    reaches 0.5 (the stage is dropped unless it is the first) or when a stage
    fits the training data perfectly.
    """

    kind = "adaboost"

    def __init__(self, n_estimators: int = 50, base_max_depth: int = 3, seed: int = 0):
        super().__init__()
        if n_estimators < 1:
            raise ParamOutOfRange(f"n_estimators must be >= 1, got {n_estimators}")
        if base_max_depth < 1:
            raise ParamOutOfRange(f"base_max_depth must be >= 1, got {base_max_depth}")
        self.n_estimators = int(n_estimators)
        self.base_max_depth = int(base_max_depth)
        self.seed = int(seed)

    def get_params(self) -> dict:
        return {"n_estimators": self.n_estimators,
                "base_max_depth": self.base_max_depth,
                "seed": self.seed}

    def _fit_state(self, X, y):
        rng = np.random.default_rng(self.seed)
        n = y.size
        weights = np.full(n, 1.0 / n)
        stages = []
        for _ in range(self.n_estimators):
            idx = rng.choice(n, size=n, replace=True, p=weights)
            tree = _grow_tree(X[idx], y[idx], self.base_max_depth, 1,
                              lambda sx, sy: _best_split_exhaustive(sx, sy, 1))
            pred = _tree_predict(tree, X)
            abs_err = np.abs(pred - y)
            max_err = abs_err.max()
            if max_err == 0.0:
                stages.append({"tree": tree, "weight": 1.0})
                break
            loss = abs_err / max_err
            avg_loss = float(weights @ loss)
            if avg_loss <= 0.0:
                stages.append({"tree": tree, "weight": 1.0})
                break
            if avg_loss >= 0.5:
                if not stages:  # keep something predictable rather than fail
                    stages.append({"tree": tree, "weight": 1.0})
                break
            beta = avg_loss / (1.0 - avg_loss)
            stages.append({"tree": tree, "weight": float(np.log(1.0 / beta))})
            weights = weights * beta ** (1.0 - loss)
            weights = weights / weights.sum()
        return {"stages": stages}

    def _predict(self, X):
        stages = self._state["stages"]
        preds = np.vstack([_tree_predict(s["tree"], X) for s in stages])
        stage_w = np.asarray([s["weight"] for s in stages], dtype=float)
        # Weighted median per sample: sort predictions, take the first one
        # whose cumulative weight reaches half of the total.
        order = np.argsort(preds, axis=0, kind="stable")
        cdf = np.cumsum(stage_w[order], axis=0)
        sel = (cdf >= 0.5 * cdf[-1]).argmax(axis=0)
        cols = np.arange(X.shape[0])
        return preds[order[sel, cols], cols]


REGRESSOR_KINDS: dict[str, type[Regressor]] = {
    cls.kind: cls
    for cls in (LinearRegressor, KNNRegressor, AdaBoostR2Regressor,
                ExtraTreeRegressor, DecisionTreeRegressor, BaggingRegressor)
}


def make_regressor(kind: str, **params) -> Regressor:
    """Instantiate a regressor by its registry name."""
    if kind not in REGRESSOR_KINDS:
        raise ParamOutOfRange(
            f"unknown regressor kind {kind!r}; choose from {sorted(REGRESSOR_KINDS)}"
        )
    return REGRESSOR_KINDS[kind](**params)
