"""scikit-learn estimators wrapping the pool-based learning loops.

``fit(X, y)`` treats ``X`` as the unlabelled pool and ``y`` as the hidden
labels behind a simulated oracle: only the labels the learner chooses to
query are ever read. Any two class values are accepted and mapped to
-1/+1 in sorted order.

>>> import numpy as np
>>> from lcbal.data import make_synthetic
>>> ds = make_synthetic("separable", n=200, d=2, margin=0.1, seed=3)
>>> clf = LCBALClassifier(budget=20, random_state=0).fit(ds.X, ds.y)
>>> clf.n_queries_
20
"""

from dataclasses import fields

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from .data import Dataset
from .learners import LearnerConfig, SimulatedOracle, run_learner
from .validation import check_features

_CONFIG_FIELDS = {f.name for f in fields(LearnerConfig)}


def _rng(random_state):
    if isinstance(random_state, np.random.Generator):
        return random_state
    return np.random.default_rng(random_state)


class _PoolClassifier(ClassifierMixin, BaseEstimator):
    _algorithm = None

    def _config(self):
        params = {k: v for k, v in self.get_params().items() if k in _CONFIG_FIELDS}
        return LearnerConfig(**params)

    def _encode(self, y):
        y = np.asarray(y)
        if y.ndim != 1:
            raise ValueError(f"y must be 1-d, got shape {y.shape}")
        self.classes_ = np.unique(y)
        if self.classes_.shape[0] != 2:
            raise ValueError(f"need exactly two classes, got {self.classes_.shape[0]}")
        return np.where(y == self.classes_[1], 1.0, -1.0)

    def fit(self, X, y, eval_set=None):
        """Run the learner on pool ``X`` with labels ``y`` behind the oracle.

        ``eval_set=(X_test, y_test)`` records an error curve in ``result_``.
        """
        X = check_features(X, min_samples=2)
        y_pm = self._encode(y)
        if y_pm.shape[0] != X.shape[0]:
            raise ValueError(f"X has {X.shape[0]} rows but y has {y_pm.shape[0]}")
        test = None
        if eval_set is not None:
            X_test, y_test = eval_set
            y_test = np.asarray(y_test)
            test = Dataset(check_features(X_test), np.where(y_test == self.classes_[1], 1.0, -1.0))
        oracle = SimulatedOracle(y_pm)
        self.result_ = run_learner(self._algorithm, X, oracle, test, self._config(), _rng(self.random_state))
        self.coef_ = self.result_.final_hypothesis.copy()
        self.n_features_in_ = X.shape[1]
        self.n_queries_ = oracle.query_count
        self.queried_indices_ = np.array(sorted(oracle.answered()), dtype=np.intp)
        return self

    def decision_function(self, X):
        check_is_fitted(self, "coef_")
        X = check_features(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        return X @ self.coef_

    def predict(self, X):
        scores = self.decision_function(X)
        return self.classes_[(scores >= 0).astype(int)]


class LCBALClassifier(_PoolClassifier):
    """Linear classifier trained by lower-confidence-bound active learning.

    Parameters
    ----------
    budget : int, default=300
        Distinct labels to buy.
    p_min : float, optional
        Sampling floor per point; ``1 / (10 n)`` when omitted.
    radius : float, default=100.0
        Radius of the weight ball.
    delta : float, default=0.01
    loss : {"logistic", "squared", "exponential"}, default="logistic"
    round_cap : int, optional
        Maximum rounds including re-queries; ``20 * budget`` when omitted.
    risk_scale : {"sum", "mean"}, default="sum"
        Scale of the risk term relative to the confidence and barrier terms.
    tol, max_iter : solver settings per round.
    random_state : int, Generator or None
    """

    _algorithm = "lcb-al"

    def __init__(self, budget=300, p_min=None, radius=100.0, delta=0.01, loss="logistic",
                 round_cap=None, risk_scale="sum", tol=1e-6, max_iter=500, random_state=None):
        self.budget = budget
        self.p_min = p_min
        self.radius = radius
        self.delta = delta
        self.loss = loss
        self.round_cap = round_cap
        self.risk_scale = risk_scale
        self.tol = tol
        self.max_iter = max_iter
        self.random_state = random_state


class UPALClassifier(_PoolClassifier):
    """Entropy-sampling active learner minimizing the importance-weighted risk plus ``mu ||w||^2``."""

    _algorithm = "upal"

    def __init__(self, budget=300, p_min=None, mu=1e-2, loss="logistic", round_cap=None,
                 tol=1e-6, max_iter=500, random_state=None):
        self.budget = budget
        self.p_min = p_min
        self.mu = mu
        self.loss = loss
        self.round_cap = round_cap
        self.tol = tol
        self.max_iter = max_iter
        self.random_state = random_state


class PassiveClassifier(_PoolClassifier):
    """Regularized logistic regression on ``budget`` labels drawn uniformly from the pool."""

    _algorithm = "passive"

    def __init__(self, budget=300, mu=1e-2, refit_every=1, tol=1e-6, max_iter=500, random_state=None):
        self.budget = budget
        self.mu = mu
        self.refit_every = refit_every
        self.tol = tol
        self.max_iter = max_iter
        self.random_state = random_state
