"""Importance-weighted risk estimates and lower confidence bounds on the risk.

Every query round samples exactly one pool index ``i`` with probability
``p``. A :class:`QueryLog` keeps those records; the functions here evaluate,
for a linear hypothesis ``h``:

* the importance-weighted risk ``(1/(n t)) sum_r L(y_r <h, x_r>) / p_r``,
* the variance statistic
  ``[sum_r L_r^2 / p_r^2 - (sum_{i queried} L_i)^2]_+``, where the first sum
  runs over rounds and the second over distinct queried points,
* confidence bounds built from them, and the barrier-regularized objective
  minimized between rounds together with its gradient.

Records that hit the same point in several rounds count once per round in
the round sums. Internally the log folds them into per-point sums of ``1/p``
and ``1/p^2`` so evaluation cost scales with the number of distinct points.
"""

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .losses import get_loss
from .validation import check_probability_vector

#: Below this the variance statistic is treated as exactly zero before sqrt.
VARIANCE_EPS = 1e-12


class QueryRecord(NamedTuple):
    round: int
    index: int
    probability: float
    label: float


class QueryLog:
    """Append-only record of query rounds over a pool of ``n`` points.

    >>> log = QueryLog(n=3, p_min=0.1)
    >>> log.append(2, 0.5, +1)
    >>> log.append(2, 0.25, +1)
    >>> log.round_count, log.labels
    (2, {2: 1.0})
    """

    def __init__(self, n, p_min=0.0):
        if n < 1:
            raise ValueError(f"pool size must be positive, got {n}")
        self.n = int(n)
        self.p_min = float(p_min)
        self.records = []
        self.labels = {}
        self._slot = {}
        self._indices = []
        self._inv_p = []
        self._inv_p2 = []
        self._inv_p_cumsum = [0.0]
        self._cache = None

    @property
    def round_count(self):
        return len(self.records)

    def __len__(self):
        return len(self.records)

    def append(self, index, probability, label):
        index = int(index)
        probability = float(probability)
        label = float(label)
        if not 0 <= index < self.n:
            raise IndexError(f"point index {index} outside pool of size {self.n}")
        if not (0.0 < probability <= 1.0):
            raise ValueError(f"sampling probability must lie in (0, 1], got {probability}")
        if probability < self.p_min * (1 - 1e-9):
            raise ValueError(f"sampling probability {probability} is below the floor {self.p_min}")
        if label not in (-1.0, 1.0):
            raise ValueError(f"label must be -1 or +1, got {label}")
        known = self.labels.get(index)
        if known is not None and known != label:
            raise ValueError(f"point {index} was labelled {known:+g}, now {label:+g}")

        self.records.append(QueryRecord(len(self.records) + 1, index, probability, label))
        if index not in self._slot:
            self._slot[index] = len(self._indices)
            self._indices.append(index)
            self._inv_p.append(0.0)
            self._inv_p2.append(0.0)
            self.labels[index] = label
        k = self._slot[index]
        self._inv_p[k] += 1.0 / probability
        self._inv_p2[k] += 1.0 / probability**2
        self._inv_p_cumsum.append(self._inv_p_cumsum[-1] + 1.0 / probability)
        self._cache = None

    def queried(self):
        """Distinct queried indices (first-query order) with their labels, as arrays."""
        if self._cache is None:
            self._refresh()
        return self._cache[0], self._cache[1]

    def weights(self):
        """Per distinct point: summed ``1/p`` and summed ``1/p^2`` over its rounds."""
        if self._cache is None:
            self._refresh()
        return self._cache[2], self._cache[3]

    def _refresh(self):
        idx = np.asarray(self._indices, dtype=np.intp)
        y = np.array([self.labels[i] for i in self._indices], dtype=np.float64)
        self._cache = (idx, y, np.asarray(self._inv_p), np.asarray(self._inv_p2))

    def inverse_probability_sum(self, rounds=None):
        """``sum 1/p`` over the first ``rounds`` records (all when None)."""
        if rounds is None:
            rounds = self.round_count
        return self._inv_p_cumsum[rounds]


@dataclass
class BoundConfig:
    """Constants of the confidence bound and its regularized surrogate.

    ``c_scale`` and ``lambda_scale`` set the schedules
    ``C_t = c_scale * sqrt(log t)`` and
    ``lambda_t = lambda_scale * n * t / max(S_{t-1}, 1) ** (1/3)`` where
    ``S_{t-1}`` sums ``1/p`` over all rounds before ``t``.
    """

    delta: float = 0.01
    radius: float = 100.0
    c_scale: float = 0.1
    lambda_scale: float = 100.0

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0 / math.e:
            raise ValueError(f"delta must lie in (0, 1/e), got {self.delta}")
        if self.radius <= 0:
            raise ValueError(f"radius must be positive, got {self.radius}")


def _require_rounds(log):
    if log.round_count < 1:
        raise ValueError("query log is empty")


def _queried_terms(log, h, X, loss):
    idx, y = log.queried()
    Xq = X[idx]
    margins = y * (Xq @ h)
    return Xq, y, loss.value(margins), loss.derivative(margins)


def importance_weighted_risk(log, h, X, loss):
    """Unbiased importance-weighted estimate of the pool risk of ``h``."""
    _require_rounds(log)
    loss = get_loss(loss)
    _, _, values, _ = _queried_terms(log, h, X, loss)
    w1, _ = log.weights()
    return float(w1 @ values) / (log.n * log.round_count)


def importance_weighted_risk_gradient(log, h, X, loss):
    _require_rounds(log)
    loss = get_loss(loss)
    Xq, y, _, slopes = _queried_terms(log, h, X, loss)
    w1, _ = log.weights()
    return (w1 * slopes * y) @ Xq / (log.n * log.round_count)


def _raw_variance_statistic(log, h, X, loss):
    _, _, values, _ = _queried_terms(log, h, X, loss)
    _, w2 = log.weights()
    return float(w2 @ values**2) - float(values.sum()) ** 2


def variance_statistic(log, h, X, loss):
    """The h-dependent variance statistic, truncated at zero."""
    _require_rounds(log)
    return max(_raw_variance_statistic(log, h, X, get_loss(loss)), 0.0)


def variance_correction(log, loss, cfg, d, l_max=None):
    """Concentration slack added to the variance statistic to upper-bound the variance.

    ``l_max`` defaults to the loss bound over the radius-``cfg.radius`` ball.
    """
    loss = get_loss(loss)
    if log.n == 1:
        return 0.0
    if log.p_min <= 0:
        return math.inf
    if l_max is None:
        l_max = loss.max_value(cfg.radius, d)
    t = log.round_count
    return l_max**2 * math.sqrt(2.0 * t * math.log(1.0 / cfg.delta) * (log.n - 1)) / math.sqrt(log.p_min)


def variance_bound(log, h, X, loss, cfg, l_max=None):
    """High-probability upper bound on ``n^2`` times the summed conditional variances.

    The correction is added to the untruncated statistic and the sum is then
    truncated at zero.
    """
    _require_rounds(log)
    loss = get_loss(loss)
    raw = _raw_variance_statistic(log, h, X, loss)
    return max(raw + variance_correction(log, loss, cfg, X.shape[1], l_max), 0.0)


def lcb(log, h, X, loss, cfg, full=False, l_max=None):
    """Lower confidence bound on the risk of ``h``.

    Parameters
    ----------
    log : QueryLog
    h : ndarray of shape (d,)
    X : ndarray of shape (n, d)
        Pool features.
    loss : MarginLoss or str
    cfg : BoundConfig
    full : bool, default=False
        With ``False`` return ``risk - 4/(n t) * sqrt(log(1/delta) * V)``.
        With ``True`` also subtract the range term
        ``2/t * log(1/delta) * L_max * (1 + 1/(n p_min))`` and the pool-to-
        population term ``sqrt(L_max^2 log(1/delta) / (2n))``, then truncate
        at zero. The full form is the one that carries a coverage guarantee.
    l_max : float, optional
        Loss bound; derived from ``cfg.radius`` and ``d`` when omitted.

    Returns
    -------
    float
    """
    _require_rounds(log)
    loss = get_loss(loss)
    t, n = log.round_count, log.n
    if t < 4:
        warnings.warn(f"confidence bound evaluated with t={t} < 4 rounds", RuntimeWarning, stacklevel=2)
    log_inv_delta = math.log(1.0 / cfg.delta)
    risk = importance_weighted_risk(log, h, X, loss)
    if l_max is None:
        l_max = loss.max_value(cfg.radius, X.shape[1])
    V = variance_bound(log, h, X, loss, cfg, l_max)
    bound = risk - 4.0 / (n * t) * math.sqrt(log_inv_delta * V)
    if not full:
        return bound
    range_term = 2.0 / t * log_inv_delta * l_max * (1.0 + 1.0 / (n * log.p_min))
    pool_term = math.sqrt(l_max**2 * log_inv_delta / (2.0 * n))
    return max(bound - range_term - pool_term, 0.0)


def confidence_weight(t, cfg):
    """``C_t``; zero on the first round since ``log 1 = 0``."""
    return cfg.c_scale * math.sqrt(math.log(t))


def barrier_weight(log, cfg):
    """``lambda_t`` for the current round count of ``log``."""
    t = log.round_count
    s = max(log.inverse_probability_sum(t - 1), 1.0)
    return cfg.lambda_scale * log.n * t / s ** (1.0 / 3.0)


def _check_inside(h, radius):
    sq = float(h @ h)
    if not sq < radius * radius:
        raise ValueError(f"hypothesis norm {math.sqrt(sq):.6g} is not inside the ball of radius {radius}")
    return sq


def lcb_prime_objective(log, h, X, loss, cfg, *, c_t=None, lambda_t=None, centered=False):
    """Barrier-regularized surrogate minimized after every query round.

    ``risk(h) - C_t * sqrt(V'(h)) - lambda_t * log(R^2 - ||h||^2)``, with
    ``V'`` the truncated variance statistic. ``c_t`` and ``lambda_t``
    override the schedules. ``centered=True`` drops the constant
    ``-lambda_t * log(R^2)`` so that values stay O(1) when ``lambda_t`` is
    large; minimizers are unchanged.
    """
    _require_rounds(log)
    loss = get_loss(loss)
    h = np.asarray(h, dtype=np.float64)
    R = cfg.radius
    sq = _check_inside(h, R)
    if c_t is None:
        c_t = confidence_weight(log.round_count, cfg)
    if lambda_t is None:
        lambda_t = barrier_weight(log, cfg)

    _, _, values, _ = _queried_terms(log, h, X, loss)
    w1, w2 = log.weights()
    risk = float(w1 @ values) / (log.n * log.round_count)
    v = max(float(w2 @ values**2) - float(values.sum()) ** 2, 0.0)
    spread = math.sqrt(v) if v > VARIANCE_EPS else 0.0
    if centered:
        barrier = -math.log1p(-sq / (R * R))
    else:
        barrier = -math.log(R * R - sq)
    return risk - c_t * spread + lambda_t * barrier


def lcb_prime_gradient(log, h, X, loss, cfg, *, c_t=None, lambda_t=None):
    """Gradient of :func:`lcb_prime_objective` in ``h``.

    Where the variance statistic is at or below ``VARIANCE_EPS`` the spread
    term contributes nothing (the truncated branch is flat).
    """
    _require_rounds(log)
    loss = get_loss(loss)
    h = np.asarray(h, dtype=np.float64)
    R = cfg.radius
    sq = _check_inside(h, R)
    if c_t is None:
        c_t = confidence_weight(log.round_count, cfg)
    if lambda_t is None:
        lambda_t = barrier_weight(log, cfg)

    Xq, y, values, slopes = _queried_terms(log, h, X, loss)
    w1, w2 = log.weights()
    # d margin / d h = y x
    yx = y[:, None] * Xq
    grad = (w1 * slopes) @ yx / (log.n * log.round_count)

    total = float(values.sum())
    v = float(w2 @ values**2) - total**2
    if c_t != 0.0 and v > VARIANCE_EPS:
        dv = (2.0 * w2 * values * slopes) @ yx - 2.0 * total * (slopes @ yx)
        grad = grad - c_t * dv / (2.0 * math.sqrt(v))
    return grad + 2.0 * lambda_t * h / (R * R - sq)


def enumerate_round_variance(X, y, h, p, loss):
    """Exact variance of one round's martingale increment, by enumeration.

    The increment is ``(1/n) L_i / p_i - (1/n) sum_j L_j`` when index ``i`` is
    drawn. Its mean is zero, so the variance is the probability-weighted mean
    of its square over the ``n`` possible draws.
    """
    loss = get_loss(loss)
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64)
    p = check_probability_vector(p)
    n = X.shape[0]
    if p.shape != (n,) or np.any(p <= 0):
        raise ValueError("need one strictly positive probability per pool point")
    values = loss.value(y * (X @ np.asarray(h, dtype=np.float64)))
    pool_risk = values.sum() / n
    second_moment = 0.0
    for i in range(n):
        increment = values[i] / (n * p[i]) - pool_risk
        second_moment += p[i] * increment**2
    return second_moment
