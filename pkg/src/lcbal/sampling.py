"""Per-round query distributions over the pool and seeded categorical draws."""

import numpy as np
from scipy.special import expit, xlogy

from .losses import get_loss
from .validation import check_p_min

#: Loss or entropy mass below which a distribution falls back to uniform.
MASS_EPS = 1e-15


def _floored(scores, p_min):
    n = scores.shape[0]
    total = scores.sum()
    if not total > MASS_EPS:
        return np.full(n, 1.0 / n)
    p = p_min + (1.0 - n * p_min) * scores / total
    # renormalize away the last-ulp drift of the affine map
    return p / p.sum()


def pseudo_labels(margins, known_labels):
    """Labels for every pool point: known ones where queried, else ``sgn`` of the prediction.

    ``sgn(0)`` is taken as +1.
    """
    y = np.where(margins >= 0, 1.0, -1.0)
    if known_labels:
        idx = np.fromiter(known_labels.keys(), dtype=np.intp, count=len(known_labels))
        y[idx] = np.fromiter(known_labels.values(), dtype=np.float64, count=len(known_labels))
    return y


def query_distribution(X, h, known_labels, p_min, loss="logistic"):
    """Sampling distribution proportional to each point's (pseudo-labelled) loss.

    Points whose label is known use it; the rest are labelled by the sign of
    the current prediction, so small-margin points get large weight. The
    weights are mixed with a floor so every point has probability at least
    ``p_min``.

    Parameters
    ----------
    X : ndarray of shape (n, d)
    h : ndarray of shape (d,)
    known_labels : dict
        Pool index to +/-1 label, for points already queried.
    p_min : float
        Floor; requires ``n * p_min <= 1``.
    loss : MarginLoss or str

    Returns
    -------
    ndarray of shape (n,)
    """
    loss = get_loss(loss)
    n = X.shape[0]
    p_min = check_p_min(p_min, n)
    scores = X @ h
    y_bar = pseudo_labels(scores, known_labels)
    return _floored(loss.value(y_bar * scores), p_min)


def prediction_entropy(scores):
    """Binary entropy (nats) of the logistic prediction ``sigmoid(score)``."""
    q = expit(scores)
    return -xlogy(q, q) - xlogy(1.0 - q, 1.0 - q)


def upal_distribution(X, h, p_min):
    """Sampling distribution proportional to the entropy of the prediction, floored at ``p_min``."""
    n = X.shape[0]
    p_min = check_p_min(p_min, n)
    return _floored(prediction_entropy(X @ h), p_min)


def draw_index(p, rng):
    """Draw one index from ``p`` by inverting the cumulative sum with a single uniform."""
    cdf = np.cumsum(p)
    u = rng.random() * cdf[-1]
    i = int(np.searchsorted(cdf, u, side="right"))
    if i >= len(p):
        # u rounded up onto the total; take the last index with positive mass
        i = int(np.flatnonzero(np.asarray(p) > 0)[-1])
    return i
