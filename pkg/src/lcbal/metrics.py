"""Test error and area under the error-vs-queries curve."""

import numpy as np


def predict_labels(h, X):
    """``sgn(<h, x>)`` per row, with ``sgn(0) = +1``."""
    return np.where(np.asarray(X) @ np.asarray(h) >= 0, 1.0, -1.0)


def evaluate_error(h, test):
    """Fraction of ``test`` points misclassified by the linear rule ``sgn(<h, x>)``."""
    if test.n == 0:
        raise ValueError("test set is empty")
    return float(np.mean(predict_labels(h, test.X) != test.y))


def auc(curve):
    """Sum of test errors over the curve's unique-query indices (unit spacing, no interpolation).

    ``curve`` is a sequence of ``(unique_queries, test_error)`` pairs or of bare errors.
    """
    if len(curve) == 0:
        raise ValueError("error curve is empty")
    errors = [c[1] if isinstance(c, tuple) else c for c in curve]
    return float(sum(errors))
