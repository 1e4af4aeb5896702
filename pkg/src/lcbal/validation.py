"""Input validation helpers shared by the estimators and the learning loops."""

import numpy as np
from sklearn.utils.validation import check_array


def check_features(X, min_samples=1):
    """Return ``X`` as a finite float64 2-d array."""
    return check_array(
        X, dtype=np.float64, ensure_2d=True, ensure_all_finite=True,
        ensure_min_samples=min_samples,
    )


def check_pm1_labels(y, n=None):
    """Coerce labels to a float +/-1 vector.

    Accepts {-1, +1} labels as-is and maps {0, 1} labels to {-1, +1}.
    Boolean arrays are treated as {0, 1}.
    """
    y = np.asarray(y)
    if y.ndim != 1:
        raise ValueError(f"labels must be 1-d, got shape {y.shape}")
    if n is not None and y.shape[0] != n:
        raise ValueError(f"expected {n} labels, got {y.shape[0]}")
    values = set(np.unique(y).tolist())
    if values <= {-1, 1}:
        return y.astype(np.float64)
    if values <= {0, 1}:
        return np.where(y.astype(np.float64) > 0, 1.0, -1.0)
    raise ValueError(f"labels must be in {{-1, +1}} or {{0, 1}}, got {sorted(values)}")


def check_hypothesis(h, d, radius=np.inf):
    h = np.asarray(h, dtype=np.float64)
    if h.shape != (d,):
        raise ValueError(f"hypothesis must have shape ({d},), got {h.shape}")
    if not np.all(np.isfinite(h)):
        raise ValueError("hypothesis has non-finite weights")
    if np.isfinite(radius) and float(h @ h) >= radius * radius:
        raise ValueError(
            f"hypothesis norm {np.linalg.norm(h):.6g} is outside the open ball of radius {radius}"
        )
    return h


def check_p_min(p_min, n):
    if p_min < 0:
        raise ValueError(f"p_min must be nonnegative, got {p_min}")
    # n * p_min == 1 is the degenerate uniform floor; anything above cannot sum to 1.
    if n * p_min > 1 + 1e-12:
        raise ValueError(f"n * p_min must be at most 1, got {n} * {p_min} = {n * p_min}")
    return float(p_min)


def check_probability_vector(p, atol=1e-12):
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1 or p.size == 0:
        raise ValueError("probability vector must be a nonempty 1-d array")
    if np.any(p < 0) or not np.all(np.isfinite(p)):
        raise ValueError("probabilities must be finite and nonnegative")
    if abs(p.sum() - 1.0) > atol:
        raise ValueError(f"probabilities sum to {p.sum():.17g}, not 1")
    return p
