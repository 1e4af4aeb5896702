"""Datasets: CSV ingestion, unit-box scaling, splitting and synthetic pools."""

import csv
import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .validation import check_features


class DataError(ValueError):
    """Raised when a dataset file cannot be parsed or violates its contract."""


@dataclass(frozen=True)
class Dataset:
    """Feature matrix with +/-1 labels.

    Labels are held here for the simulated oracle and for test-error
    evaluation; learners only ever see :meth:`pool`.
    """

    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = check_features(self.X)
        if X.shape[0] < 2:
            raise DataError(f"a dataset needs at least 2 rows, got {X.shape[0]}")
        y = np.asarray(self.y, dtype=np.float64)
        if y.shape != (X.shape[0],):
            raise DataError(f"labels have shape {y.shape}, expected ({X.shape[0]},)")
        if not np.all(np.isin(y, (-1.0, 1.0))):
            raise DataError("labels must be -1 or +1")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def d(self):
        return self.X.shape[1]

    def pool(self):
        """Read-only view of the features, without labels."""
        view = self.X.view()
        view.flags.writeable = False
        return view

    def subset(self, indices):
        indices = np.asarray(indices, dtype=np.intp)
        return Dataset(self.X[indices], self.y[indices])


def _parse_label(raw, encoding, row):
    try:
        value = float(raw)
    except ValueError:
        raise DataError(f"row {row}: label {raw!r} is not numeric") from None
    if encoding == "pm1":
        if value not in (-1.0, 1.0):
            raise DataError(f"row {row}: label {raw!r} is not -1 or +1")
        return value
    if encoding == "zero-one":
        if value not in (0.0, 1.0):
            raise DataError(f"row {row}: label {raw!r} is not 0 or 1")
        return 1.0 if value == 1.0 else -1.0
    raise DataError(f"unknown label encoding {encoding!r}")


def load_csv(path, label_column=-1, label_encoding="pm1", header=True):
    """Load a comma-separated dataset.

    Parameters
    ----------
    path : str or path-like
    label_column : str or int
        Column name (requires ``header=True``) or zero-based index; negative
        indices count from the end.
    label_encoding : {"pm1", "zero-one"}
        ``"zero-one"`` maps 0 to -1 and 1 to +1.
    header : bool
        Whether the first line holds column names.

    Rows are numbered from 1 in error messages, counting the header line.
    """
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if r and any(cell.strip() for cell in r)]
    if not rows:
        raise DataError(f"{path}: file is empty")

    names = None
    first_row = 1
    if header:
        names = [c.strip() for c in rows[0]]
        rows = rows[1:]
        first_row = 2
    if not rows:
        raise DataError(f"{path}: no data rows")
    width = len(rows[0])

    if isinstance(label_column, str):
        if names is None:
            try:
                label_idx = int(label_column)
            except ValueError:
                raise DataError("a named label column requires a header row") from None
        elif label_column in names:
            label_idx = names.index(label_column)
        else:
            raise DataError(f"{path}: label column {label_column!r} not in header {names}")
    else:
        label_idx = int(label_column)
    if label_idx < 0:
        label_idx += width
    if not 0 <= label_idx < width:
        raise DataError(f"{path}: label column index {label_column} out of range for {width} columns")

    X = np.empty((len(rows), width - 1))
    y = np.empty(len(rows))
    for k, row in enumerate(rows):
        lineno = first_row + k
        if len(row) != width:
            raise DataError(f"{path}: row {lineno} has {len(row)} columns, expected {width}")
        y[k] = _parse_label(row[label_idx].strip(), label_encoding, lineno)
        j = 0
        for col, cell in enumerate(row):
            if col == label_idx:
                continue
            try:
                value = float(cell)
            except ValueError:
                raise DataError(f"{path}: row {lineno}, column {col + 1}: cannot parse {cell!r}") from None
            if not math.isfinite(value):
                raise DataError(f"{path}: row {lineno}, column {col + 1}: non-finite value {cell!r}")
            X[k, j] = value
            j += 1
    if len(rows) < 2:
        raise DataError(f"{path}: a dataset needs at least 2 rows, got {len(rows)}")
    return Dataset(X, y)


def save_csv(dataset, path, header=True):
    """Write features then a trailing ``label`` column at full precision.

    ``path`` may also be an open text file.
    """
    if hasattr(path, "write"):
        _write_rows(dataset, path, header)
        return
    with open(path, "w", newline="") as fh:
        _write_rows(dataset, fh, header)


def _write_rows(dataset, fh, header):
    writer = csv.writer(fh, lineterminator="\n")
    if header:
        writer.writerow([f"x{j}" for j in range(dataset.d)] + ["label"])
    for x, label in zip(dataset.X, dataset.y):
        writer.writerow([format(v, ".17g") for v in x] + [str(int(label))])


def _box_map(X, lo, hi):
    span = hi - lo
    constant = span == 0
    out = 2.0 * (X - lo) / np.where(constant, 1.0, span) - 1.0
    out[:, constant] = 0.0
    # rounding can push endpoints a hair past +/-1
    return np.clip(out, -1.0, 1.0)


def scale_to_unit_box(dataset):
    """Affinely map every feature column onto [-1, 1]; constant columns become 0."""
    X = dataset.X
    return Dataset(_box_map(X, X.min(axis=0), X.max(axis=0)), dataset.y)


class UnitBoxScaler(TransformerMixin, BaseEstimator):
    """Per-feature affine scaling to [-1, 1] fitted on training features.

    Transforming data outside the fitted range is clipped back into the box.
    """

    def fit(self, X, y=None):
        X = check_features(X)
        self.data_min_ = X.min(axis=0)
        self.data_max_ = X.max(axis=0)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "data_min_")
        X = check_features(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        return _box_map(X, self.data_min_, self.data_max_)


def split(dataset, test_fraction=0.3, seed=0):
    """Seeded shuffle-and-cut into ``(train, test)``."""
    if not 0.0 < test_fraction < 1.0:
        raise DataError(f"test_fraction must lie in (0, 1), got {test_fraction}")
    n = dataset.n
    n_test = int(round(n * test_fraction))
    if n_test < 1 or n - n_test < 2:
        raise DataError(f"cannot split {n} rows with test_fraction={test_fraction}")
    order = np.random.default_rng(seed).permutation(n)
    return dataset.subset(np.sort(order[n_test:])), dataset.subset(np.sort(order[:n_test]))


def make_synthetic(kind="separable", n=500, d=2, margin=0.1, flip_prob=0.0, seed=0):
    """Draw a linearly labelled pool in [-1, 1]^d.

    A unit direction ``w`` is drawn first; points are drawn uniformly and those
    with ``|<w, x>| < margin`` are redrawn. ``"noisy-margin"`` then flips each
    label independently with probability ``flip_prob``. The flip coins are
    drawn for both kinds, so two calls with the same seed share the same
    points and clean labels.
    """
    if kind not in ("separable", "noisy-margin"):
        raise ValueError(f"unknown synthetic kind {kind!r}")
    if n < 4:
        raise ValueError(f"n must be at least 4, got {n}")
    if d < 1:
        raise ValueError(f"d must be at least 1, got {d}")
    if margin <= 0:
        raise ValueError(f"margin must be positive, got {margin}")
    if not 0.0 <= flip_prob < 0.5:
        raise ValueError(f"flip_prob must lie in [0, 0.5), got {flip_prob}")

    rng = np.random.default_rng(seed)
    w = rng.normal(size=d)
    w /= np.linalg.norm(w)
    if margin >= 0.999 * np.abs(w).sum():
        raise ValueError(f"margin {margin} leaves no room inside the box for direction {w}")

    X = np.empty((0, d))
    while X.shape[0] < n:
        batch = rng.uniform(-1.0, 1.0, size=(2 * n, d))
        keep = batch[np.abs(batch @ w) >= margin]
        X = np.vstack([X, keep])
    X = X[:n]
    y = np.where(X @ w >= 0, 1.0, -1.0)
    coins = rng.random(n)
    if kind == "noisy-margin":
        y = np.where(coins < flip_prob, -y, y)
    return Dataset(X, y)

