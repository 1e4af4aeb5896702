"""Repeated seeded trials, summary statistics and result files.

A trial is one learner run with seed ``base_seed + run_index``. All trials
of an experiment share the same scaled dataset and train/test split.
"""

import csv
import json
import logging
import math
import os
from dataclasses import asdict, dataclass, field, fields
from typing import Optional, Union

import numpy as np

from .bounds import (
    BoundConfig,
    QueryLog,
    VARIANCE_EPS,
    barrier_weight,
    confidence_weight,
    lcb_prime_gradient,
    lcb_prime_objective,
    variance_statistic,
)
from .data import DataError, Dataset, load_csv, make_synthetic, scale_to_unit_box, split
from .learners import (
    ALGORITHMS,
    InteractiveOracle,
    LearnerAbort,
    LearnerConfig,
    OracleAborted,
    SimulatedOracle,
    run_learner,
)
from .losses import LOSS_KINDS, get_loss
from .metrics import auc, evaluate_error  # noqa: F401  (re-exported)
from .optimize import finite_difference_gradient
from .sampling import draw_index, query_distribution

logger = logging.getLogger(__name__)

RESULTS_COLUMNS = [
    "run_id", "algorithm", "round", "unique_queries", "queried_index",
    "probability", "was_new", "test_error",
]
CURVES_COLUMNS = ["run_id", "algorithm", "unique_queries", "test_error"]

#: Desk-scale synthetic configurations used by the trend checks.
PRESETS = {
    "separable-wide": dict(kind="separable", n=500, d=2, margin=0.2, flip_prob=0.0),
    "separable-narrow": dict(kind="separable", n=500, d=2, margin=0.05, flip_prob=0.0),
    "noisy": dict(kind="noisy-margin", n=500, d=2, margin=0.1, flip_prob=0.1),
}


class ConfigError(ValueError):
    """Invalid experiment configuration."""


class ExperimentAbort(RuntimeError):
    """A trial failed; ``run_id`` and ``algorithm`` identify it."""

    def __init__(self, message, run_id, algorithm):
        super().__init__(message)
        self.run_id = run_id
        self.algorithm = algorithm


@dataclass
class ExperimentConfig:
    """Everything needed to reproduce an experiment.

    ``dataset`` is a CSV path or a mapping of :func:`make_synthetic`
    arguments (``kind``, ``n``, ``d``, ``margin``, ``flip_prob``, ``seed``).
    """

    dataset: Union[str, dict, None] = None
    label_column: Union[str, int] = -1
    label_encoding: str = "pm1"
    header: bool = True
    scale: bool = True
    bias: bool = False
    test_fraction: float = 0.3
    algorithms: list = field(default_factory=lambda: list(ALGORITHMS))
    loss: str = "logistic"
    budget: int = 300
    p_min: Optional[float] = None
    radius: float = 100.0
    delta: float = 0.01
    repeats: int = 10
    seed: int = 0
    oracle: str = "simulated"
    out_dir: str = "results"
    round_cap: Optional[int] = None
    mu: float = 1e-2
    refit_every: int = 1
    tol: float = 1e-6
    max_iter: int = 500
    risk_scale: str = "sum"

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**data)
        cfg.validate()
        return cfg

    @classmethod
    def from_file(cls, path):
        try:
            with open(path) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"config {path} must hold a JSON object")
        return cls.from_dict(data)

    def validate(self):
        if self.dataset is None:
            raise ConfigError("no dataset given")
        if isinstance(self.algorithms, str):
            self.algorithms = [a.strip() for a in self.algorithms.split(",") if a.strip()]
        bad = [a for a in self.algorithms if a not in ALGORITHMS]
        if bad or not self.algorithms:
            raise ConfigError(f"algorithms must be drawn from {ALGORITHMS}, got {self.algorithms}")
        if self.repeats < 1:
            raise ConfigError(f"repeats must be at least 1, got {self.repeats}")
        if self.oracle not in ("simulated", "interactive"):
            raise ConfigError(f"oracle must be 'simulated' or 'interactive', got {self.oracle!r}")
        if self.loss not in LOSS_KINDS:
            raise ConfigError(f"loss must be one of {LOSS_KINDS}, got {self.loss!r}")
        if not 0 < self.delta < 1 / math.e:
            raise ConfigError(f"delta must lie in (0, 1/e), got {self.delta}")
        if self.radius <= 0:
            raise ConfigError(f"radius must be positive, got {self.radius}")
        return self

    def learner_config(self):
        names = {f.name for f in fields(LearnerConfig)}
        return LearnerConfig(**{k: v for k, v in asdict(self).items() if k in names})


def load_experiment_data(cfg):
    """Load, scale and split the experiment's dataset into ``(pool, test)``."""
    if isinstance(cfg.dataset, dict):
        params = dict(cfg.dataset)
        params.setdefault("seed", cfg.seed)
        try:
            data = make_synthetic(**params)
        except TypeError as exc:
            raise ConfigError(f"bad synthetic dataset settings {cfg.dataset}: {exc}") from exc
    else:
        try:
            data = load_csv(cfg.dataset, cfg.label_column, cfg.label_encoding, cfg.header)
        except OSError as exc:
            raise ConfigError(f"cannot read dataset {cfg.dataset}: {exc}") from exc
    if cfg.scale:
        data = scale_to_unit_box(data)
    if cfg.bias:
        data = Dataset(np.hstack([data.X, np.ones((data.n, 1))]), data.y)
    return split(data, cfg.test_fraction, cfg.seed)


@dataclass
class Trial:
    run_id: int
    algorithm: str
    seed: int
    result: object


@dataclass
class AlgorithmSummary:
    final_error_mean: float
    final_error_std: float
    auc_mean: float
    auc_std: float
    runs: list


def _std(values):
    return float(np.std(values, ddof=1)) if len(values) > 1 else 0.0


def summarize(trials):
    """Per-algorithm means and sample standard deviations of final error and AUC."""
    by_alg = {}
    for trial in trials:
        by_alg.setdefault(trial.algorithm, []).append(trial)
    summary = {}
    for alg, group in by_alg.items():
        group = sorted(group, key=lambda tr: tr.run_id)
        finals = [tr.result.final_error for tr in group]
        aucs = [tr.result.auc for tr in group]
        runs = [
            dict(run_id=tr.run_id, seed=tr.seed, final_error=tr.result.final_error, auc=tr.result.auc,
                 rounds_used=tr.result.rounds_used, budget_reached=tr.result.budget_reached)
            for tr in group
        ]
        summary[alg] = AlgorithmSummary(
            float(np.mean(finals)), _std(finals), float(np.mean(aucs)), _std(aucs), runs)
    return summary


def _fmt(x):
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return format(x, ".17g")


def emit_results(summary, trials, out_dir):
    """Write ``results.csv``, ``curves.csv`` and ``summary.json`` into ``out_dir``."""
    path = out_dir
    try:
        os.makedirs(out_dir, exist_ok=True)
        path = os.path.join(out_dir, "results.csv")
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(RESULTS_COLUMNS)
            for tr in trials:
                for e in tr.result.query_trace:
                    writer.writerow([tr.run_id, tr.algorithm, e.round, e.unique_queries, e.index,
                                     _fmt(e.probability), int(e.was_new), _fmt(e.test_error)])
        path = os.path.join(out_dir, "curves.csv")
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CURVES_COLUMNS)
            for tr in trials:
                for unique, err in tr.result.error_curve:
                    writer.writerow([tr.run_id, tr.algorithm, unique, _fmt(err)])
        path = os.path.join(out_dir, "summary.json")
        with open(path, "w") as fh:
            json.dump({alg: asdict(s) for alg, s in summary.items()}, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise OSError(f"failed writing results to {path}: {exc}") from exc


def run_experiment(cfg, stdin=None, stdout=None, write=True):
    """Run every algorithm ``cfg.repeats`` times and summarize.

    Returns ``(summary, trials)``. With ``write=True`` the result files go to
    ``cfg.out_dir``; if a trial aborts, the trials finished so far are
    written before the error propagates.
    """
    cfg.validate()
    try:
        pool, test = load_experiment_data(cfg)
    except DataError as exc:
        raise ConfigError(str(exc)) from exc
    if cfg.budget > pool.n:
        raise ConfigError(f"budget {cfg.budget} exceeds the pool size {pool.n}")

    lcfg = cfg.learner_config()
    trials = []
    try:
        for alg in cfg.algorithms:
            for r in range(cfg.repeats):
                seed = cfg.seed + r
                if cfg.oracle == "interactive":
                    oracle = InteractiveOracle(pool.X, stdin=stdin, stdout=stdout)
                else:
                    oracle = SimulatedOracle(pool.y)
                try:
                    result = run_learner(alg, pool.pool(), oracle, test, lcfg, np.random.default_rng(seed))
                except (LearnerAbort, OracleAborted) as exc:
                    raise ExperimentAbort(f"run {r} of {alg} (seed {seed}) aborted: {exc}", r, alg) from exc
                logger.info("%s run %d: final error %.4f, auc %.3f", alg, r, result.final_error, result.auc)
                trials.append(Trial(r, alg, seed, result))
    except ExperimentAbort:
        if write:
            emit_results(summarize(trials), trials, cfg.out_dir)
        raise
    summary = summarize(trials)
    if write:
        emit_results(summary, trials, cfg.out_dir)
    return summary, trials


def preset_config(name, algorithms=ALGORITHMS, budget=50, repeats=10, seed=0, **overrides):
    """Experiment config for one of :data:`PRESETS` (dataset seeded by ``seed``)."""
    params = dict(PRESETS[name], seed=seed)
    return ExperimentConfig(dataset=params, algorithms=list(algorithms), budget=budget,
                            repeats=repeats, seed=seed, **overrides)


def random_query_log(X, y, h, rounds, p_min, loss, rng):
    """A log of ``rounds`` draws from :func:`query_distribution` at the fixed hypothesis ``h``."""
    log = QueryLog(X.shape[0], p_min)
    for _ in range(rounds):
        p = query_distribution(X, h, log.labels, p_min, loss)
        i = draw_index(p, rng)
        log.append(i, p[i], y[i])
    return log


def gradient_check(points=20, n=30, d=3, rounds=10, loss="logistic", radius=2.0, seed=0, step=1e-6):
    """Max relative error between the surrogate's analytic gradient and central differences.

    Points are drawn uniformly inside ``0.8 * radius`` and kept only where the
    variance statistic exceeds 1e-6, so the smooth branch is exercised. Each
    point is checked with the printed ``C_t``/``lambda_t`` schedules and with
    both divided by ``n t`` (the weighting the LCB-AL loop optimizes), where
    the variance term is not swamped by the barrier.
    """
    rng = np.random.default_rng(seed)
    loss = get_loss(loss)
    X = rng.uniform(-1, 1, size=(n, d))
    y = np.where(X @ rng.normal(size=d) >= 0, 1.0, -1.0)
    cfg = BoundConfig(delta=0.01, radius=radius)
    log = random_query_log(X, y, rng.normal(size=d) * 0.3, rounds, 1.0 / (10 * n), loss, rng)
    c_t, lam = confidence_weight(rounds, cfg), barrier_weight(log, cfg)
    weights_printed = dict(c_t=c_t, lambda_t=lam)
    weights_scaled = dict(c_t=c_t / (n * rounds), lambda_t=lam / (n * rounds))
    worst = 0.0
    checked = 0
    while checked < points:
        direction = rng.normal(size=d)
        h = direction / np.linalg.norm(direction) * radius * 0.8 * rng.random() ** (1.0 / d)
        if variance_statistic(log, h, X, loss) <= 1e-6:
            continue

        for kw in (weights_printed, weights_scaled):
            def value(w):
                return lcb_prime_objective(log, w, X, loss, cfg, centered=True, **kw)

            fd = finite_difference_gradient(value, h, step=step, radius=radius)
            g = lcb_prime_gradient(log, h, X, loss, cfg, **kw)
            worst = max(worst, float(np.linalg.norm(g - fd) / max(np.linalg.norm(fd), VARIANCE_EPS)))
        checked += 1
    return worst
