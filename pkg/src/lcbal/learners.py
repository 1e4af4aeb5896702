"""Pool-based learning loops: LCB-AL, UPAL and a passive baseline.

Each loop takes the pool features, a labelling oracle, an optional labelled
test set and a :class:`LearnerConfig`, and returns a :class:`RunResult`
whose error curve has one entry per distinct label bought from the oracle.
"""

import math
import sys
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Optional

import numpy as np

from .bounds import (
    BoundConfig,
    QueryLog,
    barrier_weight,
    confidence_weight,
    importance_weighted_risk,
    importance_weighted_risk_gradient,
    lcb_prime_gradient,
    lcb_prime_objective,
)
from .losses import LOSS_KINDS, MarginLoss, get_loss
from .metrics import auc, evaluate_error
from .optimize import ObjectiveError, minimize_barrier_objective
from .sampling import draw_index, query_distribution, upal_distribution
from .validation import check_features, check_p_min

ALGORITHMS = ("lcb-al", "upal", "passive")


class OracleAborted(RuntimeError):
    """The label source stopped answering (e.g. end of interactive input)."""


class LearnerAbort(RuntimeError):
    """A learning loop could not continue; ``diagnostics`` says where."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class Oracle:
    """Label source with a per-index cache.

    Subclasses implement :meth:`_ask`. Repeat queries are answered from the
    cache and do not count towards :attr:`query_count`.
    """

    def __init__(self, n):
        self.n = int(n)
        self._answers = {}

    @property
    def query_count(self):
        return len(self._answers)

    def __contains__(self, index):
        return index in self._answers

    def answered(self):
        """Copy of the ``{index: label}`` answers given so far."""
        return dict(self._answers)

    def query(self, index):
        index = int(index)
        if not 0 <= index < self.n:
            raise IndexError(f"point index {index} outside pool of size {self.n}")
        if index not in self._answers:
            self._answers[index] = float(self._ask(index))
        return self._answers[index]

    def _ask(self, index):
        raise NotImplementedError


class SimulatedOracle(Oracle):
    """Answers from stored ground-truth labels."""

    mode = "simulated"

    def __init__(self, labels):
        labels = np.asarray(labels, dtype=np.float64)
        super().__init__(labels.shape[0])
        self._labels = labels

    def _ask(self, index):
        return self._labels[index]


class InteractiveOracle(Oracle):
    """Asks a person at the terminal; ``+`` means +1 and ``-`` means -1."""

    mode = "interactive"

    def __init__(self, X, stdin=None, stdout=None):
        super().__init__(len(X))
        self._X = np.asarray(X)
        self._in = stdin if stdin is not None else sys.stdin
        self._out = stdout if stdout is not None else sys.stdout

    def _ask(self, index):
        features = ", ".join(f"{v:g}" for v in self._X[index])
        prompt = f"query #{self.query_count + 1} point {index}: [{features}] label? [+/-] "
        while True:
            self._out.write(prompt)
            self._out.flush()
            line = self._in.readline()
            if not line:
                raise OracleAborted(f"input closed while waiting for the label of point {index}")
            token = line.strip()
            if token == "+":
                return 1.0
            if token == "-":
                return -1.0
            self._out.write("please answer + or -\n")


@dataclass
class LearnerConfig:
    """Settings shared by the learning loops.

    ``p_min=None`` means ``1 / (10 n)`` and ``round_cap=None`` means
    ``20 * budget``; :meth:`resolve` fills both in for a pool of size ``n``.
    """

    budget: int = 300
    p_min: Optional[float] = None
    radius: float = 100.0
    delta: float = 0.01
    loss: str = "logistic"
    round_cap: Optional[int] = None
    mu: float = 1e-2
    refit_every: int = 1
    tol: float = 1e-6
    max_iter: int = 500
    c_scale: float = 0.1
    lambda_scale: float = 100.0
    risk_scale: str = "sum"

    def resolve(self, n):
        if self.budget < 1:
            raise ValueError(f"budget must be at least 1, got {self.budget}")
        if self.budget > n:
            raise ValueError(f"budget {self.budget} exceeds the pool size {n}")
        if self.loss not in LOSS_KINDS:
            raise ValueError(f"unknown loss {self.loss!r}")
        if self.risk_scale not in ("sum", "mean"):
            raise ValueError(f"risk_scale must be 'sum' or 'mean', got {self.risk_scale!r}")
        if self.refit_every < 1:
            raise ValueError(f"refit_every must be at least 1, got {self.refit_every}")
        p_min = 1.0 / (10 * n) if self.p_min is None else self.p_min
        check_p_min(p_min, n)
        round_cap = 20 * self.budget if self.round_cap is None else self.round_cap
        if round_cap < self.budget:
            raise ValueError(f"round_cap {round_cap} is below the budget {self.budget}")
        return replace(self, p_min=p_min, round_cap=round_cap)

    def bound_config(self):
        return BoundConfig(self.delta, self.radius, self.c_scale, self.lambda_scale)


class TraceEntry(NamedTuple):
    round: int
    index: int
    probability: float
    was_new: bool
    unique_queries: int
    test_error: float


@dataclass
class RunResult:
    algorithm: str
    final_hypothesis: np.ndarray
    error_curve: list = field(default_factory=list)
    query_trace: list = field(default_factory=list)
    rounds_used: int = 0
    budget_reached: bool = False
    #: squared norm of the hypothesis after every round
    sq_norms: list = field(default_factory=list)
    unconverged_solves: int = 0
    query_log: Optional[QueryLog] = None

    @property
    def auc(self):
        return auc(self.error_curve) if self.error_curve else math.nan

    @property
    def final_error(self):
        return self.error_curve[-1][1] if self.error_curve else math.nan


class _Recorder:
    def __init__(self, algorithm, test, d):
        self.test = test
        self.result = RunResult(algorithm, np.zeros(d))

    def record(self, rnd, index, probability, was_new, unique, h):
        err = math.nan
        if was_new:
            err = evaluate_error(h, self.test) if self.test is not None else math.nan
            self.result.error_curve.append((unique, err))
        self.result.query_trace.append(TraceEntry(rnd, int(index), float(probability), was_new, unique, err))
        self.result.sq_norms.append(float(h @ h))
        self.result.rounds_used = rnd


def _solve(fun, h, radius, cfg, rnd, recorder):
    try:
        report = minimize_barrier_objective(fun, h, radius, tol=cfg.tol, max_iter=cfg.max_iter)
    except ObjectiveError as exc:
        raise LearnerAbort(
            f"{recorder.result.algorithm}: solver failed in round {rnd}: {exc}",
            {"round": rnd, "start": h.tolist(), "rounds_done": recorder.result.rounds_used},
        ) from exc
    if not report.converged:
        recorder.result.unconverged_solves += 1
    return report.solution


def _active_loop(algorithm, X, oracle, test, cfg, rng, distribution, make_objective, radius):
    n, d = X.shape
    log = QueryLog(n, cfg.p_min)
    recorder = _Recorder(algorithm, test, d)
    h = np.zeros(d)
    unique = 0
    rnd = 0
    while unique < cfg.budget and rnd < cfg.round_cap:
        rnd += 1
        p = distribution(h, log)
        i = draw_index(p, rng)
        was_new = i not in log.labels
        # re-queried points reuse the label stored in the log
        label = oracle.query(i) if was_new else log.labels[i]
        if was_new:
            unique += 1
        log.append(i, p[i], label)
        h = _solve(make_objective(log), h, radius, cfg, rnd, recorder)
        recorder.record(rnd, i, p[i], was_new, unique, h)
    result = recorder.result
    result.final_hypothesis = h
    result.budget_reached = unique >= cfg.budget
    result.query_log = log
    return result


def run_lcb_al(pool, oracle, test, cfg, rng):
    """LCB-AL: sample by pseudo-labelled loss, then minimize the barrier-regularized bound.

    Starts from ``h = 0``. Each round draws one pool index from
    :func:`query_distribution`, buys its label if it is new, and moves ``h``
    to a stationary point of :func:`lcb_prime_objective` warm-started from
    the current ``h``. Stops once ``cfg.budget`` distinct labels are bought
    or ``cfg.round_cap`` rounds have run.
    """
    X = check_features(pool)
    cfg = cfg.resolve(X.shape[0])
    loss = get_loss(cfg.loss)
    bcfg = cfg.bound_config()

    def distribution(h, log):
        return query_distribution(X, h, log.labels, cfg.p_min, loss)

    def make_objective(log):
        c_t = confidence_weight(log.round_count, bcfg)
        lam = barrier_weight(log, bcfg)
        if cfg.risk_scale == "sum":
            # same minimizer as n t * risk - C_t sqrt(V') + barrier, kept at O(1) scale
            scale = log.n * log.round_count
            c_t, lam = c_t / scale, lam / scale

        def fun(w):
            kw = dict(c_t=c_t, lambda_t=lam)
            return (lcb_prime_objective(log, w, X, loss, bcfg, centered=True, **kw),
                    lcb_prime_gradient(log, w, X, loss, bcfg, **kw))
        return fun

    return _active_loop("lcb-al", X, oracle, test, cfg, rng, distribution, make_objective, cfg.radius)


def run_upal(pool, oracle, test, cfg, rng):
    """UPAL: sample by prediction entropy, minimize the importance-weighted risk plus ``mu ||h||^2``."""
    X = check_features(pool)
    cfg = cfg.resolve(X.shape[0])
    loss = get_loss(cfg.loss)

    def distribution(h, log):
        return upal_distribution(X, h, cfg.p_min)

    def make_objective(log):
        def fun(w):
            value = importance_weighted_risk(log, w, X, loss) + cfg.mu * float(w @ w)
            grad = importance_weighted_risk_gradient(log, w, X, loss) + 2.0 * cfg.mu * w
            return value, grad
        return fun

    return _active_loop("upal", X, oracle, test, cfg, rng, distribution, make_objective, math.inf)


def _regularized_logistic(Xl, yl, mu):
    loss = MarginLoss("logistic")
    m = Xl.shape[0]

    def fun(w):
        margins = yl * (Xl @ w)
        value = float(loss.value(margins).sum()) / m + mu * float(w @ w)
        grad = (loss.derivative(margins) * yl) @ Xl / m + 2.0 * mu * w
        return value, grad
    return fun


def run_passive(pool, oracle, test, cfg, rng):
    """Passive baseline: label ``budget`` points drawn uniformly without replacement.

    The regularized logistic fit is refreshed every ``cfg.refit_every``
    labels and always after the last one.
    """
    X = check_features(pool)
    n, d = X.shape
    cfg = cfg.resolve(n)
    order = rng.permutation(n)[: cfg.budget]
    recorder = _Recorder("passive", test, d)
    h = np.zeros(d)
    labels = np.empty(cfg.budget)
    for k, i in enumerate(order):
        labels[k] = oracle.query(i)
        m = k + 1
        if m % cfg.refit_every == 0 or m == cfg.budget:
            fun = _regularized_logistic(X[order[:m]], labels[:m], cfg.mu)
            h = _solve(fun, h, math.inf, cfg, m, recorder)
        recorder.record(m, i, 1.0 / (n - k), True, m, h)
    result = recorder.result
    result.final_hypothesis = h
    result.budget_reached = True
    return result


RUNNERS = {"lcb-al": run_lcb_al, "upal": run_upal, "passive": run_passive}


def run_learner(algorithm, pool, oracle, test, cfg, rng):
    try:
        runner = RUNNERS[algorithm]
    except KeyError:
        raise ValueError(f"unknown algorithm {algorithm!r}; choose one of {ALGORITHMS}") from None
    return runner(pool, oracle, test, cfg, rng)
