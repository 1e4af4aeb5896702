"""Smooth minimization inside an open Euclidean ball.

:func:`minimize_barrier_objective` is a limited-memory BFGS descent with a
backtracking line search. Each trial step is first halved until it lands
strictly inside the ball, so the objective (typically carrying a log barrier)
is never evaluated outside its domain; it is then halved until the Armijo
sufficient-decrease condition holds.
"""

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

ARMIJO_C = 1e-4
SHRINK = 0.5
MAX_BACKTRACKS = 60


class InfeasibleError(ValueError):
    """A point outside the open ball was supplied."""


class ObjectiveError(ArithmeticError):
    """The objective returned a non-finite value at a feasible point."""


@dataclass
class SolveReport:
    solution: np.ndarray
    value: float
    iterations: int
    final_gradient_norm: float
    converged: bool
    # set when the line search could not make progress before tolerance
    stalled: bool = False


def _inside(x, radius):
    return not np.isfinite(radius) or float(x @ x) < radius * radius


def _direction(g, s_hist, y_hist):
    """L-BFGS two-loop recursion for ``-H g``."""
    q = g.copy()
    rhos = [1.0 / (s @ y) for s, y in zip(s_hist, y_hist)]
    alphas = []
    for s, y, rho in zip(reversed(s_hist), reversed(y_hist), reversed(rhos)):
        a = rho * (s @ q)
        alphas.append(a)
        q -= a * y
    if s_hist:
        s, y = s_hist[-1], y_hist[-1]
        q *= (s @ y) / (y @ y)
    for s, y, rho, a in zip(s_hist, y_hist, rhos, reversed(alphas)):
        q += (a - rho * (y @ q)) * s
    return -q


def minimize_barrier_objective(fun, x0, radius=math.inf, tol=1e-6, max_iter=500, memory=10,
                               callback=None):
    """Minimize ``fun`` over ``{x : ||x|| < radius}`` from a feasible start.

    Parameters
    ----------
    fun : callable
        ``fun(x) -> (value, gradient)``.
    x0 : array_like of shape (d,)
        Strictly feasible start.
    radius : float, default=inf
        Ball radius; ``inf`` makes the problem unconstrained.
    tol : float, default=1e-6
        Stop once the gradient norm is at most ``tol``.
    max_iter : int, default=500
    memory : int, default=10
        Number of curvature pairs kept by the quasi-Newton update.
    callback : callable, optional
        Called with each accepted iterate.

    Returns
    -------
    SolveReport
        ``converged`` is True only when the gradient tolerance was met. When
        the line search can no longer decrease the objective (round-off
        floor) the report is returned with ``stalled=True``.
    """
    x = np.array(x0, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"start must be a vector, got shape {x.shape}")
    if not _inside(x, radius):
        raise InfeasibleError(f"start has norm {np.linalg.norm(x):.6g} >= radius {radius}")

    f, g = fun(x)
    g = np.asarray(g, dtype=np.float64)
    if not (math.isfinite(f) and np.all(np.isfinite(g))):
        raise ObjectiveError(f"objective is not finite at the start point (value {f})")

    s_hist, y_hist = deque(maxlen=memory), deque(maxlen=memory)
    gnorm = float(np.linalg.norm(g))
    it = 0
    stalled = False
    while gnorm > tol and it < max_iter:
        d = _direction(g, s_hist, y_hist)
        slope = float(g @ d)
        if not slope < 0:
            s_hist.clear()
            y_hist.clear()
            d = -g
            slope = -gnorm**2
        step = 1.0 if s_hist else min(1.0, 1.0 / gnorm)

        accepted = False
        for _ in range(MAX_BACKTRACKS):
            x_new = x + step * d
            if not _inside(x_new, radius):
                step *= SHRINK
                continue
            f_new, g_new = fun(x_new)
            if not math.isfinite(f_new):
                raise ObjectiveError(f"objective is not finite at feasible point {x_new}")
            if f_new <= f + ARMIJO_C * step * slope:
                accepted = True
                break
            step *= SHRINK
        if not accepted:
            if s_hist:
                # quasi-Newton direction may be poor; retry once from steepest descent
                s_hist.clear()
                y_hist.clear()
                continue
            stalled = True
            break

        g_new = np.asarray(g_new, dtype=np.float64)
        s, y = x_new - x, g_new - g
        if s @ y > 1e-12 * np.linalg.norm(s) * np.linalg.norm(y):
            s_hist.append(s)
            y_hist.append(y)
        assert _inside(x_new, radius)
        x, f, g = x_new, f_new, g_new
        gnorm = float(np.linalg.norm(g))
        it += 1
        if callback is not None:
            callback(x)

    return SolveReport(x, float(f), it, gnorm, gnorm <= tol, stalled)


def finite_difference_gradient(fun, x, step=1e-6, radius=math.inf):
    """Central-difference gradient of a scalar function.

    Raises :class:`InfeasibleError` if a probe point would leave the ball.
    """
    x = np.asarray(x, dtype=np.float64)
    grad = np.empty_like(x)
    for j in range(x.shape[0]):
        e = np.zeros_like(x)
        e[j] = step
        lo, hi = x - e, x + e
        if not (_inside(lo, radius) and _inside(hi, radius)):
            raise InfeasibleError(f"finite-difference probe along axis {j} leaves the ball")
        grad[j] = (fun(hi) - fun(lo)) / (2.0 * step)
    return grad
