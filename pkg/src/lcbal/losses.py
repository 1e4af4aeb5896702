"""Convex margin losses ``L(y * h(x))`` with derivatives and feasible-range bounds."""

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

LOSS_KINDS = ("logistic", "squared", "exponential")


@dataclass(frozen=True)
class MarginLoss:
    """A convex, nonnegative function of the margin ``m = y * h(x)``.

    Parameters
    ----------
    kind : {"logistic", "squared", "exponential"}
        ``logistic`` is ``log(1 + exp(-m))``, ``squared`` is ``(1 - m)**2``
        and ``exponential`` is ``exp(-m)``.
    """

    kind: str = "logistic"

    def __post_init__(self):
        if self.kind not in LOSS_KINDS:
            raise ValueError(f"unknown loss {self.kind!r}; choose one of {LOSS_KINDS}")

    def value(self, margin):
        m = np.asarray(margin, dtype=np.float64)
        if self.kind == "logistic":
            return np.logaddexp(0.0, -m)
        if self.kind == "squared":
            return (1.0 - m) ** 2
        return np.exp(-m)

    def derivative(self, margin):
        m = np.asarray(margin, dtype=np.float64)
        if self.kind == "logistic":
            return -expit(-m)
        if self.kind == "squared":
            return -2.0 * (1.0 - m)
        return -np.exp(-m)

    def max_value(self, radius, d):
        """Largest loss over margins reachable with ``||h|| <= radius`` on ``[-1, 1]^d``.

        Cauchy-Schwarz gives ``|m| <= radius * sqrt(d)``; every supported loss
        is decreasing up to its minimum, so the worst margin is the most
        negative one.
        """
        if radius < 0 or d < 1:
            raise ValueError(f"need radius >= 0 and d >= 1, got radius={radius}, d={d}")
        return float(self.value(-radius * np.sqrt(d)))


def get_loss(loss):
    if isinstance(loss, MarginLoss):
        return loss
    return MarginLoss(loss)
