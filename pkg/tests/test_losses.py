import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lcbal.losses import LOSS_KINDS, MarginLoss, get_loss


@pytest.mark.parametrize("kind, m, expected", [
    ("logistic", 0.0, math.log(2.0)),
    ("squared", 1.0, 0.0),
    ("exponential", 0.0, 1.0),
])
def test_values(kind, m, expected):
    assert MarginLoss(kind).value(m) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("kind, m, expected", [("logistic", 0.0, -0.5), ("squared", 1.0, 0.0)])
def test_derivatives(kind, m, expected):
    assert MarginLoss(kind).derivative(m) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("kind, R, d, expected", [
    ("logistic", 0.0, 3, math.log(2.0)),
    ("exponential", 1.0, 1, math.e),
    ("squared", 1.0, 4, 9.0),
])
def test_max_value_examples(kind, R, d, expected):
    assert MarginLoss(kind).max_value(R, d) == pytest.approx(expected, rel=1e-15)


@pytest.mark.parametrize("kind", LOSS_KINDS)
def test_derivative_matches_central_differences(kind):
    loss = MarginLoss(kind)
    m = np.linspace(-5, 5, 41)
    step = 1e-6
    fd = (loss.value(m + step) - loss.value(m - step)) / (2 * step)
    np.testing.assert_allclose(loss.derivative(m), fd, rtol=1e-6, atol=1e-8)


@pytest.mark.parametrize("kind", LOSS_KINDS)
def test_bounded_by_max_on_feasible_pairs(kind):
    rng = np.random.default_rng(0)
    loss = MarginLoss(kind)
    R, d = 3.0, 4
    h = rng.normal(size=(10_000, d))
    h *= (R * rng.random((10_000, 1)) ** (1 / d)) / np.linalg.norm(h, axis=1, keepdims=True)
    x = rng.uniform(-1, 1, size=(10_000, d))
    y = rng.choice([-1.0, 1.0], size=10_000)
    values = loss.value(y * np.einsum("ij,ij->i", h, x))
    assert np.all(values <= loss.max_value(R, d))
    assert np.all(values >= 0)


@settings(max_examples=100)
@given(st.sampled_from(LOSS_KINDS), st.floats(-20, 20), st.floats(-20, 20), st.floats(0, 1))
def test_convexity(kind, a, b, lam):
    loss = MarginLoss(kind)
    mid = loss.value(lam * a + (1 - lam) * b)
    chord = lam * loss.value(a) + (1 - lam) * loss.value(b)
    assert mid <= chord + 1e-9 * max(1.0, abs(chord))


def test_logistic_overflow_safety():
    v = MarginLoss("logistic").value(-1e4)
    assert np.isfinite(v)
    assert abs(v - 1e4) <= 1e-9
    assert MarginLoss("logistic").value(1e4) >= 0


def test_unknown_kind_and_coercion():
    with pytest.raises(ValueError):
        MarginLoss("hinge")
    assert get_loss("squared") == MarginLoss("squared")
    with pytest.raises(ValueError):
        MarginLoss().max_value(-1.0, 2)
