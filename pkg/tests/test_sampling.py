import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lcbal.sampling import (
    draw_index,
    prediction_entropy,
    pseudo_labels,
    query_distribution,
    upal_distribution,
)


def test_pseudo_labels_use_sign_and_known_labels():
    y = pseudo_labels(np.array([0.0, -0.2, 0.4, -1.0]), {3: 1.0, 2: -1.0})
    np.testing.assert_array_equal(y, [1.0, -1.0, -1.0, 1.0])


def test_two_point_arithmetic_example():
    # exponential loss at margin -log(l) is l; both labels known
    X = np.array([[0.0], [-math.log(3.0)]])
    p = query_distribution(X, np.array([1.0]), {0: 1.0, 1: 1.0}, 0.1, "exponential")
    np.testing.assert_allclose(p, [0.3, 0.7], rtol=0, atol=1e-15)


def test_zero_loss_mass_falls_back_to_uniform():
    X = np.array([[1.0], [-1.0], [0.5]])
    h = np.array([1.0])
    # every point at margin 1 under squared loss, third one by its known label
    p = query_distribution(X, h, {2: 1.0}, 0.0, "squared")
    assert p[2] > 0
    p = query_distribution(X[:2], h, {}, 0.0, "squared")
    np.testing.assert_array_equal(p, [0.5, 0.5])


def test_uniform_at_zero_hypothesis():
    X = np.random.default_rng(0).uniform(-1, 1, (7, 3))
    np.testing.assert_allclose(query_distribution(X, np.zeros(3), {}, 0.01), np.full(7, 1 / 7), atol=1e-15)
    np.testing.assert_allclose(upal_distribution(X, np.zeros(3), 0.01), np.full(7, 1 / 7), atol=1e-15)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 30), st.integers(1, 4), st.floats(0.0, 1.0), st.sampled_from(["logistic", "squared", "exponential"]),
       st.integers(0, 2**31))
def test_distribution_invariants(n, d, floor_frac, kind, seed):
    rng = np.random.default_rng(seed)
    X = rng.uniform(-1, 1, (n, d))
    h = rng.normal(size=d) * rng.uniform(0, 20)
    known = {int(i): float(rng.choice([-1, 1])) for i in rng.choice(n, size=rng.integers(0, n + 1), replace=False)}
    p_min = floor_frac / n
    for p in (query_distribution(X, h, known, p_min, kind), upal_distribution(X, h, p_min)):
        assert abs(p.sum() - 1.0) <= 1e-12
        assert np.all(p >= p_min * (1 - 1e-12))


def test_floor_saturation():
    X = np.array([[0.9], [-0.1], [0.3], [0.05]])
    h = np.array([4.0])
    exact = query_distribution(X, h, {}, 0.25, "exponential")
    np.testing.assert_allclose(exact, np.full(4, 0.25), atol=1e-15)
    for eps in (1e-2, 1e-4, 1e-8):
        p = query_distribution(X, h, {}, (1 - eps) / 4, "exponential")
        assert np.max(np.abs(p - 0.25)) <= eps + 1e-15


def test_floor_above_one_over_n_is_rejected():
    with pytest.raises(ValueError):
        query_distribution(np.zeros((4, 1)), np.zeros(1), {}, 0.3)
    with pytest.raises(ValueError):
        upal_distribution(np.zeros((4, 1)), np.zeros(1), -0.1)


def test_loss_weights_minimize_variance_on_a_labelled_simplex():
    losses = np.array([0.4, 1.3, 2.2])
    rule = losses / losses.sum()
    steps = 600
    a, b = np.meshgrid(np.arange(1, steps), np.arange(1, steps), indexing="ij")
    a, b = a.ravel() / steps, b.ravel() / steps
    keep = a + b < 1 - 1e-12
    grid = np.stack([a[keep], b[keep], 1 - a[keep] - b[keep]], axis=1)
    objective = (losses**2 / grid).sum(axis=1)
    best = grid[np.argmin(objective)]
    assert (losses**2 / rule).sum() <= objective.min() + 1e-12
    np.testing.assert_allclose(best, rule, atol=2.0 / steps)


def test_entropy_vanishes_at_extreme_margin():
    X = np.array([[50.0], [0.0], [0.1]])
    p = upal_distribution(X, np.array([1.0]), 0.0)
    assert p[0] < 1e-18
    assert prediction_entropy(np.array([0.0]))[0] == pytest.approx(math.log(2))
    assert np.isfinite(prediction_entropy(np.array([1e4, -1e4]))).all()


def test_point_mass_and_determinism():
    rng = np.random.default_rng(0)
    assert {draw_index(np.array([1.0, 0.0, 0.0]), rng) for _ in range(200)} == {0}
    assert {draw_index(np.array([0.0, 0.0, 1.0]), rng) for _ in range(200)} == {2}
    p = np.array([0.1, 0.2, 0.3, 0.4])
    r1, r2 = np.random.default_rng(9), np.random.default_rng(9)
    assert [draw_index(p, r1) for _ in range(100)] == [draw_index(p, r2) for _ in range(100)]


def test_draw_frequencies_within_three_sigma():
    p = np.array([0.05, 0.15, 0.5, 0.02, 0.28])
    rng = np.random.default_rng(1)
    draws = 100_000
    counts = np.bincount([draw_index(p, rng) for _ in range(draws)], minlength=5)
    sigma = np.sqrt(draws * p * (1 - p))
    assert np.all(np.abs(counts - draws * p) <= 3 * sigma)
