import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nnrates.classifier import (
    bayes_predict,
    conditional_risk,
    fit,
    fit_arrays,
    mistake_probability,
    predict,
    predict_batch,
)
from nnrates.distributions import AugmentedSample, FiniteAtomic, PowerMargin1D
from nnrates.errors import UnsupportedMethodError
from nnrates.metric import FiniteMetric, IntervalMetric


def brute_predict(space, xs, zs, ys, k, query):
    """Reference rule: sort by (distance, z, index), majority with ties to 1."""
    keys = sorted(range(len(xs)), key=lambda i: (space.distance(query, xs[i]), zs[i], i))
    vote = sum(ys[i] for i in keys[:k])
    return 1 if 2 * vote >= k else 0


def test_fit_validation():
    im = IntervalMetric(0.0, 1.0)
    good = [AugmentedSample(0.1, 0.5, 0, 0), AugmentedSample(0.9, 0.2, 1, 1)]
    model = fit(im, good, k=1)
    assert model.n == 2
    with pytest.raises(ValueError):
        fit(im, [AugmentedSample(0.1, 0.5, 0, 0), AugmentedSample(0.9, 0.2, 2, 1)], k=1)
    with pytest.raises(ValueError):
        fit(im, [AugmentedSample(0.1, 1.5, 0, 0)], k=1)  # z outside [0, 1)
    with pytest.raises(ValueError):
        fit(im, good, k=3)  # k > n
    with pytest.raises(ValueError):
        fit(im, good, k=0)


def test_even_vote_tie_goes_to_one():
    im = IntervalMetric(0.0, 1.0)
    xs = np.array([0.4, 0.6, 0.1, 0.9])
    zs = np.array([0.1, 0.2, 0.3, 0.4])
    ys = np.array([1, 0, 0, 1])
    model = fit_arrays(im, xs, zs, ys, k=2)
    # nearest two of 0.5 carry one vote each way; the tie resolves to 1
    assert predict(model, 0.5) == 1


def test_distance_tie_uses_z_then_index():
    im = IntervalMetric(0.0, 1.0)
    xs = np.array([0.4, 0.6])  # equidistant from 0.5
    ys = np.array([1, 0])
    m_low_first = fit_arrays(im, xs, np.array([0.1, 0.9]), ys, k=1)
    m_high_first = fit_arrays(im, xs, np.array([0.9, 0.1]), ys, k=1)
    assert predict(m_low_first, 0.5) == 1
    assert predict(m_high_first, 0.5) == 0
    # exact (distance, z) tie falls back to the source index
    m_same = fit_arrays(im, xs, np.array([0.5, 0.5]), ys, k=1)
    assert predict(m_same, 0.5) == 1


@settings(max_examples=200, deadline=None)
@given(
    st.integers(min_value=1, max_value=14),
    st.integers(min_value=0, max_value=2**32 - 1),
)
def test_predict_matches_brute_force_with_ties(n, seed):
    rng = np.random.default_rng(seed)
    im = IntervalMetric(0.0, 1.0)
    xs = rng.choice([0.0, 0.25, 0.5, 0.75, 1.0], size=n)  # heavy location ties
    zs = rng.random(n)
    ys = rng.integers(0, 2, size=n)
    k = int(rng.integers(1, n + 1))
    model = fit_arrays(im, xs, zs, ys, k)
    for query in rng.random(4):
        assert predict(model, query) == brute_predict(im, xs, zs, ys, k, query)


@settings(max_examples=100, deadline=None)
@given(st.integers(min_value=2, max_value=60), st.integers(min_value=0, max_value=2**32 - 1))
def test_batch_predict_matches_scalar_interval(n, seed):
    rng = np.random.default_rng(seed)
    im = IntervalMetric(0.0, 1.0)
    xs = rng.random(n)
    zs = rng.random(n)
    ys = rng.integers(0, 2, size=n)
    k = int(rng.integers(1, n + 1))
    model = fit_arrays(im, xs, zs, ys, k)
    queries = rng.random(16)
    got = predict_batch(model, queries)
    want = np.array([predict(model, q) for q in queries])
    assert np.array_equal(got, want)


def test_batch_predict_matches_scalar_atomic():
    matrix = np.array([[0.0, 1.0, 1.0], [1.0, 0.0, 2.0], [1.0, 2.0, 0.0]])
    fm = FiniteMetric(matrix)
    rng = np.random.default_rng(5)
    n = 25
    xs = rng.integers(0, 3, size=n)
    zs = rng.random(n)
    ys = rng.integers(0, 2, size=n)
    for k in (1, 2, 5):
        model = fit_arrays(fm, xs, zs, ys, k)
        queries = np.array([0, 1, 2, 0, 1])
        got = predict_batch(model, queries)
        want = np.array([predict(model, int(q)) for q in queries])
        assert np.array_equal(got, want)


def test_bayes_predict_threshold():
    pm = PowerMargin1D(1.0)
    assert bayes_predict(pm, 0.6) == 1
    assert bayes_predict(pm, 0.4) == 0
    assert bayes_predict(pm, 0.5) == 1  # exactly 1/2 goes to 1


def test_conditional_risk_identity():
    pm = PowerMargin1D(1.0)
    im = IntervalMetric(0.0, 1.0)
    rng = np.random.default_rng(0)
    xs, zs, ys = pm.sample_arrays(1, 200)
    model = fit_arrays(im, xs, zs, ys, k=9)
    for q in rng.random(50):
        rep = conditional_risk(model, pm, q)
        eta = q  # this family's conditional label frequency is the identity
        assert rep.bayes_pointwise == pytest.approx(min(eta, 1 - eta), abs=1e-12)
        assert rep.conditional_risk - rep.bayes_pointwise == pytest.approx(rep.excess, abs=1e-15)
        assert rep.excess >= -1e-15


def test_mistake_probability_exact_atomic():
    fm = FiniteMetric(np.array([[0.0, 1.0], [1.0, 0.0]]))
    fa = FiniteAtomic(fm, [0.25, 0.75], [0.9, 0.1])
    xs = np.array([0, 0, 1])
    zs = np.array([0.3, 0.6, 0.1])
    ys = np.array([1, 1, 0])
    model = fit_arrays(fm, xs, zs, ys, k=1)
    got = mistake_probability(model, fa, method="exact")
    # the 1-NN rule predicts 1 on atom 0 and 0 on atom 1
    want = 0.25 * (1 - 0.9) + 0.75 * 0.1
    assert got.value == pytest.approx(want, abs=1e-15)
    assert got.error_bound == 0.0


def test_mistake_probability_monte_carlo():
    pm = PowerMargin1D(1.0)
    im = IntervalMetric(0.0, 1.0)
    xs, zs, ys = pm.sample_arrays(2, 500)
    model = fit_arrays(im, xs, zs, ys, k=21)
    with pytest.raises(UnsupportedMethodError):
        mistake_probability(model, pm, method="exact")
    got = mistake_probability(model, pm, method="monte_carlo", mc_points=4000, seed=9)
    # the trained rule cannot beat the Bayes floor of 0.25, and with
    # n=500, k=21 it should sit well under 0.35
    assert 0.2 < got.value < 0.35
    assert got.error_bound >= 1.0 / 4000
    again = mistake_probability(model, pm, method="monte_carlo", mc_points=4000, seed=9)
    assert got.value == again.value


def test_mistake_probability_error_floor():
    fm = FiniteMetric(np.array([[0.0, 1.0], [1.0, 0.0]]))
    fa = FiniteAtomic(fm, [0.5, 0.5], [1.0, 0.0])
    xs = np.array([0, 1])
    zs = np.array([0.2, 0.8])
    ys = np.array([1, 0])
    model = fit_arrays(fm, xs, zs, ys, k=1)
    got = mistake_probability(model, fa, method="monte_carlo", mc_points=100, seed=0)
    assert got.error_bound == pytest.approx(1.0 / 100)  # perfect rule, floor applies
    assert got.value == 0.0
