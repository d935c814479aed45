import math

import numpy as np
import pytest
from scipy import optimize, stats

from coranks.densities import make_reference
from coranks.grid import factorize, make_grid
from coranks.scores import (BallScore, TangentFunction, ball_score_from_tangent,
                            centering_constant, score_from_name, spherical_quantile_map,
                            tangent_from_name)

GAUSS2 = make_reference("gaussian", 2)


@pytest.mark.parametrize("name", ["tanh:1", "sin:2", "cos:1", "clip:2:1.5"])
def test_tangent_centered_and_bounded(name):
    eta = tangent_from_name(name, GAUSS2, draws=200_000, seed=1)
    z = GAUSS2.sample(np.random.default_rng(9), 400_000)
    vals = eta(z)
    assert abs(vals.mean()) < 1e-3 + 3 * vals.std() / math.sqrt(len(z))
    assert np.max(np.abs(vals)) <= eta.bound


def test_cos_centering_matches_closed_form():
    c = centering_constant(lambda z: np.cos(z[:, 0]), GAUSS2, draws=10**6, seed=0)
    assert c == pytest.approx(math.exp(-0.5), abs=3e-3)


def test_odd_tangents_center_exactly_under_symmetry():
    assert tangent_from_name("tanh:1", GAUSS2).centering == 0.0
    assert tangent_from_name("sin:2", make_reference("t", 2)).centering == 0.0


@pytest.mark.parametrize("name", ["tanh:3", "tanh", "exp:1", "clip:1:-1", "clip:1"])
def test_bad_tangent_names(name):
    with pytest.raises(ValueError):
        tangent_from_name(name, GAUSS2, draws=10)


def test_zero_tangent_gives_zero_score():
    eta = TangentFunction("zero", lambda z: np.zeros(len(z)), 0.0)
    grid = make_grid(factorize(60, 2, 6, 10))
    score = ball_score_from_tangent(eta, spherical_quantile_map(GAUSS2))
    assert np.all(score(grid.points) == 0.0)


def test_uniform_d1_quantile_is_identity():
    uni = make_reference("uniform", 1)
    q = spherical_quantile_map(uni)
    u = np.array([[-0.7], [0.0], [0.25], [0.9]])
    np.testing.assert_allclose(q(u), u, atol=1e-15)
    eta = TangentFunction("cube", lambda z: z[:, 0] ** 3, 1.0)
    np.testing.assert_allclose(ball_score_from_tangent(eta, q)(u)[:, 0], u[:, 0] ** 3, atol=1e-15)


def test_gaussian_tanh_score_against_numeric_inverse():
    grid = make_grid(factorize(60, 2, 6, 10))
    eta = tangent_from_name("tanh:1", GAUSS2)
    score = ball_score_from_tangent(eta, spherical_quantile_map(GAUSS2))
    vals = score(grid.points)[:, 0]
    chi2 = stats.chi2(2)
    for i in [0, 7, 23, 59]:
        g = grid.points[i]
        t = np.linalg.norm(g)
        r = optimize.brentq(lambda x: chi2.cdf(x * x) - t, 0.0, 50.0, xtol=1e-14)
        assert vals[i] == pytest.approx(math.tanh(r * g[0] / t), abs=1e-9)


def test_score_catalog():
    u = np.array([[0.3, 0.4], [0.0, 0.0]])
    np.testing.assert_array_equal(score_from_name("wilcoxon", 2)(u), u)
    np.testing.assert_allclose(score_from_name("sign", 2)(u), [[0.6, 0.8], [0.0, 0.0]])
    gauss = score_from_name("gaussian", 2)(u)
    assert np.linalg.norm(gauss[0]) == pytest.approx(math.sqrt(stats.chi2(2).ppf(0.5)))
    assert gauss[1].tolist() == [0.0, 0.0]
    tan = score_from_name("tangent:tanh:2", 2)
    assert isinstance(tan, BallScore) and tan.dim == 1
    with pytest.raises(ValueError, match="unknown score"):
        score_from_name("vdw", 2)


@pytest.mark.parametrize("score", ["wilcoxon", "sign", "gaussian", "tangent:sin:1"])
@pytest.mark.parametrize("n, nr, ns", [(60, 6, 10), (5000, 40, 125), (10, 3, 3)])
def test_scores_finite_on_grid(score, n, nr, ns):
    grid = make_grid(factorize(n, 2, nr, ns))
    assert np.all(np.isfinite(score_from_name(score, 2, draws=1000)(grid.points)))
