import numpy as np
import pytest
from scipy import stats

from coranks.densities import (FIG1_MIXTURE, GaussianMixture, make_reference,
                               reference_from_dict)

SPHERICAL = [("gaussian", {}), ("t", {"nu": 3.0}), ("t", {"nu": 7.5}), ("uniform", {})]


@pytest.mark.parametrize("name, params", SPHERICAL)
@pytest.mark.parametrize("d", [1, 2, 3])
def test_radial_law_matches_sampler(name, params, d):
    ref = make_reference(name, d, **params)
    z = ref.sample(np.random.default_rng(d), 50_000)
    r = np.linalg.norm(z, axis=1)
    assert stats.kstest(r, ref.radial_cdf).pvalue > 0.001
    p = np.array([0.1, 0.5, 0.9])
    np.testing.assert_allclose(ref.radial_cdf(ref.radial_ppf(p)), p, atol=1e-10)


@pytest.mark.parametrize("name, params", SPHERICAL + [("mixture", {})])
def test_score_is_minus_grad_logpdf(name, params):
    d = 2
    ref = make_reference(name, d, **params)
    z = ref.sample(np.random.default_rng(3), 20)
    if name == "uniform":
        z = z * 0.9  # stay away from the boundary
    h = 1e-6
    grad = np.column_stack([(ref.logpdf(z + h * e) - ref.logpdf(z - h * e)) / (2 * h)
                            for e in np.eye(d)])
    np.testing.assert_allclose(ref.score(z), -grad, rtol=1e-5, atol=1e-6)


def test_logpdf_against_scipy():
    z = np.random.default_rng(4).standard_normal((10, 3))
    g = make_reference("gaussian", 3)
    np.testing.assert_allclose(g.logpdf(z), stats.multivariate_normal(np.zeros(3)).logpdf(z))
    t = make_reference("t", 3, nu=3.0)
    np.testing.assert_allclose(t.logpdf(z), stats.multivariate_t(np.zeros(3), np.eye(3), df=3).logpdf(z))
    mix = GaussianMixture(2)
    z2 = z[:, :2]
    dens = sum(w * stats.multivariate_normal(m, c).pdf(z2)
               for w, m, c in zip(FIG1_MIXTURE["weights"], FIG1_MIXTURE["means"], FIG1_MIXTURE["covs"]))
    np.testing.assert_allclose(mix.logpdf(z2), np.log(dens))


def test_uniform_logpdf_support():
    u = make_reference("uniform", 2)
    vals = u.logpdf(np.array([[0.1, 0.2], [1.5, 0.0]]))
    assert np.isfinite(vals[0]) and vals[1] == -np.inf


def test_mixture_documented_parameters_and_roundtrip():
    mix = make_reference("mixture", 2)
    params = mix.to_dict()
    assert params["weights"] == pytest.approx([1 / 3] * 3)
    assert params["means"] == [[-3.0, 0.0], [0.0, 0.0], [3.0, 1.5]]
    again = reference_from_dict(params)
    z = mix.sample(np.random.default_rng(0), 5)
    np.testing.assert_array_equal(again.sample(np.random.default_rng(0), 5), z)
    assert not mix.spherical


def test_unknown_reference():
    with pytest.raises(ValueError, match="unknown density"):
        make_reference("cauchy", 2)
