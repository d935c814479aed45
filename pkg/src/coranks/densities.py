"""Reference densities: samplers, log-densities and location scores."""
from __future__ import annotations

import math

import numpy as np
from scipy import stats
from scipy.special import gammaln, logsumexp

from .grid import sample_spherical_uniform

# Three-component bivariate mixture used for the banana-shaped fixture.
FIG1_MIXTURE = {
    "weights": [1 / 3, 1 / 3, 1 / 3],
    "means": [[-3.0, 0.0], [0.0, 0.0], [3.0, 1.5]],
    "covs": [[[1.0, 0.0], [0.0, 1.0]],
             [[2.0, 0.5], [0.5, 1.0]],
             [[1.0, -0.4], [-0.4, 1.5]]],
}


def _rows(z, d: int) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    if z.ndim == 1:
        z = z.reshape(-1, d) if d == 1 else z[None, :]
    if z.shape[-1] != d:
        raise ValueError(f"expected {d} coordinates, got shape {z.shape}")
    return z


class ReferenceDensity:
    """Base class. ``score`` returns the location score ``-grad log f``."""

    name = "reference"
    symmetric = False  # invariant under z -> -z
    spherical = False

    def __init__(self, d: int):
        if d < 1:
            raise ValueError(f"d must be >= 1, got {d}")
        self.d = d

    def sample(self, rng: np.random.Generator, m: int) -> np.ndarray:
        raise NotImplementedError

    def logpdf(self, z) -> np.ndarray:
        raise NotImplementedError

    def score(self, z) -> np.ndarray:
        raise NotImplementedError

    def radial_cdf(self, r):
        raise TypeError(f"{self.name} is not spherically symmetric")

    def radial_ppf(self, p):
        raise TypeError(f"{self.name} is not spherically symmetric")

    def params(self) -> dict:
        return {}

    def to_dict(self) -> dict:
        return {"name": self.name, "d": self.d, **self.params()}

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.to_dict().items() if k != "name")
        return f"{type(self).__name__}({args})"


class SphericalGaussian(ReferenceDensity):
    name = "gaussian"
    symmetric = True
    spherical = True

    def sample(self, rng, m):
        return rng.standard_normal((m, self.d))

    def logpdf(self, z):
        z = _rows(z, self.d)
        return -0.5 * np.einsum("ij,ij->i", z, z) - 0.5 * self.d * math.log(2 * math.pi)

    def score(self, z):
        return _rows(z, self.d).copy()

    def radial_cdf(self, r):
        return stats.chi.cdf(r, self.d)

    def radial_ppf(self, p):
        return stats.chi.ppf(p, self.d)


class SphericalT(ReferenceDensity):
    """Multivariate Student t with identity scatter and ``nu`` degrees of freedom."""

    name = "t"
    symmetric = True
    spherical = True

    def __init__(self, d: int, nu: float = 3.0):
        super().__init__(d)
        if nu <= 0:
            raise ValueError(f"nu must be > 0, got {nu}")
        self.nu = float(nu)

    def params(self):
        return {"nu": self.nu}

    def sample(self, rng, m):
        g = rng.standard_normal((m, self.d))
        w = rng.chisquare(self.nu, size=(m, 1))
        return g / np.sqrt(w / self.nu)

    def logpdf(self, z):
        z = _rows(z, self.d)
        nu, d = self.nu, self.d
        q = np.einsum("ij,ij->i", z, z)
        return (gammaln((nu + d) / 2) - gammaln(nu / 2) - 0.5 * d * math.log(nu * math.pi)
                - 0.5 * (nu + d) * np.log1p(q / nu))

    def score(self, z):
        z = _rows(z, self.d)
        q = np.einsum("ij,ij->i", z, z)
        return ((self.nu + self.d) / (self.nu + q))[:, None] * z

    def radial_cdf(self, r):
        r = np.asarray(r, dtype=float)
        return stats.f.cdf(r * r / self.d, self.d, self.nu)

    def radial_ppf(self, p):
        return np.sqrt(self.d * stats.f.ppf(p, self.d, self.nu))


class SphericalUniform(ReferenceDensity):
    """The spherical uniform law: uniform direction, Uniform(0, 1) radius.

    Its center-outward distribution function is the identity; for d = 1
    this is the uniform law on (-1, 1).
    """

    name = "uniform"
    symmetric = True
    spherical = True

    def sample(self, rng, m):
        return sample_spherical_uniform(self.d, m, rng)

    def logpdf(self, z):
        z = _rows(z, self.d)
        d = self.d
        r = np.linalg.norm(z, axis=1)
        log_area = math.log(2) + 0.5 * d * math.log(math.pi) - gammaln(d / 2)
        with np.errstate(divide="ignore"):
            out = -(d - 1) * np.log(r) - log_area
        return np.where(r < 1, out, -np.inf)

    def score(self, z):
        z = _rows(z, self.d)
        q = np.einsum("ij,ij->i", z, z)
        with np.errstate(divide="ignore", invalid="ignore"):
            s = (self.d - 1) * z / q[:, None]
        return np.where(q[:, None] > 0, s, 0.0)

    def radial_cdf(self, r):
        return np.clip(np.asarray(r, dtype=float), 0.0, 1.0)

    def radial_ppf(self, p):
        return np.asarray(p, dtype=float)


class GaussianMixture(ReferenceDensity):
    name = "mixture"

    def __init__(self, d: int = 2, weights=None, means=None, covs=None):
        if weights is None and means is None and covs is None:
            if d != 2:
                raise ValueError("the default mixture is bivariate")
            weights, means, covs = (FIG1_MIXTURE[k] for k in ("weights", "means", "covs"))
        super().__init__(d)
        self.weights = np.asarray(weights, dtype=float)
        self.means = np.asarray(means, dtype=float)
        self.covs = np.asarray(covs, dtype=float)
        K = len(self.weights)
        if self.means.shape != (K, d) or self.covs.shape != (K, d, d):
            raise ValueError("mixture means/covs do not match weights and d")
        if np.any(self.weights < 0) or not np.isclose(self.weights.sum(), 1.0):
            raise ValueError("mixture weights must be nonnegative and sum to 1")
        self._chol = np.linalg.cholesky(self.covs)
        self._prec = np.linalg.inv(self.covs)
        self._logdet = 2 * np.log(np.diagonal(self._chol, axis1=1, axis2=2)).sum(axis=1)

    def params(self):
        return {"weights": self.weights.tolist(), "means": self.means.tolist(),
                "covs": self.covs.tolist()}

    def sample(self, rng, m):
        comp = rng.choice(len(self.weights), size=m, p=self.weights)
        g = rng.standard_normal((m, self.d))
        return self.means[comp] + np.einsum("kij,kj->ki", self._chol[comp], g)

    def _component_logpdf(self, z):
        diff = z[:, None, :] - self.means[None]
        maha = np.einsum("nki,kij,nkj->nk", diff, self._prec, diff)
        return (np.log(self.weights)[None] - 0.5 * maha - 0.5 * self._logdet[None]
                - 0.5 * self.d * math.log(2 * math.pi)), diff

    def logpdf(self, z):
        comp, _ = self._component_logpdf(_rows(z, self.d))
        return logsumexp(comp, axis=1)

    def score(self, z):
        comp, diff = self._component_logpdf(_rows(z, self.d))
        resp = np.exp(comp - logsumexp(comp, axis=1, keepdims=True))
        return np.einsum("nk,kij,nkj->ni", resp, self._prec, diff)


_REGISTRY = {
    "gaussian": SphericalGaussian,
    "t": SphericalT,
    "uniform": SphericalUniform,
    "mixture": GaussianMixture,
}


def make_reference(name: str, d: int = 2, **params) -> ReferenceDensity:
    """Look up a reference density by name (``gaussian``, ``t``, ``uniform``,
    ``mixture``)."""
    try:
        cls = _REGISTRY[name]
    except KeyError:
        raise ValueError(f"unknown density {name!r}; choose from {sorted(_REGISTRY)}") from None
    return cls(d, **params)


def reference_from_dict(cfg: dict) -> ReferenceDensity:
    cfg = dict(cfg)
    name = cfg.pop("name")
    d = cfg.pop("d", 2)
    return make_reference(name, d, **cfg)
