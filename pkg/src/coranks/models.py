"""Unspecified-density location and regression models, local alternatives,
central sequences, information quantities and tangent-space projection."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .densities import ReferenceDensity
from .scores import TangentFunction

KINDS = ("location", "linear_regression")


@dataclass(frozen=True, eq=False)
class ModelSpec:
    """Residual model ``Z_i = X_i - theta`` (location) or
    ``Z_i = X_i - Theta^T c_i`` (regression, ``Theta`` is ``p x d`` stored
    row-major in ``theta``)."""

    kind: str
    f0: ReferenceDensity
    covariates: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.kind == "linear_regression":
            if self.covariates is None:
                raise ValueError("linear_regression needs covariates")
            c = np.asarray(self.covariates, dtype=float)
            if c.ndim == 1:
                c = c[:, None]
            if c.ndim != 2 or not np.all(np.isfinite(c)):
                raise ValueError("covariates must be a finite (n, p) array")
            object.__setattr__(self, "covariates", c)
        elif self.covariates is not None:
            raise ValueError("covariates are only allowed for linear_regression")

    @property
    def d(self) -> int:
        return self.f0.d

    @property
    def k(self) -> int:
        if self.kind == "location":
            return self.d
        return self.covariates.shape[1] * self.d

    def _theta(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float).reshape(-1)
        if theta.shape != (self.k,):
            raise ValueError(f"theta must have {self.k} entries, got {theta.size}")
        return theta

    def _shift(self, theta, n: int) -> np.ndarray:
        theta = self._theta(theta)
        if self.kind == "location":
            return np.broadcast_to(theta, (n, self.d))
        if len(self.covariates) != n:
            raise ValueError(f"covariates have {len(self.covariates)} rows, data has {n}")
        return self.covariates @ theta.reshape(-1, self.d)


def _data(model: ModelSpec, data) -> np.ndarray:
    x = np.asarray(data, dtype=float)
    if x.ndim == 1 and model.d == 1:
        x = x[:, None]
    if x.ndim != 2 or x.shape[1] != model.d:
        raise ValueError(f"data must be (n, {model.d}), got shape {x.shape}")
    return x


def residuals(model: ModelSpec, data, theta) -> np.ndarray:
    x = _data(model, data)
    return x - model._shift(theta, len(x))


def data_from_residuals(model: ModelSpec, z, theta) -> np.ndarray:
    z = _data(model, z)
    return z + model._shift(theta, len(z))


@dataclass(frozen=True, eq=False)
class LocalParam:
    theta0: np.ndarray
    tau: np.ndarray
    eta: TangentFunction | None
    n: int

    def __post_init__(self):
        object.__setattr__(self, "theta0", np.asarray(self.theta0, dtype=float).reshape(-1))
        object.__setattr__(self, "tau", np.asarray(self.tau, dtype=float).reshape(-1))
        if self.theta0.shape != self.tau.shape:
            raise ValueError("theta0 and tau must have the same length")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.eta is not None and self.eta.bound / math.sqrt(self.n) >= 1:
            raise ValueError(
                f"perturbed density not positive: sup|eta|/sqrt(n) = "
                f"{self.eta.bound / math.sqrt(self.n):.3g} >= 1")

    @property
    def theta_n(self) -> np.ndarray:
        return self.theta0 + self.tau / math.sqrt(self.n)


def rejection_sample(f0: ReferenceDensity, eta: TangentFunction, h: float, m: int,
                     rng: np.random.Generator) -> tuple[np.ndarray, int]:
    """Draw ``m`` points from ``(1 + h eta) f0`` using ``f0`` proposals
    accepted with probability ``(1 + h eta(z)) / (1 + h sup|eta|)``.

    Returns the draws and the number of proposals used.
    """
    ceiling = 1.0 + h * eta.bound
    out = []
    got = proposed = 0
    while got < m:
        batch = max(64, int(1.2 * (m - got) * ceiling))
        z = f0.sample(rng, batch)
        w = 1.0 + h * eta(z)
        if np.any(w <= 0):
            raise ValueError("perturbed density is not positive")
        keep = rng.uniform(size=batch) * ceiling < w
        idx = np.flatnonzero(keep)
        need = m - got
        if len(idx) >= need:
            # count proposals only up to the last accepted draw used
            proposed += int(idx[need - 1]) + 1
            out.append(z[idx[:need]])
            got = m
        else:
            proposed += batch
            out.append(z[idx])
            got += len(idx)
    return np.vstack(out), proposed


def sample_local(model: ModelSpec, local: LocalParam, seed=None) -> np.ndarray:
    """Data whose residuals at ``theta0 + tau / sqrt(n)`` are i.i.d. with
    density ``(1 + eta / sqrt(n)) f0``."""
    rng = np.random.default_rng(seed)
    if local.eta is None:
        z = model.f0.sample(rng, local.n)
    else:
        z, _ = rejection_sample(model.f0, local.eta, 1 / math.sqrt(local.n), local.n, rng)
    return data_from_residuals(model, z, local.theta_n)


def central_sequence(model: ModelSpec, data, theta) -> np.ndarray:
    z = residuals(model, data, theta)
    phi = model.f0.score(z)
    if not np.all(np.isfinite(phi)):
        raise ValueError("location score is not finite at some residual")
    n = len(z)
    if model.kind == "location":
        return phi.sum(axis=0) / math.sqrt(n)
    return (model.covariates.T @ phi).reshape(-1) / math.sqrt(n)


def nuisance_central_sequence(model: ModelSpec, data, theta, tangents) -> np.ndarray:
    """``n^{-1/2} sum_i eta(Z_i)`` for every tangent in the list."""
    z = residuals(model, data, theta)
    return np.array([eta(z).sum() for eta in tangents]) / math.sqrt(len(z))


def log_likelihood_ratio_finite_n(model: ModelSpec, data, local: LocalParam) -> float:
    x = _data(model, data)
    z_n = residuals(model, x, local.theta_n)
    z_0 = residuals(model, x, local.theta0)
    lp_n = model.f0.logpdf(z_n)
    lp_0 = model.f0.logpdf(z_0)
    if not (np.all(np.isfinite(lp_n)) and np.all(np.isfinite(lp_0))):
        raise ValueError("reference density is zero at some residual")
    terms = lp_n - lp_0
    if local.eta is not None:
        w = 1.0 + local.eta(z_n) / math.sqrt(local.n)
        if np.any(w <= 0):
            raise ValueError("perturbed density is not positive at some residual")
        terms = terms + np.log(w)
    return float(terms.sum())


@dataclass(frozen=True, eq=False)
class InformationStructure:
    """Information for the parameter of interest (``I_II``), cross
    information with each tangent (columns of ``I_Ieta``) and the tangent
    gram matrix ``I_etaeta``, with Monte Carlo standard errors."""

    labels: tuple
    I_II: np.ndarray
    I_Ieta: np.ndarray
    I_etaeta: np.ndarray
    se: dict = field(default_factory=dict)
    draws: int = 0

    def __post_init__(self):
        k = self.I_II.shape[0]
        ell = len(self.labels)
        if self.I_II.shape != (k, k) or self.I_Ieta.shape != (k, ell) \
                or self.I_etaeta.shape != (ell, ell):
            raise ValueError("information blocks have inconsistent shapes")
        if not np.allclose(self.I_II, self.I_II.T):
            raise ValueError("I_II is not symmetric")
        if np.linalg.eigvalsh(self.I_II).min() <= 0:
            raise ValueError("I_II is not positive definite")
        if ell and np.linalg.eigvalsh(self.I_etaeta).min() < -1e-9:
            raise ValueError("tangent gram matrix is not positive semidefinite")

    @property
    def k(self) -> int:
        return self.I_II.shape[0]

    @property
    def ell(self) -> int:
        return len(self.labels)

    def cross(self, label) -> np.ndarray:
        return self.I_Ieta[:, self.labels.index(label)]

    def gram(self) -> np.ndarray:
        return np.block([[self.I_II, self.I_Ieta], [self.I_Ieta.T, self.I_etaeta]])

    def to_dict(self) -> dict:
        return {"labels": list(self.labels), "I_II": self.I_II.tolist(),
                "I_Ieta": self.I_Ieta.tolist(), "I_etaeta": self.I_etaeta.tolist(),
                "se": {k: v.tolist() for k, v in self.se.items()}, "draws": self.draws}


def _mc_moment(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    prod = a[:, :, None] * b[:, None, :]
    m = len(a)
    return prod.mean(axis=0), prod.std(axis=0, ddof=1) / math.sqrt(m)


def information_structure(model: ModelSpec, tangents=(), draws: int = 10**6,
                          seed=0) -> InformationStructure:
    """Monte Carlo information quantities under ``f0``.

    For regression, ``I_II = (C^T C / n) kron I_loc`` and
    ``I_Ieta = mean(c) kron int phi eta f0``.
    """
    rng = np.random.default_rng(seed)
    z = model.f0.sample(rng, draws)
    phi = model.f0.score(z)
    etas = np.column_stack([eta(z) for eta in tangents]) if tangents else np.zeros((draws, 0))
    means = etas.mean(axis=0)
    ses = etas.std(axis=0, ddof=1) / math.sqrt(draws) if tangents else means
    for eta, m, s in zip(tangents, means, ses):
        if abs(m) > 1e-3 + 5 * s:
            raise ValueError(f"tangent {eta.label!r} is not centered: mean {m:.3g} (se {s:.2g})")
    I_loc, se_loc = _mc_moment(phi, phi)
    I_loc = 0.5 * (I_loc + I_loc.T)
    cross, se_cross = _mc_moment(phi, etas)
    gram, se_gram = _mc_moment(etas, etas)
    gram = 0.5 * (gram + gram.T)
    if model.kind == "location":
        I_II, I_Ieta = I_loc, cross
        se_II, se_Ieta = se_loc, se_cross
    else:
        c = model.covariates
        ccov = c.T @ c / len(c)
        cbar = c.mean(axis=0)
        I_II = np.kron(ccov, I_loc)
        se_II = np.kron(np.abs(ccov), se_loc)
        I_Ieta = np.kron(cbar[:, None], cross)
        se_Ieta = np.kron(np.abs(cbar)[:, None], se_cross)
    return InformationStructure(
        labels=tuple(eta.label for eta in tangents), I_II=I_II, I_Ieta=I_Ieta,
        I_etaeta=gram, se={"I_II": se_II, "I_Ieta": se_Ieta, "I_etaeta": se_gram},
        draws=draws)


def tangent_projection(delta_int, delta_nuis, G_tt, G_tn, G_nn):
    """Residual of ``delta_int`` after projecting out ``delta_nuis``.

    Returns ``(delta_star, efficient_information)`` where
    ``delta_star = delta_int - G_tn G_nn^{-1} delta_nuis`` and the
    efficient information is ``G_tt - G_tn G_nn^{-1} G_tn^T``. Leading
    axes of the deltas are treated as a batch.
    """
    G_tt = np.atleast_2d(np.asarray(G_tt, dtype=float))
    G_tn = np.atleast_2d(np.asarray(G_tn, dtype=float))
    G_nn = np.atleast_2d(np.asarray(G_nn, dtype=float))
    if np.linalg.cond(G_nn) >= 1e12:
        raise ValueError("nuisance information G_nn is singular")
    coef = np.linalg.solve(G_nn, G_tn.T).T  # G_tn G_nn^{-1}
    scalar = np.ndim(delta_int) == 0
    d_int = np.atleast_1d(np.asarray(delta_int, dtype=float))
    d_nuis = np.atleast_1d(np.asarray(delta_nuis, dtype=float))
    delta_star = d_int - d_nuis @ coef.T
    efficient = G_tt - coef @ G_tn.T
    return (delta_star[0] if scalar else delta_star), efficient
