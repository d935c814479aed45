"""Brownian drift representation of the limiting Gaussian experiment.

A path holds, at each time-grid point ``u``, the stacked vector
``(Delta_int(u), Delta_nuis_1(u), ..., Delta_nuis_l(u))``: a Brownian motion
with covariance ``u * G`` (``G`` the block information matrix) and drift
``u * G @ (tau, e_eta)`` under the local parameter ``(tau, eta)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .models import InformationStructure

DEFAULT_TIME_GRID = np.round(np.linspace(0.0, 1.0, 11), 12)
EIGEN_TOL = -1e-9


def covariance_root(gram: np.ndarray) -> np.ndarray:
    """Symmetric square root with negative eigenvalues floored at 0."""
    gram = 0.5 * (gram + gram.T)
    w, v = np.linalg.eigh(gram)
    if w.min() < EIGEN_TOL:
        raise ValueError(f"gram matrix is indefinite (min eigenvalue {w.min():.3g})")
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.T


@dataclass(frozen=True, eq=False)
class DriftConfig:
    info: InformationStructure
    time_grid: np.ndarray = DEFAULT_TIME_GRID
    tau: np.ndarray | None = None
    eta_index: int | None = None
    seed: int = 0

    def __post_init__(self):
        grid = np.asarray(self.time_grid, dtype=float).reshape(-1)
        if grid.size == 0 or grid[-1] != 1.0 or np.any(np.diff(grid) <= 0) or grid[0] < 0:
            raise ValueError("time grid must be strictly increasing in [0, 1] and end at 1")
        if grid[0] > 0:
            grid = np.concatenate([[0.0], grid])
        object.__setattr__(self, "time_grid", grid)
        tau = np.zeros(self.info.k) if self.tau is None else np.asarray(self.tau, dtype=float)
        if tau.shape != (self.info.k,):
            raise ValueError(f"tau must have {self.info.k} entries")
        object.__setattr__(self, "tau", tau)
        _check_eta(self.info, self.eta_index)
        covariance_root(self.info.gram())

    @property
    def drift(self) -> np.ndarray:
        """Drift per unit time: ``G[:, :k] tau + G[:, k + eta_index]``."""
        g = self.info.gram()
        k = self.info.k
        out = g[:, :k] @ self.tau
        if self.eta_index is not None:
            out = out + g[:, k + self.eta_index]
        return out


def _check_eta(info: InformationStructure, eta_index):
    if eta_index is not None and not 0 <= eta_index < info.ell:
        raise ValueError(f"eta_index {eta_index} outside the tangent list (size {info.ell})")


@dataclass(frozen=True, eq=False)
class DriftPath:
    """``values`` has shape ``(T, k + l)`` or ``(paths, T, k + l)``."""

    values: np.ndarray
    config: DriftConfig

    @property
    def endpoint(self) -> np.ndarray:
        return self.values[..., -1, :]

    @property
    def time_grid(self) -> np.ndarray:
        return self.config.time_grid


@dataclass(frozen=True, eq=False)
class BridgePath:
    values: np.ndarray
    time_grid: np.ndarray
    eta_index: int


def sample_drift_path(config: DriftConfig, n_paths: int | None = None) -> DriftPath:
    """Exact Gaussian-increment simulation on the time grid.

    Path ``p`` uses its own generator seeded with ``(config.seed, p)``, so a
    path does not depend on how many others are drawn alongside it.
    """
    root = covariance_root(config.info.gram())
    du = np.diff(config.time_grid)
    m = root.shape[0]
    count = 1 if n_paths is None else n_paths
    noise = np.empty((count, len(du), m))
    for p in range(count):
        noise[p] = np.random.default_rng([config.seed, p]).standard_normal((len(du), m))
    incr = (noise @ root) * np.sqrt(du)[None, :, None] + du[None, :, None] * config.drift
    values = np.concatenate([np.zeros((count, 1, m)), np.cumsum(incr, axis=1)], axis=1)
    return DriftPath(values=values[0] if n_paths is None else values, config=config)


def _gaussian_loglik(endpoint, info: InformationStructure, tau, eta_index) -> np.ndarray:
    k = info.k
    tau = np.asarray(tau, dtype=float).reshape(-1)
    if tau.shape != (k,):
        raise ValueError(f"tau must have {k} entries")
    _check_eta(info, eta_index)
    endpoint = np.asarray(endpoint, dtype=float)
    if endpoint.shape[-1] != k + info.ell:
        raise ValueError(f"endpoint must have {k + info.ell} coordinates")
    linear = endpoint[..., :k] @ tau
    quad = tau @ info.I_II @ tau
    if eta_index is not None:
        linear = linear + endpoint[..., k + eta_index]
        quad = quad + 2.0 * (tau @ info.I_Ieta[:, eta_index]) + info.I_etaeta[eta_index, eta_index]
    return linear - 0.5 * quad


def loglik_shift(endpoint, info: InformationStructure, tau, eta_index=None):
    """Log-likelihood ratio of ``(tau, eta)`` against ``(0, 0)`` in the
    Gaussian shift experiment observing ``endpoint``."""
    return _gaussian_loglik(endpoint, info, tau, eta_index)


def loglik_drift(path: DriftPath, tau, eta_index=None):
    """Girsanov log-likelihood ratio of a drift path; only the value at
    ``u = 1`` enters."""
    return _gaussian_loglik(path.endpoint, path.config.info, tau, eta_index)


def extract_bridge(path: DriftPath, eta_index: int) -> BridgePath:
    info = path.config.info
    _check_eta(info, eta_index)
    if eta_index is None:
        raise ValueError("eta_index is required")
    w = path.values[..., info.k + eta_index]
    u = path.time_grid
    bridge = w - u * w[..., -1:]
    return BridgePath(values=bridge, time_grid=u, eta_index=eta_index)
