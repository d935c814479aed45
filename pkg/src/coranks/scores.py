"""Tangent directions on residual space and score functions on the unit ball.

Score and tangent catalogs are addressable by name so that the CLI and JSON
configs can refer to them:

* tangents: ``tanh:j``, ``sin:j``, ``cos:j``, ``clip:j:c`` (coordinate ``j``
  is 1-based);
* ball scores: ``gaussian``, ``sign``, ``wilcoxon``, ``tangent:<tangent>``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .codf import quantile_closed_form_spherical
from .densities import ReferenceDensity, SphericalGaussian

DEFAULT_CENTERING_DRAWS = 10**6
_CHUNK = 250_000


@dataclass(frozen=True, eq=False)
class TangentFunction:
    """A bounded direction ``eta`` with ``int eta f0 = 0`` (after centering)."""

    label: str
    raw: Callable[[np.ndarray], np.ndarray]
    bound: float
    centering: float = 0.0

    def __call__(self, z) -> np.ndarray:
        z = np.atleast_2d(np.asarray(z, dtype=float))
        return self.raw(z) - self.centering


def centering_constant(raw, reference: ReferenceDensity, draws=DEFAULT_CENTERING_DRAWS,
                       seed=0) -> float:
    """Monte Carlo estimate of ``int raw f0``.

    For centrally symmetric references every draw is paired with its
    reflection, which makes the estimate exactly zero for odd functions.
    """
    rng = np.random.default_rng(seed)
    total = 0.0
    done = 0
    while done < draws:
        m = min(_CHUNK, draws - done)
        z = reference.sample(rng, m)
        if reference.symmetric:
            total += float(np.sum(0.5 * (raw(z) + raw(-z))))
        else:
            total += float(np.sum(raw(z)))
        done += m
    return total / draws


def make_tangent(label: str, raw, raw_bound: float, reference: ReferenceDensity,
                 draws=DEFAULT_CENTERING_DRAWS, seed=0) -> TangentFunction:
    c = centering_constant(raw, reference, draws, seed)
    return TangentFunction(label=label, raw=raw, bound=raw_bound + abs(c), centering=c)


def _coord(token: str, d: int, name: str) -> int:
    j = int(token)
    if not 1 <= j <= d:
        raise ValueError(f"tangent {name!r}: coordinate {j} outside 1..{d}")
    return j - 1


def tangent_from_name(name: str, reference: ReferenceDensity,
                      draws=DEFAULT_CENTERING_DRAWS, seed=0) -> TangentFunction:
    parts = name.split(":")
    kind = parts[0]
    d = reference.d
    if kind in ("tanh", "sin", "cos") and len(parts) == 2:
        j = _coord(parts[1], d, name)
        fn = getattr(np, kind)
        return make_tangent(name, lambda z: fn(z[:, j]), 1.0, reference, draws, seed)
    if kind == "clip" and len(parts) == 3:
        j = _coord(parts[1], d, name)
        c = float(parts[2])
        if c <= 0:
            raise ValueError(f"tangent {name!r}: clip level must be > 0")
        return make_tangent(name, lambda z: np.clip(z[:, j], -c, c), c, reference, draws, seed)
    raise ValueError(
        f"unknown tangent {name!r}; expected tanh:j, sin:j, cos:j or clip:j:c")


@dataclass(frozen=True, eq=False)
class BallScore:
    """A score ``J`` on the closed unit ball; ``J(u)`` has shape ``(m, dim)``."""

    label: str
    func: Callable[[np.ndarray], np.ndarray]
    dim: int

    def __call__(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if u.ndim == 1:
            u = u[:, None]
        out = np.asarray(self.func(u), dtype=float)
        return out.reshape(len(u), self.dim)


def spherical_quantile_map(reference: ReferenceDensity):
    """Population center-outward quantile function of a spherical reference."""
    if not reference.spherical:
        raise TypeError(f"{reference.name} has no closed-form quantile map")
    return lambda u: quantile_closed_form_spherical(reference.radial_ppf, u)


def ball_score_from_tangent(eta: TangentFunction, quantile_map) -> BallScore:
    """``u -> eta(quantile_map(u))``; grid-mean centering is left to the statistic."""
    return BallScore(label=f"tangent:{eta.label}",
                     func=lambda u: eta(quantile_map(u)), dim=1)


def _sign(u):
    r = np.linalg.norm(u, axis=1, keepdims=True)
    return np.divide(u, r, out=np.zeros_like(u), where=r > 0)


def score_from_name(name: str, d: int, reference: ReferenceDensity | None = None,
                    draws=DEFAULT_CENTERING_DRAWS, seed=0) -> BallScore:
    if name == "wilcoxon":
        return BallScore("wilcoxon", lambda u: u, d)
    if name == "sign":
        return BallScore("sign", _sign, d)
    if name == "gaussian":
        return BallScore("gaussian", spherical_quantile_map(SphericalGaussian(d)), d)
    if name.startswith("tangent:"):
        ref = reference if reference is not None else SphericalGaussian(d)
        eta = tangent_from_name(name[len("tangent:"):], ref, draws, seed)
        return ball_score_from_tangent(eta, spherical_quantile_map(ref))
    raise ValueError(
        f"unknown score {name!r}; expected wilcoxon, sign, gaussian or tangent:<name>")
