"""Linear rank statistics built on center-outward ranks and signs."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .codf import RankSigns, codf_closed_form_spherical, solve_assignment
from .densities import ReferenceDensity
from .scores import BallScore


@dataclass(frozen=True, eq=False)
class RankStatValue:
    name: str
    value: np.ndarray
    standardizer: float
    grid_mean: np.ndarray
    n: int
    u: float | None = None
    extra: dict = field(default_factory=dict)

    def to_record(self, grid_meta=None, seed=None) -> dict:
        return {
            "name": self.name,
            "value": self.value.tolist(),
            "standardizer": self.standardizer,
            "u": self.u,
            "n": self.n,
            "grid_meta": grid_meta,
            "seed": seed,
        }


def centered_constants(constants, n: int) -> tuple[np.ndarray, float]:
    """Return ``c - mean(c)`` and ``sqrt(sum (c - mean(c))^2)``."""
    c = np.asarray(constants, dtype=float).reshape(-1)
    if len(c) != n:
        raise ValueError(f"expected {n} constants, got {len(c)}")
    if not np.all(np.isfinite(c)):
        raise ValueError("constants must be finite")
    if np.ptp(c) == 0:
        raise ValueError("constants are all equal; the standardizer would be zero")
    cc = c - c.mean()
    return cc, float(np.sqrt(cc @ cc))


def linear_statistic(cc: np.ndarray, norm: float, scores: np.ndarray) -> np.ndarray:
    # fixed memory layout keeps the BLAS summation order, hence the bits, stable
    return (cc @ np.ascontiguousarray(scores)) / norm


def approximate_score_statistic(constants, score: BallScore, ranksigns: RankSigns) -> RankStatValue:
    """Score evaluated directly at the empirical center-outward images."""
    n = len(ranksigns)
    cc, norm = centered_constants(constants, n)
    J = score(ranksigns.image)
    return RankStatValue(name=f"approximate:{score.label}",
                         value=linear_statistic(cc, norm, J), standardizer=norm,
                         grid_mean=J.mean(axis=0), n=n)


def _average_duplicates(points: np.ndarray, values: np.ndarray) -> np.ndarray:
    # identical target points (origin copies) share one conditional expectation
    _, inverse, counts = np.unique(points, axis=0, return_inverse=True, return_counts=True)
    inverse = inverse.reshape(-1)
    if np.all(counts == 1):
        return values
    sums = np.zeros((len(counts), values.shape[1]))
    np.add.at(sums, inverse, values)
    return (sums / counts[:, None])[inverse]


def estimate_exact_scores(score: BallScore, targets, reference: ReferenceDensity,
                          replicates: int = 100, seed=0) -> np.ndarray:
    """Monte Carlo estimate of ``E[J(F(Z)) | Z is matched to target g]``
    for every target point ``g``, under i.i.d. sampling from ``reference``.

    Returned rows are aligned with ``targets``.
    """
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    targets = np.asarray(targets, dtype=float)
    if targets.ndim == 1:
        targets = targets[:, None]
    n = len(targets)
    acc = np.zeros((n, score.dim))
    for r in range(replicates):
        rng = np.random.default_rng([seed, r])
        z = reference.sample(rng, n)
        perm = solve_assignment(z, targets).permutation
        acc[perm] += score(codf_closed_form_spherical(reference.radial_cdf, z))
    return _average_duplicates(targets, acc / replicates)


def exact_score_statistic_mc(constants, score: BallScore, ranksigns: RankSigns,
                             reference: ReferenceDensity, replicates: int = 100,
                             seed=0, exact_scores=None) -> RankStatValue:
    """Exact-score statistic with conditional expectations estimated by
    simulation from ``reference``.

    The images of ``ranksigns`` form the grid, so the estimates are
    computed with the images as targets and come out in data order.
    ``exact_scores`` may pass precomputed values aligned with the images.
    """
    if replicates < 1:
        raise ValueError("replicate budget must be >= 1")
    n = len(ranksigns)
    cc, norm = centered_constants(constants, n)
    if exact_scores is None:
        exact_scores = estimate_exact_scores(score, ranksigns.image, reference, replicates, seed)
    return RankStatValue(name=f"exact:{score.label}",
                         value=linear_statistic(cc, norm, exact_scores), standardizer=norm,
                         grid_mean=exact_scores.mean(axis=0), n=n,
                         extra={"replicates": replicates})


def split_index(u: float, n: int) -> int:
    if not 0.0 <= u <= 1.0:
        raise ValueError(f"u must lie in [0, 1], got {u}")
    return min(n, math.floor(u * n + 1e-9))


def centered_partial_sum(values: np.ndarray, m: int) -> np.ndarray:
    """``sum_{i < m} (values_i - mean)``, summed over the shorter side so the
    full sum is exactly zero."""
    n = len(values)
    dev = values - values.mean(axis=0)
    if m <= n - m:
        return dev[:m].sum(axis=0)
    return -dev[m:].sum(axis=0)


def partial_sum_statistic(eta_score: BallScore, ranksigns: RankSigns, u: float) -> RankStatValue:
    """``n^{-1/2} sum_{i <= floor(u n)} (b(image_i) - bbar)`` with ``bbar``
    the mean of the score over the grid (equivalently over the images)."""
    n = len(ranksigns)
    m = split_index(u, n)
    b = eta_score(ranksigns.image)
    value = centered_partial_sum(b, m) / math.sqrt(n)
    return RankStatValue(name=f"partial:{eta_score.label}", value=value,
                         standardizer=math.sqrt(n), grid_mean=b.mean(axis=0), n=n, u=u)


def finite_population_variance(grid_values: np.ndarray, u: float) -> float:
    """Exact variance of the partial-sum statistic when the images are a
    uniformly random arrangement of the grid:
    ``m * s2 * (n - m) / (n - 1) / n`` with ``s2`` the population variance."""
    v = np.asarray(grid_values, dtype=float).reshape(-1)
    n = len(v)
    m = split_index(u, n)
    s2 = float(np.mean((v - v.mean()) ** 2))
    return m * s2 * (n - m) / (n - 1) / n


def finite_population_covariance(grid_values: np.ndarray, u_a: float, u_b: float) -> float:
    """Covariance of the partial sums at ``u_a`` and ``u_b`` under uniform
    random arrangement: ``m_a (n - m_b) s2 / ((n - 1) n)`` for ``m_a <= m_b``."""
    v = np.asarray(grid_values, dtype=float).reshape(-1)
    n = len(v)
    ma, mb = sorted((split_index(u_a, n), split_index(u_b, n)))
    s2 = float(np.mean((v - v.mean()) ** 2))
    return ma * (n - mb) * s2 / (n - 1) / n
