"""Empirical center-outward distribution function, ranks and signs."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist

from .grid import Grid, _unit_sphere

BRUTE_FORCE_MAX_N = 9


@dataclass(frozen=True, eq=False)
class Assignment:
    """``permutation[i]`` is the (0-based) grid index paired with point ``i``."""

    permutation: np.ndarray
    cost: float


def _as_points(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ValueError(f"{name} must be an (n, d) array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite coordinates")
    return arr


def _targets(grid) -> np.ndarray:
    if isinstance(grid, Grid):
        return grid.points
    return _as_points(grid, "grid")


def _cost_matrix(points, grid) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    z = _as_points(points, "points")
    g = _targets(grid)
    if z.shape != g.shape:
        raise ValueError(
            f"points shape {z.shape} does not match grid shape {g.shape}")
    return z, g, cdist(z, g, "sqeuclidean")


def pairing_cost(points, targets, permutation) -> float:
    """Sum of squared distances ``||Z_i - G_perm[i]||^2``."""
    z = _as_points(points, "points")
    g = _as_points(targets, "targets")
    diff = z - g[np.asarray(permutation)]
    return float(np.einsum("ij,ij->", diff, diff))


def solve_assignment(points, grid) -> Assignment:
    """Exact least-squares matching of ``points`` to the grid points.

    Uses the shortest augmenting path solver of
    :func:`scipy.optimize.linear_sum_assignment` on the dense matrix of
    squared Euclidean distances.
    """
    z, g, cost = _cost_matrix(points, grid)
    _, cols = linear_sum_assignment(cost)
    return Assignment(permutation=cols.astype(np.intp), cost=pairing_cost(z, g, cols))


def brute_force_assignment(points, grid) -> Assignment:
    """Exhaustive minimum over all ``n!`` pairings; ties go to the
    lexicographically smallest permutation."""
    z, g, cost = _cost_matrix(points, grid)
    n = len(z)
    if n > BRUTE_FORCE_MAX_N:
        raise ValueError(f"brute force limited to n <= {BRUTE_FORCE_MAX_N}, got n={n}")
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.intp)
    totals = cost[np.arange(n), perms].sum(axis=1)
    best = perms[int(np.argmin(totals))]
    return Assignment(permutation=best, cost=pairing_cost(z, g, best))


@dataclass(frozen=True, eq=False)
class EmpiricalCODF:
    grid: Grid
    images: np.ndarray
    assignment: Assignment

    @property
    def source_count(self) -> int:
        return len(self.images)


def empirical_codf(points, grid: Grid) -> EmpiricalCODF:
    assignment = solve_assignment(points, grid)
    images = grid.points[assignment.permutation]
    return EmpiricalCODF(grid=grid, images=images, assignment=assignment)


@dataclass(frozen=True, eq=False)
class RankSigns:
    """Center-outward ranks and signs of a sample, in data order.

    ``rank[i]`` is ``(n_R + 1) * ||image[i]||`` as an integer, ``sign[i]``
    the unit vector ``image[i] / ||image[i]||``. Observations matched to
    the origin get rank 0 and a seeded uniform sign.
    """

    rank: np.ndarray
    sign: np.ndarray
    image: np.ndarray
    n_R: int
    grid_meta: dict | None = None

    def __len__(self) -> int:
        return len(self.rank)

    @property
    def d(self) -> int:
        return self.image.shape[1]

    @classmethod
    def from_images(cls, images, n_R: int, tie_seed=0, grid_meta=None) -> RankSigns:
        image = np.array(images, dtype=float, order="C")
        if image.ndim == 1:
            image = image[:, None]
        norm = np.linalg.norm(image, axis=1)
        scaled = (n_R + 1) * norm
        rank = np.rint(scaled).astype(np.int64)
        off = np.abs(scaled - rank)
        if np.any(off >= 1e-9):
            i = int(np.argmax(off))
            raise ValueError(
                f"image {i} has norm {norm[i]!r}, not a multiple of 1/(n_R+1) "
                f"with n_R={n_R}")
        sign = np.empty_like(image)
        at_origin = norm == 0
        sign[~at_origin] = image[~at_origin] / norm[~at_origin, None]
        if at_origin.any():
            rng = np.random.default_rng(tie_seed)
            sign[at_origin] = _unit_sphere(rng, image.shape[1], int(at_origin.sum()))
        return cls(rank=rank, sign=sign, image=image, n_R=n_R, grid_meta=grid_meta)


def ranks_and_signs(codf: EmpiricalCODF, tie_seed=0) -> RankSigns:
    return RankSigns.from_images(codf.images, codf.grid.spec.n_R, tie_seed,
                                 grid_meta=codf.grid.to_dict())


def codf_closed_form_spherical(radial_cdf, z) -> np.ndarray:
    """Population center-outward distribution function of a spherically
    symmetric law: ``z -> radial_cdf(||z||) * z / ||z||`` (0 at the origin).

    ``z`` may be a single vector or an ``(m, d)`` array of row vectors.
    """
    z = np.asarray(z, dtype=float)
    single = z.ndim == 1
    zz = np.atleast_2d(z)
    r = np.linalg.norm(zz, axis=1)
    out = np.zeros_like(zz)
    nz = r > 0
    out[nz] = (np.asarray(radial_cdf(r[nz]), dtype=float) / r[nz])[:, None] * zz[nz]
    return out[0] if single else out


def quantile_closed_form_spherical(radial_ppf, u) -> np.ndarray:
    """Inverse of :func:`codf_closed_form_spherical` on the open unit ball."""
    u = np.asarray(u, dtype=float)
    single = u.ndim == 1
    uu = np.atleast_2d(u)
    r = np.linalg.norm(uu, axis=1)
    if np.any(r >= 1):
        raise ValueError("quantile map is defined on the open unit ball only")
    out = np.zeros_like(uu)
    nz = r > 0
    out[nz] = (np.asarray(radial_ppf(r[nz]), dtype=float) / r[nz])[:, None] * uu[nz]
    return out[0] if single else out
