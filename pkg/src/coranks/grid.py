"""Spherical grids on the unit ball used as targets of the empirical
center-outward distribution function."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class GridSpec:
    """Factorization ``n = n_R * n_S + n_0`` of the sample size.

    ``n_0 < min(n_R, n_S)`` is required whenever ``n_0 > 1``; a single
    origin point is always allowed so that odd univariate samples can be
    represented.
    """

    n: int
    d: int
    n_R: int
    n_S: int
    n_0: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"d must be >= 1, got {self.d}")
        if self.n_R < 1 or self.n_S < 1 or self.n_0 < 0:
            raise ValueError(
                f"n_R, n_S must be >= 1 and n_0 >= 0, got "
                f"n_R={self.n_R}, n_S={self.n_S}, n_0={self.n_0}")
        if self.n != self.n_R * self.n_S + self.n_0:
            raise ValueError(
                f"n={self.n} != n_R*n_S + n_0 = "
                f"{self.n_R}*{self.n_S} + {self.n_0}")
        if self.n_0 > 1 and self.n_0 >= min(self.n_R, self.n_S):
            raise ValueError(
                f"n_0={self.n_0} must be < min(n_R, n_S) = "
                f"{min(self.n_R, self.n_S)}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned int, got {self.seed}")

    def to_dict(self) -> dict:
        return {"n": self.n, "d": self.d, "n_R": self.n_R, "n_S": self.n_S,
                "n_0": self.n_0, "seed": self.seed}


def factorize(n: int, d: int = 2, nr: int | None = None, ns: int | None = None,
              seed: int = 0) -> GridSpec:
    """Split ``n`` into radii, directions and origin copies.

    With ``nr``/``ns`` left as ``None`` the automatic policy starts from
    ``n_R = floor(sqrt(n))``, ``n_S = floor(n / n_R)`` and lowers ``n_R``
    until ``n_0 < min(n_R, n_S)``. In dimension one the number of
    directions is forced to 2.
    """
    if n < 4:
        raise ValueError(f"n must be >= 4, got {n}")
    if nr is not None or ns is not None:
        if nr is None or ns is None:
            raise ValueError("explicit factorization needs both nr and ns")
        n0 = n - nr * ns
        if n0 < 0 or n0 >= min(nr, ns):
            raise ValueError(
                f"explicit factorization n_R={nr}, n_S={ns} leaves n_0={n0}, "
                f"need 0 <= n_0 < min(n_R, n_S)")
        return GridSpec(n=n, d=d, n_R=nr, n_S=ns, n_0=n0, seed=seed)
    if d == 1:
        nr, n0 = divmod(n, 2)
        return GridSpec(n=n, d=1, n_R=nr, n_S=2, n_0=n0, seed=seed)
    nr = math.isqrt(n)
    while True:
        ns = n // nr
        n0 = n - nr * ns
        if n0 < min(nr, ns) or nr == 1:
            return GridSpec(n=n, d=d, n_R=nr, n_S=ns, n_0=n0, seed=seed)
        nr -= 1


@dataclass(frozen=True, eq=False)
class Grid:
    """The grid points, radius-major: ``points[j * n_S + s] = radii[j] * directions[s]``,
    followed by ``n_0`` copies of the origin."""

    spec: GridSpec
    points: np.ndarray
    directions: np.ndarray
    radii: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def n(self) -> int:
        return self.spec.n

    @property
    def d(self) -> int:
        return self.spec.d

    def to_dict(self) -> dict:
        return {**self.spec.to_dict(), **self.meta,
                "directions": self.directions.tolist()}


def _unit_sphere(rng: np.random.Generator, d: int, m: int) -> np.ndarray:
    if d == 1:
        return rng.choice(np.array([-1.0, 1.0]), size=(m, 1))
    g = rng.standard_normal((m, d))
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    # zero-norm Gaussian draws have probability 0, redraw anyway
    while np.any(norms == 0):
        bad = norms[:, 0] == 0
        g[bad] = rng.standard_normal((int(bad.sum()), d))
        norms = np.linalg.norm(g, axis=1, keepdims=True)
    return g / norms


def make_grid(spec: GridSpec) -> Grid:
    d = spec.d
    if d == 1:
        if spec.n_S != 2:
            raise ValueError(f"d=1 requires n_S=2, got n_S={spec.n_S}")
        directions = np.array([[1.0], [-1.0]])
        rule = "pm1"
    elif d == 2:
        angles = 2.0 * np.pi * np.arange(spec.n_S) / spec.n_S
        directions = np.column_stack([np.cos(angles), np.sin(angles)])
        rule = "equispaced, offset 0"
    else:
        directions = _unit_sphere(np.random.default_rng(spec.seed), d, spec.n_S)
        rule = "iid uniform on sphere"
    radii = np.arange(1, spec.n_R + 1) / (spec.n_R + 1)
    shell = (radii[:, None, None] * directions[None, :, :]).reshape(-1, d)
    points = np.vstack([shell, np.zeros((spec.n_0, d))])
    return Grid(spec=spec, points=points, directions=directions, radii=radii,
                meta={"direction_rule": rule})


def sample_spherical_uniform(d: int, m: int, seed=None) -> np.ndarray:
    """``m`` i.i.d. draws from the spherical uniform law on the unit ball:
    a uniform direction times an independent Uniform(0, 1) radius."""
    if d < 1 or m < 1:
        raise ValueError(f"need d >= 1 and m >= 1, got d={d}, m={m}")
    rng = np.random.default_rng(seed)
    directions = _unit_sphere(rng, d, m)
    radius = rng.uniform(0.0, 1.0, size=(m, 1))
    return directions * radius
