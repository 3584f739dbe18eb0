"""Point sets on the disk: regular ring points and wavelet parameter points."""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg
import scipy.spatial

from .zernike import DOMAIN_TOL, dim_v, zernike_matrix

__all__ = [
    "chebyshev_radii",
    "Ring",
    "RegularPointSet",
    "Provenance",
    "ParameterPointSet",
    "regular_points",
    "random_subset",
    "approximate_fekete",
    "FeketeError",
    "write_points_csv",
    "read_points_csv",
]

RadiiStrategy = Callable[[int], Sequence[float]]


def chebyshev_radii(k: int) -> list[float]:
    """``cos(pi (2i - 1) / (4k + 2))`` for ``i = 1 .. k``; decreasing, boundary-clustered."""
    return [math.cos(math.pi * (2 * i - 1) / (4 * k + 2)) for i in range(1, k + 1)]


@dataclass(frozen=True)
class Ring:
    radius: float
    count: int
    offset: float


@dataclass(frozen=True, eq=False)
class RegularPointSet:
    degree: int
    rings: tuple[Ring, ...]
    rho: np.ndarray
    theta: np.ndarray

    def __len__(self):
        return self.rho.size

    @property
    def points(self) -> np.ndarray:
        return np.column_stack([self.rho, self.theta])


class Provenance(enum.Enum):
    RANDOM_SUBSET = "random"
    APPROXIMATE_FEKETE = "fekete"
    EXPLICIT = "explicit"


def _xy(rho, theta):
    return np.column_stack([rho * np.cos(theta), rho * np.sin(theta)])


@dataclass(frozen=True, eq=False)
class ParameterPointSet:
    """Parameter points ``(mu_j, omega_j)`` for wavelet functions.

    Points must lie in the closed unit disk and be pairwise distinct.
    """

    mu: np.ndarray
    omega: np.ndarray
    provenance: Provenance = Provenance.EXPLICIT
    seed: int | None = None
    source_index: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=float)
        omega = np.asarray(self.omega, dtype=float)
        if mu.shape != omega.shape or mu.ndim != 1:
            raise ValueError("mu and omega must be 1-d arrays of equal length")
        if np.any(mu < -DOMAIN_TOL) or np.any(mu > 1 + DOMAIN_TOL):
            raise ValueError("parameter point outside the closed unit disk")
        if mu.size > 1:
            xy = _xy(mu, omega)
            d = scipy.spatial.distance.pdist(xy)
            if np.min(d) <= 1e-12:
                raise ValueError("duplicate parameter points")
        object.__setattr__(self, "mu", np.clip(mu, 0.0, 1.0))
        object.__setattr__(self, "omega", omega)

    def __len__(self):
        return self.mu.size

    @property
    def points(self) -> np.ndarray:
        return np.column_stack([self.mu, self.omega])


def regular_points(N: int, radii: RadiiStrategy = chebyshev_radii) -> RegularPointSet:
    """Ring-structured points whose count equals ``dim V_N``.

    ``floor(N / 2) + 1`` rings; ring ``i`` carries ``2N + 5 - 4i`` equispaced
    nodes starting at angle ``(i - 1) pi / n_i``. ``radii(k)`` must return
    ``k`` strictly decreasing radii in ``[0, 1)``.
    """
    if N < 0:
        raise ValueError("degree must be nonnegative")
    k = N // 2 + 1
    lam = [float(x) for x in radii(k)]
    if len(lam) != k:
        raise ValueError(f"radii strategy returned {len(lam)} radii, expected {k}")
    if not (lam[0] < 1 and all(a > b for a, b in zip(lam, lam[1:])) and lam[-1] >= 0):
        raise ValueError("radii must satisfy 1 > r_1 > r_2 > ... > r_k >= 0")
    rings, rho, theta = [], [], []
    for i, radius in enumerate(lam, start=1):
        count = 2 * N + 5 - 4 * i
        offset = (i - 1) * math.pi / count
        rings.append(Ring(radius, count, offset))
        rho.extend([radius] * count)
        theta.extend(offset + 2 * math.pi * np.arange(count) / count)
    pts = RegularPointSet(N, tuple(rings), np.array(rho), np.mod(np.array(theta), 2 * np.pi))
    assert len(pts) == dim_v(N)
    return pts


def random_subset(source: RegularPointSet, size: int, seed: int) -> ParameterPointSet:
    """Uniform subset without replacement (prefix of a seeded Fisher-Yates shuffle)."""
    count = len(source)
    if size > count:
        raise ValueError(f"cannot draw {size} points from {count}")
    rng = np.random.default_rng(seed)
    perm = np.arange(count)
    for i in range(size):
        swap = int(rng.integers(i, count))
        perm[i], perm[swap] = perm[swap], perm[i]
    chosen = perm[:size]
    return ParameterPointSet(
        source.rho[chosen], source.theta[chosen], Provenance.RANDOM_SUBSET, seed, chosen
    )


class FeketeError(RuntimeError):
    pass


def approximate_fekete(
    candidates, start: int, stop: int, target: int | None = None, iterations: int = 2
) -> ParameterPointSet:
    """Greedy QR selection of approximate Fekete points.

    Builds the Vandermonde matrix of the Zernike functions with single
    indices ``[start, stop)`` at the candidates, orthogonalises its columns
    ``iterations`` times (the "iterated QR" refinement, which leaves the
    column space unchanged), then takes the first ``target`` pivots of a
    column-pivoted QR of the transpose.

    Raises
    ------
    FeketeError
        If fewer than ``target`` numerically independent rows exist.
    """
    if isinstance(candidates, (RegularPointSet, ParameterPointSet)):
        pts = candidates.points
    else:
        pts = np.asarray(candidates, dtype=float)
    target = stop - start if target is None else target
    if len(pts) < target:
        raise FeketeError(f"{len(pts)} candidates cannot supply {target} points")
    V = zernike_matrix(pts[:, 0], pts[:, 1], start=start, stop=stop)
    for _ in range(iterations):
        _, R = np.linalg.qr(V)
        V = scipy.linalg.solve_triangular(R, V.T, trans="T", lower=False).T
    _, R, piv = scipy.linalg.qr(V.T, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    rank = int(np.sum(diag > 1e-10 * diag[0])) if diag.size else 0
    if rank < target:
        raise FeketeError(f"candidate set has numerical rank {rank} < {target}")
    chosen = np.sort(piv[:target]) if target == len(pts) else piv[:target]
    return ParameterPointSet(
        pts[chosen, 0], pts[chosen, 1], Provenance.APPROXIMATE_FEKETE, None, chosen
    )


def write_points_csv(path, points) -> None:
    """CSV with header ``j,rho,theta`` (j counts from 1), 17 significant digits."""
    pts = points.points if hasattr(points, "points") else np.asarray(points)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["j", "rho", "theta"])
        for j, (rho, theta) in enumerate(pts, start=1):
            w.writerow([j, f"{rho:.17g}", f"{theta:.17g}"])


def read_points_csv(path) -> ParameterPointSet:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError(f"{path}: no points")
    mu = np.array([float(r["rho"]) for r in rows])
    omega = np.array([float(r["theta"]) for r in rows])
    return ParameterPointSet(mu, omega)
