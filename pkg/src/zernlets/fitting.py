"""Least-squares Zernike fitting of scattered elevation data and its wavelet analysis."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .mra import Decomposition, MraLadder, build_level_bases, decompose, reconstruct
from .scaling import IllConditionedError
from .zernike import (
    DOMAIN_TOL,
    DiskPolynomial,
    complex_to_real_coeffs,
    dim_v,
    index_unpack,
    real_basis_to_complex,
    to_polar,
    zernike_matrix,
    zernike_real_matrix,
)

__all__ = [
    "DESIGN_COND_LIMIT",
    "DiskSamples",
    "FitResult",
    "SphereFit",
    "ingest",
    "export_samples",
    "design_matrix",
    "least_squares_fit",
    "project_fit",
    "fit_difference",
    "hierarchical_discrepancy",
    "wavelet_analysis",
    "reconstruction_residuals",
    "best_fit_sphere",
    "synth_surface",
    "polar_grid",
    "write_coefficients_csv",
    "write_grid_csv",
    "fit_summary",
]

DESIGN_COND_LIMIT = 1e12


@dataclass(frozen=True, eq=False)
class DiskSamples:
    """Scattered elevations on the unit disk.

    ``aperture`` is the physical radius that maps to ``r = 1``; it only
    matters when x, y and z must share units (sphere fitting).
    """

    r: np.ndarray
    theta: np.ndarray
    z: np.ndarray
    aperture: float = 1.0

    def __post_init__(self):
        r = np.asarray(self.r, dtype=float)
        theta = np.asarray(self.theta, dtype=float)
        z = np.asarray(self.z, dtype=float)
        if not (r.shape == theta.shape == z.shape) or r.ndim != 1:
            raise ValueError("r, theta and z must be 1-d arrays of equal length")
        if r.size == 0:
            raise ValueError("no samples")
        if np.any(r > 1 + DOMAIN_TOL) or np.any(r < 0):
            raise ValueError("sample radius outside the closed unit disk")
        for name, val in (("r", np.clip(r, 0.0, 1.0)), ("theta", theta), ("z", z)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)

    def __len__(self):
        return self.z.size

    @property
    def x(self):
        return self.r * np.cos(self.theta)

    @property
    def y(self):
        return self.r * np.sin(self.theta)

    def same_points(self, other: "DiskSamples") -> bool:
        return (
            self is other
            or len(self) == len(other)
            and np.array_equal(self.r, other.r)
            and np.array_equal(self.theta, other.theta)
            and np.array_equal(self.z, other.z)
        )


def ingest(path, normalize: bool = False, aperture: float | None = None) -> DiskSamples:
    """Read ``x,y,z`` or ``r,theta,z`` CSV.

    With ``normalize`` the radii are divided by their maximum (recorded as
    the aperture); otherwise radii above 1 are an error. ``aperture`` sets
    the physical radius of ``r = 1`` for already-normalised input.
    """
    if aperture is not None and (normalize or not aperture > 0):
        raise ValueError("aperture must be positive and cannot be combined with normalize")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ValueError(f"{path}: empty file")
        cols = [h.strip().lower() for h in header]
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(cols):
                raise ValueError(f"{path}:{lineno}: expected {len(cols)} fields, got {len(row)}")
            try:
                rows.append([float(c) for c in row])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
    if not rows:
        raise ValueError(f"{path}: no data rows")
    data = dict(zip(cols, np.array(rows).T))
    if {"x", "y", "z"} <= data.keys():
        r, theta = to_polar(data["x"], data["y"])
    elif {"r", "theta", "z"} <= data.keys():
        r, theta = data["r"], np.mod(data["theta"], 2 * np.pi)
    else:
        raise ValueError(f"{path}: header must be x,y,z or r,theta,z, got {header}")
    aperture = 1.0 if aperture is None else float(aperture)
    if normalize:
        aperture = float(np.max(r))
        if aperture <= 0:
            raise ValueError(f"{path}: all points at the origin")
        r = r / aperture
    elif np.any(r > 1 + DOMAIN_TOL):
        raise ValueError(f"{path}: radii exceed 1; rerun with normalization")
    return DiskSamples(r, theta, data["z"], aperture)


def export_samples(path, samples: DiskSamples, cartesian: bool = False) -> None:
    """Write ``r,theta,z`` in disk units, or ``x,y,z`` in physical units.

    The cartesian form scales x and y by the aperture, so ingesting it with
    ``normalize=True`` restores the same samples and aperture.
    """
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if cartesian:
            w.writerow(["x", "y", "z"])
            a = samples.aperture
            cols = (a * samples.x, a * samples.y, samples.z)
        else:
            w.writerow(["r", "theta", "z"])
            cols = (samples.r, samples.theta, samples.z)
        for row in zip(*cols):
            w.writerow([f"{v:.17g}" for v in row])


def design_matrix(samples: DiskSamples, N: int, kind: str = "real") -> np.ndarray:
    """``B[i, j]`` = basis function ``j`` at sample ``i``; real basis by default."""
    if len(samples) < dim_v(N):
        raise ValueError(f"{len(samples)} samples cannot determine {dim_v(N)} coefficients")
    if kind == "real":
        return zernike_real_matrix(samples.r, samples.theta, N)
    if kind == "complex":
        return zernike_matrix(samples.r, samples.theta, N=N)
    raise ValueError(f"unknown basis kind {kind!r}")


@dataclass(frozen=True, eq=False)
class FitResult:
    degree: int
    coeffs: np.ndarray  # real-basis coefficients, single-index order
    fitted: np.ndarray  # B a
    residual_l2: float
    residual_rms: float
    condition: float
    samples: DiskSamples = field(repr=False)

    @property
    def polynomial(self) -> DiskPolynomial:
        return real_basis_to_complex(self.coeffs)


def _residuals(samples, fitted):
    res = samples.z - fitted
    l2 = float(np.linalg.norm(res))
    return l2, l2 / math.sqrt(len(samples))


def least_squares_fit(samples: DiskSamples, N: int) -> FitResult:
    """Least-squares coefficients via QR of the design matrix.

    Same minimiser as ``(B^T B)^{-1} B^T C`` without squaring the condition
    number.

    Raises
    ------
    IllConditionedError
        If the design matrix condition number exceeds 1e12.
    """
    B = design_matrix(samples, N)
    Q, R = np.linalg.qr(B)
    d = np.abs(np.diag(R))
    s = np.linalg.svd(R, compute_uv=False)
    cond = float(s[0] / s[-1]) if s[-1] > 0 else math.inf
    if not np.isfinite(cond) or cond > DESIGN_COND_LIMIT or np.min(d) == 0:
        raise IllConditionedError(f"design matrix for N={N} is rank deficient (condition {cond:.3e})", cond)
    a = scipy.linalg.solve_triangular(R, Q.T @ samples.z)
    fitted = B @ a
    l2, rms = _residuals(samples, fitted)
    return FitResult(N, a, fitted, l2, rms, cond, samples)


def project_fit(fit: FitResult, N: int) -> FitResult:
    """Orthogonal projection of a fit onto V_N (coefficient truncation)."""
    if N > fit.degree:
        raise ValueError("projection degree exceeds the fit degree")
    a = fit.coeffs[: dim_v(N)].copy()
    fitted = zernike_real_matrix(fit.samples.r, fit.samples.theta, N) @ a
    l2, rms = _residuals(fit.samples, fitted)
    return FitResult(N, a, fitted, l2, rms, fit.condition, fit.samples)


def fit_difference(high: FitResult, low: FitResult) -> DiskPolynomial:
    """``high - low`` as a complex polynomial in ``V_{high.degree}``."""
    if not high.samples.same_points(low.samples):
        raise ValueError("fits come from different sample sets")
    if low.degree > high.degree:
        raise ValueError("low fit has the larger degree")
    a = high.coeffs.copy()
    a[: low.coeffs.size] -= low.coeffs
    return real_basis_to_complex(a)


def hierarchical_discrepancy(high: FitResult) -> float:
    """Gap between an independent N/2 fit and the projection of the N fit.

    On scattered samples the two coarse models differ; this is the largest
    coefficient difference between them.
    """
    half = high.degree // 2
    independent = least_squares_fit(high.samples, half)
    projected = project_fit(high, half)
    return float(np.max(np.abs(independent.coeffs - projected.coeffs)))


def wavelet_analysis(fit: FitResult, ladder: MraLadder | None = None, bases=None,
                     strategy: str = "fekete", seed: int = 0) -> Decomposition:
    """Express the fitted V_N polynomial in wavelets (plus the V_0 constant)."""
    ladder = MraLadder.build(fit.degree) if ladder is None else ladder
    if bases is None:
        bases = build_level_bases(ladder, strategy, seed)
    return decompose(fit.polynomial, ladder, bases)


def reconstruction_residuals(fit: FitResult, d: Decomposition) -> dict:
    """Residual norms of the Zernike-basis and the wavelet-basis reconstructions."""
    s = fit.samples
    wave = (zernike_matrix(s.r, s.theta, N=d.top) @ reconstruct(d).coeffs).real
    zl2, zrms = fit.residual_l2, fit.residual_rms
    wl2, wrms = _residuals(s, wave)
    return {
        "zernike_l2": zl2,
        "zernike_rms": zrms,
        "wavelet_l2": wl2,
        "wavelet_rms": wrms,
        "max_pointwise_gap": float(np.max(np.abs(wave - fit.fitted))),
    }


@dataclass(frozen=True, eq=False)
class SphereFit:
    center: tuple[float, float, float]
    radius: float
    height: np.ndarray  # sphere surface height at each sample
    difference: np.ndarray  # z - height
    sign: float = 1.0  # which hemisphere the data sits on

    def surface(self, x, y):
        """Sphere height at physical ``(x, y)``."""
        return _sphere_height(x, y, self.center, self.radius, self.sign)


def _sphere_height(x, y, center, radius, sign):
    x0, y0, z0 = center
    return z0 + sign * np.sqrt(np.maximum(radius**2 - (x - x0) ** 2 - (y - y0) ** 2, 0.0))


def best_fit_sphere(samples: DiskSamples) -> SphereFit:
    """Algebraic sphere fit, ``x^2 + y^2 + z^2 = 2 x0 x + 2 y0 y + 2 z0 z + c``.

    x and y are scaled by the aperture so all three coordinates share units.
    """
    x, y, z = samples.x * samples.aperture, samples.y * samples.aperture, samples.z
    if len(samples) < 4:
        raise ValueError("a sphere needs at least 4 points")
    M = np.column_stack([2 * x, 2 * y, 2 * z, np.ones_like(x)])
    s = np.linalg.svd(M, compute_uv=False)
    if s[-1] <= 1e-10 * s[0]:
        raise ValueError("degenerate (coplanar) data: no unique sphere")
    sol, *_ = np.linalg.lstsq(M, x * x + y * y + z * z, rcond=None)
    center = tuple(float(v) for v in sol[:3])
    radius = math.sqrt(sol[3] + sum(c * c for c in center))
    sign = 1.0 if np.mean(z - center[2]) >= 0 else -1.0
    h = _sphere_height(x, y, center, radius, sign)
    return SphereFit(center, radius, h, z - h, sign)


_SYNTH_DEFAULTS = {
    "curvature_radius": 7.8,  # mm, typical anterior cornea
    "aperture": 4.0,  # mm mapped to r = 1
    "astig_amplitude": 0.02,
    "astig_axis": 0.0,
    "bump_height": 0.05,
    "bump_width": 0.15,
    "bump_r": 0.4,
    "bump_theta": 5.5,
    "rings": 34,
}


def synth_surface(kind: str = "normal", params: dict | None = None, noise: float = 0.0,
                  seed: int = 0, D: int = 10200, sampling: str = "rings") -> DiskSamples:
    """Synthetic corneal elevation on the unit disk.

    ``normal`` is a spherical cap (sag of a sphere of radius
    ``curvature_radius`` over the aperture). ``astigmatism`` adds
    ``astig_amplitude * r^2 cos(2 (theta - astig_axis))``; ``keratoconus``
    adds a Gaussian bump of ``bump_height`` and ``bump_width`` (disk units)
    centred at ``(bump_r, bump_theta)``. Noise is i.i.d. Gaussian on z.

    ``sampling="rings"`` places the points on ``rings`` concentric circles
    with ``D / rings`` points each, like a Placido-disk topographer;
    ``"random"`` draws them uniformly over the disk.
    """
    p = dict(_SYNTH_DEFAULTS)
    if params:
        unknown = set(params) - set(p)
        if unknown:
            raise ValueError(f"unknown synthetic parameters {sorted(unknown)}")
        p.update(params)
    if kind not in ("normal", "astigmatism", "keratoconus"):
        raise ValueError(f"unknown surface kind {kind!r}")
    if noise < 0 or D < 1:
        raise ValueError("noise must be >= 0 and D >= 1")
    R, a = float(p["curvature_radius"]), float(p["aperture"])
    if not 0 < a < R:
        raise ValueError("need 0 < aperture < curvature_radius")
    if p["bump_width"] <= 0:
        raise ValueError("bump_width must be positive")
    if not 0 <= p["bump_r"] <= 1:
        raise ValueError("bump_r must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    if sampling == "rings":
        rings = int(p["rings"])
        if rings < 1 or D % rings:
            raise ValueError(f"D={D} is not a multiple of rings={rings}")
        per = D // rings
        r = np.repeat(np.arange(1, rings + 1) / rings, per)
        theta = np.tile(2 * np.pi * np.arange(per) / per, rings)
    elif sampling == "random":
        r = np.sqrt(rng.uniform(0, 1, D))
        theta = rng.uniform(0, 2 * np.pi, D)
    else:
        raise ValueError(f"unknown sampling {sampling!r}")
    z = R - np.sqrt(R * R - (a * r) ** 2)
    if kind == "astigmatism":
        z = z + p["astig_amplitude"] * r**2 * np.cos(2 * (theta - p["astig_axis"]))
    elif kind == "keratoconus":
        bx, by = p["bump_r"] * math.cos(p["bump_theta"]), p["bump_r"] * math.sin(p["bump_theta"])
        d2 = (r * np.cos(theta) - bx) ** 2 + (r * np.sin(theta) - by) ** 2
        z = z + p["bump_height"] * np.exp(-d2 / (2 * p["bump_width"] ** 2))
    if noise > 0:
        z = z + rng.normal(0.0, noise, D)
    return DiskSamples(r, theta, z, a)


def polar_grid(res: int) -> tuple[np.ndarray, np.ndarray]:
    """Regular polar grid: ``res`` radii in (0, 1] times ``4 res`` angles, plus the centre."""
    r = np.concatenate([[0.0], np.repeat(np.arange(1, res + 1) / res, 4 * res)])
    theta = np.concatenate([[0.0], np.tile(2 * np.pi * np.arange(4 * res) / (4 * res), res)])
    return r, theta


def write_grid_csv(path, r, theta, values) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "y", "value"])
        for x, y, v in zip(r * np.cos(theta), r * np.sin(theta), np.real(values)):
            w.writerow([f"{x:.17g}", f"{y:.17g}", f"{v:.17g}"])


def write_coefficients_csv(path, fit: FitResult) -> None:
    """Rows ``j,n,m,A,B`` for ``m >= 0``, cosine/sine coefficients per term."""
    rc = complex_to_real_coeffs(fit.polynomial)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["j", "n", "m", "A", "B"])
        for j in range(dim_v(fit.degree)):
            n, m = index_unpack(j)
            if m < 0:
                continue
            b = rc.B.get((n, m), 0.0)
            w.writerow([j, n, m, f"{rc.A[(n, m)]:.17g}", f"{b:.17g}"])


def fit_summary(fit: FitResult) -> dict:
    return {
        "degree": fit.degree,
        "J": dim_v(fit.degree),
        "samples": len(fit.samples),
        "residual_l2": fit.residual_l2,
        "residual_rms": fit.residual_rms,
        "design_condition": fit.condition,
    }


def dump_json(path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
