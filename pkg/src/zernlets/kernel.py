"""Reproducing kernels of V_N and their Christoffel-Darboux form."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .zernike import (
    DOMAIN_TOL,
    DiskPolynomial,
    _check_radius,
    _valid,
    dim_v,
    eval_poly,
    radial_eval,
    recurrence_coeffs,
    zernike_eval,
    zernike_matrix,
)

__all__ = [
    "CD_EPS",
    "KernelFunction",
    "kernel_build",
    "kernel_self_value",
    "kernel_eval_direct",
    "kernel_eval_cd",
    "localization_ratio",
]

CD_EPS = 1e-6


def _check_anchor(anchor):
    rho, theta = float(anchor[0]), float(anchor[1])
    if rho < -DOMAIN_TOL or rho > 1 + DOMAIN_TOL:
        raise ValueError(f"anchor radius {rho} outside the closed unit disk")
    return min(max(rho, 0.0), 1.0), theta


@dataclass(frozen=True, eq=False)
class KernelFunction:
    """``K_N(., .; rho, theta)`` as a polynomial in V_N."""

    degree: int
    anchor: tuple[float, float]
    poly: DiskPolynomial

    @property
    def coeffs(self) -> np.ndarray:
        return self.poly.coeffs

    def __call__(self, r, phi):
        return eval_poly(self.poly, r, phi)


def kernel_build(N: int, anchor) -> KernelFunction:
    """Kernel polynomial of degree ``N`` anchored at ``(rho, theta)``.

    Its Zernike coefficients are ``conj(Z_j(rho, theta))``, which gives the
    reproducing property ``<p, K_N(.; anchor)> = p(anchor)`` on V_N.
    """
    if N < 0:
        raise ValueError("degree must be nonnegative")
    rho, theta = _check_anchor(anchor)
    row = zernike_matrix(rho, theta, N=N)[0]
    return KernelFunction(N, (rho, theta), DiskPolynomial(N, np.conj(row)))


def kernel_self_value(N: int, anchor) -> float:
    """``K_N`` on the diagonal: ``sum_n (n + 1) / pi * sum_m R_n^|m|(rho)^2``."""
    rho, _ = _check_anchor(anchor if np.ndim(anchor) else (anchor, 0.0))
    total = 0.0
    for n in range(N + 1):
        for m in range(-n, n + 1, 2):
            total += (n + 1) / math.pi * float(radial_eval(n, abs(m), rho)) ** 2
    return total


def kernel_eval_direct(N: int, anchor, r, phi):
    """Direct double sum; real up to round-off, returned as real."""
    rho, theta = _check_anchor(anchor)
    Za = zernike_matrix(rho, theta, N=N)[0]
    Z = zernike_matrix(r, phi, N=N)
    out = (Z @ np.conj(Za)).real
    return float(out[0]) if np.ndim(r) == 0 else out


def _cd_pair(n, m, r, phi, rho, theta):
    # Z_{n+2}^m(x) conj Z_n^m(y) - Z_n^m(x) conj Z_{n+2}^m(y); invalid pairs vanish
    if not (_valid(n, m) or _valid(n + 2, m)):
        return 0.0
    hi_x, lo_x = zernike_eval((n + 2, m), r, phi), zernike_eval((n, m), r, phi)
    hi_y, lo_y = zernike_eval((n + 2, m), rho, theta), zernike_eval((n, m), rho, theta)
    return hi_x * np.conj(lo_y) - lo_x * np.conj(hi_y)


def kernel_eval_cd(N: int, anchor, r, phi, eps: float = CD_EPS):
    """Evaluate ``K_N`` through the Christoffel-Darboux formula.

    Two boundary sums over the degree pairs ``(N, N + 2)`` and
    ``(N - 1, N + 1)``, divided by ``r^2 - rho^2``. Points with
    ``|r^2 - rho^2| < eps`` use the direct sum instead, since the quotient
    loses all precision there.
    """
    if N < 1:
        raise ValueError("the Christoffel-Darboux form needs N >= 1")
    rho, theta = _check_anchor(anchor)
    scalar = np.ndim(r) == 0
    r = np.atleast_1d(_check_radius(r))
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    num = np.zeros(r.shape, dtype=complex)
    for deg in (N, N - 1):
        for m in range(-deg, deg + 1):
            b = recurrence_coeffs(deg, m)[1]
            num = num + b * _cd_pair(deg, m, r, phi, rho, theta)
    denom = r * r - rho * rho
    near = np.abs(denom) < eps
    out = np.empty(r.shape)
    out[~near] = (num[~near] / denom[~near]).real
    if np.any(near):
        out[near] = kernel_eval_direct(N, (rho, theta), r[near], phi[near])
    return float(out[0]) if scalar else out


def localization_ratio(N: int, anchor) -> float:
    """Smallest norm of a ``p`` in V_N with ``p(anchor) = 1``.

    The minimiser is ``K_N(.; anchor) / K_N(anchor; anchor)``, whose norm is
    ``1 / sqrt(K_N(anchor; anchor))``.
    """
    return 1.0 / math.sqrt(kernel_self_value(N, anchor))
