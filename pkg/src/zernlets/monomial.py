"""Exact conversion between Zernike coefficients and monomials ``x^a y^b``.

Used where an operation is trivial in monomials and awkward in the
Zernike basis: products of polynomials and the substitution
``(x, y) -> (x^2, y^2)``. Monomial arrays are 2-d with ``M[a, b]`` the
coefficient of ``x^a y^b``.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
import scipy.linalg
from scipy.signal import convolve2d

from .zernike import DiskPolynomial, _radial_coeffs, dim_v, index_unpack

__all__ = ["to_monomials", "from_monomials", "multiply", "substitute_squares"]


def _pow(base: np.ndarray, k: int) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for _ in range(k):
        out = convolve2d(out, base)
    return out


@lru_cache(maxsize=None)
def _zernike_monomials(j: int) -> np.ndarray:
    n, m = index_unpack(j)
    k = abs(m)
    # r^|m| e^{i m phi} = (x + i sgn(m) y)^|m|, r^2 = x^2 + y^2
    lin = np.array([[0, 1j if m >= 0 else -1j], [1, 0]], dtype=complex)
    r2 = np.array([[0, 0, 1], [0, 0, 0], [1, 0, 0]], dtype=complex)
    angular = _pow(lin, k)
    coeffs = _radial_coeffs(n, k)  # highest power of r^2 first
    half = len(coeffs) - 1
    acc = np.zeros((n + 1, n + 1), dtype=complex)
    for s, c in enumerate(coeffs):
        term = convolve2d(angular, _pow(r2, half - s)) * c
        acc[: term.shape[0], : term.shape[1]] += term
    out = math.sqrt((n + 1) / math.pi) * acc
    out.setflags(write=False)
    return out


def to_monomials(p: DiskPolynomial) -> np.ndarray:
    """Monomial coefficient array, shape ``(degree + 1, degree + 1)``."""
    N = p.degree
    out = np.zeros((N + 1, N + 1), dtype=complex)
    for j, c in enumerate(p.coeffs):
        if c != 0:
            mono = _zernike_monomials(j)
            out[: mono.shape[0], : mono.shape[1]] += c * mono
    return out


@lru_cache(maxsize=None)
def _transfer(N: int):
    # square map from Zernike coefficients to monomials of total degree <= N
    keys = [(a, d - a) for d in range(N + 1) for a in range(d + 1)]
    T = np.zeros((len(keys), dim_v(N)), dtype=complex)
    for j in range(dim_v(N)):
        mono = _zernike_monomials(j)
        for row, (a, b) in enumerate(keys):
            if a < mono.shape[0] and b < mono.shape[1]:
                T[row, j] = mono[a, b]
    return keys, scipy.linalg.lu_factor(T)


def from_monomials(M, degree: int | None = None) -> DiskPolynomial:
    """Zernike coefficients of a polynomial given by monomials.

    ``degree`` defaults to the largest total degree present. Terms above
    ``degree`` must be zero.
    """
    M = np.asarray(M, dtype=complex)
    a_idx, b_idx = np.nonzero(M)
    top = int(np.max(a_idx + b_idx)) if a_idx.size else 0
    N = top if degree is None else degree
    if top > N:
        raise ValueError(f"polynomial has total degree {top} > {N}")
    keys, lu = _transfer(N)
    rhs = np.array([M[a, b] if a < M.shape[0] and b < M.shape[1] else 0 for a, b in keys])
    return DiskPolynomial(N, scipy.linalg.lu_solve(lu, rhs))


def multiply(p: DiskPolynomial, q: DiskPolynomial) -> DiskPolynomial:
    """Product ``p q`` as an element of ``V_{deg p + deg q}``."""
    return from_monomials(convolve2d(to_monomials(p), to_monomials(q)), p.degree + q.degree)


def substitute_squares(p: DiskPolynomial) -> DiskPolynomial:
    """``q(x, y) = p(x^2, y^2)``, an element of ``V_{2 deg p}``."""
    M = to_monomials(p)
    out = np.zeros((2 * M.shape[0] - 1, 2 * M.shape[1] - 1), dtype=complex)
    out[::2, ::2] = M
    return from_monomials(out, 2 * p.degree)
