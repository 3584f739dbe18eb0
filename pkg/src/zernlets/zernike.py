"""Complex and real Zernike polynomials on the unit disk.

The complex polynomials

    Z_n^m(r, phi) = sqrt((n + 1) / pi) * R_n^|m|(r) * exp(i m phi)

form an orthonormal basis of L^2 on the unit disk under the plain area
inner product. Everything in this package orders basis functions by the
single index ``j = (n (n + 2) + m) / 2``, so ``V_N`` (total degree <= N) is
the first ``J_N = (N + 1)(N + 2) / 2`` entries of any coefficient vector.

Points are polar ``(r, phi)`` throughout; use :func:`to_polar` once at the
boundary when data arrives in Cartesian form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "DOMAIN_TOL",
    "ZernikeIndex",
    "DiskPolynomial",
    "RealCoeffs",
    "DiskQuadrature",
    "dim_v",
    "dim_w",
    "index_pack",
    "index_unpack",
    "indices",
    "radial_eval",
    "zernike_eval",
    "zernike_real_eval",
    "zernike_matrix",
    "zernike_real_matrix",
    "inner_product",
    "eval_poly",
    "recurrence_coeffs",
    "three_term_apply",
    "complex_to_real_coeffs",
    "real_to_complex_coeffs",
    "real_basis_to_complex",
    "complex_to_real_basis",
    "to_polar",
]

DOMAIN_TOL = 1e-12


def dim_v(N: int) -> int:
    """Dimension of V_N, the polynomials of total degree <= N."""
    if N < 0:
        return 0
    return (N + 1) * (N + 2) // 2


def dim_w(N: int) -> int:
    """Dimension of the wavelet space W_N (W_0 = V_1 minus V_0 has dimension 2)."""
    if N == 0:
        return 2
    return 3 * N * (N + 1) // 2


def _valid(n: int, m: int) -> bool:
    return n >= 0 and abs(m) <= n and (n - m) % 2 == 0


def index_pack(n: int, m: int) -> int:
    """Single index ``j`` of ``Z_n^m``."""
    if not _valid(n, m):
        raise ValueError(f"invalid Zernike index (n={n}, m={m})")
    return (n * (n + 2) + m) // 2


def index_unpack(j: int) -> tuple[int, int]:
    """Inverse of :func:`index_pack`."""
    if j < 0:
        raise ValueError(f"single index must be nonnegative, got {j}")
    n = (math.isqrt(8 * j + 1) - 1) // 2
    m = 2 * j - n * (n + 2)
    return n, m


def indices(N: int) -> list[tuple[int, int]]:
    """All ``(n, m)`` with ``n <= N`` in single-index order."""
    return [index_unpack(j) for j in range(dim_v(N))]


@dataclass(frozen=True)
class ZernikeIndex:
    n: int
    m: int

    def __post_init__(self):
        if not _valid(self.n, self.m):
            raise ValueError(f"invalid Zernike index (n={self.n}, m={self.m})")

    @property
    def j(self) -> int:
        return index_pack(self.n, self.m)

    @classmethod
    def from_j(cls, j: int) -> "ZernikeIndex":
        return cls(*index_unpack(j))


def _check_radius(r):
    r = np.asarray(r, dtype=float)
    if np.any(r < -DOMAIN_TOL) or np.any(r > 1 + DOMAIN_TOL):
        raise ValueError("radius outside the closed unit disk")
    return np.clip(r, 0.0, 1.0)


@lru_cache(maxsize=None)
def _radial_coeffs(n: int, m_abs: int) -> tuple[float, ...]:
    # Coefficients of R_n^m in powers of r^2, highest first, times r^m.
    # Built with exact integers (term ratio update) and rounded once.
    half = (n - m_abs) // 2
    c = math.comb(n, half)  # s = 0 term: n! / (((n+m)/2)! ((n-m)/2)!)
    exact = [c]
    for s in range(half):
        # ratio c_{s+1} / c_s
        num = -((n + m_abs) // 2 - s) * (half - s)
        den = (s + 1) * (n - s)
        c_next = c * num
        assert c_next % den == 0
        c = c_next // den
        exact.append(c)
    return tuple(float(v) for v in exact)


def radial_eval(n: int, m_abs: int, r):
    """Radial polynomial ``R_n^|m|(r)``.

    Returns zero for index pairs that are not valid (negative degree,
    ``|m| > n`` or parity mismatch), so that recurrences can reference
    neighbours beyond the admissible range.
    """
    r = _check_radius(r)
    m_abs = abs(m_abs)
    if not _valid(n, m_abs):
        return np.zeros_like(r)
    coeffs = _radial_coeffs(n, m_abs)
    u = r * r
    acc = np.full_like(r, coeffs[0])
    for c in coeffs[1:]:
        acc = acc * u + c
    return acc * r**m_abs


def _gamma(n: int) -> float:
    return math.sqrt((n + 1) / math.pi)


def _gamma_real(n: int, m: int) -> float:
    return math.sqrt((n + 1) / math.pi) if m == 0 else math.sqrt(2 * (n + 1) / math.pi)


def _as_index(idx) -> tuple[int, int]:
    if isinstance(idx, ZernikeIndex):
        return idx.n, idx.m
    if isinstance(idx, (int, np.integer)):
        return index_unpack(int(idx))
    n, m = idx
    return int(n), int(m)


def zernike_eval(idx, r, phi):
    """Complex orthonormal Zernike polynomial.

    ``idx`` is a :class:`ZernikeIndex`, an ``(n, m)`` pair or a single index.
    Invalid ``(n, m)`` pairs evaluate to zero.
    """
    n, m = _as_index(idx)
    rad = radial_eval(n, abs(m), r)
    if not _valid(n, m):
        return rad.astype(complex)
    return _gamma(n) * rad * np.exp(1j * m * np.asarray(phi, dtype=float))


def zernike_real_eval(idx, r, phi):
    """Real orthonormal Zernike polynomial (cosine for m >= 0, sine for m < 0)."""
    n, m = _as_index(idx)
    if not _valid(n, m):
        raise ValueError(f"invalid Zernike index (n={n}, m={m})")
    phi = np.asarray(phi, dtype=float)
    ang = np.cos(m * phi) if m >= 0 else np.sin(-m * phi)
    return _gamma_real(n, m) * radial_eval(n, abs(m), r) * ang


def _basis_matrix(r, phi, N, start, stop, real):
    r = _check_radius(np.atleast_1d(r))
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    if stop is None:
        stop = dim_v(N)
    out = np.empty((r.size, stop - start), dtype=float if real else complex)
    radial = {}
    for col, j in enumerate(range(start, stop)):
        n, m = index_unpack(j)
        key = (n, abs(m))
        if key not in radial:
            radial[key] = radial_eval(n, abs(m), r)
        if real:
            ang = np.cos(m * phi) if m >= 0 else np.sin(-m * phi)
            out[:, col] = _gamma_real(n, m) * radial[key] * ang
        else:
            out[:, col] = _gamma(n) * radial[key] * np.exp(1j * m * phi)
    return out


def zernike_matrix(r, phi, N: int | None = None, start: int = 0, stop: int | None = None):
    """Sample complex Zernike polynomials at many points.

    Parameters
    ----------
    r, phi : array_like
        Polar coordinates of the points, same length.
    N : int, optional
        Maximum degree; selects single indices ``0 .. J_N - 1``.
    start, stop : int
        Explicit single-index range ``[start, stop)``; overrides ``N``.

    Returns
    -------
    ndarray, shape (points, stop - start)
    """
    if N is None and stop is None:
        raise ValueError("give either N or an explicit index range")
    return _basis_matrix(r, phi, N, start, stop, real=False)


def zernike_real_matrix(r, phi, N: int):
    """Real Zernike design matrix with columns in single-index order."""
    return _basis_matrix(r, phi, N, 0, None, real=True)


def to_polar(x, y):
    """Cartesian to polar with the angle wrapped into ``[0, 2 pi)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    phi = np.mod(np.arctan2(y, x), 2 * np.pi)
    # mod can round up to exactly 2 pi for tiny negative angles
    phi = np.where(phi >= 2 * np.pi, 0.0, phi)
    return np.hypot(x, y), phi


@dataclass(frozen=True, eq=False)
class DiskPolynomial:
    """Element of V_N stored as coefficients over the complex Zernike basis."""

    degree: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if self.degree < 0:
            raise ValueError("degree must be nonnegative")
        if c.shape != (dim_v(self.degree),):
            raise ValueError(
                f"expected {dim_v(self.degree)} coefficients for degree {self.degree}, got {c.shape}"
            )
        c = c.copy()
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zero(cls, degree: int) -> "DiskPolynomial":
        return cls(degree, np.zeros(dim_v(degree), dtype=complex))

    @classmethod
    def basis(cls, j: int, degree: int | None = None) -> "DiskPolynomial":
        n, _ = index_unpack(j)
        degree = n if degree is None else degree
        c = np.zeros(dim_v(degree), dtype=complex)
        c[j] = 1.0
        return cls(degree, c)

    @classmethod
    def from_coeffs(cls, coeffs) -> "DiskPolynomial":
        """Wrap a vector whose length is some ``J_N``; pads to the next one otherwise."""
        coeffs = np.asarray(coeffs, dtype=complex)
        N = 0
        while dim_v(N) < coeffs.size:
            N += 1
        return cls(N, np.pad(coeffs, (0, dim_v(N) - coeffs.size)))

    def padded(self, degree: int) -> "DiskPolynomial":
        """Same polynomial viewed in V_degree (degree must not drop below the support)."""
        if degree >= self.degree:
            return DiskPolynomial(degree, np.pad(self.coeffs, (0, dim_v(degree) - self.coeffs.size)))
        tail = self.coeffs[dim_v(degree):]
        if np.any(tail != 0):
            raise ValueError("cannot shrink a polynomial with nonzero high-degree coefficients")
        return DiskPolynomial(degree, self.coeffs[: dim_v(degree)])

    def __call__(self, r, phi):
        return eval_poly(self, r, phi)

    def __add__(self, other: "DiskPolynomial") -> "DiskPolynomial":
        N = max(self.degree, other.degree)
        return DiskPolynomial(N, self.padded(N).coeffs + other.padded(N).coeffs)

    def __sub__(self, other: "DiskPolynomial") -> "DiskPolynomial":
        return self + (-1) * other

    def __mul__(self, scalar) -> "DiskPolynomial":
        return DiskPolynomial(self.degree, self.coeffs * scalar)

    __rmul__ = __mul__

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def is_real(self, tol: float = 1e-10) -> bool:
        """Conjugate symmetry ``c_{n,-m} = conj(c_{n,m})``, i.e. real-valued on the disk."""
        mirror = np.array([index_pack(n, -m) for n, m in indices(self.degree)])
        return bool(np.max(np.abs(self.coeffs[mirror] - np.conj(self.coeffs)), initial=0.0) <= tol)


def inner_product(p: DiskPolynomial, q: DiskPolynomial) -> complex:
    """``<p, q>`` over the disk, computed exactly in coefficient space."""
    k = min(p.coeffs.size, q.coeffs.size)
    return complex(np.vdot(q.coeffs[:k], p.coeffs[:k]))


def eval_poly(p: DiskPolynomial, r, phi):
    """Evaluate ``sum_j c_j Z_j`` at polar points (scalar in, scalar out)."""
    scalar = np.ndim(r) == 0 and np.ndim(phi) == 0
    Z = zernike_matrix(r, phi, N=p.degree)
    out = Z @ p.coeffs
    return complex(out[0]) if scalar else out


def recurrence_coeffs(n: int, m: int) -> tuple[float, float]:
    """Coefficients ``(a_n, b_n)`` of ``r^2 Z_n^m = b_{n-2} Z_{n-2}^m + a_n Z_n^m + b_n Z_{n+2}^m``.

    At ``n = 0`` the ``(n + m)^2 / n`` term is taken as 0.
    """
    first = 0.0 if n == 0 else (n + m) ** 2 / n
    a = (first + (n - m + 2) ** 2 / (n + 2)) / (4 * (n + 1))
    b = ((n + 2) ** 2 - m * m) / (4 * (n + 2)) / math.sqrt((n + 1) * (n + 3))
    return a, b


def three_term_apply(m: int, n: int, r, phi):
    """Right-hand side of the radial three-term recurrence at the given points.

    Equals ``r^2 Z_n^m(r, phi)``; neighbours outside the valid index range
    contribute nothing.
    """
    if not _valid(n, m):
        raise ValueError(f"invalid Zernike index (n={n}, m={m})")
    a_n, b_n = recurrence_coeffs(n, m)
    out = a_n * zernike_eval((n, m), r, phi) + b_n * zernike_eval((n + 2, m), r, phi)
    if _valid(n - 2, m):
        _, b_prev = recurrence_coeffs(n - 2, m)
        out = out + b_prev * zernike_eval((n - 2, m), r, phi)
    return out


@dataclass(frozen=True)
class RealCoeffs:
    """Cosine/sine coefficients ``A_{nm}``, ``B_{nm}`` for ``0 <= m <= n``.

    They multiply ``sqrt((n + 1) / pi) R_n^m(r) cos(m phi)`` and the matching
    sine term, i.e. the same normalisation as the complex basis.
    """

    degree: int
    A: dict
    B: dict


def complex_to_real_coeffs(c, tol: float = 1e-10) -> RealCoeffs:
    """``A_{nm} = c_{nm} + c_{n,-m}``, ``B_{nm} = i (c_{nm} - c_{n,-m})``.

    Raises ``ValueError`` when the input is not conjugate symmetric, since
    the outputs would then be complex.
    """
    p = c if isinstance(c, DiskPolynomial) else DiskPolynomial.from_coeffs(c)
    if not p.is_real(tol):
        raise ValueError("coefficients are not conjugate symmetric; the function is not real")
    A, B = {}, {}
    for n in range(p.degree + 1):
        for m in range(n % 2, n + 1, 2):
            cp = p.coeffs[index_pack(n, m)]
            cm = p.coeffs[index_pack(n, -m)]
            if m == 0:
                A[(n, 0)] = float(cp.real)
            else:
                A[(n, m)] = float((cp + cm).real)
                B[(n, m)] = float((1j * (cp - cm)).real)
    return RealCoeffs(p.degree, A, B)


def real_to_complex_coeffs(rc: RealCoeffs) -> DiskPolynomial:
    """Inverse of :func:`complex_to_real_coeffs`."""
    c = np.zeros(dim_v(rc.degree), dtype=complex)
    for (n, m), a in rc.A.items():
        b = 0.0 if m == 0 else rc.B.get((n, m), 0.0)
        if m == 0:
            c[index_pack(n, 0)] = a
        else:
            c[index_pack(n, m)] = (a - 1j * b) / 2
            c[index_pack(n, -m)] = (a + 1j * b) / 2
    return DiskPolynomial(rc.degree, c)


def real_basis_to_complex(a) -> DiskPolynomial:
    """Coefficients over the orthonormal real basis to complex Zernike coefficients.

    The real basis carries an extra ``sqrt(2)`` for ``m != 0``, so
    ``A_{nm} = sqrt(2) a_{n,m}`` and ``B_{nm} = sqrt(2) a_{n,-m}`` before the
    usual cosine/sine conversion.
    """
    p = DiskPolynomial.from_coeffs(np.zeros(len(a)))
    A, B = {}, {}
    for j, val in enumerate(np.asarray(a, dtype=float)):
        n, m = index_unpack(j)
        if m == 0:
            A[(n, 0)] = val
        elif m > 0:
            A[(n, m)] = math.sqrt(2) * val
        else:
            B[(n, -m)] = math.sqrt(2) * val
    return real_to_complex_coeffs(RealCoeffs(p.degree, A, B))


def complex_to_real_basis(p: DiskPolynomial, tol: float = 1e-10) -> np.ndarray:
    """Inverse of :func:`real_basis_to_complex`."""
    rc = complex_to_real_coeffs(p, tol)
    a = np.zeros(dim_v(p.degree))
    for j in range(a.size):
        n, m = index_unpack(j)
        if m == 0:
            a[j] = rc.A[(n, 0)]
        elif m > 0:
            a[j] = rc.A[(n, m)] / math.sqrt(2)
        else:
            a[j] = rc.B[(n, -m)] / math.sqrt(2)
    return a


class DiskQuadrature:
    """Product rule on the disk: Gauss-Legendre in ``u = r^2`` times equispaced angles.

    ``DiskQuadrature(N)`` integrates the product of any two elements of
    ``V_N`` exactly (to round-off). It is a test oracle; production inner
    products never go through it.
    """

    def __init__(self, degree: int, radial_nodes: int | None = None, angles: int | None = None):
        self.degree = degree
        nr = degree + 1 if radial_nodes is None else radial_nodes
        na = max(4 * degree + 1, 1) if angles is None else angles
        x, w = np.polynomial.legendre.leggauss(nr)
        u = (x + 1) / 2
        # int_0^1 f(r) r dr = 1/2 int_0^1 f(sqrt u) du, and du = dx / 2
        self.radial_nodes = np.sqrt(u)
        self.radial_weights = w / 4
        self.angles = 2 * np.pi * np.arange(na) / na
        rr, pp = np.meshgrid(self.radial_nodes, self.angles, indexing="ij")
        self.r = rr.ravel()
        self.phi = pp.ravel()
        self.weights = np.repeat(self.radial_weights, na) * (2 * np.pi / na)

    def __len__(self):
        return self.r.size

    def integrate(self, values) -> complex:
        return complex(np.sum(self.weights * np.asarray(values)))

    def inner(self, f_vals, g_vals) -> complex:
        return self.integrate(np.asarray(f_vals) * np.conj(g_vals))

    def gram(self, basis_vals) -> np.ndarray:
        """Quadrature Gram matrix of sampled functions (columns of ``basis_vals``)."""
        Bw = basis_vals * self.weights[:, None]
        return Bw.T @ np.conj(basis_vals)

    def project(self, values, N: int) -> DiskPolynomial:
        """Zernike coefficients ``<f, Z_j>`` of sampled values, j < J_N."""
        Z = zernike_matrix(self.r, self.phi, N=N)
        return DiskPolynomial(N, (np.conj(Z) * self.weights[:, None]).T @ np.asarray(values))
