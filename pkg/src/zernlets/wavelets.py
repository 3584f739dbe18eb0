"""Wavelet functions of W_N = V_2N minus V_N and their duals.

Two matrices share one name in the literature, so they get two names here:
the scaling-side *collocation* matrix ``Z_j(P_i)`` lives in
:mod:`zernlets.scaling`, while the :attr:`WaveletBasis.vandermonde` below is
``A[j, l] = Z_l(mu_j, omega_j)`` restricted to the W_N index block. The
wavelet coefficient rows are ``conj(A)``, so the columns of ``A^*`` are the
wavelets themselves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .sampling import ParameterPointSet
from .zernike import DiskPolynomial, dim_v, dim_w, eval_poly, zernike_matrix

__all__ = [
    "GATE_RTOL",
    "IndependenceError",
    "GateResult",
    "WaveletBasis",
    "DualWaveletBasis",
    "FrameOps",
    "block_range",
    "top_degree",
    "wavelet_build",
    "independence_gate",
    "wavelet_coefficients",
    "dual_build",
    "discretized_frame_ops",
    "wavelet_localization_ratio",
]

GATE_RTOL = 1e-10


def block_range(N: int) -> tuple[int, int]:
    """Single-index range ``[start, stop)`` owned by W_N (W_0 owns 1 and 2)."""
    if N == 0:
        return 1, 3
    return dim_v(N), dim_v(2 * N)


def top_degree(N: int) -> int:
    return 1 if N == 0 else 2 * N


class IndependenceError(np.linalg.LinAlgError):
    def __init__(self, message, condition, level=None):
        super().__init__(message)
        self.condition = condition
        self.level = level


@dataclass(frozen=True)
class GateResult:
    ok: bool
    condition: float
    smallest_singular_value: float

    def raise_for_failure(self, level=None):
        if not self.ok:
            where = "" if level is None else f" at level W_{level}"
            raise IndependenceError(
                f"wavelets are not linearly independent{where} (condition {self.condition:.3e})",
                self.condition,
                level,
            )


@dataclass(frozen=True, eq=False)
class WaveletBasis:
    level: int
    mu: np.ndarray
    omega: np.ndarray
    coeff_block: np.ndarray
    params: ParameterPointSet | None = None

    @property
    def dimension(self) -> int:
        return self.coeff_block.shape[0]

    @property
    def block(self) -> tuple[int, int]:
        return block_range(self.level)

    @property
    def vandermonde(self) -> np.ndarray:
        return np.conj(self.coeff_block)

    @property
    def points(self) -> np.ndarray:
        return np.column_stack([self.mu, self.omega])

    def embed(self, block_coeffs) -> DiskPolynomial:
        """Place a W-block coefficient vector into ``V_{top}``."""
        start, stop = self.block
        c = np.zeros(dim_v(top_degree(self.level)), dtype=complex)
        c[start:stop] = block_coeffs
        return DiskPolynomial(top_degree(self.level), c)

    def function(self, j: int) -> DiskPolynomial:
        return self.embed(self.coeff_block[j])

    def gram(self) -> np.ndarray:
        """``G[j, k] = <psi_j, psi_k>``."""
        return self.coeff_block @ self.coeff_block.conj().T

    def evaluate(self, j: int, r, phi):
        return eval_poly(self.function(j), r, phi)


def wavelet_build(N: int, params) -> WaveletBasis:
    """Wavelets ``psi_{N,j} = K_2N(.; mu_j) - K_N(.; mu_j)``.

    ``params`` is a :class:`ParameterPointSet` or a ``(D_N, 2)`` array of
    polar points (the array form skips the duplicate check, so degenerate
    sets can reach :func:`independence_gate`).
    """
    if isinstance(params, ParameterPointSet):
        mu, omega, pset = params.mu, params.omega, params
    else:
        pts = np.asarray(params, dtype=float)
        mu, omega, pset = pts[:, 0], pts[:, 1], None
    if mu.size != dim_w(N):
        raise ValueError(f"W_{N} needs {dim_w(N)} parameter points, got {mu.size}")
    start, stop = block_range(N)
    block = np.conj(zernike_matrix(mu, omega, start=start, stop=stop))
    return WaveletBasis(N, mu, omega, block, pset)


def independence_gate(basis: WaveletBasis) -> GateResult:
    """Accept iff the smallest singular value exceeds ``1e-10`` times the largest."""
    s = np.linalg.svd(basis.coeff_block, compute_uv=False)
    cond = float(s[0] / s[-1]) if s[-1] > 0 else math.inf
    return GateResult(bool(s[-1] > GATE_RTOL * s[0]), cond, float(s[-1]))


def _block_of(f, basis: WaveletBasis) -> np.ndarray:
    start, stop = basis.block
    if isinstance(f, DiskPolynomial):
        c = f.coeffs
    else:
        c = np.asarray(f, dtype=complex)
        if c.size == stop - start:
            return c
    out = np.zeros(stop - start, dtype=complex)
    have = c[start:stop]
    out[: have.size] = have
    return out


def wavelet_coefficients(f, basis: WaveletBasis) -> np.ndarray:
    """``<f, psi_{N,j}>`` for all ``j``; only the W_N block of ``f`` matters.

    By the reproducing property this is the W_N component of ``f``
    evaluated at the parameter points.
    """
    return basis.vandermonde @ _block_of(f, basis)


@dataclass(frozen=True, eq=False)
class DualWaveletBasis:
    """Duals ``(A^* A)^{-1} psi_j``, applied through the QR factor of ``A``.

    ``A^* A = R^* R``, so the Gram inverse is two triangular solves and is
    never formed explicitly.
    """

    basis: WaveletBasis
    r_factor: np.ndarray
    duals: np.ndarray  # row j: W-block coefficients of the j-th dual

    def apply_gram_inverse(self, v) -> np.ndarray:
        R = self.r_factor
        y = scipy.linalg.solve_triangular(R, np.asarray(v, dtype=complex), trans="C", lower=False)
        return scipy.linalg.solve_triangular(R, y, lower=False)

    def function(self, j: int) -> DiskPolynomial:
        return self.basis.embed(self.duals[j])

    def reconstruct(self, analysis) -> np.ndarray:
        """W-block coefficients of ``sum_j a_j dual_j``."""
        return self.duals.T @ np.asarray(analysis, dtype=complex)

    def synthesis_coefficients(self, f) -> np.ndarray:
        """``c_j = <f, dual_j>``, so that ``f = sum_j c_j psi_j``."""
        return self.duals.conj() @ _block_of(f, self.basis)


def dual_build(basis: WaveletBasis) -> DualWaveletBasis:
    independence_gate(basis).raise_for_failure(basis.level)
    A = basis.vandermonde
    _, R = np.linalg.qr(A)
    # columns of A^* are the wavelet vectors
    X = scipy.linalg.solve_triangular(R, A.conj().T, trans="C", lower=False)
    X = scipy.linalg.solve_triangular(R, X, lower=False)
    return DualWaveletBasis(basis, R, X.T.copy())


@dataclass(frozen=True, eq=False)
class FrameOps:
    sampled_block: np.ndarray  # B, shape (D, D_N)
    synthesis: np.ndarray  # Psi = B A^*
    frame_operator: np.ndarray  # Psi Psi^*
    duals: np.ndarray  # column j: pinv(Psi Psi^*) psi_j
    rank: int


def discretized_frame_ops(basis: WaveletBasis, r, phi, weights=None, rtol: float = 1e-10) -> FrameOps:
    """Sampled synthesis and frame operators for a wavelet basis.

    The frame operator is ``D x D`` with rank at most ``D_N``, so the
    discretised duals use its pseudo-inverse. With ``weights`` (quadrature
    weights of the sample points) each row is scaled by ``sqrt(w)``, which
    makes the sampled inner product match the continuous one.
    """
    start, stop = basis.block
    r = np.atleast_1d(r)
    if r.size < basis.dimension:
        raise ValueError(f"need at least {basis.dimension} sample points, got {r.size}")
    B = zernike_matrix(r, phi, start=start, stop=stop)
    if weights is not None:
        B = B * np.sqrt(np.asarray(weights))[:, None]
    Psi = B @ basis.coeff_block.T
    U, s, Vh = np.linalg.svd(Psi, full_matrices=False)
    rank = int(np.sum(s > rtol * s[0]))
    if rank < basis.dimension:
        raise IndependenceError(
            f"sampled wavelets have rank {rank} < {basis.dimension}",
            float(s[0] / s[-1]) if s[-1] > 0 else math.inf,
            basis.level,
        )
    F = Psi @ Psi.conj().T
    # pinv(Psi Psi^*) Psi = U S^-1 V^*; avoids squaring the spectrum
    duals = (U[:, :rank] / s[:rank]) @ Vh[:rank]
    return FrameOps(B, Psi, F, duals, rank)


def wavelet_localization_ratio(N: int, point) -> float:
    """Smallest norm of an ``f`` in W_N with ``f(point) = 1``."""
    start, stop = block_range(N)
    z = zernike_matrix(point[0], point[1], start=start, stop=stop)[0]
    return 1.0 / float(np.linalg.norm(z))
