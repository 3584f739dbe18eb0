"""Scaling functions of V_N: kernels anchored at the regular points."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .kernel import KernelFunction, kernel_build, kernel_eval_cd
from .monomial import multiply
from .sampling import RegularPointSet, chebyshev_radii, regular_points
from .zernike import DiskPolynomial, dim_v, eval_poly, index_pack, inner_product, zernike_matrix

__all__ = [
    "COLLOCATION_COND_LIMIT",
    "IllConditionedError",
    "ScalingBasis",
    "LagrangeDual",
    "OrthogonalityReport",
    "scaling_build",
    "lagrange_dual",
    "modified_orthogonality_check",
    "scaling_cd_eval",
    "orthogonality_equivalence_check",
    "write_basis_csv",
]

COLLOCATION_COND_LIMIT = 1e12


class IllConditionedError(np.linalg.LinAlgError):
    """Collocation or design matrix too close to singular."""

    def __init__(self, message, condition):
        super().__init__(message)
        self.condition = condition


@dataclass(frozen=True, eq=False)
class ScalingBasis:
    """Scaling functions ``phi_{N,j} = K_N(.; P_j)`` over a regular point set.

    ``collocation[i, j] = Z_j(P_i)``. The coefficient matrix of the scaling
    functions (row per function) is its complex conjugate.
    """

    degree: int
    points: RegularPointSet
    functions: tuple[KernelFunction, ...]
    collocation: np.ndarray
    condition: float

    def __len__(self):
        return len(self.functions)

    @property
    def coeffs(self) -> np.ndarray:
        return np.conj(self.collocation)

    def gram(self) -> np.ndarray:
        """``G[i, k] = <phi_i, phi_k>``, computed in coefficient space."""
        C = self.coeffs
        return C @ C.conj().T

    def pointwise(self) -> np.ndarray:
        """``E[i, k] = phi_i(P_k)``, by evaluating each function at each point."""
        r, t = self.points.rho, self.points.theta
        return np.array([eval_poly(f.poly, r, t) for f in self.functions])


def scaling_build(N: int, radii=chebyshev_radii) -> ScalingBasis:
    """Scaling basis of V_N.

    Raises
    ------
    IllConditionedError
        When the collocation matrix condition number exceeds 1e12, which
        points at a radii choice that is not unisolvent.
    """
    pts = regular_points(N, radii)
    A = zernike_matrix(pts.rho, pts.theta, N=N)
    cond = float(np.linalg.cond(A))
    if not np.isfinite(cond) or cond > COLLOCATION_COND_LIMIT:
        raise IllConditionedError(f"collocation matrix for N={N} has condition {cond:.3e}", cond)
    funcs = tuple(kernel_build(N, (rho, th)) for rho, th in zip(pts.rho, pts.theta))
    return ScalingBasis(N, pts, funcs, A, cond)


@dataclass(frozen=True, eq=False)
class LagrangeDual:
    """Fundamental Lagrange polynomials; row ``i`` holds the coefficients of ``l_i``."""

    coeffs: np.ndarray

    def function(self, i: int) -> DiskPolynomial:
        return DiskPolynomial.from_coeffs(self.coeffs[i])


def lagrange_dual(basis: ScalingBasis) -> LagrangeDual:
    """Solve ``A C^T = I`` with partial pivoting.

    ``l_i(P_k) = delta_ik`` and, through the reproducing property,
    ``<phi_j, l_k> = delta_jk``.
    """
    A = basis.collocation
    try:
        lu = scipy.linalg.lu_factor(A, check_finite=True)
    except (ValueError, scipy.linalg.LinAlgError) as exc:
        raise IllConditionedError(str(exc), np.inf) from exc
    if np.any(np.abs(np.diag(lu[0])) == 0):
        raise IllConditionedError("singular collocation matrix", np.inf)
    C_T = scipy.linalg.lu_solve(lu, np.eye(A.shape[0], dtype=complex))
    return LagrangeDual(C_T.T)


def modified_orthogonality_check(basis: ScalingBasis, q: DiskPolynomial, j: int) -> complex:
    """Residual ``<phi_{N,j}, q (z - z_j)>`` with ``z = x + i y``.

    Zero whenever ``deg q <= N - 1``: the product lies in V_N and vanishes
    at ``P_j``, so the reproducing property kills it. ``j`` counts from 0.
    """
    N = basis.degree
    rho, theta = basis.points.rho[j], basis.points.theta[j]
    zj = rho * np.exp(1j * theta)
    lin = np.zeros(3, dtype=complex)
    lin[index_pack(0, 0)] = -zj * np.sqrt(np.pi)
    # z = r e^{i phi} = sqrt(pi / 2) Z_1^1
    lin[index_pack(1, 1)] = np.sqrt(np.pi / 2)
    prod = multiply(q, DiskPolynomial(1, lin))
    return inner_product(basis.functions[j].poly, prod)


def scaling_cd_eval(basis: ScalingBasis, j: int, r, phi):
    """``phi_{N,j}`` through the Christoffel-Darboux formula."""
    rho, theta = basis.points.rho[j], basis.points.theta[j]
    return kernel_eval_cd(basis.degree, (rho, theta), r, phi)


@dataclass(frozen=True)
class OrthogonalityReport:
    orthogonal: bool
    pointwise_delta: bool
    consistent: bool
    max_offdiag: float
    max_identity_error: float
    diagonal: np.ndarray


def orthogonality_equivalence_check(basis: ScalingBasis, tol: float = 1e-10) -> OrthogonalityReport:
    """Compare the two sides of the orthogonality equivalence on a built basis.

    Side one: the Gram matrix is diagonal. Side two: ``phi_k(P_l)`` vanishes
    off the diagonal. ``max_identity_error`` is the largest gap between
    ``<phi_k, phi_l>`` and ``phi_k(P_l)``, i.e. how well the identity linking
    the two sides holds numerically.
    """
    G = basis.gram()
    E = basis.pointwise()
    scale = max(float(np.max(np.abs(np.diag(G)))), 1.0)
    off = ~np.eye(G.shape[0], dtype=bool)
    max_off = float(np.max(np.abs(G[off]), initial=0.0))
    orthogonal = max_off <= tol * scale
    pointwise = float(np.max(np.abs(E[off]), initial=0.0)) <= tol * scale
    return OrthogonalityReport(
        orthogonal=orthogonal,
        pointwise_delta=pointwise,
        consistent=orthogonal == pointwise,
        max_offdiag=max_off,
        max_identity_error=float(np.max(np.abs(G - E))),
        diagonal=np.diag(G).real.copy(),
    )


def write_basis_csv(path, anchors, coeffs, dual: bool | None = None) -> None:
    """One row per function: anchor, optional dual flag, then ``re,im`` per single index."""
    coeffs = np.asarray(coeffs)
    header = ["k", "rho", "theta"] + (["dual"] if dual is not None else [])
    for j in range(coeffs.shape[1]):
        header += [f"re{j}", f"im{j}"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for k, ((rho, th), row) in enumerate(zip(anchors, coeffs)):
            line = [k, f"{rho:.17g}", f"{th:.17g}"] + ([int(dual)] if dual is not None else [])
            for c in row:
                line += [f"{c.real:.17g}", f"{c.imag:.17g}"]
            w.writerow(line)
