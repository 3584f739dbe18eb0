"""Numerical self-checks run by ``zernlets validate``."""

from __future__ import annotations

import numpy as np

from .kernel import kernel_build, kernel_eval_cd, kernel_eval_direct
from .mra import MraLadder, build_level_bases, decompose, reconstruct
from .scaling import lagrange_dual, scaling_build
from .wavelets import block_range, dual_build, top_degree, wavelet_build, wavelet_coefficients
from .sampling import approximate_fekete, regular_points
from .zernike import DiskPolynomial, DiskQuadrature, dim_v, eval_poly, inner_product, zernike_matrix

__all__ = ["SUITES", "run_suites"]


def _random_poly(rng, N):
    J = dim_v(N)
    return DiskPolynomial(N, rng.normal(size=J) + 1j * rng.normal(size=J))


def _random_points(rng, k):
    return np.sqrt(rng.uniform(0, 1, k)), rng.uniform(0, 2 * np.pi, k)


def orthonormality(max_n, rng, fault):
    q = DiskQuadrature(max_n)
    Z = zernike_matrix(q.r, q.phi, N=max_n)
    if fault:
        Z[:, -1] *= 1 + 1e-6
    return float(np.max(np.abs(q.gram(Z) - np.eye(Z.shape[1])))), 1e-10


def reproducing(max_n, rng, fault):
    err = 0.0
    for N in range(2, max_n + 1):
        for _ in range(20):
            p = _random_poly(rng, N)
            rho, th = _random_points(rng, 1)
            K = kernel_build(N, (rho[0], th[0])).poly
            if fault:
                K = DiskPolynomial(N, K.coeffs + 1e-6)
            err = max(err, abs(inner_product(p, K) - eval_poly(p, rho[0], th[0])))
    return err, 1e-10


def christoffel_darboux(max_n, rng, fault):
    err = 0.0
    for N in range(2, max(max_n, 2) + 1):
        rho, th = _random_points(rng, 50)
        r, ph = _random_points(rng, 50)
        keep = np.abs(r**2 - rho**2) >= 1e-3
        for a, b, x, y in zip(rho[keep], th[keep], r[keep], ph[keep]):
            direct = kernel_eval_direct(N, (a, b), x, y)
            cd = kernel_eval_cd(N, (a, b), x, y)
            if fault:
                cd *= 1 + 1e-6
            scale = np.sqrt(kernel_eval_direct(N, (a, b), a, b) * kernel_eval_direct(N, (x, y), x, y))
            err = max(err, abs(cd - direct) / scale)
    return err, 1e-8


def duality(max_n, rng, fault):
    err = 0.0
    for N in sorted({min(3, max_n), min(5, max_n), max_n}):
        basis = scaling_build(N)
        L = lagrange_dual(basis)
        C = L.coeffs
        if fault:
            C = C + 1e-6
        # <phi_j, l_k> = sum_i phi_j[i] conj(l_k[i])
        M = basis.coeffs @ C.conj().T
        err = max(err, float(np.max(np.abs(M - np.eye(M.shape[0])))))
    for N in range(1, min(max_n, 4) + 1):
        start, stop = block_range(N)
        basis = wavelet_build(N, approximate_fekete(regular_points(top_degree(N)), start, stop))
        dual = dual_build(basis)
        f = rng.normal(size=stop - start) + 1j * rng.normal(size=stop - start)
        back = dual.reconstruct(wavelet_coefficients(f, basis))
        if fault:
            back = back + 1e-6
        err = max(err, float(np.max(np.abs(back - f))))
    return err, 1e-8


def round_trip(max_n, rng, fault):
    N = 1
    while 2 * N <= max_n:
        N *= 2
    ladder = MraLadder.build(N)
    bases = build_level_bases(ladder)
    err = 0.0
    for _ in range(5):
        f = _random_poly(rng, N)
        back = reconstruct(decompose(f, ladder, bases)).coeffs
        if fault:
            back = back + 1e-6
        err = max(err, float(np.max(np.abs(back - f.coeffs))))
    return err, 1e-8


SUITES = {
    "orthonormality": orthonormality,
    "reproducing": reproducing,
    "christoffel_darboux": christoffel_darboux,
    "duality": duality,
    "round_trip": round_trip,
}


def run_suites(max_n: int = 8, seed: int = 0, fault: bool = False) -> dict:
    """Run every suite; ``fault`` perturbs a coefficient to prove the checks bite."""
    if max_n < 1:
        raise ValueError("max degree must be at least 1")
    report = {"max_degree": max_n, "seed": seed, "suites": {}}
    for name, suite in SUITES.items():
        rng = np.random.default_rng([seed, len(name)])
        err, tol = suite(max_n, rng, fault)
        report["suites"][name] = {
            "max_error": err,
            "tolerance": tol,
            "passed": bool(err <= tol),
        }
    report["passed"] = all(s["passed"] for s in report["suites"].values())
    return report
