import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zernlets import (
    DiskPolynomial,
    DiskQuadrature,
    RealCoeffs,
    ZernikeIndex,
    complex_to_real_basis,
    complex_to_real_coeffs,
    dim_v,
    eval_poly,
    index_pack,
    index_unpack,
    indices,
    inner_product,
    radial_eval,
    real_basis_to_complex,
    real_to_complex_coeffs,
    recurrence_coeffs,
    three_term_apply,
    to_polar,
    zernike_eval,
    zernike_matrix,
    zernike_real_eval,
    zernike_real_matrix,
)

from conftest import brute_radial, brute_zernike, random_disk_points, random_poly


class TestRadial:
    @pytest.mark.parametrize(
        "n, m, r, expected",
        [(0, 0, 0.7, 1.0), (2, 0, 0.5, -0.5), (3, 1, 0.5, -0.625), (2, 2, 0.5, 0.25), (4, 0, 0.0, 1.0)],
    )
    def test_values(self, n, m, r, expected):
        assert radial_eval(n, m, r) == pytest.approx(expected, abs=1e-14)

    def test_one_at_boundary(self):
        for n in range(13):
            for m in range(n % 2, n + 1, 2):
                assert abs(radial_eval(n, m, 1.0) - 1.0) <= 1e-9

    @pytest.mark.parametrize("n", [5, 10, 16, 20])
    def test_matches_factorial_sum(self, n):
        r = np.linspace(0, 1, 41)
        for m in range(n % 2, n + 1, 2):
            np.testing.assert_allclose(radial_eval(n, m, r), brute_radial(n, m, r), atol=1e-9)

    def test_high_degree_bounded(self):
        # |R| <= 1 on [0, 1]; exact integer coefficients keep n > 20 sane
        r = np.linspace(0, 1, 201)
        for n in (30, 40):
            assert np.max(np.abs(radial_eval(n, 0, r))) <= 1 + 1e-6

    @pytest.mark.parametrize("r", [-0.1, 1.0 + 1e-9])
    def test_domain_error(self, r):
        with pytest.raises(ValueError):
            radial_eval(2, 0, r)

    def test_boundary_tolerance(self):
        assert radial_eval(2, 0, 1 + 1e-13) == pytest.approx(1.0)


class TestIndex:
    @pytest.mark.parametrize("nm, j", [((0, 0), 0), ((2, -2), 3), ((2, 0), 4), ((2, 2), 5), ((8, 8), 44)])
    def test_pack(self, nm, j):
        assert index_pack(*nm) == j
        assert index_unpack(j) == nm

    def test_roundtrip(self):
        for j in range(5001):
            assert index_pack(*index_unpack(j)) == j

    @pytest.mark.parametrize("nm", [(1, 0), (2, 3), (-1, 1), (3, -2)])
    def test_invalid(self, nm):
        with pytest.raises(ValueError):
            index_pack(*nm)
        with pytest.raises(ValueError):
            ZernikeIndex(*nm)

    def test_count(self):
        for N in range(41):
            pairs = [(n, m) for n in range(N + 1) for m in range(-n, n + 1) if (n - m) % 2 == 0]
            assert len(pairs) == dim_v(N) == (N + 1) * (N + 2) // 2
            assert indices(N) == sorted(pairs, key=lambda t: index_pack(*t))

    def test_largest_in_v8(self):
        assert max(index_pack(n, m) for n, m in indices(8)) == 44
        assert dim_v(8) == 45

    def test_dataclass(self):
        idx = ZernikeIndex.from_j(7)
        assert (idx.n, idx.m, idx.j) == (3, -1, 7)


class TestEval:
    def test_constant(self):
        assert zernike_eval((0, 0), 0.3, 1.2) == pytest.approx(math.sqrt(1 / math.pi))
        assert math.sqrt(1 / math.pi) == pytest.approx(0.5641896, abs=1e-7)

    def test_tilt(self):
        assert zernike_eval((1, 1), 1.0, 0.0) == pytest.approx(math.sqrt(2 / math.pi))

    def test_negative_m_is_conjugate(self, rng):
        r, phi = random_disk_points(rng, 20)
        np.testing.assert_allclose(zernike_eval((2, -2), r, phi), np.conj(zernike_eval((2, 2), r, phi)))

    def test_brute_force(self, rng):
        r, phi = random_disk_points(rng, 30)
        Z = zernike_matrix(r, phi, N=9)
        for j in range(dim_v(9)):
            n, m = index_unpack(j)
            np.testing.assert_allclose(Z[:, j], brute_zernike(n, m, r, phi), atol=1e-11)

    def test_real(self):
        assert zernike_real_eval((0, 0), 0.2, 0.1) == pytest.approx(math.sqrt(1 / math.pi))
        assert zernike_real_eval((1, -1), 0.6, math.pi / 2) == pytest.approx(math.sqrt(4 / math.pi) * 0.6)

    def test_matrix_slices(self, rng):
        r, phi = random_disk_points(rng, 5)
        full = zernike_matrix(r, phi, N=6)
        np.testing.assert_array_equal(zernike_matrix(r, phi, start=10, stop=28), full[:, 10:28])

    def test_to_polar(self):
        r, phi = to_polar(np.array([1.0, 0.0, -1.0, 0.0]), np.array([0.0, 1.0, 0.0, -1.0]))
        np.testing.assert_allclose(r, 1.0)
        np.testing.assert_allclose(phi, [0, np.pi / 2, np.pi, 3 * np.pi / 2])
        assert np.all((phi >= 0) & (phi < 2 * np.pi))


class TestQuadrature:
    def test_area(self):
        for N in (0, 3, 8):
            assert DiskQuadrature(N).weights.sum() == pytest.approx(math.pi, abs=1e-13)

    @pytest.mark.parametrize("N", [4, 8, 12])
    def test_orthonormal(self, N):
        q = DiskQuadrature(N)
        G = q.gram(zernike_matrix(q.r, q.phi, N=N))
        assert np.max(np.abs(G - np.eye(dim_v(N)))) <= 1e-10

    def test_real_orthonormal(self):
        q = DiskQuadrature(8)
        G = q.gram(zernike_real_matrix(q.r, q.phi, 8))
        assert np.max(np.abs(G - np.eye(dim_v(8)))) <= 1e-10

    def test_too_few_nodes_is_not_exact(self):
        q = DiskQuadrature(8, radial_nodes=4)
        G = q.gram(zernike_matrix(q.r, q.phi, N=8))
        assert np.max(np.abs(G - np.eye(dim_v(8)))) > 1e-6

    def test_project(self, rng):
        p = random_poly(rng, 5)
        q = DiskQuadrature(6)
        back = q.project(eval_poly(p, q.r, q.phi), 5)
        np.testing.assert_allclose(back.coeffs, p.coeffs, atol=1e-12)


class TestPolynomial:
    def test_constant_one(self):
        p = DiskPolynomial(0, [math.sqrt(math.pi)])
        np.testing.assert_allclose(eval_poly(p, np.array([0.0, 0.5, 1.0]), np.array([0.0, 2.0, 4.0])), 1.0)

    def test_basis_vector(self):
        p = DiskPolynomial.basis(4)
        assert eval_poly(p, 0.5, 1.0) == pytest.approx(zernike_eval((2, 0), 0.5, 1.0))

    def test_eval_brute(self, rng):
        p = random_poly(rng, 5)
        r, phi = random_disk_points(rng, 50)
        brute = sum(p.coeffs[j] * brute_zernike(*index_unpack(j), r, phi) for j in range(dim_v(5)))
        np.testing.assert_allclose(eval_poly(p, r, phi), brute, atol=1e-12)

    def test_scalar_in_scalar_out(self):
        assert np.isscalar(eval_poly(DiskPolynomial.basis(0), 0.1, 0.2))

    def test_length_invariant(self):
        with pytest.raises(ValueError):
            DiskPolynomial(2, np.zeros(5))

    def test_immutable(self):
        p = DiskPolynomial.basis(1)
        with pytest.raises(ValueError):
            p.coeffs[0] = 1

    def test_arithmetic(self, rng):
        p, q = random_poly(rng, 2), random_poly(rng, 4)
        s = p + q
        assert s.degree == 4
        np.testing.assert_allclose((s - q).coeffs[:6], p.coeffs)
        np.testing.assert_allclose((p * 2).coeffs, 2 * p.coeffs)

    def test_inner_product_quadrature(self, rng):
        q = DiskQuadrature(6)
        for _ in range(5):
            a, b = random_poly(rng, 6), random_poly(rng, 6)
            quad = q.inner(eval_poly(a, q.r, q.phi), eval_poly(b, q.r, q.phi))
            assert abs(inner_product(a, b) - quad) <= 1e-10

    def test_parseval(self, rng):
        p = random_poly(rng, 4)
        val = inner_product(p, p)
        assert val.real >= 0 and abs(val.imag) < 1e-14
        assert p.norm() ** 2 == pytest.approx(np.sum(np.abs(p.coeffs) ** 2))

    def test_orthonormal_basis(self):
        for j in range(6):
            for k in range(6):
                assert inner_product(DiskPolynomial.basis(j, 2), DiskPolynomial.basis(k, 2)) == (j == k)


class TestRecurrence:
    def test_a2(self):
        assert recurrence_coeffs(2, 0)[0] == pytest.approx(0.5)

    def test_b2(self):
        assert recurrence_coeffs(2, 0)[1] == pytest.approx(1 / math.sqrt(15))
        assert 1 / math.sqrt(15) == pytest.approx(0.2581989, abs=1e-7)

    def test_a0(self):
        # 0/0 term read as 0
        assert recurrence_coeffs(0, 0)[0] == pytest.approx(0.5)

    def test_identity(self, rng):
        r, phi = random_disk_points(rng, 100)
        err = 0.0
        for n in range(9):
            for m in range(-n, n + 1, 2):
                lhs = r**2 * zernike_eval((n, m), r, phi)
                err = max(err, np.max(np.abs(lhs - three_term_apply(m, n, r, phi))))
        assert err <= 1e-10


class TestRealCoeffs:
    def test_tilt(self):
        c = np.zeros(3, dtype=complex)
        c[index_pack(1, 1)] = c[index_pack(1, -1)] = 0.5
        rc = complex_to_real_coeffs(c)
        assert rc.A[(1, 1)] == pytest.approx(1.0) and rc.B[(1, 1)] == pytest.approx(0.0)

    def test_m0_real(self):
        rc = RealCoeffs(2, {(0, 0): 1.5, (1, 1): 0.0, (2, 0): -0.5, (2, 2): 0.0}, {(2, 0): 3.0})
        p = real_to_complex_coeffs(rc)
        assert p.coeffs[index_pack(2, 0)].imag == 0.0

    def test_rejects_nonreal(self):
        c = np.zeros(3, dtype=complex)
        c[index_pack(1, 1)] = 1.0
        with pytest.raises(ValueError):
            complex_to_real_coeffs(c)

    @given(st.integers(0, 8), st.integers(0, 2**31))
    @settings(max_examples=40, deadline=None)
    def test_roundtrip(self, N, seed):
        p = random_poly(np.random.default_rng(seed), N, real=True)
        back = real_to_complex_coeffs(complex_to_real_coeffs(p))
        assert np.max(np.abs(back.coeffs - p.coeffs)) <= 1e-14

    def test_real_function_values(self, rng):
        p = random_poly(rng, 5, real=True)
        r, phi = random_disk_points(rng, 20)
        assert np.max(np.abs(np.imag(eval_poly(p, r, phi)))) < 1e-12
        rc = complex_to_real_coeffs(p)
        # A/B expansion with the complex-basis normalisation
        val = 0.0
        for (n, m), a in rc.A.items():
            g = math.sqrt((n + 1) / math.pi) * radial_eval(n, m, r)
            val = val + g * (a * np.cos(m * phi) + rc.B.get((n, m), 0.0) * np.sin(m * phi) * (m > 0))
        np.testing.assert_allclose(val, eval_poly(p, r, phi).real, atol=1e-12)

    def test_real_basis_roundtrip(self, rng):
        a = rng.normal(size=dim_v(6))
        p = real_basis_to_complex(a)
        np.testing.assert_allclose(complex_to_real_basis(p), a, atol=1e-14)
        r, phi = random_disk_points(rng, 30)
        np.testing.assert_allclose(zernike_real_matrix(r, phi, 6) @ a, eval_poly(p, r, phi).real, atol=1e-12)
