import math

import numpy as np
import pytest

from zernlets import (
    DiskSamples,
    IllConditionedError,
    MraLadder,
    best_fit_sphere,
    block_range,
    complex_to_real_basis,
    design_matrix,
    dim_v,
    eval_poly,
    export_samples,
    fit_difference,
    hierarchical_discrepancy,
    index_pack,
    ingest,
    least_squares_fit,
    project_fit,
    reconstruct,
    reconstruction_residuals,
    synth_surface,
    wavelet_analysis,
    write_coefficients_csv,
    zernike_real_matrix,
)
from zernlets.fitting import polar_grid

from conftest import random_disk_points, random_poly


def planted(rng, N, D=600, noise=0.0):
    p = random_poly(rng, N, real=True)
    r, th = random_disk_points(rng, D)
    z = eval_poly(p, r, th).real + noise * rng.normal(size=D)
    return p, DiskSamples(r, th, z)


class TestIngest:
    def test_cartesian(self, tmp_path):
        path = tmp_path / "s.csv"
        path.write_text("x,y,z\n0.5,0,1\n0,-0.5,2\n-0.3,0.4,3\n")
        s = ingest(path)
        np.testing.assert_allclose(s.r, [0.5, 0.5, 0.5])
        np.testing.assert_allclose(s.theta, [0, 1.5 * np.pi, np.arctan2(0.4, -0.3)])
        assert np.all((s.theta >= 0) & (s.theta < 2 * np.pi))

    def test_empty(self, tmp_path):
        path = tmp_path / "e.csv"
        path.write_text("")
        with pytest.raises(ValueError):
            ingest(path)
        path.write_text("x,y,z\n")
        with pytest.raises(ValueError):
            ingest(path)

    @pytest.mark.parametrize("body", ["x,y,z\n0.1,0.2\n", "x,y,z\n0.1,abc,1\n", "a,b,c\n1,2,3\n"])
    def test_malformed(self, tmp_path, body):
        path = tmp_path / "m.csv"
        path.write_text(body)
        with pytest.raises(ValueError):
            ingest(path)

    def test_radius_over_one(self, tmp_path):
        path = tmp_path / "big.csv"
        path.write_text("x,y,z\n2,0,1\n1,0,1\n")
        with pytest.raises(ValueError):
            ingest(path)
        s = ingest(path, normalize=True)
        assert s.aperture == 2 and s.r.max() == 1

    @pytest.mark.parametrize("cartesian", [False, True])
    def test_roundtrip(self, tmp_path, cartesian):
        s = synth_surface("keratoconus", noise=1e-3, seed=3, D=340)
        path = tmp_path / "rt.csv"
        export_samples(path, s, cartesian=cartesian)
        back = ingest(path, normalize=cartesian)
        np.testing.assert_allclose(back.r, s.r, atol=1e-15)
        np.testing.assert_allclose(back.z, s.z, atol=1e-15)
        np.testing.assert_allclose(np.cos(back.theta), np.cos(s.theta), atol=1e-15)
        if cartesian:
            assert back.aperture == pytest.approx(s.aperture)

    def test_clamps(self):
        s = DiskSamples(np.array([1 + 1e-13]), np.array([0.0]), np.array([1.0]))
        assert s.r[0] == 1.0
        with pytest.raises(ValueError):
            DiskSamples(np.array([1.1]), np.array([0.0]), np.array([1.0]))


class TestDesign:
    def test_shape(self):
        s = synth_surface("astigmatism")
        B = design_matrix(s, 8)
        assert B.shape == (10200, 45)
        np.testing.assert_allclose(B[:, 0], math.sqrt(1 / math.pi))

    def test_underdetermined(self, rng):
        r, th = random_disk_points(rng, 10)
        with pytest.raises(ValueError):
            design_matrix(DiskSamples(r, th, np.zeros(10)), 4)

    def test_complex(self, rng):
        r, th = random_disk_points(rng, 30)
        assert design_matrix(DiskSamples(r, th, np.zeros(30)), 3, kind="complex").dtype == complex


class TestLeastSquares:
    def test_planted(self, rng):
        for N in (2, 5, 8):
            p, s = planted(rng, N)
            fit = least_squares_fit(s, N)
            assert np.max(np.abs(fit.polynomial.coeffs - p.coeffs)) <= 1e-8
            assert fit.residual_l2 <= 1e-10

    def test_constant(self, rng):
        r, th = random_disk_points(rng, 100)
        fit = least_squares_fit(DiskSamples(r, th, np.ones(100)), 4)
        assert fit.coeffs[0] == pytest.approx(math.sqrt(math.pi), abs=1e-10)
        assert np.max(np.abs(fit.coeffs[1:])) <= 1e-10

    def test_residual_orthogonal(self, rng):
        _, s = planted(rng, 10, noise=0.05)
        fit = least_squares_fit(s, 6)
        B = design_matrix(s, 6)
        assert np.linalg.norm(B.T @ (s.z - fit.fitted)) <= 1e-8 * np.linalg.norm(s.z)

    def test_nested_monotone(self, rng):
        _, s = planted(rng, 12, noise=0.01)
        res = [least_squares_fit(s, N).residual_l2 for N in (2, 4, 8)]
        assert res[0] >= res[1] >= res[2]

    def test_norms(self, rng):
        _, s = planted(rng, 6, noise=0.1)
        fit = least_squares_fit(s, 3)
        assert fit.residual_rms == pytest.approx(fit.residual_l2 / math.sqrt(len(s)))

    def test_rank_deficient(self):
        # all samples on one ring: r^2 and the constant are indistinguishable
        th = np.linspace(0, 2 * np.pi, 50, endpoint=False)
        s = DiskSamples(np.full(50, 0.7), th, np.cos(th))
        with pytest.raises(IllConditionedError) as info:
            least_squares_fit(s, 2)
        assert info.value.condition > 1e12

    def test_real_basis_matches_complex(self, rng):
        _, s = planted(rng, 5)
        fit = least_squares_fit(s, 5)
        np.testing.assert_allclose(complex_to_real_basis(fit.polynomial), fit.coeffs, atol=1e-12)


class TestHierarchy:
    def test_planted_low(self, rng):
        p, s = planted(rng, 4)
        diff = fit_difference(least_squares_fit(s, 8), least_squares_fit(s, 4))
        assert diff.norm() <= 1e-8

    def test_planted_w4(self, rng):
        start, stop = block_range(4)
        assert stop - start == 30
        p = random_poly(rng, 8, real=True)
        c = np.zeros(45, dtype=complex)
        c[start:stop] = p.coeffs[start:stop]
        a = complex_to_real_basis(p)[start:stop]

        # scattered samples: only the projection mode isolates the block
        r, th = random_disk_points(rng, 800)
        s = DiskSamples(r, th, zernike_real_matrix(r, th, 8)[:, start:stop] @ a)
        high = least_squares_fit(s, 8)
        np.testing.assert_allclose(fit_difference(high, project_fit(high, 4)).coeffs, c, atol=1e-8)

        # the independent coarse fit leaks into V_4 on scattered samples
        leak = fit_difference(high, least_squares_fit(s, 4))
        assert np.max(np.abs(leak.coeffs[: dim_v(4)])) > 1e-3

    def test_mismatched(self, rng):
        _, s1 = planted(rng, 4)
        _, s2 = planted(rng, 4)
        with pytest.raises(ValueError):
            fit_difference(least_squares_fit(s1, 4), least_squares_fit(s2, 2))

    def test_projection_mode(self, rng):
        _, s = planted(rng, 10, noise=0.01)
        high = least_squares_fit(s, 8)
        diff = fit_difference(high, project_fit(high, 4))
        assert np.all(diff.coeffs[: dim_v(4)] == 0)
        assert hierarchical_discrepancy(high) > 0


class TestWaveletAnalysis:
    @pytest.mark.parametrize("kind", ["normal", "astigmatism", "keratoconus"])
    def test_residuals_agree(self, kind):
        s = synth_surface(kind, noise=1e-3, seed=1)
        fit = least_squares_fit(s, 8)
        d = wavelet_analysis(fit)
        res = reconstruction_residuals(fit, d)
        assert d.count == 45
        assert abs(res["zernike_l2"] - res["wavelet_l2"]) <= 1e-8
        assert abs(res["zernike_rms"] - res["wavelet_rms"]) <= 1e-8
        assert res["max_pointwise_gap"] <= 1e-7

    def test_count_16(self, rng):
        _, s = planted(rng, 16, D=900)
        fit = least_squares_fit(s, 16)
        d = wavelet_analysis(fit)
        assert d.count == 153
        np.testing.assert_allclose(reconstruct(d).coeffs, fit.polynomial.coeffs, atol=1e-8)


class TestSphere:
    def test_exact(self):
        s = synth_surface("normal")
        sph = best_fit_sphere(s)
        assert np.max(np.abs(sph.difference)) <= 1e-9
        assert sph.radius == pytest.approx(7.8, abs=1e-9)

    def test_bump_peak(self):
        s = synth_surface("keratoconus", params={"bump_height": 0.01})
        sph = best_fit_sphere(s)
        k = int(np.argmax(sph.difference))
        dist = math.hypot(s.x[k] - 0.4 * math.cos(5.5), s.y[k] - 0.4 * math.sin(5.5))
        assert dist < 0.1

    def test_translation(self):
        s = synth_surface("astigmatism")
        shifted = DiskSamples(s.r, s.theta, s.z + 0.5, s.aperture)
        a, b = best_fit_sphere(s), best_fit_sphere(shifted)
        assert b.center[2] - a.center[2] == pytest.approx(0.5, abs=1e-9)
        assert b.radius == pytest.approx(a.radius, abs=1e-9)

    def test_coplanar(self, rng):
        r, th = random_disk_points(rng, 20)
        with pytest.raises(ValueError):
            best_fit_sphere(DiskSamples(r, th, np.zeros(20)))

    def test_too_few(self):
        with pytest.raises(ValueError):
            best_fit_sphere(DiskSamples(np.array([0.1, 0.5, 0.9]), np.array([0, 1, 2.0]), np.zeros(3)))


class TestSynth:
    def test_astigmatism_coefficient(self):
        a = 0.02
        s0 = synth_surface("normal", params={"curvature_radius": 7.8})
        s1 = synth_surface("astigmatism", params={"astig_amplitude": a})
        c0 = least_squares_fit(s0, 2).polynomial.coeffs[index_pack(2, 2)]
        c1 = least_squares_fit(s1, 2).polynomial.coeffs[index_pack(2, 2)]
        # a r^2 cos 2 theta = a sqrt(pi/3) Re Z_2^2, so c_{2,2} = a sqrt(pi/3) / 2
        assert abs((c1 - c0) - a * math.sqrt(math.pi / 3) / 2) <= 1e-8

    def test_deterministic(self):
        a = synth_surface("keratoconus", noise=1e-3, seed=5)
        b = synth_surface("keratoconus", noise=1e-3, seed=5)
        np.testing.assert_array_equal(a.z, b.z)
        assert len(a) == 10200

    def test_random_sampling(self):
        s = synth_surface("normal", D=500, sampling="random", seed=2)
        assert len(s) == 500 and s.r.max() <= 1

    @pytest.mark.parametrize(
        "kw",
        [
            {"kind": "flat"},
            {"noise": -1.0},
            {"params": {"aperture": 9.0}},
            {"params": {"bump_width": 0.0}},
            {"params": {"nope": 1.0}},
            {"D": 1000},
        ],
    )
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            synth_surface(**kw)


def test_coefficients_csv(tmp_path):
    s = synth_surface("astigmatism")
    fit = least_squares_fit(s, 8)
    path = tmp_path / "c.csv"
    write_coefficients_csv(path, fit)
    lines = path.read_text().splitlines()
    assert lines[0] == "j,n,m,A,B"
    assert len(lines) == 1 + 25  # m >= 0 terms with n <= 8


def test_polar_grid():
    r, th = polar_grid(10)
    assert r.size == 1 + 10 * 40 and r.max() == 1.0
