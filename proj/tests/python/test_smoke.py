import math

import numpy as np
import pytest

import fbdiff


def test_flux_point_values():
    assert fbdiff.potential_psi(0.0) == 0.0
    assert fbdiff.potential_psi(1.0, p=2.0, delta=0.1) == pytest.approx(
        0.5 * math.log(2.0) + 0.05
    )
    qx, qy = fbdiff.flux_q(1.0, 0.0, p=2.0, delta=0.1)
    assert qx == pytest.approx(0.6)
    assert qy == 0.0
    assert fbdiff.minmod(-2.0, 3.0) == 0.0


def test_minimum_slope_threshold():
    slope, argmin = fbdiff.scalar_flux_min_slope(p=2.0, delta=0.2, s_max=10.0, n=100001)
    assert slope == pytest.approx(0.075, abs=1e-6)
    assert argmin == pytest.approx(math.sqrt(3.0), abs=1e-3)
    slope_bw, _ = fbdiff.scalar_flux_min_slope(p=2.0, delta=0.1)
    assert slope_bw < 0.0


def test_envelope_surface():
    env = fbdiff.build_envelope(p=2.0, delta=0.05, s_max=50.0, n=5001)
    assert len(env.affine_segments) == 1
    s = np.asarray(env.s)
    q = np.array([env.q_star(x) for x in s[:: 50]])
    assert (np.diff(q) >= -1e-12).all()
    assert env.q_star(0.0) == 0.0

    report = fbdiff.verify_structure(p=2.0, delta=0.1, n=5001)
    assert report["holds"]
    assert 0.0 < report["gamma1"] <= report["gamma2"]


def test_gamma_noise_reproducible():
    a = fbdiff.gamma_noise_field(64, 64, looks=4, seed=7)
    b = fbdiff.gamma_noise_field(64, 64, looks=4, seed=7)
    assert (a == b).all()
    big = fbdiff.gamma_noise_field(500, 500, looks=4, seed=1)
    assert big.mean() == pytest.approx(1.0, abs=0.02)
    assert big.var() == pytest.approx(0.25, rel=0.1)


def test_denoise_improves_psnr():
    clean = fbdiff.make_synthetic("shapes", 64, 64, [30.0, 100.0, 180.0, 240.0])
    eta = fbdiff.gamma_noise_field(64, 64, looks=4, seed=3)
    noisy = fbdiff.apply_multiplicative(clean, eta)
    out, history = fbdiff.denoise(noisy, reference=clean, stop="max-psnr")
    assert fbdiff.psnr(out, clean) >= fbdiff.psnr(noisy, clean) + 2.0
    assert fbdiff.mae(out, clean) <= 0.8 * fbdiff.mae(noisy, clean)
    assert history.shape[1] == 6
    assert out.shape == (64, 64)


def test_indicator_range():
    clean = fbdiff.make_synthetic("step", 32, 32, [50.0, 200.0])
    alpha = fbdiff.gray_indicator(clean, sigma=1.0, beta=1.0)
    assert alpha.max() == 1.0
    assert alpha.min() > 0.0


def test_rothe_fixed_point_1d():
    clean = np.full(64, 80.0)
    clean[32:] = 160.0
    eta = fbdiff.gamma_noise_field(1, 64, looks=4, seed=5)
    noisy = fbdiff.apply_multiplicative(clean.reshape(1, -1), eta)
    result = fbdiff.rothe_fixed_point(noisy[0], p=2.0, delta=0.1, m=8)
    assert result["converged"]
    assert result["iterations"] <= 50
    assert result["final"].shape == (1, 64)


def test_pgm_roundtrip(tmp_path):
    img = fbdiff.make_synthetic("ramp", 16, 16, [10.0, 250.0])
    path = str(tmp_path / "ramp.pgm")
    fbdiff.write_pgm(img, path)
    back = fbdiff.read_pgm(path)
    assert np.abs(back - np.rint(img)).max() == 0.0
