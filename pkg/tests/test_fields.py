"""Synthetic field realizations: derivatives, covariances, exact models."""
import math

import numpy as np
import pytest
from scipy.special import eval_legendre, j0

from critfield.errors import ConfigError, ParameterError
from critfield.fields import (PlanarWaveField, SphericalHarmonicField,
                              SynthesisSpec, sh_basis, synthesize,
                              tangent_frames)
from critfield.sphere import model_from_legendre


def unit(v):
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def test_planar_gradient_matches_finite_differences():
    f = synthesize(SynthesisSpec.gaussian_covariance(1.0, n_waves=80), rng=0)
    pts = np.array([[0.3, -1.2], [2.0, 0.4], [-0.7, 0.9]])
    g = f.gradient(pts)
    h = 1e-6
    for d in range(2):
        e = np.zeros(2)
        e[d] = h
        num = (f.value(pts + e) - f.value(pts - e)) / (2 * h)
        assert np.allclose(g[:, d], num, atol=1e-8, rtol=1e-6)


def test_planar_hessian_matches_finite_differences():
    f = synthesize(SynthesisSpec.plane_wave(2.0, n_waves=80), rng=1)
    pts = np.array([[0.1, 0.2], [-1.5, 0.8]])
    H = f.hessian(pts)
    assert np.allclose(H, np.swapaxes(H, -1, -2), atol=1e-14)
    h = 1e-6
    for d in range(2):
        e = np.zeros(2)
        e[d] = h
        num = (f.gradient(pts + e) - f.gradient(pts - e)) / (2 * h)
        assert np.allclose(H[:, :, d], num, atol=1e-6, rtol=1e-5)


def test_plane_wave_solves_helmholtz():
    r = 3.0
    f = synthesize(SynthesisSpec.plane_wave(r, n_waves=200), rng=7)
    pts = np.random.default_rng(8).normal(size=(20, 2))
    lap = np.trace(f.hessian(pts), axis1=-2, axis2=-1)
    assert np.allclose(lap, -r * r * f.value(pts), rtol=1e-10, atol=1e-12)


@pytest.mark.parametrize("spec,cov", [
    (SynthesisSpec.gaussian_covariance(0.8, n_waves=6000),
     lambda h: np.exp(-h * h / (2 * 0.64))),
    (SynthesisSpec.plane_wave(2.5, n_waves=6000),
     lambda h: j0(2.5 * h)),
    (SynthesisSpec.custom_spectral([1.0, 3.0], [1.0, 1.0], n_waves=6000),
     lambda h: 0.5 * j0(1.0 * h) + 0.5 * j0(3.0 * h)),
])
def test_empirical_covariance(spec, cov):
    # (1/K) sum_k cos(<w_k, h>) estimates cov(|h|) with O(1/sqrt(K)) error
    f = synthesize(spec, rng=11)
    for h in ([0.5, 0.0], [1.0, 1.0], [0.0, 2.5]):
        emp = np.cos(f.omegas @ np.asarray(h)).mean()
        assert emp == pytest.approx(cov(np.linalg.norm(h)),
                                    abs=5.0 / math.sqrt(spec.n_waves))


def test_models_are_exact():
    ell = 0.7
    mg = synthesize(SynthesisSpec.gaussian_covariance(ell, n_waves=4), rng=0).model
    assert mg.kappa2 == pytest.approx(1.0, rel=1e-13)
    assert mg.eta2 == pytest.approx(2 * ell * ell, rel=1e-13)

    r = 3.0
    mp = synthesize(SynthesisSpec.plane_wave(r, n_waves=4), rng=0).model
    assert mp.boundary                         # kappa^2 = 2 exactly
    assert mp.eta2 == pytest.approx(8.0 / (r * r), rel=1e-13)

    mc = synthesize(SynthesisSpec.custom_spectral(
        [1.0, 2.0], [1.0, 3.0], n_waves=4), rng=0).model
    # normalized weights (1/4, 3/4)
    assert mc.rho1 == pytest.approx(-(0.25 * 1 + 0.75 * 4) / 4.0, rel=1e-13)
    assert mc.rho2 == pytest.approx((0.25 * 1 + 0.75 * 16) / 32.0, rel=1e-13)
    assert not mc.boundary

    ms = synthesize(SynthesisSpec.spherical_harmonic(3), rng=0).model
    ref = model_from_legendre(3)
    assert ms.c1 == pytest.approx(ref.c1) and ms.c2 == pytest.approx(ref.c2)


def test_synthesis_reproducible():
    spec = SynthesisSpec.plane_wave(2.0, n_waves=50)
    a = synthesize(spec, rng=42)
    b = synthesize(spec, rng=42)
    assert np.array_equal(a.omegas, b.omegas)
    assert np.array_equal(a.phases, b.phases)
    s = SynthesisSpec.spherical_harmonic(4)
    fa = synthesize(s, rng=42)
    fb = synthesize(s, rng=42)
    assert np.array_equal(fa.coeffs, fb.coeffs)


def test_sh_basis_addition_theorem():
    rng = np.random.default_rng(3)
    for l in (2, 3, 7):
        p = unit(rng.normal(size=(5, 3)))
        q = unit(rng.normal(size=(5, 3)))
        yp = sh_basis(l, p)
        yq = sh_basis(l, q)
        lhs = (yp * yq).sum(axis=0)
        rhs = (2 * l + 1) / (4 * math.pi) * eval_legendre(l, (p * q).sum(axis=-1))
        assert np.allclose(lhs, rhs, atol=1e-12)
        # p = q specializes to the constant (2l+1)/(4 pi)
        assert np.allclose((yp * yp).sum(axis=0), (2 * l + 1) / (4 * math.pi),
                           atol=1e-12)


def test_ambient_value_matches_basis_expansion():
    rng = np.random.default_rng(5)
    l = 4
    f = synthesize(SynthesisSpec.spherical_harmonic(l), rng=9)
    pts = unit(rng.normal(size=(12, 3)))
    direct = f.coeffs @ sh_basis(l, pts)
    assert np.allclose(f.value(pts), direct, atol=1e-12)


def test_tangent_gradient_matches_finite_differences():
    f = synthesize(SynthesisSpec.spherical_harmonic(5), rng=13)
    rng = np.random.default_rng(14)
    pts = unit(rng.normal(size=(6, 3)))
    frames = tangent_frames(pts)
    grad = f.tangent_gradient(pts)
    assert np.allclose((grad * pts).sum(axis=-1), 0.0, atol=1e-12)
    h = 1e-6
    for a in range(2):
        v = frames[:, a, :]
        num = (f.value(unit(pts + h * v)) - f.value(unit(pts - h * v))) / (2 * h)
        assert np.allclose((grad * v).sum(axis=-1), num, atol=1e-7, rtol=1e-5)


def test_covariant_hessian_matches_geodesic_second_derivative():
    f = synthesize(SynthesisSpec.spherical_harmonic(4), rng=21)
    rng = np.random.default_rng(22)
    pts = unit(rng.normal(size=(5, 3)))
    frames = tangent_frames(pts)
    H = f.covariant_hessian(pts, frames)
    assert np.allclose(H, np.swapaxes(H, -1, -2), atol=1e-12)
    h = 1e-4

    def second_along(v):
        # geodesic through p with unit speed v
        plus = np.cos(h) * pts + np.sin(h) * v
        minus = np.cos(h) * pts - np.sin(h) * v
        return (f.value(plus) - 2 * f.value(pts) + f.value(minus)) / (h * h)

    for a in range(2):
        assert np.allclose(H[:, a, a], second_along(frames[:, a, :]),
                           atol=1e-5, rtol=1e-5)
    v = (frames[:, 0, :] + frames[:, 1, :]) / math.sqrt(2.0)
    mixed = second_along(v) - 0.5 * (H[:, 0, 0] + H[:, 1, 1])
    assert np.allclose(H[:, 0, 1], mixed, atol=1e-5)


def test_spherical_harmonic_is_laplace_eigenfunction():
    l = 6
    f = synthesize(SynthesisSpec.spherical_harmonic(l), rng=31)
    pts = unit(np.random.default_rng(32).normal(size=(10, 3)))
    frames = tangent_frames(pts)
    lap = np.trace(f.covariant_hessian(pts, frames), axis1=-2, axis2=-1)
    assert np.allclose(lap, -l * (l + 1) * f.value(pts), rtol=1e-9, atol=1e-10)


def test_tangent_frames_orthonormal():
    pts = unit(np.random.default_rng(41).normal(size=(30, 3)))
    fr = tangent_frames(pts)
    for a in range(2):
        assert np.allclose((fr[:, a, :] * pts).sum(axis=-1), 0.0, atol=1e-13)
        assert np.allclose(np.linalg.norm(fr[:, a, :], axis=-1), 1.0, atol=1e-13)
    assert np.allclose((fr[:, 0, :] * fr[:, 1, :]).sum(axis=-1), 0.0, atol=1e-13)
    # axis-aligned points are the degenerate-seed corner case
    axes = np.array([[1.0, 0, 0], [0, 1.0, 0], [0, 0, 1.0], [0, 0, -1.0]])
    fra = tangent_frames(axes)
    assert np.allclose(np.linalg.norm(fra, axis=-1), 1.0, atol=1e-13)


def test_spec_validation():
    with pytest.raises(ParameterError):
        SynthesisSpec.gaussian_covariance(0.0)
    with pytest.raises(ParameterError):
        SynthesisSpec.plane_wave(-1.0)
    with pytest.raises(ParameterError):
        SynthesisSpec.custom_spectral([], [])
    with pytest.raises(ParameterError):
        SynthesisSpec.custom_spectral([1.0, 2.0], [1.0])
    with pytest.raises(ParameterError):
        SynthesisSpec.custom_spectral([1.0, -2.0], [1.0, 1.0])
    with pytest.raises(ParameterError):
        SynthesisSpec.spherical_harmonic(1)
    with pytest.raises(ConfigError):
        synthesize(SynthesisSpec(kind="white-noise"), rng=0)
    # weights come out normalized
    s = SynthesisSpec.custom_spectral([1.0, 2.0], [2.0, 6.0])
    assert s.weights == (0.25, 0.75)
