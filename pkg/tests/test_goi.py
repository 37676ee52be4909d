"""Ensemble-level checks: constants, validation, sampling, expectations."""
import math

import numpy as np
import pytest

from critfield import (
    DegenerateEnsembleError,
    EigenvalueVector,
    GoiEnsemble,
    IndexedFunctional,
    MethodError,
    NumericConfig,
    ParameterError,
    goi_expectation,
    k_norm,
    ordered_eigenvalue_density,
    sample_goi,
    validate_ensemble,
)
from critfield.goi import nested_ordered_quadrature, worker_streams


def test_normalization_constants():
    assert k_norm(1) == pytest.approx(math.sqrt(2 * math.pi), rel=1e-14)
    assert k_norm(2) == pytest.approx(2 * math.sqrt(math.pi), rel=1e-14)
    # K_3 = 2^{3/2} Gamma(1/2) Gamma(1) Gamma(3/2) = sqrt(2) pi
    assert k_norm(3) == pytest.approx(math.sqrt(2) * math.pi, rel=1e-14)


def test_validate_ensemble_bounds():
    e = validate_ensemble(2, 0.0)
    assert not e.degenerate
    assert validate_ensemble(2, -0.5).degenerate
    assert validate_ensemble(3, 5.0).c == 5.0
    with pytest.raises(ParameterError) as exc:
        validate_ensemble(2, -0.6)
    assert "-1/N" in str(exc.value) or "-0.5" in str(exc.value)
    with pytest.raises(ParameterError):
        validate_ensemble(0, 0.0)


def test_eigenvalue_vector_order():
    v = EigenvalueVector([-1.0, 0.0, 2.5])
    assert len(v) == 3
    with pytest.raises(ParameterError):
        EigenvalueVector([1.0, 0.0])
    with pytest.raises(ParameterError):
        EigenvalueVector([[1.0, 2.0]])


def test_indexed_functional_evaluate():
    f = IndexedFunctional(index=1, shift=0.0)
    lam = np.array([[-2.0, 3.0],     # one below zero: counted
                    [1.0, 2.0],      # none below: masked out
                    [-1.0, -0.5]])   # two below: masked out
    vals = f.evaluate(lam)
    np.testing.assert_allclose(vals, [6.0, 0.0, 0.0])
    # shift moves the reference point
    g = IndexedFunctional(index=2, shift=1.0)
    np.testing.assert_allclose(g.evaluate(np.array([[-1.0, 0.5]])), [1.0])
    # trace cap gates on the eigenvalue mean
    h = IndexedFunctional(index=1, shift=0.0, trace_cap=0.0)
    np.testing.assert_allclose(h.evaluate(np.array([[-2.0, 3.0], [-2.0, 1.0]])),
                               [0.0, 2.0])
    assert h.mode == "abs-det-indicator-with-trace-cap"
    with pytest.raises(ParameterError):
        IndexedFunctional(index=-1)


@pytest.mark.parametrize("n,c", [(1, 0.0), (2, 0.0), (2, 0.3), (2, -0.45),
                                 (3, 0.5), (3, 2.5)])
def test_density_normalizes(n, c):
    val, err = nested_ordered_quadrature(n, c, lambda lam: 1.0,
                                         n_lower=0, split=None)
    assert val == pytest.approx(1.0, abs=5e-9)


def test_density_basic_properties():
    e = validate_ensemble(2, 0.3)
    assert ordered_eigenvalue_density(e, [1.0, -1.0]) == 0.0  # unordered
    # GOE reduction at c = 0: f(lam) = (lam2 - lam1) exp(-q/2) / K_2
    goe = validate_ensemble(2, 0.0)
    lam = (-0.3, 1.1)
    want = (lam[1] - lam[0]) * math.exp(-(lam[0] ** 2 + lam[1] ** 2) / 2) / k_norm(2)
    assert ordered_eigenvalue_density(goe, lam) == pytest.approx(want, rel=1e-13)
    with pytest.raises(DegenerateEnsembleError):
        ordered_eigenvalue_density(validate_ensemble(2, -0.5), [0.0, 0.0])
    with pytest.raises(ParameterError):
        ordered_eigenvalue_density(e, [1.0, 2.0, 3.0])


# E_GOI(c)[|l1 l2| ; l1 < 0 < l2] = 1 / sqrt(2 (1 + c))
@pytest.mark.parametrize("c", [0.0, 0.5, 2.0, -0.3])
def test_saddle_determinant_identity(c):
    val, _ = goi_expectation(validate_ensemble(2, c),
                             IndexedFunctional(index=1), "quadrature")
    assert val == pytest.approx(1.0 / math.sqrt(2.0 * (1.0 + c)), rel=1e-8)


# E_GOI(c)[l1 l2 ; 0 < l1] = (2c - 1)/4 + 1/(2 sqrt(2c + 2))
@pytest.mark.parametrize("c", [0.0, 0.5, 1.5])
def test_definite_determinant_identity(c):
    val, _ = goi_expectation(validate_ensemble(2, c),
                             IndexedFunctional(index=0), "quadrature")
    want = (2 * c - 1) / 4.0 + 1.0 / (2.0 * math.sqrt(2 * c + 2))
    assert val == pytest.approx(want, rel=1e-8)


def test_sampler_moments():
    rng = np.random.default_rng(2024)
    n, c, k = 2, 0.5, 100_000
    m = sample_goi(validate_ensemble(n, c), size=k, rng=rng)
    se = 5.0 / math.sqrt(k)
    assert abs(m.mean()) < 3 * se
    # diagonal variance 1 + c, diagonal covariance c, off-diagonal 1/2
    assert np.var(m[:, 0, 0]) == pytest.approx(1 + c, abs=6 * se)
    assert np.mean(m[:, 0, 0] * m[:, 1, 1]) == pytest.approx(c, abs=6 * se)
    assert np.var(m[:, 0, 1]) == pytest.approx(0.5, abs=6 * se)
    assert np.all(m == np.swapaxes(m, 1, 2))


def test_sampler_orthogonal_invariance():
    # entry covariance of Q M Q^T must match GOI(c) for any fixed rotation
    rng = np.random.default_rng(7)
    c, k = 0.7, 120_000
    th = 0.6
    q = np.array([[math.cos(th), -math.sin(th)], [math.sin(th), math.cos(th)]])
    m = sample_goi(validate_ensemble(2, c), size=k, rng=rng)
    r = q @ m @ q.T
    se = 6.0 / math.sqrt(k)
    assert np.var(r[:, 0, 0]) == pytest.approx(1 + c, abs=6 * se)
    assert np.mean(r[:, 0, 0] * r[:, 1, 1]) == pytest.approx(c, abs=6 * se)
    assert np.var(r[:, 0, 1]) == pytest.approx(0.5, abs=6 * se)
    assert np.mean(r[:, 0, 0] * r[:, 0, 1]) == pytest.approx(0.0, abs=6 * se)


def test_degenerate_sampler_zero_trace():
    mats = sample_goi(validate_ensemble(3, -1.0 / 3.0), size=5000,
                      rng=np.random.default_rng(5))
    assert np.abs(np.trace(mats, axis1=-2, axis2=-1)).max() < 1e-12


def test_quadrature_matches_monte_carlo():
    ens = validate_ensemble(2, 0.3)
    f = IndexedFunctional(index=1, shift=0.4)
    qv, _ = goi_expectation(ens, f, "quadrature")
    mv, me = goi_expectation(ens, f, "monte-carlo",
                             NumericConfig(mc_samples=150_000, seed=11))
    assert abs(qv - mv) < 4 * me


def test_trace_cap_quadrature_matches_monte_carlo():
    ens = validate_ensemble(2, 0.5)
    f = IndexedFunctional(index=2, shift=-0.2, trace_cap=-0.4)
    qv, _ = goi_expectation(ens, f, "quadrature")
    mv, me = goi_expectation(ens, f, "monte-carlo",
                             NumericConfig(mc_samples=200_000, seed=3))
    assert me > 0
    assert abs(qv - mv) < 4 * me


def test_mc_reproducible_streams():
    ens = validate_ensemble(2, -0.5)  # degenerate: MC is the only route
    f = IndexedFunctional(index=1)
    cfg = NumericConfig(mc_samples=50_000, seed=99, workers=3)
    a = goi_expectation(ens, f, "monte-carlo", cfg)
    b = goi_expectation(ens, f, "monte-carlo", cfg)
    assert a == b
    streams = worker_streams(99, 3)
    assert len(streams) == 3
    x = [s.standard_normal() for s in streams]
    assert len(set(x)) == 3
    with pytest.raises(ParameterError):
        worker_streams(1, 0)


def test_method_dispatch_and_errors():
    big = validate_ensemble(5, 0.2)
    f = IndexedFunctional(index=2)
    # auto falls back to sampling above the quadrature size limit
    v, e = goi_expectation(big, f, "auto", NumericConfig(mc_samples=20_000, seed=1))
    assert e > 0
    with pytest.raises(MethodError):
        goi_expectation(big, f, "quadrature")
    with pytest.raises(DegenerateEnsembleError):
        goi_expectation(validate_ensemble(2, -0.5), f, "quadrature")
    with pytest.raises(MethodError):
        goi_expectation(validate_ensemble(2, 0.0), f, "simpson")
    with pytest.raises(ParameterError):
        goi_expectation(validate_ensemble(2, 0.0), IndexedFunctional(index=3))


def test_ensemble_dataclass_guard():
    with pytest.raises(ParameterError):
        GoiEnsemble(n=0, c=0.0)
