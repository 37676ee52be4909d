"""Shared Kac-Rice count engine.

Both geometries reduce expected critical-point counts to the same template:

    E[count of index i]          = pref * E_GOI(c_tot)[g_i(0)]
    E[count of index i above u]  = pref * int_u^inf phi(x) E_GOI(c_cnd)[g_i(b x)] dx
    boundary regime              = pref * E_GOI(c_tot)[g_i(0); mean(lam) <= -gamma u]

where g_i(a) is the indexed absolute-determinant functional with shift a.
The geometry modules supply (pref, c_tot, c_cnd, b, gamma); this module
evaluates the template by quadrature or Monte Carlo and propagates error
estimates.  Height densities and upper-tail height fractions follow as
ratios of the same quantities, so prefactors cancel.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import ndtr, ndtri

from .errors import MethodError, ParameterError, UndefinedDistributionError
from .goi import (
    GoiEnsemble,
    IndexedFunctional,
    NumericConfig,
    QUADRATURE_MAX_N,
    mc_eigen_expectation,
    nested_ordered_quadrature,
    sample_goi,
    validate_ensemble,
    worker_streams,
)

SQRT2PI = math.sqrt(2.0 * math.pi)

# Finite-difference step for boundary-regime height densities.
BOUNDARY_DIFF_STEP = 1e-4

# Outer threshold integrals run on [u, u + OUTER_TAIL]; beyond that the
# standard normal envelope contributes below any tolerance used here.
OUTER_TAIL = 13.0


@dataclass(frozen=True)
class CritResult:
    """A computed expected count (or derived scalar) with its error estimate.

    error is one standard error for monte-carlo results and the adaptive
    residual for quadrature; closed forms report the accumulated floating
    point / 1-d integration residual, effectively zero.
    """

    value: float
    error: float
    method: str


@dataclass(frozen=True)
class CountProblem:
    """Geometry-resolved parameters of the count template (see module doc)."""

    n: int
    log_prefactor: float
    c_total: float
    c_cond: float
    shift_coeff: float
    cap_coeff: float
    boundary: bool

    def total_ensemble(self) -> GoiEnsemble:
        return validate_ensemble(self.n, self.c_total)

    def cond_ensemble(self) -> GoiEnsemble:
        return validate_ensemble(self.n, self.c_cond)


def _phi(x: float) -> float:
    return math.exp(-0.5 * x * x) / SQRT2PI


def _abs_prod_weight(shift: float):
    def weight(lam):
        p = 1.0
        for v in lam:
            p *= abs(v - shift)
        return p
    return weight


# ---------------------------------------------------------------------------
# totals
# ---------------------------------------------------------------------------


def total_quadrature(p: CountProblem, i: int, cfg: NumericConfig) -> CritResult:
    if p.n > QUADRATURE_MAX_N:
        raise MethodError(
            f"quadrature supports N <= {QUADRATURE_MAX_N}; use monte-carlo")
    val, err = nested_ordered_quadrature(
        p.n, p.c_total, _abs_prod_weight(0.0), n_lower=i, split=0.0,
        epsabs=cfg.quad_abs_tol, epsrel=cfg.quad_rel_tol)
    pref = math.exp(p.log_prefactor)
    return CritResult(pref * val, pref * err, "quadrature")


def total_mc(p: CountProblem, i: int, cfg: NumericConfig) -> CritResult:
    ens = p.total_ensemble()
    fn = IndexedFunctional(index=i, shift=0.0)
    val, err = mc_eigen_expectation(ens, fn.evaluate, cfg)
    pref = math.exp(p.log_prefactor)
    return CritResult(pref * val, pref * err, "monte-carlo")


# ---------------------------------------------------------------------------
# counts above a threshold
# ---------------------------------------------------------------------------


def _outer_tail_slop(p: CountProblem, hi: float) -> float:
    # Crude but safe envelope for the truncated outer integral: the inner
    # expectation grows at most like prod(|lam| + |beta|), bounded here by
    # a polynomial envelope against the normal tail.
    b = abs(p.shift_coeff)
    return _phi(hi) * (1.0 + b * (abs(hi) + 1.0)) ** p.n * 10.0


def above_quadrature(p: CountProblem, i: int, u: float,
                     cfg: NumericConfig) -> CritResult:
    if math.isinf(u) and u < 0:
        return total_quadrature(p, i, cfg)
    if p.n > QUADRATURE_MAX_N:
        raise MethodError(
            f"quadrature supports N <= {QUADRATURE_MAX_N}; use monte-carlo")
    pref = math.exp(p.log_prefactor)
    if p.boundary:
        cap = -p.cap_coeff * u
        val, err = nested_ordered_quadrature(
            p.n, p.c_total, _abs_prod_weight(0.0), n_lower=i, split=0.0,
            trace_cap=cap, epsabs=cfg.quad_abs_tol, epsrel=cfg.quad_rel_tol)
        return CritResult(pref * val, pref * err, "quadrature")

    c = p.c_cond
    inner_abs = max(cfg.quad_abs_tol * 1e-1, 1e-15)

    def outer(x: float) -> float:
        beta = p.shift_coeff * x
        val, _ = nested_ordered_quadrature(
            p.n, c, _abs_prod_weight(beta), n_lower=i, split=beta,
            epsabs=inner_abs, epsrel=cfg.quad_rel_tol)
        return _phi(x) * val

    # The integrand is bounded by a polynomial times the normal density, so
    # only [-OUTER_TAIL, OUTER_TAIL] (shifted right for large u) matters;
    # clipped tails are folded into the error estimate.
    lo = max(u, -OUTER_TAIL)
    hi = max(lo, 0.0) + OUTER_TAIL
    import warnings
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(outer, lo, hi, epsabs=cfg.quad_abs_tol,
                                  epsrel=max(cfg.quad_rel_tol, 1e-9), limit=80)
    err += _outer_tail_slop(p, hi) + (_outer_tail_slop(p, lo) if u < lo else 0.0)
    return CritResult(pref * val, pref * err, "quadrature")


def _tail_uniform(rng: np.random.Generator, k: int) -> np.ndarray:
    # uniform on (0, 1]; keeps ndtri away from the -inf endpoint
    return 1.0 - rng.random(k)


def above_mc(p: CountProblem, i: int, u: float, cfg: NumericConfig) -> CritResult:
    if math.isinf(u) and u < 0:
        return total_mc(p, i, cfg)
    pref = math.exp(p.log_prefactor)
    if p.boundary:
        ens = p.total_ensemble()
        fn = IndexedFunctional(index=i, shift=0.0, trace_cap=-p.cap_coeff * u)
        val, err = mc_eigen_expectation(ens, fn.evaluate, cfg)
        return CritResult(pref * val, pref * err, "monte-carlo")

    # Double sampling: x from the normal upper tail above u (one matrix per
    # x), scaled by the tail mass so the estimator stays unbiased.
    ens = p.cond_ensemble()
    tail = float(ndtr(-u))
    if tail == 0.0:
        return CritResult(0.0, 0.0, "monte-carlo")
    total = int(cfg.mc_samples)
    if total < 2:
        raise ParameterError("mc_samples must be >= 2")
    rngs = worker_streams(cfg.seed, cfg.workers)
    per = [total // len(rngs)] * len(rngs)
    per[0] += total - sum(per)
    s = s2 = 0.0
    for rng, quota in zip(rngs, per):
        done = 0
        while done < quota:
            k = min(cfg.mc_batch, quota - done)
            x = -ndtri(tail * _tail_uniform(rng, k))
            beta = p.shift_coeff * x
            lam = np.linalg.eigvalsh(sample_goi(ens, size=k, rng=rng))
            vals = np.abs(lam - beta[:, None]).prod(axis=1)
            vals = np.where((lam < beta[:, None]).sum(axis=1) == i, vals, 0.0)
            s += float(vals.sum())
            s2 += float((vals * vals).sum())
            done += k
    mean = s / total
    var = max(s2 / total - mean * mean, 0.0) * total / (total - 1)
    se = math.sqrt(var / total)
    return CritResult(pref * tail * mean, pref * tail * se, "monte-carlo")


# ---------------------------------------------------------------------------
# height distributions, general path
# ---------------------------------------------------------------------------


def _total_raw(p: CountProblem, i: int, method: str,
               cfg: NumericConfig) -> tuple[float, float]:
    if method == "quadrature":
        return nested_ordered_quadrature(
            p.n, p.c_total, _abs_prod_weight(0.0), n_lower=i, split=0.0,
            epsabs=cfg.quad_abs_tol, epsrel=cfg.quad_rel_tol)
    ens = p.total_ensemble()
    fn = IndexedFunctional(index=i, shift=0.0)
    return mc_eigen_expectation(ens, fn.evaluate, cfg)


def height_pdf_general(p: CountProblem, i: int, u: float, method: str,
                       cfg: NumericConfig) -> CritResult:
    """h_i(u), the height density of index-i critical points.

    Nonboundary models use the exact integrand ratio
    h_i(u) = phi(u) E_GOI(c_cnd)[g_i(b u)] / E_GOI(c_tot)[g_i(0)]; the
    boundary regime differentiates the upper-tail fraction by central
    differences with the pinned step.
    """
    if method not in ("quadrature", "monte-carlo"):
        raise MethodError(f"unknown general-path method {method!r}")
    if p.boundary:
        return _height_pdf_boundary(p, i, u, method, cfg)
    tot, tot_err = _total_raw(p, i, method, cfg)
    if tot <= 0.0:
        raise UndefinedDistributionError(
            f"expected count of index-{i} points vanishes; heights undefined")
    beta = p.shift_coeff * u
    if method == "quadrature":
        num, num_err = nested_ordered_quadrature(
            p.n, p.c_cond, _abs_prod_weight(beta), n_lower=i, split=beta,
            epsabs=cfg.quad_abs_tol, epsrel=cfg.quad_rel_tol)
    else:
        ens = p.cond_ensemble()
        fn = IndexedFunctional(index=i, shift=beta)
        num, num_err = mc_eigen_expectation(ens, fn.evaluate, cfg)
    val = _phi(u) * num / tot
    rel = 0.0
    if num > 0:
        rel = math.hypot(num_err / num, tot_err / tot)
    return CritResult(val, abs(val) * rel + _phi(u) * num_err / tot, method)


def _height_pdf_boundary(p: CountProblem, i: int, u: float, method: str,
                         cfg: NumericConfig) -> CritResult:
    d = BOUNDARY_DIFF_STEP
    caps = (-p.cap_coeff * (u - d), -p.cap_coeff * (u + d))
    if method == "quadrature":
        tot, tot_err = _total_raw(p, i, "quadrature", cfg)
        if tot <= 0.0:
            raise UndefinedDistributionError(
                f"expected count of index-{i} points vanishes; heights undefined")
        lo, lo_err = nested_ordered_quadrature(
            p.n, p.c_total, _abs_prod_weight(0.0), n_lower=i, split=0.0,
            trace_cap=caps[0], epsabs=cfg.quad_abs_tol, epsrel=cfg.quad_rel_tol)
        hi, hi_err = nested_ordered_quadrature(
            p.n, p.c_total, _abs_prod_weight(0.0), n_lower=i, split=0.0,
            trace_cap=caps[1], epsabs=cfg.quad_abs_tol, epsrel=cfg.quad_rel_tol)
        val = (lo - hi) / (2.0 * d * tot)
        err = (lo_err + hi_err) / (2.0 * d * tot) + abs(val) * tot_err / tot
        return CritResult(val, err, "quadrature")

    # Monte Carlo with common random numbers: one eigenvalue batch feeds the
    # uncapped total and both capped variants, so the finite difference only
    # sees samples inside the moving slab.
    ens = p.total_ensemble()
    total = int(cfg.mc_samples)
    rngs = worker_streams(cfg.seed, cfg.workers)
    per = [total // len(rngs)] * len(rngs)
    per[0] += total - sum(per)
    s0 = sd = sd2 = 0.0
    for rng, quota in zip(rngs, per):
        done = 0
        while done < quota:
            k = min(cfg.mc_batch, quota - done)
            lam = np.linalg.eigvalsh(sample_goi(ens, size=k, rng=rng))
            vals = np.abs(lam).prod(axis=1)
            vals = np.where((lam < 0.0).sum(axis=1) == i, vals, 0.0)
            mean_lam = lam.mean(axis=1)
            diff = vals * ((mean_lam <= caps[0]).astype(float)
                           - (mean_lam <= caps[1]).astype(float))
            s0 += float(vals.sum())
            sd += float(diff.sum())
            sd2 += float((diff * diff).sum())
            done += k
    tot = s0 / total
    if tot <= 0.0:
        raise UndefinedDistributionError(
            f"expected count of index-{i} points vanishes; heights undefined")
    dmean = sd / total
    dvar = max(sd2 / total - dmean * dmean, 0.0) * total / (total - 1)
    val = dmean / (2.0 * d * tot)
    err = math.sqrt(dvar / total) / (2.0 * d * tot)
    return CritResult(val, err, "monte-carlo")


def height_cdf_general(p: CountProblem, i: int, u: float, method: str,
                       cfg: NumericConfig) -> CritResult:
    """Upper-tail fraction F_i(u): expected share of index-i points above u."""
    if method == "quadrature":
        tot = total_quadrature(p, i, cfg)
        ab = above_quadrature(p, i, u, cfg)
    elif method == "monte-carlo":
        tot = total_mc(p, i, cfg)
        ab = above_mc(p, i, u, cfg)
    else:
        raise MethodError(f"unknown general-path method {method!r}")
    if tot.value <= 0.0:
        raise UndefinedDistributionError(
            f"expected count of index-{i} points vanishes; heights undefined")
    val = ab.value / tot.value
    rel = tot.error / tot.value
    if ab.value > 0:
        rel = math.hypot(ab.error / ab.value, rel)
        err = val * rel
    else:
        err = ab.error / tot.value
    return CritResult(val, err, method)
