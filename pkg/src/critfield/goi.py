"""Gaussian orthogonal-invariant (GOI) matrix ensembles.

A GOI(c) matrix is a symmetric N x N centered Gaussian matrix M with

    E[M_ij M_kl] = (delta_ik delta_jl + delta_il delta_jk) / 2
                   + c delta_ij delta_kl,

so off-diagonal entries are independent N(0, 1/2) and the diagonal has
covariance I_N + c 1 1^T.  The family is a valid covariance exactly when
c >= -1/N; at c = 0 it reduces to the GOE, and at c = -1/N the diagonal
covariance is singular (every sample has exactly zero trace).

This module provides validation, sampling, the ordered-eigenvalue density,
and expectations of indexed absolute-determinant functionals

    g(lam) = prod_j |lam_j - a| * 1{lam_i < a < lam_(i+1)}
             (* 1{mean(lam) <= trace_cap}),

evaluated either by nested adaptive quadrature over the ordered simplex
(N <= 3) or by Monte Carlo on sampled matrices (any N).  These expectations
are the matrix-side ingredient of every Kac-Rice count computed elsewhere
in the package.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.typing import NDArray
from scipy import integrate
from scipy.special import gammaln

from .errors import DegenerateEnsembleError, MethodError, ParameterError

# |c + 1/N| at or below this is treated as exactly the degenerate boundary.
DEGENERACY_TOL = 1e-9

# Quadrature is available only for small matrices; MC covers the rest.
QUADRATURE_MAX_N = 3


@dataclass(frozen=True)
class GoiEnsemble:
    """A validated GOI(c) ensemble of N x N symmetric matrices.

    Attributes
    ----------
    n : int
        Matrix size, N >= 1.
    c : float
        Diagonal coupling; must satisfy c >= -1/N.
    degenerate : bool
        True when c is within tolerance of -1/N.  Degenerate ensembles can
        be sampled (the zero eigendirection of the diagonal covariance is
        dropped exactly) but have no eigenvalue density.
    """

    n: int
    c: float
    degenerate: bool = field(default=False)

    def __post_init__(self):
        if self.n < 1:
            raise ParameterError(f"matrix size must be >= 1, got {self.n}")


def validate_ensemble(n: int, c: float) -> GoiEnsemble:
    """Check (N, c) and return the ensemble, flagging the degenerate case.

    Raises
    ------
    ParameterError
        If c < -1/N beyond tolerance; the message names the -1/N bound.
    """
    if n < 1:
        raise ParameterError(f"matrix size must be >= 1, got {n}")
    slack = c + 1.0 / n
    if slack < -DEGENERACY_TOL:
        raise ParameterError(
            f"c={c} is not a valid GOI coupling for N={n}: the diagonal "
            f"covariance I + c 1 1^T requires c >= -1/N = {-1.0 / n}")
    return GoiEnsemble(n=n, c=float(c), degenerate=abs(slack) <= DEGENERACY_TOL)


class EigenvalueVector:
    """An eigenvalue tuple with non-decreasing order enforced on construction."""

    __slots__ = ("values",)

    def __init__(self, values: Sequence[float]):
        arr = np.asarray(values, dtype=float)
        if arr.ndim != 1 or arr.size < 1:
            raise ParameterError("eigenvalues must form a 1-d sequence")
        if np.any(np.diff(arr) < 0):
            raise ParameterError("eigenvalues must be in non-decreasing order")
        self.values = arr

    def __len__(self):
        return self.values.size

    def __repr__(self):
        return f"EigenvalueVector({self.values.tolist()})"


@dataclass(frozen=True)
class IndexedFunctional:
    """Absolute determinant restricted to a fixed inertia index.

    Represents g(lam) = prod_j |lam_j - shift| on the event that exactly
    ``index`` eigenvalues lie below ``shift`` (lam_0 = -inf, lam_(N+1) = +inf
    conventions make index 0 and index N the extreme cases).  When
    ``trace_cap`` is set, the event also requires mean(lam) <= trace_cap;
    that variant drives the boundary-regime counts.
    """

    index: int
    shift: float = 0.0
    trace_cap: float | None = None

    def __post_init__(self):
        if self.index < 0:
            raise ParameterError(f"index must be >= 0, got {self.index}")

    @property
    def mode(self) -> str:
        if self.trace_cap is None:
            return "abs-det-indicator"
        return "abs-det-indicator-with-trace-cap"

    def evaluate(self, lam: NDArray[np.float64]) -> NDArray[np.float64]:
        """Evaluate g on a batch of ascending eigenvalue rows (k, N)."""
        lam = np.atleast_2d(lam)
        vals = np.abs(lam - self.shift).prod(axis=1)
        below = (lam < self.shift).sum(axis=1)
        mask = below == self.index
        if self.trace_cap is not None:
            mask &= lam.mean(axis=1) <= self.trace_cap
        return np.where(mask, vals, 0.0)


@dataclass(frozen=True)
class NumericConfig:
    """Shared numeric knobs for expectation evaluation.

    mc_samples is the total matrix count; it is split evenly across
    ``workers`` deterministic substreams derived from ``seed``, so results
    are reproducible for a fixed (seed, workers) pair regardless of how the
    work is scheduled.
    """

    quad_rel_tol: float = 1e-9
    quad_abs_tol: float = 1e-12
    mc_samples: int = 200_000
    mc_batch: int = 200_000
    workers: int = 1
    seed: int | None = None


def log_k_norm(n: int) -> float:
    """log K_N with K_N = 2^(N/2) prod_{i=1..N} Gamma(i/2)."""
    if n < 1:
        raise ParameterError(f"matrix size must be >= 1, got {n}")
    return 0.5 * n * math.log(2.0) + float(sum(gammaln(0.5 * i) for i in range(1, n + 1)))


def k_norm(n: int) -> float:
    """Normalization constant K_N of the ordered-eigenvalue density."""
    return math.exp(log_k_norm(n))


def sample_goi(ensemble: GoiEnsemble, size: int | None = None,
               rng: np.random.Generator | None = None) -> NDArray[np.float64]:
    """Draw GOI(c) matrices.

    The diagonal is generated as B z with z standard normal and
    B = I + ((sqrt(1 + N c) - 1)/N) 1 1^T, a symmetric square root of
    I + c 1 1^T.  At c = -1/N the root's trace factor is exactly zero, so
    the zero eigendirection is dropped exactly and every sample has zero
    trace up to rounding in the subtraction.

    Parameters
    ----------
    ensemble : GoiEnsemble
    size : int or None
        None returns one (N, N) matrix, an int returns (size, N, N).
    rng : numpy Generator, default-constructed if omitted.
    """
    if rng is None:
        rng = np.random.default_rng()
    n = ensemble.n
    k = 1 if size is None else int(size)
    g = rng.standard_normal((k, n, n))
    m = (g + np.swapaxes(g, 1, 2)) / 2.0  # off-diagonal variance 1/2
    z = rng.standard_normal((k, n))
    root = math.sqrt(max(1.0 + n * ensemble.c, 0.0))
    diag = z + ((root - 1.0) / n) * z.sum(axis=1, keepdims=True)
    idx = np.arange(n)
    m[:, idx, idx] = diag
    return m[0] if size is None else m


def ordered_eigenvalue_density(ensemble: GoiEnsemble,
                               lam: "EigenvalueVector | Sequence[float]") -> float:
    """Joint density of the ordered eigenvalues at lam.

    f_c(lam) = (K_N sqrt(1 + N c))^-1
               * exp(-sum lam_i^2 / 2 + c (sum lam_i)^2 / (2 (1 + N c)))
               * prod_{i<j} (lam_j - lam_i)

    on lam_1 <= ... <= lam_N.  Unordered input returns 0.0.  The degenerate
    ensemble has no density (mass concentrates on the zero-trace set).
    """
    if ensemble.degenerate:
        raise DegenerateEnsembleError(
            f"GOI(c) with c = -1/N (N={ensemble.n}) concentrates on the "
            "zero-trace hyperplane and has no eigenvalue density; sample it "
            "or use monte-carlo expectations instead")
    arr = lam.values if isinstance(lam, EigenvalueVector) else np.asarray(lam, dtype=float)
    if arr.ndim != 1 or arr.size != ensemble.n:
        raise ParameterError(
            f"expected {ensemble.n} eigenvalues, got shape {arr.shape}")
    if np.any(np.diff(arr) < 0):
        return 0.0
    n, c = ensemble.n, ensemble.c
    log_norm = log_k_norm(n) + 0.5 * math.log1p(n * c)
    s = float(arr.sum())
    expo = -0.5 * float(arr @ arr) + c * s * s / (2.0 * (1.0 + n * c)) - log_norm
    vand = 1.0
    for i in range(n):
        for j in range(i + 1, n):
            vand *= arr[j] - arr[i]
    return float(vand * math.exp(expo))


# ---------------------------------------------------------------------------
# quadrature over the ordered simplex
# ---------------------------------------------------------------------------


def _box_half_width(c: float, shift: float) -> float:
    # The trace direction of GOI(c) has Gaussian width sqrt(1 + N c) <=
    # sqrt(1 + c) per eigenvalue scale; pad the standard 12-sigma box for
    # large positive c so wide ensembles are not clipped.
    return 12.0 * max(1.0, math.sqrt(1.0 + max(c, 0.0))) + abs(shift)


def nested_ordered_quadrature(n: int, c: float,
                              weight: Callable[[tuple[float, ...]], float],
                              n_lower: int, split: float | None,
                              trace_cap: float | None = None,
                              box_half: float | None = None,
                              epsabs: float = 1e-12,
                              epsrel: float = 1e-9) -> tuple[float, float]:
    """Integrate weight(lam) f_c(lam) over an ordered eigenvalue region.

    The region is lam_1 <= ... <= lam_k <= split <= lam_(k+1) <= ... <= lam_N
    with k = n_lower; split=None (with n_lower=0) gives the full ordered
    simplex.  An optional trace cap restricts to mean(lam) <= trace_cap; the
    cap is folded into the innermost integration limit so each 1-d integrand
    stays piecewise smooth.

    Returns (value, error_estimate) where the error is the outermost
    adaptive rule's residual.
    """
    if c + 1.0 / n <= 0.0:
        raise DegenerateEnsembleError(
            "quadrature needs a nondegenerate ensemble (c > -1/N)")
    log_norm = log_k_norm(n) + 0.5 * math.log1p(n * c)
    cc = c / (2.0 * (1.0 + n * c))
    half = box_half if box_half is not None else _box_half_width(c, split or 0.0)
    anchor = split if split is not None else 0.0
    lo_box, hi_box = anchor - half, anchor + half
    cap_sum = None if trace_cap is None else n * trace_cap
    n_upper = n - n_lower
    if n_lower < 0 or n_upper < 0:
        raise ParameterError(f"invalid block split {n_lower} of {n}")
    split_val = split if split is not None else lo_box

    def integrand(lam: tuple[float, ...]) -> float:
        s = 0.0
        q = 0.0
        for x in lam:
            s += x
            q += x * x
        vand = 1.0
        for i in range(n):
            for j in range(i + 1, n):
                vand *= lam[j] - lam[i]
        f = vand * math.exp(-0.5 * q + cc * s * s - log_norm)
        return f * weight(lam)

    err_outer = [0.0]
    opts = dict(epsabs=epsabs, epsrel=epsrel, limit=100)

    # Integration order: upper block from split upward, then lower block from
    # split downward; the innermost variable absorbs the trace-cap clamp.
    def eval_point(uppers: list[float], lowers: list[float]) -> float:
        lam = tuple(reversed(lowers)) + tuple(uppers)
        if cap_sum is not None and sum(lam) > cap_sum:
            return 0.0
        return integrand(lam)

    def int_lower(k: int, uppers: list[float], lowers: list[float],
                  outermost: bool) -> float:
        if k == n_lower:
            return eval_point(uppers, lowers)
        hi = lowers[-1] if lowers else (split_val if split is not None else hi_box)
        lo = lo_box
        last = k == n_lower - 1
        if cap_sum is not None:
            rest = sum(uppers) + sum(lowers)
            if last:
                hi = min(hi, cap_sum - rest)
            elif rest + lo * (n_lower - k) > cap_sum:
                return 0.0  # even the lowest remaining values overshoot the cap
        if hi <= lo:
            return 0.0
        val, err = integrate.quad(
            lambda x: int_lower(k + 1, uppers, lowers + [x], False),
            lo, hi, **opts)
        if outermost:
            err_outer[0] = err
        return val

    def int_upper(k: int, uppers: list[float], outermost: bool) -> float:
        if k == n_upper:
            return int_lower(0, uppers, [], outermost and n_lower > 0)
        lo = uppers[-1] if uppers else (split_val if split is not None else lo_box)
        hi = hi_box
        last = k == n_upper - 1 and n_lower == 0
        if cap_sum is not None:
            rest = sum(uppers)
            if last:
                hi = min(hi, cap_sum - rest)
            elif rest + lo * (n_upper - k) + lo_box * n_lower > cap_sum:
                return 0.0
        if hi <= lo:
            return 0.0
        inner_outermost = outermost and k == 0 and n_upper > 0
        val, err = integrate.quad(
            lambda x: int_upper(k + 1, uppers + [x], False),
            lo, hi, **opts)
        if inner_outermost:
            err_outer[0] = err
        return val

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        if n_upper > 0:
            value = int_upper(0, [], True)
        else:
            value = int_lower(0, [], [], True)
    return value, err_outer[0]


def _expectation_quadrature(ensemble: GoiEnsemble, functional: IndexedFunctional,
                            config: NumericConfig) -> tuple[float, float]:
    n = ensemble.n
    if functional.index > n:
        raise ParameterError(f"index {functional.index} out of range for N={n}")
    return nested_ordered_quadrature(
        n, ensemble.c,
        weight=lambda lam: math.prod(abs(x - functional.shift) for x in lam),
        n_lower=functional.index, split=functional.shift,
        trace_cap=functional.trace_cap,
        epsabs=config.quad_abs_tol, epsrel=config.quad_rel_tol)


# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------


def worker_streams(seed: int | None, workers: int) -> list[np.random.Generator]:
    """Deterministic per-worker generators derived from (seed, worker index)."""
    if workers < 1:
        raise ParameterError(f"workers must be >= 1, got {workers}")
    root = np.random.SeedSequence(seed)
    return [np.random.default_rng(s) for s in root.spawn(workers)]


def mc_eigen_expectation(ensemble: GoiEnsemble,
                         eval_batch: Callable[[NDArray[np.float64]], NDArray[np.float64]],
                         config: NumericConfig) -> tuple[float, float]:
    """Mean and standard error of eval_batch(eigenvalues) over GOI samples.

    eval_batch receives ascending eigenvalue rows (k, N) and must return a
    value per row.  Sampling is split across config.workers substreams.
    """
    total = int(config.mc_samples)
    if total < 2:
        raise ParameterError("mc_samples must be >= 2")
    rngs = worker_streams(config.seed, config.workers)
    per = [total // len(rngs)] * len(rngs)
    per[0] += total - sum(per)
    s = 0.0
    s2 = 0.0
    for rng, quota in zip(rngs, per):
        done = 0
        while done < quota:
            k = min(config.mc_batch, quota - done)
            mats = sample_goi(ensemble, size=k, rng=rng)
            lam = np.linalg.eigvalsh(mats)
            vals = eval_batch(lam)
            s += float(vals.sum())
            s2 += float((vals * vals).sum())
            done += k
    mean = s / total
    var = max(s2 / total - mean * mean, 0.0) * total / (total - 1)
    return mean, math.sqrt(var / total)


def goi_expectation(ensemble: GoiEnsemble, functional: IndexedFunctional,
                    method: str = "auto",
                    config: NumericConfig | None = None) -> tuple[float, float]:
    """E[g(lam)] for an indexed absolute-determinant functional.

    method "quadrature" integrates the ordered-eigenvalue density over the
    index region (N <= 3, nondegenerate only); "monte-carlo" averages over
    sampled matrices and works for every valid ensemble; "auto" picks
    quadrature when available.

    Returns (value, error_estimate): adaptive residual for quadrature, one
    standard error for Monte Carlo.
    """
    config = config or NumericConfig()
    if functional.index > ensemble.n:
        raise ParameterError(
            f"index {functional.index} out of range for N={ensemble.n}")
    if method == "auto":
        method = ("quadrature"
                  if ensemble.n <= QUADRATURE_MAX_N and not ensemble.degenerate
                  else "monte-carlo")
    if method == "quadrature":
        if ensemble.n > QUADRATURE_MAX_N:
            raise MethodError(
                f"quadrature supports N <= {QUADRATURE_MAX_N}; "
                f"use method='monte-carlo' for N={ensemble.n}")
        if ensemble.degenerate:
            raise DegenerateEnsembleError(
                "no eigenvalue density at c = -1/N; use method='monte-carlo'")
        return _expectation_quadrature(ensemble, functional, config)
    if method == "monte-carlo":
        return mc_eigen_expectation(ensemble, functional.evaluate, config)
    raise MethodError(f"unknown method {method!r}")
