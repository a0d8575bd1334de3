"""Two-parameter Mittag-Leffler function E_{a,b}(z) for real arguments.

All kernel work in this package happens on the negative real axis, where
E_{a,b} is smooth and (for b = 1) completely monotone.  Three evaluation
regimes are combined, each with a runtime accuracy certificate so the
switch points adapt to (a, b, z) instead of being hard-coded:

* Taylor series with Kahan summation, accepted only when the accumulated
  rounding bound (which tracks the largest term and the gamma-argument
  rounding) stays below 1e-11 of the result.
* Asymptotic expansion -sum_k z^{-k}/Gamma(b - a k), truncated at the
  smallest term of the sin-free envelope, accepted when that smallest
  term is below 1e-13 of the result.
* Laplace inversion on a parabolic contour (trapezoid rule, ~40 nodes)
  as the fallback for the band where neither certificate holds.  For
  z < 0 and 0 < a <= 1 the integrand has no poles on the principal
  sheet, so no residue bookkeeping is needed.

Accuracy on the negative axis is ~1e-12 relative (measured against an
mpmath reference in the test suite), degrading gracefully only in the
sliver a > 1 - 1e-4 where the function collapses onto exp(z) non-
uniformly.  a = 1 (and the cosine case a = 2, b = 1) are closed forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

Z_MAX = 5.0  # positive arguments beyond this are rejected, kernels never need them
_SERIES_CAP = 500
_SERIES_TOL = 1e-16


class SeriesAccuracyError(ArithmeticError):
    """Raised when the Taylor series cannot certify the requested accuracy."""


@dataclass(frozen=True)
class MlParams:
    """Order pair (alpha, beta) of E_{alpha,beta}.

    The solver only instantiates beta in {1, alpha} with alpha in (0, 1);
    alpha in (1, 2] is accepted as a test-only extension for the cosine
    identity E_{2,1}(-z^2) = cos(z).
    """

    alpha: float
    beta: float

    def __post_init__(self) -> None:
        if not (0.0 < self.alpha <= 2.0) or not math.isfinite(self.alpha):
            raise ValueError(f"alpha must lie in (0, 2], got {self.alpha}")
        if not (0.0 < self.beta <= 2.0) or not math.isfinite(self.beta):
            raise ValueError(f"beta must lie in (0, 2], got {self.beta}")


def _sin_pi(w: float) -> float:
    """sin(pi*w) with exact argument reduction (accurate for large |w|)."""
    r = math.remainder(w, 2.0)
    if abs(r) <= 0.5:
        return math.sin(math.pi * r)
    return math.copysign(math.sin(math.pi * (1.0 - abs(r))), r)


def _series(alpha: float, beta: float, z: float) -> tuple[float, bool]:
    """Kahan-summed Taylor series; returns (value, certified).

    The certificate accumulates |term| * (4 + w*log1p(w)) * eps, which
    bounds both the summation rounding and the rounding of the gamma
    argument alpha*k + beta (the latter dominates once terms are large).
    """
    total = 0.0
    comp = 0.0
    err_acc = 0.0
    logz = math.log(abs(z))
    k = 0
    while k < _SERIES_CAP:
        w = alpha * k + beta
        e = k * logz - math.lgamma(w)
        if e > 690.0:  # term would overflow: series unusable at this z
            return total, False
        term = math.exp(e)
        if z < 0.0 and (k & 1):
            term = -term
        mag = abs(term)
        err_acc += mag * (4.0 + w * math.log1p(w)) * 2.3e-16
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        if k > 1 and mag < _SERIES_TOL * abs(total):
            return total, err_acc <= 1e-11 * abs(total)
        k += 1
    return total, False


def _asymptotic(alpha: float, beta: float, z: float, kmax: int = 220) -> tuple[float, float]:
    """-sum_{k>=1} z^{-k} / Gamma(beta - alpha k) for z << 0.

    Stops at the smallest term of the sin-free envelope
    Gamma(1 + alpha k - beta) / (pi |z|^k) (the raw terms zigzag through
    the sine's zeros and would trip a naive smallest-term rule).
    Returns (value, error_estimate).
    """
    x = -z
    logx = math.log(x)
    total = 0.0
    comp = 0.0
    prev_env = math.inf
    k = 1
    while k <= kmax:
        w = beta - alpha * k
        if w > 0.0:
            env = math.exp(-math.lgamma(w) - k * logx)
            rg = math.exp(-math.lgamma(w))
        else:
            lgs = math.lgamma(1.0 - w)
            env = math.exp(lgs - k * logx) / math.pi
            if abs(w - round(w)) < 1e-8:
                rg = 0.0  # 1/Gamma at (numerically) nonpositive integers
            else:
                rg = _sin_pi(w) * math.exp(lgs) / math.pi
        if env >= prev_env:
            break
        if rg != 0.0:
            term = rg * math.exp(-k * logx)
            if not (k & 1):
                term = -term
            y = term - comp
            t = total + y
            comp = (t - total) - y
            total = t
        prev_env = env
        if env < 1e-17 * abs(total):
            break
        k += 1
    return total, prev_env


# Contour tuning: mu = 6 keeps exp(mu)*eps rounding near 1e-13 while the
# truncation/discretization exponents are balanced at exp(-32).
_CONTOUR_MU = 6.0
_CONTOUR_TARGET = 32.0


def _contour(alpha: float, beta: float, z: float) -> float:
    """Bromwich integral of s^{a-b}/(s^a - z) on the parabola s = mu(1+iu)^2.

    Valid for real z < 0 and 0 < alpha <= 1: every root of s^alpha = z then
    lies off the principal sheet, so the integrand is pole-free between the
    Bromwich line and the contour.
    """
    mu = _CONTOUR_MU
    h = 2.0 * math.pi * 0.9 / (mu + _CONTOUR_TARGET)
    half_width = math.sqrt(_CONTOUR_TARGET / mu + 1.0)
    n_nodes = int(math.ceil(half_width / h)) + 1
    u = h * np.arange(0, n_nodes + 1)
    iu = 1.0 + 1j * u
    s = mu * iu * iu
    ds = 2.0 * mu * 1j * iu
    logs = np.log(s)
    vals = np.exp(s + (alpha - beta) * logs) / (np.exp(alpha * logs) - z) * ds
    g = vals.imag
    g[0] *= 0.5
    return float(g.sum()) * h / math.pi


def ml(params: MlParams, z: float) -> float:
    """Evaluate E_{alpha,beta}(z) for real z <= Z_MAX.

    Raises OverflowError for z > Z_MAX, SeriesAccuracyError when only the
    (positive-argument) series applies and it cannot certify accuracy, and
    ValueError for alpha > 1 outside the series-reachable test range.
    """
    alpha, beta = params.alpha, params.beta
    if not math.isfinite(z):
        raise ValueError(f"z must be finite, got {z}")
    if z > Z_MAX:
        raise OverflowError(f"z = {z} exceeds the positive-argument cap {Z_MAX}")
    if z == 0.0:
        return 1.0 / math.gamma(beta)
    if alpha == 1.0 and beta == 1.0:
        return math.exp(z)
    if alpha == 2.0 and beta == 1.0:
        # cos / cosh closed form, kept for the test-only alpha = 2 path
        return math.cos(math.sqrt(-z)) if z < 0.0 else math.cosh(math.sqrt(z))

    if abs(z) <= 8.0:
        val, certified = _series(alpha, beta, z)
        if certified:
            return val
    if z > 0.0:
        raise SeriesAccuracyError(
            f"series cannot certify E_({alpha},{beta})({z}); positive arguments "
            "are evaluated by series only"
        )
    val, err = _asymptotic(alpha, beta, z)
    if err <= 1e-13 * max(abs(val), 1e-300):
        return val
    if alpha > 1.0:
        raise ValueError(
            f"alpha = {alpha} > 1 is only supported where the series converges "
            f"(got z = {z})"
        )
    return _contour(alpha, beta, z)


def ml_kernel_pair(alpha: float, lam: float, t: float) -> tuple[float, float]:
    """Multipliers of the mode-wise solution operators at time t.

    Returns (s_val, k_val) with s_val = E_{a,1}(-lam t^a) and
    k_val = t^{a-1} E_{a,a}(-lam t^a).  s_val lies in (0, 1] and k_val
    is nonnegative for lam >= 0, t > 0.
    """
    if t <= 0.0:
        raise ValueError(f"t must be positive, got {t}")
    if lam < 0.0:
        raise ValueError(f"lambda must be nonnegative, got {lam}")
    za = -lam * t**alpha
    s_val = ml(MlParams(alpha, 1.0), za)
    k_val = t ** (alpha - 1.0) * ml(MlParams(alpha, alpha), za)
    return s_val, k_val


def ml_on_array(alpha: float, beta: float, z: np.ndarray) -> np.ndarray:
    """Elementwise ml() over an array of arguments (plain loop)."""
    params = MlParams(alpha, beta)
    flat = np.asarray(z, dtype=float).ravel()
    out = np.empty_like(flat)
    for i, zi in enumerate(flat):
        out[i] = ml(params, zi)
    return out.reshape(np.shape(z))
