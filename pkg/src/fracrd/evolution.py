"""Mode-wise application of the mild-solution operators S(t) and K(t).

Both operators are diagonal in the Neumann cosine basis; their multipliers
are Mittag-Leffler evaluations at -lambda_n t^alpha.  The norm-estimate
check fits log-log slopes of ||A^g S(t) a|| against t because the theory
only pins the decay exponents, not the constants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .mittag_leffler import MlParams, ml
from .spectral import Field, ModeBasis


@dataclass(frozen=True)
class KernelConfig:
    """Fractional order plus the basis the kernels act on (alpha strictly in (0,1))."""

    alpha: float
    basis: ModeBasis

    def __post_init__(self) -> None:
        if not (0.0 < self.alpha < 1.0):
            raise ValueError(f"alpha must lie strictly in (0, 1), got {self.alpha}")


def s_multipliers(cfg: KernelConfig, t: float, eigenvalues: np.ndarray | None = None) -> np.ndarray:
    """E_{a,1}(-lambda_n t^a) per mode; multipliers lie in (0, 1]."""
    if t <= 0.0:
        raise ValueError(f"t must be positive, got {t}")
    lam = cfg.basis.eigenvalues if eigenvalues is None else eigenvalues
    params = MlParams(cfg.alpha, 1.0)
    ta = t**cfg.alpha
    return np.array([ml(params, -lam_i * ta) for lam_i in lam])


def k_multipliers(cfg: KernelConfig, t: float, eigenvalues: np.ndarray | None = None) -> np.ndarray:
    """t^{a-1} E_{a,a}(-lambda_n t^a) per mode; nonnegative."""
    if t <= 0.0:
        raise ValueError(f"t must be positive, got {t}")
    lam = cfg.basis.eigenvalues if eigenvalues is None else eigenvalues
    params = MlParams(cfg.alpha, cfg.alpha)
    ta = t**cfg.alpha
    pref = t ** (cfg.alpha - 1.0)
    return pref * np.array([ml(params, -lam_i * ta) for lam_i in lam])


def apply_S(cfg: KernelConfig, t: float, field: Field) -> Field:
    if field.coeffs is None:
        raise ValueError("apply_S expects the field in coefficient form")
    return Field(cfg.basis, coeffs=field.coeffs * s_multipliers(cfg, t))


def apply_K(cfg: KernelConfig, t: float, field: Field) -> Field:
    if field.coeffs is None:
        raise ValueError("apply_K expects the field in coefficient form")
    return Field(cfg.basis, coeffs=field.coeffs * k_multipliers(cfg, t))


@dataclass(frozen=True)
class NormEstimateReport:
    alpha: float
    gamma: float
    s_slope: float
    k_slope: float
    s_constant: float
    k_constant: float
    s_bound: float  # theory: slope >= -alpha*gamma
    k_bound: float  # theory: slope >= alpha*(1-gamma) - 1
    s_pass: bool
    k_pass: bool
    times: np.ndarray
    s_norms: np.ndarray
    k_norms: np.ndarray

    @property
    def passed(self) -> bool:
        return self.s_pass and self.k_pass


def verify_norm_estimates(
    cfg: KernelConfig,
    gamma: float,
    trials: int = 16,
    rng: np.random.Generator | None = None,
    t_lo: float = 1e-3,
    t_hi: float = 1.0,
    n_times: int = 25,
    slope_slack: float = 0.05,
) -> NormEstimateReport:
    """Fit the decay slopes of ||A^g S(t) a|| and ||A^g K(t) a||.

    The trial set mixes random unit-norm coefficient vectors with the
    coordinate vectors: random vectors spread mass over all modes and decay
    faster than the sup envelope, while the single-mode vectors saturate it
    (a high mode in its algebraic regime realizes exactly t^{-a g}).  The
    slope of the max-over-trials norm is fitted on the smallest decade;
    passing means not decaying faster than the theory exponent minus slack.
    """
    if not (0.0 <= gamma <= 1.0):
        raise ValueError(f"gamma must lie in [0, 1], got {gamma}")
    rng = rng or np.random.default_rng(0)
    lam = cfg.basis.eigenvalues
    vecs = rng.standard_normal((trials, lam.size))
    vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
    times = np.geomspace(t_lo, t_hi, n_times)
    lam_g = lam**gamma
    s_norms = np.empty(n_times)
    k_norms = np.empty(n_times)
    for i, t in enumerate(times):
        s_mult = s_multipliers(cfg, float(t))
        k_mult = k_multipliers(cfg, float(t))
        s_norms[i] = max(
            np.max(np.linalg.norm(vecs * (lam_g * s_mult), axis=1)),
            np.max(lam_g * np.abs(s_mult)),
        )
        k_norms[i] = max(
            np.max(np.linalg.norm(vecs * (lam_g * k_mult), axis=1)),
            np.max(lam_g * np.abs(k_mult)),
        )
    decade = times <= 10.0 * t_lo
    log_t = np.log(times[decade])
    s_slope = float(np.polyfit(log_t, np.log(s_norms[decade]), 1)[0])
    k_slope = float(np.polyfit(log_t, np.log(k_norms[decade]), 1)[0])
    s_bound = -cfg.alpha * gamma
    k_bound = cfg.alpha * (1.0 - gamma) - 1.0
    s_constant = float(np.max(s_norms * times**(cfg.alpha * gamma)))
    k_constant = float(np.max(k_norms * times**(1.0 - cfg.alpha * (1.0 - gamma))))
    return NormEstimateReport(
        alpha=cfg.alpha,
        gamma=gamma,
        s_slope=s_slope,
        k_slope=k_slope,
        s_constant=s_constant,
        k_constant=k_constant,
        s_bound=s_bound,
        k_bound=k_bound,
        s_pass=s_slope >= s_bound - slope_slack,
        k_pass=k_slope >= k_bound - slope_slack,
        times=times,
        s_norms=s_norms,
        k_norms=k_norms,
    )


def kernel_integral_exact(alpha: float, lam: float, t: float) -> float:
    """Closed form of int_0^t s^{a-1} E_{a,a}(-lam s^a) ds.

    Equals (1 - E_{a,1}(-lam t^a))/lam for lam > 0 and t^a/Gamma(a+1)
    for the lam = 0 mode.
    """
    if lam == 0.0:
        return t**alpha / math.gamma(alpha + 1.0)
    return (1.0 - ml(MlParams(alpha, 1.0), -lam * t**alpha)) / lam
