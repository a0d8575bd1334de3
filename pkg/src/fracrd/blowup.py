"""Blow-up bound T*, mass tracking, lower solution, and run certification.

T* is the closed-form upper bound on the blow-up time for reaction pairs
with f + lambda g >= C (xi^p + eta^p).  A run is certified by three checks:
the tracked mass theta(t) = int(u + lambda v) dominates the explicit lower
solution theta_(t) = m0 (T*/(T* - t))^m, the detected divergence time stays
below T* (plus a few steps), and detection is insensitive to the divergence
threshold, which a run that merely grows would fail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .frac_ops import Signal, TimeGrid, caputo_derivative
from .system_solver import SystemSolution


@dataclass(frozen=True)
class BlowupConfig:
    """Inputs of the bound: orders, coupling data, and initial mass.

    m0 = int(a + lambda b) dx must be positive (data nonnegative and not
    identically zero).  The lower-solution exponent m defaults to
    ceil(1/(p-1)), the largest choice whose admissibility chain closes at
    T = T* itself; larger m steepens theta_ beyond what the mass actually
    does early on.
    """

    alpha: float
    p: float
    lam: float
    c_p_lambda: float
    m0: float
    omega_measure: float
    m: int | None = None

    def __post_init__(self) -> None:
        # alpha = 1 is admitted for the closed-form bound itself (the classical
        # limit of the formula); the PDE solver stays strictly fractional
        if not (0.0 < self.alpha <= 1.0):
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")
        if self.p <= 1.0:
            raise ValueError(f"p must exceed 1, got {self.p}")
        if self.lam <= 0.0 or self.c_p_lambda <= 0.0 or self.omega_measure <= 0.0:
            raise ValueError("lambda, C_(p,lambda) and |Omega| must be positive")
        if self.m0 <= 0.0:
            raise ValueError(
                "m0 = int(a + lambda b) must be positive (data nonnegative, not =0)"
            )
        m_min = math.ceil(1.0 / (self.p - 1.0))
        if self.m is None:
            object.__setattr__(self, "m", max(1, m_min))
        elif self.m < m_min:
            raise ValueError(f"m must be >= ceil(1/(p-1)) = {m_min}, got {self.m}")

    @property
    def c0(self) -> float:
        """Comparison constant C_(p,lambda)^{-1} |Omega|^{-p/p'}."""
        return (1.0 / self.c_p_lambda) * self.omega_measure ** -(self.p - 1.0)


def t_star(cfg: BlowupConfig) -> float:
    """Closed-form blow-up time bound.

    T* = [ (p-1) Gamma(2-a) C^{-1} (m0/|Omega|)^{p-1} ]^{-1/a}.
    """
    mean = cfg.m0 / cfg.omega_measure
    inner = (
        (cfg.p - 1.0)
        * math.gamma(2.0 - cfg.alpha)
        * (1.0 / cfg.c_p_lambda)
        * mean ** (cfg.p - 1.0)
    )
    return inner ** (-1.0 / cfg.alpha)


@dataclass(frozen=True)
class LowerSolutionReport:
    values: Signal
    max_violation: float  # of d_t^a(theta_ - m0) <= C0 theta_^p at the nodes


def lower_solution(cfg: BlowupConfig, grid: TimeGrid) -> LowerSolutionReport:
    """Sample theta_(t) = m0 (T/(T-t))^m with T = T* and check its inequality.

    The grid must stay strictly below T*.  The defining inequality is
    evaluated with the L1 Caputo scheme, so reported violations shrink
    first order under grid refinement.
    """
    if cfg.alpha >= 1.0:
        raise ValueError("the sampled lower solution needs a strictly fractional order")
    T = t_star(cfg)
    if grid.t_final >= T * (1.0 - 1e-9):
        raise ValueError(
            f"grid reaches {grid.t_final}, beyond the lower solution's horizon T* = {T}"
        )
    t = grid.nodes()
    theta = cfg.m0 * (T / (T - t)) ** cfg.m
    lhs = caputo_derivative(cfg.alpha, Signal(grid, theta - cfg.m0)).values
    rhs = cfg.c0 * theta**cfg.p
    max_violation = float(np.max(lhs - rhs))
    return LowerSolutionReport(Signal(grid, theta), max(0.0, max_violation))


@dataclass(frozen=True)
class BlowupReport:
    t_star: float
    theta: np.ndarray  # tracked mass per node (NaN beyond the last valid step)
    theta_lower: np.ndarray  # lower solution where defined (NaN past 0.999 T*)
    detected_time: float | None
    detected_step: int | None
    threshold_factor: float
    lower_check_horizon: float
    max_lower_violation: float
    detection_passed: bool
    lower_passed: bool

    @property
    def passed(self) -> bool:
        return self.detection_passed and self.lower_passed


def detect_divergence(
    sol: SystemSolution, m0: float, threshold_factor: float = 1e6
) -> tuple[float | None, int | None]:
    """First node where theta exceeds threshold_factor * m0, or the halt step."""
    theta = sol.diagnostics.mass_u + sol.lam * sol.diagnostics.mass_v
    finite = np.isfinite(theta)
    over = finite & (theta > threshold_factor * m0)
    if over.any():
        k = int(np.argmax(over))
        return float(sol.grid.nodes()[k]), k
    if sol.blown_up:
        k = sol.last_valid_step + 1
        return float(min(k, sol.grid.n_steps) * sol.grid.dt), k
    return None, None


def certify_blowup(
    sol: SystemSolution,
    cfg: BlowupConfig,
    threshold_factor: float = 1e6,
    lower_tol: float = 1e-3,
    lower_horizon_fraction: float = 0.9,
) -> BlowupReport:
    """Check a blow-up run against the analytic bound and the lower solution.

    theta(t_k) is read off the recorded diagnostics; detection must land at
    or before T* + 3 dt and theta must dominate theta_ - lower_tol on
    [0, lower_horizon_fraction * T*] (where theta is still finite, theta_
    being meaningless past detection).
    """
    T = t_star(cfg)
    t = sol.grid.nodes()
    theta = sol.diagnostics.mass_u + sol.lam * sol.diagnostics.mass_v
    theta_lower = np.full_like(t, np.nan)
    in_horizon = t < T * 0.999
    theta_lower[in_horizon] = cfg.m0 * (T / (T - t[in_horizon])) ** cfg.m

    detected_time, detected_step = detect_divergence(sol, cfg.m0, threshold_factor)
    detection_passed = detected_time is not None and detected_time <= T + 3.0 * sol.grid.dt

    compare = in_horizon & (t <= lower_horizon_fraction * T)
    finite = np.isfinite(theta)
    lower_passed = True
    max_violation = 0.0
    for k in np.nonzero(compare)[0]:
        if not finite[k]:
            break  # theta already past overflow: dominance is trivial from here
        gap = theta_lower[k] - theta[k]
        max_violation = max(max_violation, gap)
    lower_passed = max_violation <= lower_tol
    return BlowupReport(
        t_star=T,
        theta=theta,
        theta_lower=theta_lower,
        detected_time=detected_time,
        detected_step=detected_step,
        threshold_factor=threshold_factor,
        lower_check_horizon=lower_horizon_fraction * T,
        max_lower_violation=max_violation,
        detection_passed=detection_passed,
        lower_passed=lower_passed,
    )
