"""Discrete fractional calculus on uniformly sampled time signals.

Riemann-Liouville integrals use product integration that is exact for
piecewise-linear integrands (each panel integrates the singular kernel
(t-s)^{beta-1} against the linear interpolant in closed form), the Caputo
derivative uses the classical L1 scheme, and the adjoint derivative is its
backward-in-time mirror.  Memory convolutions are O(n^2) by design: runs
here stay at n <= 4096 nodes and direct summation is exactly reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class TimeGrid:
    """Uniform mesh 0 = t_0 < ... < t_n = t_final with n_steps panels."""

    t_final: float
    n_steps: int

    def __post_init__(self) -> None:
        if not (self.t_final > 0.0 and math.isfinite(self.t_final)):
            raise ValueError(f"t_final must be positive, got {self.t_final}")
        if self.n_steps < 1:
            raise ValueError(f"n_steps must be >= 1, got {self.n_steps}")

    @property
    def dt(self) -> float:
        return self.t_final / self.n_steps

    @property
    def n_nodes(self) -> int:
        return self.n_steps + 1

    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, self.t_final, self.n_nodes)


@dataclass(frozen=True)
class Signal:
    """Real values sampled on the nodes of a TimeGrid."""

    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", vals)
        if vals.shape != (self.grid.n_nodes,):
            raise ValueError(
                f"values shape {vals.shape} does not match node count {self.grid.n_nodes}"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("signal values must be finite")


def signal_from_callable(grid: TimeGrid, fn: Callable[[np.ndarray], np.ndarray]) -> Signal:
    return Signal(grid, np.asarray(fn(grid.nodes()), dtype=float))


def _rl_weights(beta: float, dt: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Panel weights for J^beta with a linear interpolant.

    For lag m = k - j, the panel [t_j, t_{j+1}] contributes
    w_left[m] * s_j + w_right[m] * s_{j+1}; both weight families are
    nonnegative, which makes J^beta positivity-preserving exactly.
    """
    m = np.arange(0, n + 1, dtype=float)
    a_pow = m**beta  # m^beta, used as differences
    b_pow = m ** (beta + 1.0)
    A = dt**beta * np.diff(a_pow) / beta  # integral of w^{beta-1} over panel
    B = dt ** (beta + 1.0) * np.diff(b_pow) / (beta + 1.0)
    lag = np.arange(1, n + 1, dtype=float)
    a_edge = (lag - 1.0) * dt
    b_edge = lag * dt
    w_left = (B - a_edge * A) / dt
    w_right = (b_edge * A - B) / dt
    return w_left, w_right


def rl_integral(beta: float, s: Signal) -> Signal:
    """Riemann-Liouville integral J^beta of s, sampled on the same grid."""
    if not (0.0 < beta <= 2.0):
        raise ValueError(f"beta must lie in (0, 2], got {beta}")
    n = s.grid.n_steps
    dt = s.grid.dt
    w_left, w_right = _rl_weights(beta, dt, n)
    v = s.values
    # out[k] = sum_{m=1..k} w_left[m] v[k-m] + w_right[m] v[k-m+1]
    conv_l = np.convolve(v[:-1], w_left)[:n]
    conv_r = np.convolve(v[1:], w_right)[:n]
    out = np.zeros(n + 1)
    out[1:] = (conv_l + conv_r) / math.gamma(beta)
    return Signal(s.grid, out)


def _l1_coeffs(alpha: float, n: int) -> np.ndarray:
    m = np.arange(0, n + 1, dtype=float)
    return np.diff(m ** (1.0 - alpha))  # c_m = m^{1-a} - (m-1)^{1-a}, m = 1..n


def caputo_derivative(alpha: float, s: Signal) -> Signal:
    """Caputo derivative via the L1 scheme; node 0 is set to 0 by convention."""
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    n = s.grid.n_steps
    dt = s.grid.dt
    c = _l1_coeffs(alpha, n)
    dv = np.diff(s.values)
    # out[k] = dt^{-a}/Gamma(2-a) * sum_{j<k} dv[j] c[k-1-j]
    conv = np.convolve(dv, c)[:n]
    out = np.zeros(n + 1)
    out[1:] = conv * dt ** (-alpha) / math.gamma(2.0 - alpha)
    return Signal(s.grid, out)


def adjoint_caputo(alpha: float, psi: Signal) -> Signal:
    """Backward-in-time L1 analogue acting on test functions with psi(T) = 0."""
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    scale = float(np.max(np.abs(psi.values))) or 1.0
    if abs(psi.values[-1]) > 1e-12 * scale:
        raise ValueError(
            f"adjoint derivative requires psi(T) = 0, got {psi.values[-1]!r}"
        )
    n = psi.grid.n_steps
    dt = psi.grid.dt
    c = _l1_coeffs(alpha, n)
    dpsi = np.diff(psi.values)
    # out[k] = -dt^{-a}/Gamma(2-a) * sum_{j>=k} dpsi[j] c[j+1-k];  out[n] = 0
    conv = np.convolve(dpsi[::-1], c)[:n][::-1]
    out = np.zeros(n + 1)
    out[:n] = -conv * dt ** (-alpha) / math.gamma(2.0 - alpha)
    return Signal(psi.grid, out)


def solve_fractional_ivp(
    alpha: float,
    grid: TimeGrid,
    y0: float,
    rhs: Callable[[float, float], float],
    halt_above: float | None = None,
) -> tuple[np.ndarray, int | None]:
    """March the scalar Volterra equation y = y0 + J^alpha[rhs(t, y)].

    Explicit product-integration (left-endpoint piecewise-constant source,
    exact kernel integrals); first-order in dt.  If halt_above is given,
    stops at the first node whose value exceeds it or turns non-finite and
    returns that node index as halt_step (values beyond are NaN).
    """
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    n = grid.n_steps
    dt = grid.dt
    m = np.arange(0, n + 1, dtype=float)
    w = np.diff(dt**alpha * m**alpha) / math.gamma(alpha + 1.0)
    t = grid.nodes()
    y = np.full(n + 1, np.nan)
    y[0] = y0
    src = np.empty(n)
    for k in range(1, n + 1):
        src[k - 1] = rhs(t[k - 1], y[k - 1])
        val = y0 + float(src[:k] @ w[k - 1 :: -1])
        y[k] = val
        if not math.isfinite(val) or (halt_above is not None and val > halt_above):
            return y, k
    return y, None
