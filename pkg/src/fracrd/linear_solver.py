"""Scalar linear problem d_t^alpha (w - w0) + A w = F, solved in mild form.

Per mode, the source is integrated against the K kernel exactly on each
panel (piecewise-constant-in-time source, left endpoint), which removes the
t^{alpha-1} singularity from the error budget entirely: the scheme is exact
for single eigenmodes with F = 0 and for time-constant sources, and first
order in dt otherwise.  A bounded zeroth-order coefficient c(x,t) is handled
by Picard iteration on the Volterra form with the operator shifted by c0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .evolution import KernelConfig
from .frac_ops import TimeGrid
from .mittag_leffler import MlParams, ml
from .spectral import Field, ModeBasis, projection_overshoot, to_coeffs


@dataclass(frozen=True)
class KernelTable:
    """Per-mode S multipliers and exact K-kernel panel integrals on a grid.

    s[i, m] = E_{a,1}(-lam_i t_m^a);  dH[i, m-1] = H_i(t_m) - H_i(t_{m-1})
    with H_i the antiderivative of the K multiplier, so step updates are
    pure convolutions with no further Mittag-Leffler evaluations.
    """

    alpha: float
    eigenvalues: np.ndarray
    grid: TimeGrid
    s: np.ndarray  # (n_modes, n_nodes)
    dH: np.ndarray  # (n_modes, n_steps)


_TABLE_CACHE: dict[tuple, KernelTable] = {}
_TABLE_CACHE_MAX = 16


def build_kernel_table(alpha: float, eigenvalues: np.ndarray, grid: TimeGrid) -> KernelTable:
    """Tables are memoized: Picard sweeps and repeat runs reuse them."""
    lam = np.asarray(eigenvalues, dtype=float)
    key = (alpha, grid.t_final, grid.n_steps, lam.tobytes())
    hit = _TABLE_CACHE.get(key)
    if hit is not None:
        return hit
    table = _build_kernel_table(alpha, lam, grid)
    if len(_TABLE_CACHE) >= _TABLE_CACHE_MAX:
        _TABLE_CACHE.pop(next(iter(_TABLE_CACHE)))
    _TABLE_CACHE[key] = table
    return table


def _build_kernel_table(alpha: float, eigenvalues: np.ndarray, grid: TimeGrid) -> KernelTable:
    lam = np.asarray(eigenvalues, dtype=float)
    t = grid.nodes()
    params = MlParams(alpha, 1.0)
    s = np.empty((lam.size, t.size))
    s[:, 0] = 1.0
    ta = t[1:] ** alpha
    for i, lam_i in enumerate(lam):
        if lam_i == 0.0:
            s[i, 1:] = 1.0
        else:
            s[i, 1:] = [ml(params, -lam_i * tj) for tj in ta]
    dH = np.empty((lam.size, grid.n_steps))
    for i, lam_i in enumerate(lam):
        if lam_i == 0.0:
            H = t**alpha / math.gamma(alpha + 1.0)
            dH[i] = np.diff(H)
        else:
            dH[i] = -np.diff(s[i]) / lam_i
    return KernelTable(alpha, lam, grid, s, dH)


def mild_step_coeffs(table: KernelTable, w0_coeffs: np.ndarray, source_coeffs: np.ndarray | None) -> np.ndarray:
    """History of w coefficients, shape (n_nodes, n_modes).

    source_coeffs[j] holds the source at t_j (left endpoint of panel j),
    shape (n_steps, n_modes) or None for the source-free problem.
    """
    n = table.grid.n_steps
    n_modes = table.eigenvalues.size
    out = np.empty((n + 1, n_modes))
    out[:] = table.s.T * w0_coeffs[None, :]
    if source_coeffs is not None:
        if source_coeffs.shape != (n, n_modes):
            raise ValueError(
                f"source must be sampled at the {n} panel left endpoints, got {source_coeffs.shape}"
            )
        for i in range(n_modes):
            conv = np.convolve(source_coeffs[:, i], table.dH[i])[:n]
            out[1:, i] += conv
    return out


@dataclass
class LinearProblem:
    """Problem data in grid space; the solver projects onto the basis.

    source holds F(., t_j) sampled at the panel left endpoints t_0..t_{n-1}
    (shape (n_steps,) + grid shape); coefficient likewise when present.
    """

    cfg: KernelConfig
    grid: TimeGrid
    w0: Field
    source: np.ndarray | None = None
    coefficient: np.ndarray | None = None
    c0: float | None = None

    @property
    def basis(self) -> ModeBasis:
        return self.cfg.basis

    def __post_init__(self) -> None:
        gshape = self.basis.grid_shape
        n = self.grid.n_steps
        if self.source is not None:
            self.source = np.asarray(self.source, dtype=float)
            if self.source.shape != (n, *gshape):
                raise ValueError(
                    f"source shape {self.source.shape} must be ({n}, *{gshape})"
                )
        if self.coefficient is not None:
            self.coefficient = np.asarray(self.coefficient, dtype=float)
            if self.coefficient.shape != (n, *gshape):
                raise ValueError(
                    f"coefficient shape {self.coefficient.shape} must be ({n}, *{gshape})"
                )
            if not np.all(np.isfinite(self.coefficient)):
                raise ValueError("coefficient must have finite sup-norm")


@dataclass
class SolutionHistory:
    basis: ModeBasis
    grid: TimeGrid
    coeffs: np.ndarray  # (n_nodes, n_modes)
    picard_iterations: int = 0
    residual_trace: list[float] = dc_field(default_factory=list)

    def grid_values(self, step: int) -> np.ndarray:
        return self.basis.synthesize(self.coeffs[step])

    def all_grid_values(self) -> np.ndarray:
        """Synthesized solution, shape (n_nodes,) + grid shape."""
        flat = self.coeffs @ self.basis.phi
        return flat.reshape((self.coeffs.shape[0], *self.basis.grid_shape))


class PicardConvergenceError(RuntimeError):
    """Picard iteration failed to reach tolerance; carries the residual trace.

    Usually a signal that the time horizon or dt must shrink.
    """

    def __init__(self, message: str, residuals: list[float]):
        super().__init__(message)
        self.residuals = residuals


def _project_steps(basis: ModeBasis, steps_grid: np.ndarray) -> np.ndarray:
    flat = steps_grid.reshape(steps_grid.shape[0], -1)
    return (flat * basis.quad_w[None, :]) @ basis.phi.T


def solve_mild(problem: LinearProblem, table: KernelTable | None = None) -> SolutionHistory:
    """Mild-solution march for the pure source case (coefficient absent)."""
    if problem.coefficient is not None:
        raise ValueError("solve_mild handles the coefficient-free problem; use solve_with_coefficient")
    basis = problem.basis
    if table is None:
        table = build_kernel_table(problem.cfg.alpha, basis.eigenvalues, problem.grid)
    w0c = to_coeffs(problem.w0).coeffs
    src = None
    if problem.source is not None:
        src = _project_steps(basis, problem.source)
    coeffs = mild_step_coeffs(table, w0c, src)
    return SolutionHistory(basis, problem.grid, coeffs)


def solve_with_coefficient(
    problem: LinearProblem,
    tol: float = 1e-10,
    max_iter: int = 200,
) -> SolutionHistory:
    """Picard iteration for d_t^alpha (w - w0) + A w = F + c w.

    The operator is shifted to A + c0 with c0 >= sup|c| (auto-chosen as
    sup|c| + 1) so the iteration source (c0 + c) w stays positive, matching
    the construction that yields the non-negativity lemma.  Convergence is
    measured as the relative change of successive iterates in discrete
    Linf(L2); the triangular structure of the memory integral makes the
    iteration superlinearly convergent on any fixed grid.
    """
    if problem.coefficient is None or not np.any(problem.coefficient):
        return solve_mild(
            LinearProblem(problem.cfg, problem.grid, problem.w0, problem.source)
        )
    basis = problem.basis
    grid = problem.grid
    n = grid.n_steps
    c = problem.coefficient.reshape(n, -1)
    c0 = problem.c0 if problem.c0 is not None else float(np.max(np.abs(c))) + 1.0
    table = build_kernel_table(problem.cfg.alpha, basis.eigenvalues + c0, grid)
    w0c = to_coeffs(problem.w0).coeffs
    base_src = np.zeros((n, basis.n_modes))
    if problem.source is not None:
        base_src = _project_steps(basis, problem.source)

    coeffs = mild_step_coeffs(table, w0c, base_src)  # iterate 0: drop the c-term
    scale = max(float(np.max(np.linalg.norm(coeffs, axis=1))), 1e-30)
    residuals: list[float] = []
    for iteration in range(1, max_iter + 1):
        w_grid = (coeffs[:n] @ basis.phi)  # (n, n_grid) at panel left endpoints
        src = base_src + ((c0 + c) * w_grid * basis.quad_w[None, :]) @ basis.phi.T
        new_coeffs = mild_step_coeffs(table, w0c, src)
        resid = float(np.max(np.linalg.norm(new_coeffs - coeffs, axis=1)))
        scale = max(float(np.max(np.linalg.norm(new_coeffs, axis=1))), 1e-30)
        residuals.append(resid / scale)
        coeffs = new_coeffs
        if residuals[-1] < tol:
            return SolutionHistory(basis, grid, coeffs, iteration, residuals)
    raise PicardConvergenceError(
        f"Picard did not reach tol={tol} in {max_iter} iterations "
        f"(last residual {residuals[-1]:.3e}); shrink the horizon or dt",
        residuals,
    )


@dataclass(frozen=True)
class NonnegativityReport:
    min_value: float
    min_step: int
    min_index: int
    tolerance: float
    allowance: float
    passed: bool


def check_nonnegativity(
    history: SolutionHistory,
    problem: LinearProblem,
    tol_base: float = 1e-8,
) -> NonnegativityReport:
    """Verify min w >= -(tol_base + projection allowance) over all nodes.

    The allowance is measured, not guessed: projecting nonnegative data onto
    finitely many modes can dip negative, so the overshoot of w0 (plus the
    worst source overshoot scaled by the kernel mass) is granted.
    """
    basis = history.basis
    vals = history.all_grid_values()
    flat = vals.reshape(vals.shape[0], -1)
    k = int(np.argmin(flat.min(axis=1)))
    idx = int(np.argmin(flat[k]))
    mn = float(flat[k, idx])
    allowance = projection_overshoot(basis, problem.w0.grid_values)
    if problem.source is not None:
        lam1 = float(basis.eigenvalues.min())
        worst = max(
            projection_overshoot(basis, problem.source[j]) for j in range(problem.source.shape[0])
        )
        allowance += worst / lam1  # source overshoot enters through int K <= 1/lam_1
    tol = tol_base + allowance
    return NonnegativityReport(mn, k, idx, tol, allowance, mn >= -tol)
