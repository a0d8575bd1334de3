"""Bridge from parsed RunConfig to solver runs and their CSV outputs."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from .blowup import BlowupConfig, BlowupReport, certify_blowup, t_star
from .config import RunConfig
from .evolution import KernelConfig
from .exprs import compile_expression
from .frac_ops import TimeGrid
from .linear_solver import LinearProblem, SolutionHistory, solve_with_coefficient
from .spectral import DomainSpec, Field, ModeBasis, build_basis, field_from_grid
from .system_solver import (
    NonlinearSystem,
    SystemSolution,
    TruncationCutoff,
    preset_system,
    solve_system,
)


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def build_domain(cfg: RunConfig) -> DomainSpec:
    d = cfg.domain
    if d.dim == 1:
        return DomainSpec(1, (d.length,), (d.grid,), d.p0)
    return DomainSpec(2, (d.length, d.length2), (d.grid, d.grid), d.p0)


def build_system(cfg: RunConfig) -> NonlinearSystem:
    s = cfg.system
    overrides = dict(lam=s.lam, d=s.d)
    if s.regime == "blowup":
        overrides.update(regime="blowup", p=s.p, c_p_lambda=s.c_p_lambda)
    if s.preset is not None:
        return preset_system(s.preset, **overrides)
    f = compile_expression(s.f, ("u", "v"))
    g = compile_expression(s.g, ("u", "v"))
    return NonlinearSystem(
        f=lambda u, v: np.broadcast_to(np.asarray(f(u, v), dtype=float), u.shape).copy(),
        g=lambda u, v: np.broadcast_to(np.asarray(g(u, v), dtype=float), u.shape).copy(),
        regime=s.regime,
        name="config",
        **overrides,
    )


def sample_spatial(basis: ModeBasis, expr: str) -> np.ndarray:
    fn = compile_expression(expr, ("x", "y"))
    axes = basis.axes()
    if basis.domain.dimension == 1:
        vals = fn(axes[0], np.zeros_like(axes[0]))
    else:
        xx, yy = np.meshgrid(axes[0], axes[1], indexing="ij")
        vals = fn(xx, yy)
    return np.broadcast_to(np.asarray(vals, dtype=float), basis.grid_shape).copy()


def sample_spacetime(basis: ModeBasis, grid: TimeGrid, expr: str) -> np.ndarray:
    """Samples at panel left endpoints t_0..t_{n-1}, shape (n,) + grid shape."""
    fn = compile_expression(expr, ("x", "y", "t"))
    axes = basis.axes()
    t = grid.nodes()[:-1]
    out = np.empty((t.size, *basis.grid_shape))
    if basis.domain.dimension == 1:
        x = axes[0]
        for j, tj in enumerate(t):
            out[j] = np.broadcast_to(np.asarray(fn(x, np.zeros_like(x), tj), dtype=float), x.shape)
    else:
        xx, yy = np.meshgrid(axes[0], axes[1], indexing="ij")
        for j, tj in enumerate(t):
            out[j] = np.broadcast_to(np.asarray(fn(xx, yy, tj), dtype=float), xx.shape)
    return out


def write_snapshot(path: str, basis: ModeBasis, name: str, time: float, values: np.ndarray) -> None:
    axes = basis.axes()
    with open(path, "w") as fh:
        fh.write(f"# field={name} time={_fmt(time)}\n")
        if basis.domain.dimension == 1:
            fh.write("x,value\n")
            for x, v in zip(axes[0], values.reshape(-1)):
                fh.write(f"{_fmt(x)},{_fmt(v)}\n")
        else:
            fh.write("x,y,value\n")
            for i, x in enumerate(axes[0]):
                for j, y in enumerate(axes[1]):
                    fh.write(f"{_fmt(x)},{_fmt(y)},{_fmt(values[i, j])}\n")


@dataclass
class SystemRunArtifacts:
    solution: SystemSolution
    system: NonlinearSystem
    cutoff: TruncationCutoff
    a: Field
    b: Field
    probe_path: str | None


def run_system(cfg: RunConfig, out_dir: str = ".", snapshot_every: int | None = None) -> SystemRunArtifacts:
    domain = build_domain(cfg)
    basis = build_basis(domain, cfg.domain.modes)
    system = build_system(cfg)
    kernel = KernelConfig(cfg.fractional.alpha, basis)
    grid = TimeGrid(cfg.time.t_final, cfg.time.steps)
    a = field_from_grid(basis, sample_spatial(basis, cfg.system.a))
    b = field_from_grid(basis, sample_spatial(basis, cfg.system.b))
    cutoff = TruncationCutoff(cfg.truncation.level)
    sol = solve_system(
        kernel, system, a, b, cutoff, grid,
        tol=cfg.solver.tol, max_iter=cfg.solver.max_iter,
    )
    probe_path = None
    if cfg.output.probe_csv:
        probe_path = os.path.join(out_dir, cfg.output.probe_csv)
        d = sol.diagnostics
        with open(probe_path, "w") as fh:
            fh.write("t,mass_u,mass_v,min_u,min_v,max_u_plus_lambda_v,l1_u,l1_v\n")
            for k in range(sol.last_valid_step + 1):
                fh.write(
                    ",".join(
                        _fmt(v)
                        for v in (
                            d.t[k], d.mass_u[k], d.mass_v[k], d.min_u[k], d.min_v[k],
                            d.max_u_plus_lambda_v[k], d.l1_u[k], d.l1_v[k],
                        )
                    )
                    + "\n"
                )
    if snapshot_every and cfg.output.snapshot_dir:
        snap_dir = os.path.join(out_dir, cfg.output.snapshot_dir)
        os.makedirs(snap_dir, exist_ok=True)
        for k in range(0, sol.last_valid_step + 1, snapshot_every):
            tk = sol.grid.nodes()[k]
            write_snapshot(
                os.path.join(snap_dir, f"u_step{k:06d}.csv"), basis, "u", tk, sol.u_grid(k)
            )
            write_snapshot(
                os.path.join(snap_dir, f"v_step{k:06d}.csv"), basis, "v", tk, sol.v_grid(k)
            )
    return SystemRunArtifacts(sol, system, cutoff, a, b, probe_path)


def run_linear(cfg: RunConfig, out_dir: str = ".") -> tuple[SolutionHistory, str | None]:
    domain = build_domain(cfg)
    basis = build_basis(domain, cfg.domain.modes)
    kernel = KernelConfig(cfg.fractional.alpha, basis)
    grid = TimeGrid(cfg.time.t_final, cfg.time.steps)
    w0 = field_from_grid(basis, sample_spatial(basis, cfg.linear.w0))
    source = None
    if cfg.linear.source is not None:
        source = sample_spacetime(basis, grid, cfg.linear.source)
    coefficient = None
    if cfg.linear.coefficient is not None:
        coefficient = sample_spacetime(basis, grid, cfg.linear.coefficient)
    problem = LinearProblem(kernel, grid, w0, source, coefficient)
    history = solve_with_coefficient(problem, tol=cfg.solver.tol, max_iter=cfg.solver.max_iter)
    probe_path = None
    if cfg.output.probe_csv:
        probe_path = os.path.join(out_dir, cfg.output.probe_csv)
        vals = history.all_grid_values()
        flat = vals.reshape(vals.shape[0], -1)
        wq = basis.quad_w
        t = grid.nodes()
        with open(probe_path, "w") as fh:
            fh.write("t,mass,min,max,l2\n")
            for k in range(t.size):
                mass = float(flat[k] @ wq)
                l2 = math.sqrt(max(float((flat[k] ** 2) @ wq), 0.0))
                fh.write(
                    f"{_fmt(t[k])},{_fmt(mass)},{_fmt(flat[k].min())},"
                    f"{_fmt(flat[k].max())},{_fmt(l2)}\n"
                )
    return history, probe_path


def blowup_config_from_run(cfg: RunConfig, arts: SystemRunArtifacts) -> BlowupConfig:
    basis = arts.solution.basis
    m0 = basis.integrate(arts.a.grid_values + arts.system.lam * arts.b.grid_values)
    return BlowupConfig(
        alpha=arts.solution.alpha,
        p=arts.system.p,
        lam=arts.system.lam,
        c_p_lambda=arts.system.c_p_lambda,
        m0=m0,
        omega_measure=basis.domain.measure,
    )


def run_blowup(
    cfg: RunConfig,
    out_dir: str = ".",
    sweep_alphas: list[float] | None = None,
    csv_name: str = "blowup.csv",
) -> tuple[list[tuple[float, BlowupReport]], str]:
    alphas = sweep_alphas if sweep_alphas else [cfg.fractional.alpha]
    rows: list[tuple[float, BlowupReport]] = []
    for alpha in alphas:
        cfg.fractional.alpha = alpha
        arts = run_system(cfg, out_dir=out_dir)
        bl_cfg = blowup_config_from_run(cfg, arts)
        rows.append((alpha, certify_blowup(arts.solution, bl_cfg)))
    path = os.path.join(out_dir, csv_name)
    with open(path, "w") as fh:
        fh.write("alpha,p,T_star,detected_T,pass\n")
        for alpha, rep in rows:
            det = "" if rep.detected_time is None else _fmt(rep.detected_time)
            fh.write(
                f"{_fmt(alpha)},{_fmt(cfg.system.p)},{_fmt(rep.t_star)},{det},"
                f"{str(rep.passed).lower()}\n"
            )
    return rows, path
