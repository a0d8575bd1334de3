"""One-shot verification runner tying every module's invariants together.

Each check is a pure function of a seeded generator, so a fixed seed gives
byte-identical reports.  The suite is the runtime counterpart of the pytest
suite: smaller problem sizes, every theorem-backed property exercised once.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import quad
from scipy.special import erfc

from .blowup import BlowupConfig, certify_blowup, lower_solution, t_star
from .evolution import KernelConfig, kernel_integral_exact, verify_norm_estimates
from .frac_ops import Signal, TimeGrid, caputo_derivative, rl_integral, solve_fractional_ivp
from .linear_solver import LinearProblem, check_nonnegativity, solve_mild, solve_with_coefficient
from .mittag_leffler import MlParams, ml, ml_kernel_pair
from .spectral import build_basis, field_from_grid, interval, to_coeffs, to_grid
from .system_solver import (
    TruncationCutoff,
    check_apriori_bounds,
    check_mass_identity,
    preset_system,
    solve_system,
    truncation_independence,
    weak_residual,
)


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float


def _check_ml(rng: np.random.Generator) -> tuple[bool, str]:
    worst = 0.0
    for x in (0.1, 0.5, 1.0, 2.0, 5.0):
        ref = math.exp(x * x) * erfc(x)
        worst = max(worst, abs(ml(MlParams(0.5, 1.0), -x) - ref) / ref)
    for z in np.linspace(-30.0, 3.0, 23):
        ref = math.exp(z)
        worst = max(worst, abs(ml(MlParams(1.0, 1.0), float(z)) - ref) / ref)
    ok = worst < 1e-9
    # strict decay of the S multiplier in t
    for _ in range(20):
        alpha = rng.uniform(0.1, 0.95)
        lam = rng.uniform(0.1, 50.0)
        t1 = rng.uniform(0.05, 1.0)
        t2 = t1 * rng.uniform(1.1, 3.0)
        s1, _ = ml_kernel_pair(alpha, lam, t1)
        s2, _ = ml_kernel_pair(alpha, lam, t2)
        ok &= s2 < s1
    # derivative and exact-integral identities on random samples
    dworst = iworst = 0.0
    for _ in range(25):
        alpha = rng.uniform(0.15, 0.9)
        lam = rng.uniform(0.2, 30.0)
        t = rng.uniform(0.05, 2.0)
        h = 1e-4 * t
        sp, _ = ml_kernel_pair(alpha, lam, t + h)
        sm, _ = ml_kernel_pair(alpha, lam, t - h)
        _, kv = ml_kernel_pair(alpha, lam, t)
        dworst = max(dworst, abs((sp - sm) / (2 * h) + lam * kv) / (lam * kv))
        q, _ = quad(lambda s: ml(MlParams(alpha, alpha), -lam * s) / alpha, 0.0, t**alpha,
                    epsabs=1e-13, epsrel=1e-12)
        ref = kernel_integral_exact(alpha, lam, t)
        iworst = max(iworst, abs(q - ref) / abs(ref))
    ok = ok and dworst < 1e-6 and iworst < 1e-8
    return ok, f"closed forms {worst:.1e}, derivative {dworst:.1e}, integral {iworst:.1e}"


def _check_frac_ops(rng: np.random.Generator) -> tuple[bool, str]:
    grid = TimeGrid(1.0, 512)
    t = grid.nodes()
    s = Signal(grid, np.sin(t))
    twice = rl_integral(0.5, rl_integral(0.5, s))
    once = rl_integral(1.0, s)
    semigroup = float(np.max(np.abs(twice.values - once.values)))
    errs = []
    for n in (512, 1024):
        g = TimeGrid(1.0, n)
        tt = g.nodes()
        sig = Signal(g, tt**2)
        back = caputo_derivative(0.7, rl_integral(0.7, sig))
        errs.append(float(np.max(np.abs(back.values[1:] - sig.values[1:])) / np.max(sig.values)))
    inv_ok = errs[0] < 2e-2 and errs[1] < 0.75 * errs[0]
    vals = rng.uniform(0.0, 1.0, grid.n_nodes)
    pos = float(rl_integral(0.3, Signal(grid, vals)).values.min())
    ok = semigroup < 1e-4 and inv_ok and pos >= 0.0
    return ok, f"semigroup {semigroup:.1e}, inversion {errs[0]:.1e}->{errs[1]:.1e}, min J {pos:.1e}"


def _check_spectral(rng: np.random.Generator) -> tuple[bool, str]:
    worst_gram = 0.0
    for basis in (build_basis(interval(1.0, 257, 1.0), 64),
                  build_basis(interval(2 * math.pi, 257, 0.5), 32)):
        gram = (basis.phi * basis.quad_w[None, :]) @ basis.phi.T
        worst_gram = max(worst_gram, float(np.max(np.abs(gram - np.eye(basis.n_modes)))))
    basis = build_basis(interval(1.0, 257, 1.0), 64)
    x = basis.axes()[0]
    f = field_from_grid(basis, np.exp(-10 * (x - 0.4) ** 2))
    fc = to_coeffs(f)
    parseval = abs(
        float(fc.coeffs @ fc.coeffs)
        - basis.integrate(to_grid(fc).grid_values ** 2)
    )
    g1 = to_grid(fc)
    g2 = to_grid(to_coeffs(g1))
    idem = float(np.max(np.abs(g1.grid_values - g2.grid_values)))
    ok = worst_gram < 1e-10 and parseval < 1e-10 and idem < 1e-13
    return ok, f"gram {worst_gram:.1e}, parseval {parseval:.1e}, idempotence {idem:.1e}"


def _check_kernels(rng: np.random.Generator) -> tuple[bool, str]:
    # dense low eigenvalue ladder (spacing ~0.25): the envelope's maximizing
    # mode lambda* ~ t^{-alpha} must be resolvable across the fit decade
    basis = build_basis(interval(2 * math.pi, 257, 0.5), 64)
    rows = []
    ok = True
    for alpha in (0.5, 0.8):
        cfg = KernelConfig(alpha, basis)
        for gamma in (0.0, 0.5, 1.0):
            rep = verify_norm_estimates(cfg, gamma, trials=8, rng=rng)
            ok &= rep.passed
            rows.append(f"a={alpha} g={gamma}: S {rep.s_slope:+.3f}>={rep.s_bound - .05:+.3f}"
                        f" K {rep.k_slope:+.3f}>={rep.k_bound - .05:+.3f}")
    return ok, "; ".join(rows[:3]) + " ..."


def _check_linear(rng: np.random.Generator) -> tuple[bool, str]:
    basis = build_basis(interval(1.0, 129, 1.0), 8)
    grid = TimeGrid(1.0, 256)
    worst = 0.0
    for alpha in (0.3, 0.5, 0.7, 0.9):
        cfg = KernelConfig(alpha, basis)
        mode = 3
        w0 = field_from_grid(basis, basis.synthesize(np.eye(basis.n_modes)[mode]))
        hist = solve_mild(LinearProblem(cfg, grid, w0))
        lam = basis.eigenvalues[mode]
        ref = np.array([1.0] + [ml(MlParams(alpha, 1.0), -lam * t**alpha) for t in grid.nodes()[1:]])
        worst = max(worst, float(np.max(np.abs(hist.coeffs[:, mode] - ref))))
    # random nonneg data + bounded coefficient stay nonnegative (8 trials)
    trials_ok = True
    x = basis.axes()[0]
    for _ in range(8):
        alpha = rng.uniform(0.3, 0.9)
        cfg = KernelConfig(alpha, basis)
        w0 = field_from_grid(basis, 0.2 + rng.uniform(0.0, 1.0) * (1 + np.cos(math.pi * x * rng.integers(1, 3))))
        n = grid.n_steps
        src = 0.5 * rng.uniform(0.0, 1.0, (n, 1)) * (1 + np.sin(math.pi * x)[None, :])
        coef = rng.uniform(-1.0, 1.0) * np.ones((n, x.size))
        prob = LinearProblem(cfg, grid, w0, src, coef)
        hist = solve_with_coefficient(prob)
        rep = check_nonnegativity(hist, prob)
        trials_ok &= rep.passed
    ok = worst < 1e-9 and trials_ok
    return ok, f"single-mode exactness {worst:.1e}, nonneg trials {'pass' if trials_ok else 'FAIL'}"


def _check_system(rng: np.random.Generator) -> tuple[bool, str]:
    basis = build_basis(interval(1.0, 193, 1.0), 48)
    cfg = KernelConfig(0.7, basis)
    grid = TimeGrid(1.0, 512)
    system = preset_system("gray_scott")
    x = basis.axes()[0]
    a = field_from_grid(basis, 1.0 + 0.1 * np.cos(math.pi * x))
    b = field_from_grid(basis, 0.5 + 0.1 * np.cos(math.pi * x))
    cutoff = TruncationCutoff(10.0)
    sol = solve_system(cfg, system, a, b, cutoff, grid)
    apriori = check_apriori_bounds(sol, system, a, b)
    mass = check_mass_identity(sol, system, cutoff)
    weak = weak_residual(sol, system, cutoff, a, b)
    trunc = truncation_independence(cfg, system, a, b, grid, (10.0, 20.0))
    ok = apriori.passed and mass.passed and weak.passed and trunc.passed
    return ok, (
        f"apriori max(u+lv)={apriori.max_u_plus_lambda_v:.6f}<={apriori.sup_bound:.6f}+tol, "
        f"mass {mass.max_mismatch:.1e}, weak {weak.max_residual:.1e}, "
        f"trunc {trunc.max_difference:.1e}"
    )


def _check_blowup(rng: np.random.Generator) -> tuple[bool, str]:
    ts = t_star(BlowupConfig(0.5, 2.0, 1.0, 1.0, 2.0, 1.0))
    ok = abs(ts - 1.0 / math.pi) < 1e-12
    basis = build_basis(interval(1.0, 65, 1.0), 8)
    cfg = KernelConfig(0.5, basis)
    grid = TimeGrid(0.35, 359)
    system = preset_system("quadratic_blowup")
    ones = field_from_grid(basis, np.ones(65))
    sol = solve_system(cfg, system, ones, ones, TruncationCutoff(1e6), grid)
    bl_cfg = BlowupConfig(0.5, 2.0, 1.0, 1.0, 2.0, 1.0)
    rep = certify_blowup(sol, bl_cfg)
    ok &= rep.passed
    low = lower_solution(bl_cfg, TimeGrid(0.9 * ts, 512))
    ok &= low.max_violation < 0.5  # L1-scheme discretization slack at this n
    # ordered right-hand sides stay ordered (comparison lemma, 10 trials)
    order_ok = True
    g2 = TimeGrid(0.5, 256)
    for _ in range(10):
        c0 = rng.uniform(0.05, 0.3)
        p = rng.uniform(1.1, 2.0)
        y0 = rng.uniform(0.5, 1.5)
        gap = rng.uniform(0.0, 0.5)
        hi, _ = solve_fractional_ivp(0.5, g2, y0, lambda t, y: c0 * y**p + gap)
        lo, _ = solve_fractional_ivp(0.5, g2, y0, lambda t, y: c0 * y**p)
        order_ok &= bool(np.all(hi >= lo - 1e-6))
    ok &= order_ok
    det = "none" if rep.detected_time is None else f"{rep.detected_time:.4f}"
    return ok, f"T*={ts:.6f}, detected {det}, lower-gap {rep.max_lower_violation:.1e}"


_CHECKS: list[tuple[str, Callable[[np.random.Generator], tuple[bool, str]]]] = [
    ("ml-identities", _check_ml),
    ("frac-ops", _check_frac_ops),
    ("spectral", _check_spectral),
    ("kernels", _check_kernels),
    ("linear", _check_linear),
    ("system", _check_system),
    ("blowup", _check_blowup),
]


def run_verification_suite(
    seed: int = 0,
    only: str | None = None,
    parallel: bool = False,
) -> tuple[int, list[CheckResult]]:
    """Run the checks (optionally filtered by name substring) and report.

    Returns (exit_code, results); exit code 0 only when every check passed.
    Each check gets its own generator seeded from (seed, index) so results
    do not depend on execution order.
    """
    selected = [
        (i, name, fn) for i, (name, fn) in enumerate(_CHECKS)
        if only is None or only in name
    ]

    def run_one(item):
        i, name, fn = item
        rng = np.random.default_rng([seed, i])
        start = time.perf_counter()
        try:
            passed, detail = fn(rng)
        except Exception as exc:  # a crashed check is a failed check
            passed, detail = False, f"raised {type(exc).__name__}: {exc}"
        return CheckResult(name, passed, detail, time.perf_counter() - start)

    if parallel:
        with ThreadPoolExecutor(max_workers=min(4, len(selected) or 1)) as pool:
            results = list(pool.map(run_one, selected))
    else:
        results = [run_one(item) for item in selected]
    exit_code = 0 if results and all(r.passed for r in results) else 1
    return exit_code, results


def format_report(results: list[CheckResult]) -> str:
    lines = []
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        lines.append(f"[{status}] {r.name:14s} ({r.seconds:6.2f}s)  {r.detail}")
    n_pass = sum(r.passed for r in results)
    lines.append(f"{n_pass}/{len(results)} checks passed")
    return "\n".join(lines)
