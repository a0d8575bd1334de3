"""Neumann eigen-decomposition of A = -Laplacian + p0 on an interval or rectangle.

Closed-form cosine bases keep the eigenpairs exact, so solver error isolates
to the time discretization.  Inner products use the composite trapezoid rule
on the uniform grid; for cosine modes with combined wavenumber below the grid
Nyquist index this quadrature is exactly orthonormal, which is why n_modes is
capped at grid_points - 1 per axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class DomainSpec:
    """Interval [0, L] or rectangle [0, L1] x [0, L2] with the p0 shift."""

    dimension: int
    lengths: tuple[float, ...]
    grid_points: tuple[int, ...]
    p0: float

    def __post_init__(self) -> None:
        if self.dimension not in (1, 2):
            raise ValueError(f"dimension must be 1 or 2, got {self.dimension}")
        object.__setattr__(self, "lengths", tuple(float(v) for v in self.lengths))
        object.__setattr__(self, "grid_points", tuple(int(v) for v in self.grid_points))
        if len(self.lengths) != self.dimension or len(self.grid_points) != self.dimension:
            raise ValueError("lengths/grid_points must have one entry per dimension")
        if any(v <= 0 for v in self.lengths):
            raise ValueError("lengths must be positive")
        if any(g < 8 for g in self.grid_points):
            raise ValueError("grid_points must be >= 8 per axis")
        if not (self.p0 > 0.0):
            raise ValueError("p0 must be positive (A = -Lap + p0 positive definite)")

    @property
    def measure(self) -> float:
        out = 1.0
        for length in self.lengths:
            out *= length
        return out


def interval(length: float = 1.0, grid_points: int = 257, p0: float = 1.0) -> DomainSpec:
    return DomainSpec(1, (length,), (grid_points,), p0)


def rectangle(
    l1: float = 1.0,
    l2: float = 1.0,
    grid_points: int = 65,
    p0: float = 1.0,
) -> DomainSpec:
    return DomainSpec(2, (l1, l2), (grid_points, grid_points), p0)


def _axis_modes(length: float, g: int, k_max: int) -> tuple[np.ndarray, np.ndarray]:
    """1D cosine modes k = 0..k_max-1 sampled on g nodes; rows are modes."""
    x = np.linspace(0.0, length, g)
    k = np.arange(k_max)
    phi = np.cos(np.outer(k, x) * math.pi / length)
    norm = np.where(k == 0, math.sqrt(1.0 / length), math.sqrt(2.0 / length))
    return (k * math.pi / length) ** 2, phi * norm[:, None]


def _trapezoid_weights(length: float, g: int) -> np.ndarray:
    w = np.full(g, length / (g - 1))
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


@dataclass(frozen=True)
class ModeBasis:
    """Sampled eigenpairs of A, sorted by ascending eigenvalue.

    phi has shape (n_modes, n_grid) with the grid flattened in C order for
    2D domains; quad_w are the matching trapezoid weights so that
    coefficients are phi @ (quad_w * values).
    """

    domain: DomainSpec
    eigenvalues: np.ndarray  # (n_modes,)
    indices: np.ndarray  # (n_modes, dimension) cosine wavenumber indices
    phi: np.ndarray  # (n_modes, n_grid)
    quad_w: np.ndarray  # (n_grid,)

    @property
    def n_modes(self) -> int:
        return self.eigenvalues.shape[0]

    @property
    def grid_shape(self) -> tuple[int, ...]:
        return self.domain.grid_points

    def axes(self) -> tuple[np.ndarray, ...]:
        return tuple(
            np.linspace(0.0, length, g)
            for length, g in zip(self.domain.lengths, self.domain.grid_points)
        )

    def project(self, grid_values: np.ndarray) -> np.ndarray:
        flat = np.asarray(grid_values, dtype=float).reshape(-1)
        return self.phi @ (self.quad_w * flat)

    def synthesize(self, coeffs: np.ndarray) -> np.ndarray:
        return (np.asarray(coeffs, dtype=float) @ self.phi).reshape(self.grid_shape)

    def integrate(self, grid_values: np.ndarray) -> float:
        return float(self.quad_w @ np.asarray(grid_values, dtype=float).reshape(-1))


def build_basis(domain: DomainSpec, n_modes: int) -> ModeBasis:
    """First n_modes Neumann eigenpairs of A = -Lap + p0."""
    if n_modes < 1:
        raise ValueError("n_modes must be >= 1")
    per_axis_cap = [g - 1 for g in domain.grid_points]
    resolvable = 1
    for cap in per_axis_cap:
        resolvable *= cap
    if n_modes > resolvable:
        raise ValueError(
            f"n_modes = {n_modes} exceeds the {resolvable} modes resolvable on this grid"
        )

    if domain.dimension == 1:
        lam_x, phi_x = _axis_modes(domain.lengths[0], domain.grid_points[0], per_axis_cap[0])
        order = np.arange(n_modes)
        eigenvalues = lam_x[order] + domain.p0
        indices = order[:, None].copy()
        phi = phi_x[order]
        quad_w = _trapezoid_weights(domain.lengths[0], domain.grid_points[0])
        return ModeBasis(domain, eigenvalues, indices, phi, quad_w)

    lam_x, phi_x = _axis_modes(domain.lengths[0], domain.grid_points[0], per_axis_cap[0])
    lam_y, phi_y = _axis_modes(domain.lengths[1], domain.grid_points[1], per_axis_cap[1])
    pairs = [
        (lam_x[i] + lam_y[j], i, j)
        for i in range(per_axis_cap[0])
        for j in range(per_axis_cap[1])
    ]
    pairs.sort()
    pairs = pairs[:n_modes]
    eigenvalues = np.array([p[0] for p in pairs]) + domain.p0
    indices = np.array([[p[1], p[2]] for p in pairs])
    phi = np.stack([np.outer(phi_x[i], phi_y[j]).reshape(-1) for _, i, j in pairs])
    wx = _trapezoid_weights(domain.lengths[0], domain.grid_points[0])
    wy = _trapezoid_weights(domain.lengths[1], domain.grid_points[1])
    quad_w = np.outer(wx, wy).reshape(-1)
    return ModeBasis(domain, eigenvalues, indices, phi, quad_w)


@dataclass(frozen=True)
class Field:
    """Spatial snapshot stored as grid samples, mode coefficients, or both."""

    basis: ModeBasis
    grid_values: np.ndarray | None = None
    coeffs: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.grid_values is None and self.coeffs is None:
            raise ValueError("a Field needs grid values or coefficients")
        if self.grid_values is not None:
            gv = np.asarray(self.grid_values, dtype=float)
            if gv.shape != self.basis.grid_shape:
                raise ValueError(
                    f"grid shape {gv.shape} does not match domain {self.basis.grid_shape}"
                )
            object.__setattr__(self, "grid_values", gv)
        if self.coeffs is not None:
            cf = np.asarray(self.coeffs, dtype=float)
            if cf.shape != (self.basis.n_modes,):
                raise ValueError(
                    f"coefficient count {cf.shape} does not match {self.basis.n_modes} modes"
                )
            object.__setattr__(self, "coeffs", cf)


def field_from_grid(basis: ModeBasis, values: np.ndarray) -> Field:
    return Field(basis, grid_values=np.asarray(values, dtype=float))


def field_from_coeffs(basis: ModeBasis, coeffs: np.ndarray) -> Field:
    return Field(basis, coeffs=np.asarray(coeffs, dtype=float))


def to_coeffs(field: Field) -> Field:
    """Quadrature projection onto the retained modes (no-op if present)."""
    if field.coeffs is not None:
        return field
    return Field(field.basis, field.grid_values, field.basis.project(field.grid_values))


def to_grid(field: Field) -> Field:
    """Synthesis from coefficients; result is the band-limited projection."""
    f = to_coeffs(field)
    return Field(f.basis, f.basis.synthesize(f.coeffs), f.coeffs)


def apply_frac_power(basis: ModeBasis, gamma: float, field: Field) -> Field:
    """A^gamma as the diagonal map coeff_n -> lambda_n^gamma coeff_n."""
    if field.coeffs is None:
        raise ValueError("apply_frac_power expects the field in coefficient form")
    return Field(basis, coeffs=field.coeffs * basis.eigenvalues**gamma)


def projection_overshoot(basis: ModeBasis, grid_values: np.ndarray) -> float:
    """How far the band-limited projection of nonnegative data dips negative."""
    synth = basis.synthesize(basis.project(grid_values))
    return max(0.0, -float(synth.min()))
