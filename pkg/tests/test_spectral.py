import math

import numpy as np
import pytest

from fracrd.spectral import (
    DomainSpec,
    apply_frac_power,
    build_basis,
    field_from_coeffs,
    field_from_grid,
    interval,
    projection_overshoot,
    rectangle,
    to_coeffs,
    to_grid,
)


def test_domain_validation():
    with pytest.raises(ValueError):
        DomainSpec(3, (1.0,), (16,), 1.0)
    with pytest.raises(ValueError):
        interval(1.0, 7, 1.0)
    with pytest.raises(ValueError):
        interval(1.0, 64, 0.0)  # p0 must be positive


def test_1d_eigenvalues():
    basis = build_basis(interval(1.0, 65, 1.0), 3)
    assert np.allclose(basis.eigenvalues, [1.0, math.pi**2 + 1, 4 * math.pi**2 + 1])


def test_1d_eigenvalue_long_domain():
    basis = build_basis(interval(2 * math.pi, 65, 0.5), 2)
    assert basis.eigenvalues[1] == pytest.approx(0.75, rel=1e-14)


def test_2d_eigenvalues_by_enumeration():
    basis = build_basis(rectangle(1.0, 1.0, 17, 1.0), 4)
    # oracle: enumerate index pairs and sort
    pairs = sorted(
        (i * math.pi) ** 2 + (j * math.pi) ** 2 + 1.0 for i in range(4) for j in range(4)
    )[:4]
    assert np.allclose(basis.eigenvalues, pairs)
    assert np.allclose(basis.eigenvalues, [1.0, math.pi**2 + 1, math.pi**2 + 1, 2 * math.pi**2 + 1])


@pytest.mark.parametrize("domain,n", [(interval(1.0, 257, 1.0), 64), (rectangle(1.0, 2.0, 33, 0.7), 64)])
def test_discrete_orthonormality(domain, n):
    basis = build_basis(domain, n)
    gram = (basis.phi * basis.quad_w[None, :]) @ basis.phi.T
    assert np.max(np.abs(gram - np.eye(n))) < 1e-10


def test_mode_cap():
    with pytest.raises(ValueError):
        build_basis(interval(1.0, 16, 1.0), 16)  # only grid-1 modes resolvable
    build_basis(interval(1.0, 16, 1.0), 15)


def test_constant_field_projects_to_constant_mode():
    basis = build_basis(interval(1.0, 65, 1.0), 8)
    f = to_coeffs(field_from_grid(basis, 3.0 * np.ones(65)))
    assert f.coeffs[0] == pytest.approx(3.0, rel=1e-14)
    assert np.max(np.abs(f.coeffs[1:])) < 1e-12


def test_cosine_field_single_coefficient():
    basis = build_basis(interval(1.0, 257, 1.0), 16)
    x = basis.axes()[0]
    f = to_coeffs(field_from_grid(basis, np.cos(math.pi * x)))
    # normalization from the discrete Gram: phi_2 = sqrt(2/L) cos(pi x/L)
    assert f.coeffs[1] == pytest.approx(math.sqrt(0.5), rel=1e-12)
    others = np.delete(f.coeffs, 1)
    assert np.max(np.abs(others)) < 1e-10


def test_round_trip_idempotent():
    basis = build_basis(interval(1.0, 129, 1.0), 12)
    x = basis.axes()[0]
    f = field_from_grid(basis, np.exp(np.sin(2 * math.pi * x)))
    g1 = to_grid(to_coeffs(f))
    g2 = to_grid(to_coeffs(to_grid(to_coeffs(f))))
    assert np.array_equal(g1.grid_values, g2.grid_values)


def test_parseval():
    basis = build_basis(interval(1.0, 257, 1.0), 64)
    x = basis.axes()[0]
    f = to_coeffs(field_from_grid(basis, np.exp(-20 * (x - 0.3) ** 2)))
    band = to_grid(f)
    grid_norm = basis.integrate(band.grid_values**2)
    coeff_norm = float(f.coeffs @ f.coeffs)
    assert abs(grid_norm - coeff_norm) < 1e-10


def test_frac_power_identity_and_additivity():
    basis = build_basis(interval(1.0, 65, 1.0), 8)
    f = field_from_coeffs(basis, np.arange(1.0, 9.0))
    assert np.array_equal(apply_frac_power(basis, 0.0, f).coeffs, f.coeffs)
    once = apply_frac_power(basis, 1.0, f).coeffs
    twice = apply_frac_power(basis, 0.5, apply_frac_power(basis, 0.5, f)).coeffs
    assert np.allclose(once, twice, rtol=1e-14)


def test_frac_power_negative_exponent():
    basis = build_basis(interval(1.0, 65, 1.0), 8)
    f = field_from_coeffs(basis, np.ones(8))
    down = apply_frac_power(basis, -1.0, f)
    back = apply_frac_power(basis, 1.0, down)
    assert np.allclose(back.coeffs, f.coeffs, rtol=1e-14)


def test_frac_power_requires_coeffs():
    basis = build_basis(interval(1.0, 65, 1.0), 8)
    with pytest.raises(ValueError):
        apply_frac_power(basis, 1.0, field_from_grid(basis, np.ones(65)))


def test_frac_power_matches_finite_difference_laplacian():
    basis = build_basis(interval(1.0, 513, 1.0), 8)
    mode = 3
    f = field_from_coeffs(basis, np.eye(8)[mode])
    applied = to_grid(apply_frac_power(basis, 1.0, f)).grid_values
    grid = to_grid(f).grid_values
    dx = 1.0 / 512
    lap = np.zeros_like(grid)
    lap[1:-1] = (grid[2:] - 2 * grid[1:-1] + grid[:-2]) / dx**2
    fd = -lap[1:-1] + 1.0 * grid[1:-1]
    # second-order interior agreement with A = -Lap + p0
    assert np.max(np.abs(fd - applied[1:-1])) < 5e-3 * basis.eigenvalues[mode]


def test_neumann_boundary_slope():
    basis = build_basis(interval(1.0, 513, 1.0), 12)
    rng = np.random.default_rng(3)
    f = to_grid(field_from_coeffs(basis, rng.standard_normal(12)))
    v = f.grid_values
    dx = 1.0 / 512
    # 3-point one-sided derivative is O(dx^2) for fields with exact zero slope
    left = (-3 * v[0] + 4 * v[1] - v[2]) / (2 * dx)
    right = (3 * v[-1] - 4 * v[-2] + v[-3]) / (2 * dx)
    scale = np.max(np.abs(v))
    assert abs(left) < 1e-2 * scale
    assert abs(right) < 1e-2 * scale


def test_eigenfunction_relation_via_quadrature():
    # applying A^1 returns lambda_n * mode exactly in coefficient space
    basis = build_basis(interval(1.0, 129, 1.0), 8)
    for mode in range(4):
        f = field_from_coeffs(basis, np.eye(8)[mode])
        out = apply_frac_power(basis, 1.0, f)
        assert out.coeffs[mode] == pytest.approx(basis.eigenvalues[mode], rel=1e-14)


def test_projection_overshoot_nonnegative_data():
    basis = build_basis(interval(1.0, 257, 1.0), 16)
    x = basis.axes()[0]
    over = projection_overshoot(basis, 1.0 + np.cos(math.pi * x))
    assert 0.0 <= over < 1e-10  # band-limited data: no truncation dip


def test_2d_round_trip():
    basis = build_basis(rectangle(1.0, 1.0, 17, 1.0), 32)
    xx, yy = np.meshgrid(*basis.axes(), indexing="ij")
    f = field_from_grid(basis, np.cos(math.pi * xx) * np.cos(2 * math.pi * yy) + 2.0)
    band = to_grid(to_coeffs(f))
    assert np.max(np.abs(band.grid_values - f.grid_values)) < 1e-10
