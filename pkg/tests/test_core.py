import math

import numpy as np
import pytest

from slowmotion.core import (
    Field,
    FluxFunction,
    Grid,
    GridMismatch,
    burgers_flux,
    h1_norm,
    inner_product,
    l1_norm,
    l2_norm,
    linearization_bands,
    power_flux,
    second_difference,
    stationary_residual,
)


def test_grid_nodes_and_spacing():
    g = Grid(2.0, 9)
    assert g.dx == pytest.approx(0.2)
    assert g.nodes[0] == 0.0 and g.nodes[-1] == 2.0
    assert g.nodes.size == 11
    with pytest.raises(ValueError):
        g.nodes[3] = 1.0


def test_grid_rejects_bad_input():
    with pytest.raises(ValueError):
        Grid(1.0, 2)
    with pytest.raises(ValueError):
        Grid(0.0, 10)


def test_refined_keeps_nodes():
    g = Grid(1.0, 9)
    r = g.refined()
    assert r.dx == pytest.approx(g.dx / 2)
    np.testing.assert_array_equal(r.nodes[::2], g.nodes)


def test_field_is_read_only_and_checked(grid):
    f = grid.zeros()
    with pytest.raises(ValueError):
        f.values[1] = 1.0
    with pytest.raises(GridMismatch):
        Field(grid, np.zeros(5))
    with pytest.raises(GridMismatch):
        _ = f + Grid(1.0, 10).zeros()


def test_reflection_is_odd_about_midpoint(grid):
    f = grid.field(lambda x: x * (1 - x) ** 2)
    r = f.reflected()
    np.testing.assert_array_equal(r.values, -f.values[::-1])
    np.testing.assert_array_equal(r.reflected().values, f.values)


def test_flux_construction_checks():
    fl = burgers_flux()
    assert fl.f(2.0) == 2.0 and fl.df(3.0) == 3.0 and fl.d2f(-1.0) == 1.0 and fl.d3f(0.5) == 0.0
    with pytest.raises(ValueError):
        FluxFunction(lambda u: u + 1.0, lambda u: np.ones_like(np.asarray(u, float)),
                     lambda u: np.zeros_like(np.asarray(u, float)), lambda u: np.zeros_like(np.asarray(u, float)))
    with pytest.raises(ValueError):
        # concave
        FluxFunction(lambda u: -0.5 * np.asarray(u) ** 2, lambda u: -np.asarray(u, float),
                     lambda u: -np.ones_like(np.asarray(u, float)), lambda u: np.zeros_like(np.asarray(u, float)))


def test_power_flux_matches_burgers_at_two():
    p, b = power_flux(2.0), burgers_flux()
    u = np.linspace(-1, 1, 11)
    np.testing.assert_allclose(p.f(u), b.f(u))
    np.testing.assert_allclose(p.df(u), b.df(u))
    with pytest.raises(ValueError):
        power_flux(1.0)


def test_power_flux_derivatives_by_differences():
    p = power_flux(3.0)
    u = np.array([-0.7, -0.2, 0.3, 0.9])
    h = 1e-6
    np.testing.assert_allclose((p.f(u + h) - p.f(u - h)) / (2 * h), p.df(u), rtol=1e-8)
    np.testing.assert_allclose((p.df(u + h) - p.df(u - h)) / (2 * h), p.d2f(u), rtol=1e-8)
    np.testing.assert_allclose((p.d2f(u + h) - p.d2f(u - h)) / (2 * h), p.d3f(u), rtol=1e-7)


def test_norms_against_closed_forms(grid):
    # [DERIVED] trapezoid rule on sin^2 is exact for this periodic-like integrand: 1/2
    s = grid.field(lambda x: np.sin(math.pi * x))
    assert l2_norm(s) ** 2 == pytest.approx(0.5, abs=1e-12)
    assert inner_product(s, s) == pytest.approx(l2_norm(s) ** 2)
    # int_0^1 |sin(pi x)| = 2/pi, trapezoid error O(dx^2)
    assert l1_norm(s) == pytest.approx(2 / math.pi, abs=1e-5)
    # |u'|_L2^2 = pi^2/2 added to the L2 part
    assert h1_norm(s) ** 2 == pytest.approx(0.5 + math.pi**2 / 2, rel=1e-4)


def test_second_difference_exact_on_quadratics(grid):
    v = grid.nodes**2
    np.testing.assert_allclose(second_difference(v, grid.dx), 2.0, rtol=1e-9)


def test_residual_of_linear_profile_vanishes_inside(grid, flux):
    # [TRIVIAL] eps*0 - (x-c) + (x-c) = 0
    u = grid.field(lambda x: x - 0.3)
    r = stationary_residual(u, 0.05, flux)
    # rounding in x is amplified by eps/dx^2 ~ 8e3
    assert np.max(np.abs(r.interior)) < 1e-10
    assert r.values[0] == 0.0 and r.values[-1] == 0.0


def test_linearization_bands_are_the_jacobian(grid, flux):
    # dual route: bands against a finite-difference Jacobian of the residual
    g = Grid(1.0, 30)
    rng = np.random.default_rng(3)
    v = np.r_[0.0, rng.normal(size=30) * 0.3, 0.0]
    eps = 0.07
    lo, diag, up = linearization_bands(v, eps, g.dx, flux)
    base = stationary_residual(Field(g, v), eps, flux).interior
    h = 1e-7
    for j in (0, 7, 15, 29):
        w = v.copy()
        w[j + 1] += h
        col = (stationary_residual(Field(g, w), eps, flux).interior - base) / h
        assert col[j] == pytest.approx(diag[j], rel=1e-5, abs=1e-3)
        if j > 0:
            assert col[j - 1] == pytest.approx(up[j - 1], rel=1e-5)
        if j < 29:
            assert col[j + 1] == pytest.approx(lo[j + 1], rel=1e-5)
