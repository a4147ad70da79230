import math

import numpy as np
import pytest

from slowmotion.core import Field, Grid, l1_norm, stationary_residual
from slowmotion.stationary import (
    NoBracket,
    OrderViolation,
    bernoulli_invariant,
    build_branch,
    discrete_subsolution,
    epsilon_monotonicity_check,
    maximal_nonnegative,
    monotone_iterate_full,
    newton_polish,
    shoot_interval,
    shoot_positive,
    zero_crossings,
)

# [DERIVED] independent collocation oracle (scipy solve_bvp on eps u'' = u u' - u,
# tol 1e-12, 4001 initial nodes), frozen: (eps, u'(0), u(0.5), u(0.9))
COLLOCATION = [
    (0.1, 0.346445595030123, 0.12451531894647025, 0.04406706137186799),
    (0.05, 0.9978197712529984, 0.4966124812124006, 0.5707222594311014),
]


@pytest.mark.parametrize("eps,slope,u05,u09", COLLOCATION)
def test_shooting_matches_collocation(flux, eps, slope, u05, u09):
    s = shoot_interval(eps, flux, 0.0, 1.0)
    assert s.alpha == pytest.approx(slope, abs=1e-9)
    np.testing.assert_allclose(s.u(np.array([0.5, 0.9])), [u05, u09], atol=1e-9)


def test_shooting_direction_rule(flux):
    assert shoot_interval(0.1, flux, 0.0, 1.0).direction == "forward"
    s = shoot_interval(0.02, flux, 0.0, 1.0)
    assert s.direction == "backward"
    # slope at the left end approaches 1 as eps -> 0
    assert 1.0 - 1e-6 < s.alpha <= 1.0


def test_no_positive_branch_above_threshold(flux):
    # a positive solution on (0, L) needs L > pi sqrt(eps)
    with pytest.raises(NoBracket):
        shoot_interval(1.05 / math.pi**2, flux, 0.0, 1.0)
    shoot_interval(0.95 / math.pi**2, flux, 0.0, 1.0)


@pytest.mark.parametrize("eps", [0.1, 0.05])
def test_bernoulli_invariant(flux, eps):
    s = shoot_interval(eps, flux, 0.0, 1.0)
    x = np.linspace(0.01, 0.99, 99)
    assert np.max(np.abs(bernoulli_invariant(s, x))) < 1e-9


def test_positive_and_negative_branches(flux, grid):
    p = build_branch("positive", 0.05, flux, grid)
    n = build_branch("negative", 0.05, flux, grid)
    np.testing.assert_array_equal(n.field.values, -p.field.values[::-1])
    assert p.residual_l1 < 1e-10 and n.residual_l1 < 1e-10
    assert np.all(p.field.interior > 0.0)
    assert p.zero_crossings == [] and n.zero_crossings == []


def test_polish_moves_sample_by_order_dx2(flux, grid):
    raw = shoot_positive(0.05, flux, 0.0, 1.0, grid)
    pol = newton_polish(raw, 0.05, flux)
    assert l1_norm(stationary_residual(pol, 0.05, flux)) < 1e-10
    assert np.max(np.abs(pol.values - raw.values)) < 5 * grid.dx**2


@pytest.mark.parametrize("kind", ["metastable", "ns"])
def test_sign_changing_branches_at_small_eps(flux, grid, kind):
    b = build_branch(kind, 0.02, flux, grid)
    assert b.residual_l1 < 1e-9
    assert b.zero_crossings == pytest.approx([0.5], abs=1e-12)
    v = b.field.values
    np.testing.assert_allclose(v, -v[::-1], atol=1e-12)
    mid = v[grid.n // 4]
    assert (mid < 0) if kind == "metastable" else (mid > 0)


@pytest.mark.parametrize("kind", ["metastable", "ns"])
def test_sign_changing_branches_absent_at_moderate_eps(flux, grid, kind):
    # half intervals need ell/2 > pi sqrt(eps), i.e. eps < 0.0253
    with pytest.raises(NoBracket):
        build_branch(kind, 0.05, flux, grid)


def test_discrete_subsolution(flux, grid):
    sub = discrete_subsolution(0.05, flux, grid)
    assert np.min(stationary_residual(sub, 0.05, flux).interior) >= -1e-12
    with pytest.raises(NoBracket):
        discrete_subsolution(0.11, flux, grid)


def test_monotone_iteration_agrees_with_shooting(flux):
    g = Grid(1.0, 100)
    eps = 0.05
    sub = discrete_subsolution(eps, flux, g)
    sup = Field(g, np.r_[g.nodes[:-1], 0.0])
    res = monotone_iterate_full(eps, flux, sub, sup, g)
    assert res.nondecreasing
    ref = build_branch("positive", eps, flux, g).field
    assert np.max(np.abs(res.field.values - ref.values)) < 1e-8


def test_monotone_iteration_rejects_bad_bracket(flux):
    g = Grid(1.0, 60)
    sub = discrete_subsolution(0.05, flux, g)
    sup = Field(g, np.r_[g.nodes[:-1], 0.0])
    with pytest.raises(OrderViolation):
        monotone_iterate_full(0.05, flux, sup, sub, g)


def test_maximal_nonnegative_is_zero_without_branch(flux):
    g = Grid(1.0, 100)
    u = maximal_nonnegative(0.2, flux, g)
    assert np.max(np.abs(u.values)) < 1e-9


def test_epsilon_monotonicity(flux):
    g = Grid(1.0, 200)
    rep = epsilon_monotonicity_check(flux, g, [0.2, 0.08, 0.05])
    assert rep.violations == 0
    assert rep.degenerate == [0.2]
    assert rep.min_gap > 0.0
    with pytest.raises(ValueError):
        epsilon_monotonicity_check(flux, g, [0.05, 0.08])


def test_zero_crossings_interpolate():
    g = Grid(1.0, 9)
    u = g.field(lambda x: x - 0.35)
    u = u.with_values(np.r_[0.0, u.interior, 0.0])
    assert zero_crossings(u) == pytest.approx([0.35])
