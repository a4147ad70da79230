import math

import numpy as np
import pytest

from slowmotion.core import Grid, l2_norm
from slowmotion.dynamics import (
    CFLViolation,
    InitialDatum,
    MissingSnapshots,
    evolve,
    exit_time,
    flame_front,
    locate_zero,
    make_initial,
    max_stable_dt,
    predicted_attractor,
    project_interface,
    reduced_ode,
    step_imex,
    theorem_diagnostics,
)
from slowmotion.spectral import SpectralProvider
from slowmotion.stationary import build_branch


@pytest.fixture(scope="module")
def small():
    return Grid(1.0, 200)


@pytest.mark.parametrize("shape", ["scaled_sine", "piecewise_linear"])
def test_initial_sign_pattern(grid, shape):
    u = make_initial(InitialDatum(0.3, shape), grid)
    x = grid.nodes
    assert u.is_dirichlet()
    assert np.all(u.values[(x > 0) & (x < 0.3)] < 0) and np.all(u.values[(x > 0.3) & (x < 1)] > 0)
    c = make_initial(InitialDatum(0.3, shape, orientation="corollary"), grid)
    np.testing.assert_array_equal(c.values, -u.values)
    assert np.max(np.abs(u.values)) == pytest.approx(0.5, abs=2 * grid.dx)


def test_symmetric_datum_is_exactly_odd(grid):
    u = make_initial(InitialDatum(0.5), grid)
    np.testing.assert_array_equal(u.values, -u.values[::-1])


def test_initial_rejects_bad_input(grid):
    with pytest.raises(ValueError):
        make_initial(InitialDatum(1.2), grid)
    with pytest.raises(ValueError):
        make_initial(InitialDatum(0.4, "square"), grid)
    with pytest.raises(ValueError):
        make_initial(InitialDatum(0.4, orientation="upside"), grid)


def test_predicted_attractor():
    assert predicted_attractor(0.4, 1.0) == "positive"
    assert predicted_attractor(0.6, 1.0) == "negative"
    assert predicted_attractor(0.4, 1.0, "corollary") == "negative"
    assert predicted_attractor(0.5, 1.0) is None


def test_cfl_guard(small, flux):
    u = make_initial(InitialDatum(0.4), small)
    lim = max_stable_dt(u, small.dx, flux)
    step_imex(u, lim, 0.08, flux)
    with pytest.raises(CFLViolation):
        step_imex(u, 1.01 * lim, 0.08, flux)
    with pytest.raises(CFLViolation):
        evolve(u, 1.0, 2 * lim, 0.08, flux, None)


def test_step_needs_dirichlet(small, flux):
    with pytest.raises(ValueError):
        step_imex(small.field(lambda x: x), 1e-4, 0.08, flux)


def test_locate_zero_flags():
    g = Grid(1.0, 99)
    u = g.field(lambda x: x - 0.42).with_values(np.r_[0.0, g.interior - 0.42, 0.0])
    xi, flag = locate_zero(u)
    assert xi == pytest.approx(0.42) and flag == ""
    pos = g.field(lambda x: np.sin(math.pi * x))
    pos = pos.with_values(np.r_[0.0, pos.interior, 0.0])
    assert locate_zero(pos) == (0.0, "wall")
    assert locate_zero(-pos) == (1.0, "wall")
    assert math.isnan(locate_zero(g.zeros())[0])
    s3 = g.field(lambda x: np.sin(3 * math.pi * x))
    assert locate_zero(s3.with_values(np.r_[0.0, s3.interior, 0.0]))[1] == "multiple"


def test_reduced_ode_closed_form():
    # [PAPER] theta = -eps ell xi, so xi = xi0 exp(-eps ell t)
    red = reduced_ode(0.4, 10.0, 0.1, "asymptotic", ell=1.0)
    assert red.xi[-1] == pytest.approx(0.4 * math.exp(-1.0), abs=1e-8)
    assert red.beta == pytest.approx(0.1, abs=1e-3)
    half = reduced_ode(0.4, 10.0, 0.05, "asymptotic", ell=1.0)
    assert half.beta / red.beta == pytest.approx(0.5, rel=0.2)


def test_reduced_ode_equilibrium():
    red = reduced_ode(0.0, 5.0, 0.1, "asymptotic")
    assert np.all(red.xi == 0.0)


def test_reduced_ode_needs_provider():
    with pytest.raises(ValueError):
        reduced_ode(0.4, 1.0, 0.1, "spectral")


def test_exit_time_closed_form():
    # [TRIVIAL] ln(xi0 / (xi0 - delta)) / (eps ell)
    red = reduced_ode(0.4, 40.0, 0.1, "asymptotic", n_out=2001)
    t = exit_time(red, 0.1)
    assert t == pytest.approx(math.log(0.4 / 0.3) / 0.1, rel=0.02)
    with pytest.raises(ValueError):
        exit_time(red, 0.0)


def test_projection_on_family_element(small, flux):
    p = SpectralProvider(0.05, flux, small)
    u = p.state(0.4).field
    xi, res = project_interface(u, p, locate_zero(u)[0])
    assert xi == pytest.approx(0.4, abs=1e-6)
    assert res < 1e-10


def test_records_on_the_stride_lattice(small, flux):
    u = make_initial(InitialDatum(0.4), small)
    tr = evolve(u, 2.0, None, 0.08, flux, None, stride=0.25)
    assert tr.times == [0.25 * j for j in range(9)]
    assert (0.25 / tr.dt) == pytest.approx(round(0.25 / tr.dt), abs=1e-9)


def test_symmetric_datum_is_pinned(small, flux):
    u = make_initial(InitialDatum(0.5), small)
    tr = evolve(u, 20.0, None, 0.08, flux, None, stride=1.0)
    assert all(x == 0.5 for x in tr.xi_zero)


def test_corollary_attractor(grid, flux):
    # [DERIVED] desk run: negative-left datum with a0 < ell/2 settles on U_+
    u = make_initial(InitialDatum(0.4), grid)
    tr = evolve(u, 100.0, None, 0.08, flux, None, stride=5.0)
    target = build_branch("positive", 0.08, flux, grid).field
    assert l2_norm(tr.final - target) < 0.05


def test_refinement_changes_interface_little(flux):
    # halving dx (and with it the automatic dt) moves xi_proj(T) by < 1e-3 ell
    out = []
    for n in (400, 801):
        g = Grid(1.0, n)
        tr = evolve(make_initial(InitialDatum(0.4), g), 10.0, None, 0.08, flux,
                    SpectralProvider(0.08, flux, g), stride=0.5)
        out.append(tr.xi_proj[-1])
    assert abs(out[0] - out[1]) < 1e-3


def test_projection_invariant_holds_along_run(small, flux):
    p = SpectralProvider(0.08, flux, small)
    tr = evolve(make_initial(InitialDatum(0.4), small), 10.0, None, 0.08, flux, p)
    assert np.all(np.asarray(tr.proj_residual) < 1e-6 * np.asarray(tr.u_l2))


def test_theorem_diagnostics(small, flux):
    p = SpectralProvider(0.08, flux, small, k_max=6)
    u0 = p.state(0.4).field
    tr = evolve(u0, 3.0, None, 0.08, flux, p, stride=0.5)
    with pytest.raises(MissingSnapshots):
        theorem_diagnostics(tr, p)
    tr = evolve(u0, 3.0, None, 0.08, flux, p, stride=0.5, store_all_snapshots=True)
    rep = theorem_diagnostics(tr, p)
    # v0 = 0 up to the projection tolerance, so z vanishes
    assert rep.v0_l2 < 1e-12
    assert np.max(rep.z_l2) < 1e-10
    assert np.all(np.isfinite(rep.r_over_omega))
    assert rep.quadratic_constant > 0.0


def test_flame_front(small):
    s = small.field(lambda x: np.sin(math.pi * x))
    y = flame_front(s)
    assert y.values[0] == 0.0
    assert y.values[-1] == pytest.approx(-2.0 / math.pi, abs=1e-4)
