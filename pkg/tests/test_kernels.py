import math
import os
import subprocess
import sys

import numpy as np
import pytest

from slowmotion import _pykernels, kernels
from slowmotion.core import Grid, power_flux

BACKENDS = kernels.backends()


def _odd_datum(n):
    x = np.linspace(0.0, 1.0, n + 2)
    u = 0.5 * np.sin(2 * math.pi * x) + 0.1 * np.sin(4 * math.pi * x)
    u[0] = u[-1] = 0.0
    return 0.5 * (u - u[::-1])


def test_compiled_backend_is_selected_when_built():
    assert kernels.BACKEND in BACKENDS
    if "cython" in BACKENDS:
        assert kernels.BACKEND == "cython"


def test_pure_python_switch():
    env = dict(os.environ, SLOWMOTION_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from slowmotion import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


@pytest.mark.skipif("cython" not in BACKENDS, reason="extension not built")
@pytest.mark.parametrize("flux_kind", ["burgers", "power3"])
def test_backends_agree_on_imex(flux, flux_kind):
    fl = flux if flux_kind == "burgers" else power_flux(3.0)
    n = 200
    u = _odd_datum(n) + 0.05 * np.sin(np.linspace(0, math.pi, n + 2))
    u[0] = u[-1] = 0.0
    dx = 1.0 / (n + 1)
    a = kernels.imex_advance(u, 300, 0.4 * dx, dx, 0.05, fl, backend=BACKENDS["python"])
    b = kernels.imex_advance(u, 300, 0.4 * dx, dx, 0.05, fl, backend=BACKENDS["cython"])
    assert np.max(np.abs(a - b)) < 1e-13


def test_generic_flux_path_matches_builtin(flux):
    from slowmotion.core import FluxFunction

    generic = FluxFunction(flux.eval_f, flux.eval_df, flux.eval_d2f, flux.eval_d3f, name="copy")
    n = 100
    u = _odd_datum(n)
    dx = 1.0 / (n + 1)
    a = kernels.imex_advance(u, 50, 0.3 * dx, dx, 0.08, flux)
    b = kernels.imex_advance(u, 50, 0.3 * dx, dx, 0.08, generic)
    assert np.max(np.abs(a - b)) < 1e-13


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_odd_data_stay_exactly_odd(flux, name):
    n = 201
    u = _odd_datum(n)
    dx = 1.0 / (n + 1)
    out = kernels.imex_advance(u, 500, 0.4 * dx, dx, 0.05, flux, backend=BACKENDS[name])
    np.testing.assert_array_equal(out, -out[::-1])


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_small_amplitude_growth_factor(flux, name):
    # [DERIVED] linearised IMEX step on a sin(pi x): explicit reaction then implicit diffusion,
    # factor (1 + dt) / (1 + dt eps mu) with mu = (4/dx^2) sin^2(pi dx / 2); convection is O(a^2)
    n, eps, steps = 99, 0.1, 200
    dx = 1.0 / (n + 1)
    dt = 0.4 * dx
    x = np.linspace(0.0, 1.0, n + 2)
    a = 1e-9
    u = a * np.sin(math.pi * x)
    u[0] = u[-1] = 0.0
    out = kernels.imex_advance(u, steps, dt, dx, eps, flux, backend=BACKENDS[name])
    mu = 4.0 / dx**2 * math.sin(math.pi * dx / 2) ** 2
    g = ((1 + dt) / (1 + dt * eps * mu)) ** steps
    np.testing.assert_allclose(out[1:-1], g * u[1:-1], rtol=1e-7)


def test_equivariant_solve_matches_dense():
    n = 50
    ab = _pykernels.diffusion_banded(n, 3.7)
    dense = np.diag(ab[1]) + np.diag(ab[0, 1:], 1) + np.diag(ab[2, :-1], -1)
    b = np.random.default_rng(0).normal(size=n)
    np.testing.assert_allclose(_pykernels.symmetric_toeplitz_solve(ab, b), np.linalg.solve(dense, b), rtol=1e-12)


@pytest.mark.skipif("cython" not in BACKENDS, reason="extension not built")
def test_backends_agree_on_monotone_sweeps(flux):
    g = Grid(1.0, 100)
    x = g.nodes
    u = np.maximum(0.0, 0.2 * np.sin(math.pi * x))
    u[-1] = 0.0
    a = kernels.monotone_sweeps(u, 0.1, g.dx, 1.0, 3.0, flux, 0.0, 500, backend=BACKENDS["python"])
    b = kernels.monotone_sweeps(u, 0.1, g.dx, 1.0, 3.0, flux, 0.0, 500, backend=BACKENDS["cython"])
    assert a[1] == b[1]
    assert np.max(np.abs(a[0] - b[0])) < 1e-14
