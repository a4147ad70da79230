import math

import numpy as np
import pytest
import scipy.linalg

from slowmotion.core import Grid, inner_product
from slowmotion.family import UnresolvedLayer, approx_state, zero_state
from slowmotion.spectral import (
    SignConditionViolated,
    SpectralProvider,
    TridiagonalOperator,
    _eigensolve_dense,
    assemble,
    eigensolve,
    lambda1_asymptotic,
    self_adjoint_conjugate,
    symmetrize,
    validate_H2,
)


def test_zero_state_matches_discrete_formula(flux, grid):
    # [DERIVED] three-point Dirichlet Laplacian: mu_k = (4/dx^2) sin^2(k pi dx / 2)
    eps = 0.1
    sd = eigensolve(assemble(eps, zero_state(eps, grid), flux), 8)
    k = np.arange(1, 9)
    exact = 1.0 - eps * 4.0 / grid.dx**2 * np.sin(k * math.pi * grid.dx / 2) ** 2
    np.testing.assert_allclose(sd.lambdas, exact, atol=1e-10)
    for j in range(8):
        s = np.sin((j + 1) * math.pi * grid.nodes)
        s /= np.max(np.abs(s))  # phi is scaled to unit nodal max
        assert np.max(np.abs(sd.phis[j].values - s)) < 1e-10


def test_zero_state_continuum_limit(flux, grid):
    # [TRIVIAL] 1 - eps k^2 pi^2 up to the O(eps k^4 pi^4 dx^2 / 12) stencil error
    sd = eigensolve(assemble(0.1, zero_state(0.1, grid), flux), 5)
    for k in range(1, 6):
        bound = 0.1 * (k * math.pi) ** 4 * grid.dx**2 / 12 * 1.01
        assert abs(sd.lambdas[k - 1] - (1 - 0.1 * (k * math.pi) ** 2)) < bound


def test_biorthogonality_and_normalization(flux, grid):
    st = approx_state(0.05, 0.4, grid)
    sd = eigensolve(assemble(0.05, st, flux), 8)
    gram = np.array([[inner_product(p, q) for q in sd.phis] for p in sd.psis])
    np.testing.assert_allclose(gram, np.eye(8), atol=1e-9)
    assert sd.h2_normalized
    assert inner_product(sd.psis[0], st.d_xi) == pytest.approx(1.0, abs=1e-12)
    assert np.all(np.diff(sd.lambdas) < 0)


def test_symmetric_route_agrees_with_dense(flux, grid):
    # dual route: eigh_tridiagonal on the symmetrized matrix vs nonsymmetric LAPACK
    g = Grid(1.0, 200)
    op = assemble(0.05, approx_state(0.05, 0.35, g), flux)
    a = eigensolve(op, 6)
    b = _eigensolve_dense(op, 6, True)
    np.testing.assert_allclose(a.lambdas, b.lambdas, rtol=1e-9, atol=1e-9)
    for p, q in zip(a.phis, b.phis):
        assert np.max(np.abs(p.values - q.values)) < 1e-6


def test_self_adjoint_conjugate_spectrum(flux):
    g = Grid(1.0, 150)
    op = assemble(0.05, approx_state(0.05, 0.5, g), flux)
    d, e = self_adjoint_conjugate(op)
    w = scipy.linalg.eigvalsh_tridiagonal(d, e)
    full = np.sort(np.linalg.eigvals(op.dense()).real)
    np.testing.assert_allclose(np.sort(w), 0.05 * full, rtol=1e-8, atol=1e-8)


def test_sign_condition(grid):
    n = 5
    lo = np.array([0.0, 1.0, -1.0, 1.0, 1.0])
    up = np.array([1.0, 1.0, 1.0, 1.0, 0.0])
    op = TridiagonalOperator(lo, -2.0 * np.ones(n), up, Grid(1.0, n), 0.1)
    with pytest.raises(SignConditionViolated):
        symmetrize(op)


def test_matvec_matches_dense(flux):
    g = Grid(1.0, 60)
    op = assemble(0.1, approx_state(0.1, 0.5, g), flux)
    v = np.random.default_rng(1).normal(size=60)
    np.testing.assert_allclose(op.matvec(v.copy()), op.dense() @ v, atol=1e-9)
    np.testing.assert_allclose(op.rmatvec(v.copy()), op.dense().T @ v, atol=1e-9)


def test_unresolved_layer(flux):
    with pytest.raises(UnresolvedLayer):
        assemble(0.01, approx_state(0.01, 0.5, Grid(1.0, 100)), flux)


def test_lambda1_asymptotic_symmetry():
    assert lambda1_asymptotic(0.05, 0.3, 1.0, 1.0) == pytest.approx(lambda1_asymptotic(0.05, 0.7, 1.0, 1.0))
    assert lambda1_asymptotic(0.02, 0.5, 1.0, 0.0) == pytest.approx(2 * 0.25 * math.exp(-0.25 / 0.04) / 0.02)


def test_h2_report(flux, grid):
    rep = validate_H2([0.08, 0.05], [0.4, 0.5], flux, grid, with_sums=False)
    assert len(rep.rows) == 4
    assert set(rep.lambda2_sqrt_eps) == {0.08, 0.05}
    assert rep.min_gap == min(r.gap for r in rep.rows)
    assert rep.c_fit > 0.0


def test_provider_cache_and_table(flux):
    g = Grid(1.0, 200)
    p = SpectralProvider(0.05, flux, g, k_max=4)
    a = p.data(0.3)
    assert p.data(0.3) is a
    # theta vanishes at the midpoint: psi_1 is even, the residual odd
    assert abs(p.theta(0.5)) < 1e-10
    assert p.theta(0.3) == pytest.approx(-p.theta(0.7), rel=1e-8)
    p.build_table([0.2, 0.3, 0.4])
    assert p.lambda_at(0.3, 1) == a.lambdas[0]
    mid = p.lambda_at(0.35, 2)
    assert min(p.data(0.3).lambdas[1], p.data(0.4).lambdas[1]) <= mid <= max(p.data(0.3).lambdas[1], p.data(0.4).lambdas[1])
