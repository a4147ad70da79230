"""Spectrum of the linearized operator around a family element.

The operator ``L v = eps v'' - (f'(U) v)' + f''(U) v`` with Dirichlet
conditions is discretized as a tridiagonal matrix.  When every product of
paired off-diagonals is positive it is similar to a symmetric tridiagonal by a
diagonal scaling ``D``; the scaling is accumulated in log-space because it
behaves like ``exp(int f'(U) / 2 eps)``.  Right eigenvectors are
``D^-1 y`` and adjoint ones ``D y`` for eigenvectors ``y`` of the symmetric
matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg
from scipy.linalg import eigh_tridiagonal

from .core import Field, FluxFunction, Grid, inner_product, linearization_bands
from .family import XI_STEP, ApproxSteadyState, UnresolvedLayer, approx_state, exact_matched_state

__all__ = [
    "SignConditionViolated",
    "TridiagonalOperator",
    "SpectralData",
    "H2Report",
    "assemble",
    "assemble_field",
    "eigensolve",
    "symmetrize",
    "self_adjoint_conjugate",
    "lambda1_asymptotic",
    "validate_H2",
    "SpectralProvider",
]

K_MAX = 8


class SignConditionViolated(ValueError):
    """Some product of paired off-diagonal entries is not positive."""


@dataclass(frozen=True)
class TridiagonalOperator:
    """Interior rows ``lo[i] v[i-1] + diag[i] v[i] + up[i] v[i+1]``."""

    lo: np.ndarray
    diag: np.ndarray
    up: np.ndarray
    grid: Grid
    eps: float
    state: ApproxSteadyState | None = None

    @property
    def n(self) -> int:
        return self.diag.size

    def dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.up[:-1], 1) + np.diag(self.lo[1:], -1)

    def matvec(self, v: np.ndarray) -> np.ndarray:
        """Apply to interior values."""
        out = self.diag * v
        out[1:] += self.lo[1:] * v[:-1]
        out[:-1] += self.up[:-1] * v[1:]
        return out

    def rmatvec(self, v: np.ndarray) -> np.ndarray:
        """Apply the transpose to interior values."""
        out = self.diag * v
        out[:-1] += self.lo[1:] * v[1:]
        out[1:] += self.up[:-1] * v[:-1]
        return out


def assemble_field(u: Field, eps: float, flux: FluxFunction,
                   state: ApproxSteadyState | None = None) -> TridiagonalOperator:
    """Linearization around an arbitrary field ``u``; layer resolution is checked."""
    grid = u.grid
    if grid.dx >= eps / 5.0:
        raise UnresolvedLayer(f"dx={grid.dx:.3g} does not resolve eps={eps:g} (need dx < eps/5)")
    lo, diag, up = linearization_bands(u.values, eps, grid.dx, flux)
    return TridiagonalOperator(lo, diag, up, grid, float(eps), state)


def assemble(eps: float, state: ApproxSteadyState, flux: FluxFunction, grid: Grid | None = None
             ) -> TridiagonalOperator:
    """Linearization around a family element (``grid`` defaults to the state's)."""
    if grid is not None and grid != state.grid:
        raise ValueError("state lives on a different grid")
    return assemble_field(state.field, eps, flux, state)


def symmetrize(op: TridiagonalOperator) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(diag, off, log_d)`` of the symmetric matrix ``D A D^-1``.

    ``log d[i+1] = log d[i] + (log up[i] - log lo[i+1]) / 2`` with ``log d[0] = 0``.
    """
    prod_up = op.up[:-1]
    prod_lo = op.lo[1:]
    if np.any(prod_up * prod_lo <= 0.0) or np.any(prod_up <= 0.0):
        raise SignConditionViolated("off-diagonal products must be positive for symmetrization")
    off = np.sqrt(prod_up) * np.sqrt(prod_lo)
    log_d = np.concatenate(([0.0], np.cumsum(0.5 * (np.log(prod_up) - np.log(prod_lo)))))
    return op.diag.copy(), off, log_d


def self_adjoint_conjugate(op: TridiagonalOperator) -> tuple[np.ndarray, np.ndarray]:
    """Bands of ``eps * D A D^-1``, whose spectrum is ``eps`` times that of ``A``."""
    d, e, _ = symmetrize(op)
    return op.eps * d, op.eps * e


@dataclass(frozen=True)
class SpectralData:
    eps: float
    xi: float
    lambdas: np.ndarray
    phis: list[Field]
    psis: list[Field]
    k_max: int
    method: str = "symmetric"
    imag_residue: float = 0.0
    h2_normalized: bool = False

    def modal(self, v: Field) -> np.ndarray:
        """``v_k = <psi_k, v>`` for ``k = 1 .. k_max``."""
        return np.array([inner_product(p, v) for p in self.psis])


def _sign_fix(y: np.ndarray) -> np.ndarray:
    # first node with a non-negligible entry is made positive
    thresh = 1e-3 * np.max(np.abs(y))
    idx = int(np.argmax(np.abs(y) > thresh))
    return -y if y[idx] < 0.0 else y


def _embed(grid: Grid, interior: np.ndarray) -> Field:
    vals = np.zeros(grid.n + 2)
    vals[1:-1] = interior
    return Field(grid, vals)


def eigensolve(op: TridiagonalOperator, k_max: int = K_MAX, *, normalize_h2: bool = True
               ) -> SpectralData:
    """Top ``k_max`` eigenpairs with adjoint eigenfunctions, normalized per H2.

    ``<psi_j, phi_k> = delta_jk`` in the trapezoid pairing; if the operator
    carries a family element with ``d_xi``, psi_1 and phi_1 are rescaled so
    that ``<psi_1, d_xi U> = 1``.  Falls back to a dense nonsymmetric solver
    (``method="dense"``) when the sign condition fails.
    """
    grid = op.grid
    n = op.n
    k = min(k_max, n)
    try:
        d, e, log_d = symmetrize(op)
    except SignConditionViolated:
        return _eigensolve_dense(op, k, normalize_h2)
    w, y = eigh_tridiagonal(d, e, select="i", select_range=(n - k, n - 1))
    order = np.argsort(w)[::-1]
    w = w[order]
    y = y[:, order]
    phis: list[np.ndarray] = []
    psis: list[np.ndarray] = []
    dx = grid.dx
    for j in range(k):
        yj = _sign_fix(y[:, j])
        # phi = D^-1 y scaled to unit max, psi = D y scaled so that <psi, phi> = 1;
        # exponents are combined before exponentiation to avoid overflow
        with np.errstate(divide="ignore"):
            log_abs = np.log(np.abs(yj))
        lphi = log_abs - log_d
        a = np.max(lphi)
        phi = np.sign(yj) * np.exp(lphi - a)
        s = float(np.sum(yj * yj)) * dx
        lpsi = log_abs + log_d + a - math.log(s)
        psi = np.sign(yj) * np.exp(np.minimum(lpsi, 700.0))
        phis.append(phi)
        psis.append(psi)
    return _finish(op, w, phis, psis, "symmetric", 0.0, normalize_h2)


def _eigensolve_dense(op: TridiagonalOperator, k: int, normalize_h2: bool) -> SpectralData:
    vals, vl, vr = scipy.linalg.eig(op.dense(), left=True, right=True)
    imag = float(np.max(np.abs(vals.imag)))
    if imag > 1e-10 * max(1.0, float(np.max(np.abs(vals.real)))):
        raise SignConditionViolated(f"dense fallback found complex eigenvalues (|Im| = {imag:.3e})")
    order = np.argsort(vals.real)[::-1][:k]
    dx = op.grid.dx
    phis, psis = [], []
    for j in order:
        phi = _sign_fix(vr[:, j].real)
        phi = phi / np.max(np.abs(phi))
        psi = vl[:, j].real
        psi = psi / (float(np.dot(psi, phi)) * dx)
        phis.append(phi)
        psis.append(psi)
    return _finish(op, vals.real[order], phis, psis, "dense", imag, normalize_h2)


def _finish(op: TridiagonalOperator, w: np.ndarray, phis: list[np.ndarray], psis: list[np.ndarray],
            method: str, imag: float, normalize_h2: bool) -> SpectralData:
    grid = op.grid
    phi_f = [_embed(grid, p) for p in phis]
    psi_f = [_embed(grid, p) for p in psis]
    state = op.state
    done = False
    if normalize_h2 and state is not None and state.d_xi is not None:
        c = inner_product(psi_f[0], state.d_xi)
        if c != 0.0 and math.isfinite(c):
            psi_f[0] = psi_f[0] * (1.0 / c)
            phi_f[0] = phi_f[0] * c
            done = True
    xi = state.xi if state is not None else math.nan
    return SpectralData(op.eps, xi, np.asarray(w, dtype=float), phi_f, psi_f, len(phi_f),
                        method, imag, done)


def lambda1_asymptotic(eps: float, xi: float, ell: float, c: float) -> float:
    """``(1/eps)[xi(xi - c sqrt eps) e^{-xi^2/2eps} + (ell-xi)((ell-xi) - c sqrt eps) e^{-(ell-xi)^2/2eps}]``."""
    r = math.sqrt(eps)
    m = ell - xi
    return (xi * (xi - c * r) * math.exp(-xi * xi / (2 * eps))
            + m * (m - c * r) * math.exp(-m * m / (2 * eps))) / eps


@dataclass
class H2Row:
    eps: float
    xi: float
    lambdas: np.ndarray
    gap: float
    c_fit: float
    sum_bound: float


@dataclass
class H2Report:
    rows: list[H2Row] = field(default_factory=list)
    min_gap: float = math.inf
    c_fit: float = math.inf
    max_sum_bound: float = 0.0
    lambda2_sqrt_eps: dict[float, float] = field(default_factory=dict)
    Lambda1: dict[float, float] = field(default_factory=dict)
    Lambda2: dict[float, float] = field(default_factory=dict)

    @property
    def lambda2_sqrt_eps_spread(self) -> float:
        """``(max - min) / max |.|`` of ``lambda_2 sqrt(eps)`` over the eps values."""
        v = np.array(list(self.lambda2_sqrt_eps.values()))
        if v.size < 2:
            return 0.0
        return float((v.max() - v.min()) / np.max(np.abs(v)))


def _aligned(ref: Field, f: Field) -> Field:
    return f if inner_product(ref, f) >= 0.0 else -f


def _dxi_psi_sums(eps: float, xi: float, flux: FluxFunction, grid: Grid, base: SpectralData,
                  kmax_sum: int = 4) -> float:
    h = XI_STEP * grid.ell
    plus = eigensolve(assemble(eps, approx_state(eps, xi + h, grid), flux))
    minus = eigensolve(assemble(eps, approx_state(eps, xi - h, grid), flux))
    worst = 0.0
    for k in range(min(kmax_sum, base.k_max)):
        pp = _aligned(base.psis[k], plus.psis[k])
        pm = _aligned(base.psis[k], minus.psis[k])
        dpsi = (pp - pm) * (1.0 / (2.0 * h))
        total = sum(inner_product(dpsi, base.phis[j]) ** 2 for j in range(base.k_max))
        worst = max(worst, float(total))
    return worst


def validate_H2(eps_list: Sequence[float], xi_list: Sequence[float], flux: FluxFunction,
                grid: Grid, *, k_max: int = K_MAX, with_sums: bool = True) -> H2Report:
    """Sweep the spectral hypotheses over an ``(eps, xi)`` grid of tanh-family elements."""
    rep = H2Report()
    for eps in eps_list:
        lam1, lam2 = [], []
        for xi in xi_list:
            state = approx_state(eps, xi, grid)
            data = eigensolve(assemble(eps, state, flux), k_max)
            lam = data.lambdas
            ks = np.arange(2, lam.size + 1)
            c_fit = float(np.min(-lam[1:] / ks**2)) if lam.size > 1 else math.inf
            sums = _dxi_psi_sums(eps, xi, flux, grid, data) if with_sums else math.nan
            row = H2Row(float(eps), float(xi), lam.copy(), float(lam[0] - lam[1]), c_fit, sums)
            rep.rows.append(row)
            rep.min_gap = min(rep.min_gap, row.gap)
            rep.c_fit = min(rep.c_fit, c_fit)
            if with_sums:
                rep.max_sum_bound = max(rep.max_sum_bound, sums)
            lam1.append(lam[0])
            lam2.append(lam[1])
            if abs(xi - 0.5 * grid.ell) < 1e-12:
                rep.lambda2_sqrt_eps[float(eps)] = float(lam[1] * math.sqrt(eps))
        rep.Lambda1[float(eps)] = float(max(lam1))
        rep.Lambda2[float(eps)] = float(max(lam2))
    return rep


class SpectralProvider:
    """Family elements and their spectral data as functions of ``xi``, cached.

    ``construction`` is ``"tanh_matched"`` (default) or ``"exact_matched"``.
    A lattice table of ``lambda_k`` and ``theta`` supports linear
    interpolation along a recorded interface path.
    """

    def __init__(self, eps: float, flux: FluxFunction, grid: Grid, k_max: int = K_MAX,
                 construction: str = "tanh_matched", cache_size: int = 256) -> None:
        self.eps = float(eps)
        self.flux = flux
        self.grid = grid
        self.k_max = k_max
        self.construction = construction
        self._cache: dict[float, tuple[ApproxSteadyState, SpectralData]] = {}
        self._order: list[float] = []
        self._cache_size = cache_size
        self._table_xi: np.ndarray | None = None
        self._table_lam: np.ndarray | None = None
        self._table_theta: np.ndarray | None = None

    def state(self, xi: float) -> ApproxSteadyState:
        return self.get(xi)[0]

    def data(self, xi: float) -> SpectralData:
        return self.get(xi)[1]

    def get(self, xi: float) -> tuple[ApproxSteadyState, SpectralData]:
        key = float(xi)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        if self.construction == "exact_matched":
            st = exact_matched_state(self.eps, key, self.grid, self.flux, with_derivative=True)
        else:
            st = approx_state(self.eps, key, self.grid)
        sd = eigensolve(assemble(self.eps, st, self.flux), self.k_max)
        self._cache[key] = (st, sd)
        self._order.append(key)
        if len(self._order) > self._cache_size:
            self._cache.pop(self._order.pop(0), None)
        return st, sd

    def theta(self, xi: float) -> float:
        """``<psi_1, P[U]>`` with ``<psi_1, d_xi U> = 1``."""
        from .core import stationary_residual

        st, sd = self.get(xi)
        return inner_product(sd.psis[0], stationary_residual(st.field, self.eps, self.flux))

    def build_table(self, xi_lattice: Sequence[float]) -> None:
        xs = np.asarray(sorted(float(x) for x in xi_lattice))
        lam = np.empty((xs.size, self.k_max))
        th = np.empty(xs.size)
        for i, x in enumerate(xs):
            sd = self.data(x)
            lam[i, : sd.lambdas.size] = sd.lambdas
            th[i] = self.theta(x)
        self._table_xi, self._table_lam, self._table_theta = xs, lam, th

    def _need_table(self) -> None:
        if self._table_xi is None:
            ell = self.grid.ell
            self.build_table(np.linspace(0.02 * ell, 0.98 * ell, 49))

    def lambda_at(self, xi: float, k: int) -> float:
        """Interpolated ``lambda_k(xi)``, ``k`` counted from 1."""
        self._need_table()
        return float(np.interp(xi, self._table_xi, self._table_lam[:, k - 1]))

    def theta_at(self, xi: float) -> float:
        self._need_table()
        return float(np.interp(xi, self._table_xi, self._table_theta))

    @property
    def table(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        self._need_table()
        return self._table_xi, self._table_lam, self._table_theta
