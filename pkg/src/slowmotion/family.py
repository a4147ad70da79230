"""The one-parameter family of approximate steady states and its residual data.

Two constructions are offered.  ``tanh_matched`` is the explicit profile

    U(x; xi) = max{ min{ x - xi, -(ell - xi) tanh((ell - xi)(x - ell) / 2 eps) },
                    -xi tanh(xi x / 2 eps) },

negative on ``(0, xi)`` and positive on ``(xi, ell)``.  ``exact_matched`` glues
the exact negative steady state on ``(0, xi)`` to the exact positive one on
``(xi, ell)``; it is continuous with a slope jump at ``xi``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq

from .core import Field, FluxFunction, Grid, burgers_flux, inner_product, l1_norm, stationary_residual
from .stationary import ShootingSolution, shoot_interval

__all__ = [
    "UnresolvedLayer",
    "NoRoot",
    "ApproxSteadyState",
    "HyperbolicSteady",
    "MatchingPoints",
    "ResidualReport",
    "tanh_profile",
    "approx_state",
    "zero_state",
    "hyperbolic_steady",
    "matching_points",
    "exact_matched_state",
    "residual_report",
    "theta_asymptotic",
    "omega_asymptotic",
    "omega_small_asymptotic",
    "XI_STEP",
]

# relative step for d/dxi by centred differences
XI_STEP = 1e-6


class UnresolvedLayer(ValueError):
    """The grid does not resolve an O(eps) layer (need dx < eps/5)."""


class NoRoot(ValueError):
    """No sign change in the matching-point bracket."""


@dataclass(frozen=True)
class ApproxSteadyState:
    eps: float
    xi: float
    field: Field
    d_xi: Field | None
    construction: str
    slope_jump: float = 0.0

    @property
    def grid(self) -> Grid:
        return self.field.grid


def tanh_profile(x: np.ndarray, xi: float, eps: float, ell: float) -> np.ndarray:
    """The explicit tanh-matched profile (2 eps scaling everywhere, xi = 0 included)."""
    x = np.asarray(x, dtype=float)
    right = -(ell - xi) * np.tanh((ell - xi) * (x - ell) / (2.0 * eps))
    left = -xi * np.tanh(xi * x / (2.0 * eps))
    return np.maximum(np.minimum(x - xi, right), left)


def _tanh_values(grid: Grid, xi: float, eps: float) -> np.ndarray:
    v = tanh_profile(grid.nodes, xi, eps, grid.ell)
    v[0] = v[-1] = 0.0
    return v


def approx_state(eps: float, xi: float, grid: Grid, *, with_derivative: bool = True) -> ApproxSteadyState:
    """Tanh-matched family element; ``d_xi`` by centred differences with step ``1e-6 ell``."""
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    if not 0.0 <= xi <= grid.ell:
        raise ValueError(f"xi={xi!r} outside [0, ell]")
    u = Field(grid, _tanh_values(grid, xi, eps))
    d = None
    if with_derivative:
        h = XI_STEP * grid.ell
        lo, hi = max(xi - h, 0.0), min(xi + h, grid.ell)
        d = Field(grid, (_tanh_values(grid, hi, eps) - _tanh_values(grid, lo, eps)) / (hi - lo))
    return ApproxSteadyState(float(eps), float(xi), u, d, "tanh_matched")


def zero_state(eps: float, grid: Grid) -> ApproxSteadyState:
    """``U = 0``: the trivial steady state, used to check the analytic spectrum."""
    return ApproxSteadyState(float(eps), math.nan, grid.zeros(), None, "zero")


class HyperbolicSteady(NamedTuple):
    field: Field
    case: int
    label: str


def hyperbolic_steady(xi1: float, xi2: float, grid: Grid) -> HyperbolicSteady:
    """Entropy steady state of the inviscid problem with at most one jump.

    ``x - xi1`` left of the midpoint ``(xi1 + xi2)/2`` and ``x - xi2`` right
    of it, for ``0 <= xi1 <= xi2 <= ell``.  Boundary values are not imposed
    (the inviscid state has boundary layers there); nodal values at the jump
    take the left state.

    Cases: 1 interior of the triangle, 2 a side (xi1 = 0 or xi2 = ell),
    3 the diagonal, 4 the vertex (0, ell), 5 the vertices (0, 0) / (ell, ell).
    """
    ell = grid.ell
    if not (0.0 <= xi1 <= xi2 <= ell):
        raise ValueError(f"need 0 <= xi1 <= xi2 <= ell, got ({xi1}, {xi2})")
    x = grid.nodes
    mid = 0.5 * (xi1 + xi2)
    vals = np.where(x <= mid, x - xi1, x - xi2)
    if xi1 == xi2:
        if xi1 == 0.0:
            case, label = 5, "U_{0,+}"
        elif xi1 == ell:
            case, label = 5, "U_{0,-}"
        else:
            case, label = 3, "diagonal D / U0_M"
    elif xi1 == 0.0 and xi2 == ell:
        case, label = 4, "U0_NS"
    elif xi1 == 0.0:
        case, label = 2, "side Gamma_1"
    elif xi2 == ell:
        case, label = 2, "side Gamma_2"
    else:
        case, label = 1, "interior of T"
    return HyperbolicSteady(Field(grid, vals), case, label)


class MatchingPoints(NamedTuple):
    u1: float
    u2: float
    u1_asym: float
    u2_asym: float


def matching_points(eps: float, xi: float, ell: float = 1.0) -> MatchingPoints:
    """Where the tanh layers of the profile meet the line ``x - xi``.

    Roots of ``-xi tanh(xi u / 2 eps) = u - xi`` in ``(0, xi)`` and of
    ``-(ell - xi) tanh((ell - xi)(u - ell) / 2 eps) = u - xi`` in ``(xi, ell)``.
    The asymptotic fields carry the small-eps forms ``eps xi`` and ``ell - eps xi``.
    """
    if not 0.0 < xi < ell:
        raise NoRoot(f"xi={xi!r} must lie in (0, ell)")

    def g1(u: float) -> float:
        return -xi * math.tanh(xi * u / (2.0 * eps)) - (u - xi)

    def g2(u: float) -> float:
        return -(ell - xi) * math.tanh((ell - xi) * (u - ell) / (2.0 * eps)) - (u - xi)

    roots = []
    for g, a, b in ((g1, 0.0, xi), (g2, xi, ell)):
        ga, gb = g(a), g(b)
        if not ga * gb < 0.0:
            raise NoRoot(f"no sign change on [{a:g}, {b:g}]")
        roots.append(brentq(g, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps))
    return MatchingPoints(roots[0], roots[1], eps * xi, ell - eps * xi)


def _matched_values(grid: Grid, xi: float, eps: float, flux: FluxFunction,
                    ) -> tuple[np.ndarray, ShootingSolution, ShootingSolution]:
    ell = grid.ell
    left = shoot_interval(eps, flux, 0.0, xi)
    right = shoot_interval(eps, flux, 0.0, ell - xi)
    x = grid.nodes
    vals = np.where(x < xi, -left.u(xi - x), right.u(x - xi))
    vals[0] = vals[-1] = 0.0
    return vals, left, right


def exact_matched_state(
    eps: float, xi: float, grid: Grid, flux: FluxFunction | None = None,
    *, with_derivative: bool = False,
) -> ApproxSteadyState:
    """Negative exact state on ``(0, xi)`` glued to the positive one on ``(xi, ell)``.

    The slope jump ``u'(xi+) - u'(xi-)`` equals the difference of the two
    shooting slopes at the seam.  Raises the shooting errors (``NoBracket``
    when a side is shorter than about ``pi sqrt(eps)``).
    """
    flux = flux or burgers_flux()
    if not 0.0 < xi < grid.ell:
        raise ValueError(f"xi={xi!r} outside (0, ell)")
    vals, left, right = _matched_values(grid, xi, eps, flux)
    jump = right.alpha - left.alpha
    d = None
    if with_derivative:
        h = XI_STEP * grid.ell
        vp, _, _ = _matched_values(grid, xi + h, eps, flux)
        vm, _, _ = _matched_values(grid, xi - h, eps, flux)
        d = Field(grid, (vp - vm) / (2.0 * h))
    return ApproxSteadyState(float(eps), float(xi), Field(grid, vals), d, "exact_matched", float(jump))


def theta_asymptotic(eps: float, xi: float, ell: float = 1.0) -> float:
    """``-xi^2 eps - (ell - xi) xi eps``, which is ``-eps ell xi``."""
    return -(xi * xi * eps + (ell - xi) * xi * eps)


def omega_asymptotic(eps: float, xi: float, ell: float = 1.0) -> float:
    """``xi^2 eps + (ell - xi) xi eps``."""
    return xi * xi * eps + (ell - xi) * xi * eps


def omega_small_asymptotic(eps: float, xi: float, ell: float = 1.0) -> float:
    """``xi eps + (ell - xi) eps``."""
    return xi * eps + (ell - xi) * eps


@dataclass(frozen=True)
class ResidualReport:
    omega_big: float
    omega_small: float
    theta: float
    theta_asym: float
    asymptotic_ratio: float
    theta_source: str


def residual_report(state: ApproxSteadyState, flux: FluxFunction, spectral=None) -> ResidualReport:
    """Residual size, interface speed and their asymptotic comparison.

    ``omega_big`` is the L1 norm of the discrete residual (tanh construction)
    or the absolute slope jump (exact-matched construction).  ``theta`` is
    ``<psi_1, P[U]> / <psi_1, d_xi U>`` when ``spectral`` data are given, the
    asymptotic ``-eps ell xi`` otherwise.  ``omega_small`` is ``omega_big / xi``,
    the smallest admissible factor in ``Omega <= omega |xi - 0|``.
    """
    grid = state.grid
    eps, xi, ell = state.eps, state.xi, grid.ell
    if grid.dx >= eps / 5.0:
        raise UnresolvedLayer(f"dx={grid.dx:.3g} does not resolve eps={eps:g} (need dx < eps/5)")
    residual = stationary_residual(state.field, eps, flux)
    if state.construction == "exact_matched":
        omega = abs(state.slope_jump)
    else:
        omega = l1_norm(residual)
    th_asym = theta_asymptotic(eps, xi, ell)
    if spectral is not None:
        psi1 = spectral.psis[0]
        denom = inner_product(psi1, state.d_xi) if state.d_xi is not None else 1.0
        theta = inner_product(psi1, residual) / denom
        source = "spectral"
    else:
        theta = th_asym
        source = "asymptotic"
    om_asym = omega_asymptotic(eps, xi, ell)
    ratio = omega / om_asym if om_asym > 0.0 else math.inf
    small = omega / xi if xi > 0.0 else math.inf
    return ResidualReport(omega, small, theta, th_asym, ratio, source)
