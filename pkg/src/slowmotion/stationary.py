"""Exact steady states: shooting, monotone iteration and the four branches.

Shooting integrates the flux-variable system

    eps u' = f(u) + w,    w' = -f'(u),    u(a) = 0,  w(a) = eps * alpha,

and bisects on the initial slope ``alpha`` until the first return to zero
lands on ``b``.  Monotone iteration between a discrete sub- and
supersolution is kept as an independent route to the same state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import solve_banded

from . import kernels
from .core import (
    Field,
    FluxFunction,
    Grid,
    l1_norm,
    linearization_bands,
    stationary_residual,
)

__all__ = [
    "NoBracket",
    "NonConvergence",
    "OrderViolation",
    "C1MatchFailure",
    "ShootingSolution",
    "SteadyBranch",
    "MonotoneResult",
    "shoot_interval",
    "shoot_positive",
    "newton_polish",
    "discrete_subsolution",
    "monotone_iterate",
    "monotone_iterate_full",
    "build_branch",
    "maximal_nonnegative",
    "MonotonicityReport",
    "epsilon_monotonicity_check",
    "bernoulli_invariant",
    "zero_crossings",
]

BRANCH_KINDS = ("positive", "negative", "metastable", "ns")


class NoBracket(RuntimeError):
    """The return point z(alpha) never brackets the target endpoint."""


class NonConvergence(RuntimeError):
    """An iteration ran out of steps."""


class OrderViolation(RuntimeError):
    """Monotone iterates left the order interval."""


class C1MatchFailure(RuntimeError):
    """Glued half-interval solutions disagree in slope at the seam."""


@dataclass(frozen=True)
class ShootingSolution:
    """Continuous positive solution on ``(a, b)`` from shooting.

    ``alpha`` is the slope ``u'(a)`` whatever the shooting direction;
    ``direction`` records whether the bisection ran on ``u'(a)`` (forward)
    or on ``-u'(b)`` (backward).
    """

    a: float
    b: float
    eps: float
    alpha: float
    sol: object  # scipy OdeSolution covering [a, b]
    z: float
    bisections: int
    direction: str = "forward"

    def u(self, x: np.ndarray) -> np.ndarray:
        x = np.clip(np.asarray(x, dtype=float), self.a, self.b)
        return self.sol(x)[0]

    def w(self, x: np.ndarray) -> np.ndarray:
        x = np.clip(np.asarray(x, dtype=float), self.a, self.b)
        return self.sol(x)[1]


def _integrate(
    x0: float, x1: float, w0: float, eps: float, flux: FluxFunction, rtol: float, cap: float
) -> tuple[float, object]:
    """Integrate from ``u(x0) = 0`` towards ``x1``; return the first zero of ``u`` and the solution.

    The zero is ``inf`` (forward) or ``-inf`` (backward) when ``u`` never
    returns to zero or blows past ``cap``.
    """

    def rhs(_x: float, y: np.ndarray) -> list[float]:
        u = y[0]
        return [(float(flux.f(u)) + y[1]) / eps, -float(flux.df(u))]

    def hit(_x: float, y: np.ndarray) -> float:
        return y[0]

    def blowup(_x: float, y: np.ndarray) -> float:
        return abs(y[0]) - cap

    hit.terminal = True  # type: ignore[attr-defined]
    hit.direction = -1  # type: ignore[attr-defined]  # sign change along the integration order
    blowup.terminal = True  # type: ignore[attr-defined]
    span = abs(x1 - x0)
    res = solve_ivp(
        rhs,
        (x0, x1),
        [0.0, w0],
        method="DOP853",
        rtol=rtol,
        atol=1e-15,
        events=[hit, blowup],
        dense_output=True,
        first_step=min(1e-6 * span, eps * 1e-3),
    )
    far = math.inf if x1 > x0 else -math.inf
    ev = [t for t in res.t_events[0] if abs(t - x0) > 1e-12 * span]
    return (ev[0] if ev else far), res.sol


def shoot_interval(
    eps: float,
    flux: FluxFunction,
    a: float,
    b: float,
    *,
    alpha_min: float = 1e-8,
    max_bisections: int = 200,
    rtol: float = 1e-13,
    direction: str = "auto",
) -> ShootingSolution:
    """Positive solution on ``(a, b)`` with zero boundary values, by bisection.

    Forward shooting bisects on ``alpha = u'(a)`` in ``(alpha_min, 1 - alpha_min)``.
    It amplifies errors like ``exp((b - a)^2 / 2 eps)``, so ``direction="auto"``
    switches to backward shooting from ``b`` (bisection on ``beta = -u'(b)``)
    once that exponent exceeds 12.

    Raises:
        NoBracket: the return point never brackets the far endpoint.
        NonConvergence: bisection did not shrink the bracket to rounding level.
    """
    if not (eps > 0.0 and b > a):
        raise ValueError("need eps > 0 and a < b")
    span = b - a
    if direction == "auto":
        direction = "forward" if span * span / (2.0 * eps) <= 12.0 else "backward"
    cap = 10.0 * (1.0 + span) ** 2 / min(eps, 1.0)
    if direction == "forward":
        return _shoot_forward(eps, flux, a, b, alpha_min, max_bisections, rtol, cap)
    if direction == "backward":
        return _shoot_backward(eps, flux, a, b, alpha_min, max_bisections, rtol, cap)
    raise ValueError(f"unknown shooting direction {direction!r}")


def _shoot_forward(eps, flux, a, b, alpha_min, max_bisections, rtol, cap) -> ShootingSolution:
    span = b - a
    lo, hi = alpha_min, 1.0 - alpha_min
    z_lo, _ = _integrate(a, a + 1.5 * span, eps * lo, eps, flux, rtol, cap)
    z_hi, sol_hi = _integrate(a, a + 1.5 * span, eps * hi, eps, flux, rtol, cap)
    if not (z_lo < b <= z_hi):
        raise NoBracket(
            f"forward return point does not bracket b={b:g} on ({a:g},{b:g}) at eps={eps:g}: "
            f"z({lo:g})={z_lo:.6g}, z({hi:g})={z_hi:.6g}"
        )
    z_best, sol_best = z_hi, sol_hi
    for k in range(max_bisections):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi or z_best - b < 1e-14 * span:
            return ShootingSolution(a, b, eps, hi, sol_best, z_best, k, "forward")
        z_mid, sol_mid = _integrate(a, a + 1.5 * span, eps * mid, eps, flux, rtol, cap)
        if z_mid < b:
            lo = mid
        else:
            hi, z_best, sol_best = mid, z_mid, sol_mid
    raise NonConvergence(f"bisection on alpha did not converge in {max_bisections} steps")


def _shoot_backward(eps, flux, a, b, beta_min, max_bisections, rtol, cap) -> ShootingSolution:
    span = b - a
    lo = beta_min
    z_lo, _ = _integrate(b, b - 1.5 * span, -eps * lo, eps, flux, rtol, cap)
    if not z_lo > a:
        raise NoBracket(
            f"backward shot with beta={lo:g} already passes a={a:g} on ({a:g},{b:g}) at eps={eps:g}"
        )
    hi = 1.0
    z_hi, sol_hi = _integrate(b, b - 1.5 * span, -eps * hi, eps, flux, rtol, cap)
    while z_hi > a:
        lo, z_lo = hi, z_hi
        hi *= 4.0
        if hi > 1e6 * cap:
            raise NoBracket(f"backward return point never reaches a={a:g} at eps={eps:g}")
        z_hi, sol_hi = _integrate(b, b - 1.5 * span, -eps * hi, eps, flux, rtol, cap)
    z_best, sol_best = z_hi, sol_hi
    for k in range(max_bisections):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi or a - z_best < 1e-14 * span:
            alpha = float(sol_best(a)[1]) / eps  # u(a) = 0, so eps u'(a) = w(a)
            return ShootingSolution(a, b, eps, alpha, sol_best, z_best, k, "backward")
        z_mid, sol_mid = _integrate(b, b - 1.5 * span, -eps * mid, eps, flux, rtol, cap)
        if z_mid > a:
            lo = mid
        else:
            hi, z_best, sol_best = mid, z_mid, sol_mid
    raise NonConvergence(f"bisection on beta did not converge in {max_bisections} steps")


def shoot_positive(
    eps: float, flux: FluxFunction, a: float, b: float, grid: Grid, **kw
) -> Field:
    """Shooting solution sampled on the nodes in ``[a, b]`` (zero elsewhere)."""
    s = shoot_interval(eps, flux, a, b, **kw)
    x = grid.nodes
    vals = np.zeros_like(x)
    inside = (x > a) & (x < b)
    vals[inside] = s.u(x[inside])
    return Field(grid, vals)


def bernoulli_invariant(s: ShootingSolution, x: np.ndarray) -> np.ndarray:
    """``u^2/2 - eps - v - kappa exp(v/eps)`` along a Burgers shooting solution.

    Here ``v = -w`` (so ``v' = u``) and ``kappa`` is fitted at the left
    endpoint, where ``u = 0`` (``v = -eps * alpha`` there).  The value is 0 for an
    exact solution.
    """
    eps = s.eps
    va = -float(s.w(np.array([s.a]))[0])
    kappa = -(eps + va) * math.exp(-va / eps)
    u = s.u(x)
    v = -s.w(x)
    return 0.5 * u * u - eps - v - kappa * np.exp(v / eps)


def newton_polish(
    u: Field, eps: float, flux: FluxFunction, *, tol: float = 1e-13, max_iter: int = 50
) -> Field:
    """Newton's method on the discrete stationary system, Dirichlet rows fixed."""
    dx = u.grid.dx
    vals = np.array(u.values, copy=True)
    vals[0] = vals[-1] = 0.0
    scale = max(1.0, float(np.max(np.abs(vals))))
    for _ in range(max_iter):
        r = stationary_residual(Field(u.grid, vals), eps, flux).interior
        if np.max(np.abs(r)) <= tol * scale:
            return Field(u.grid, vals)
        lo, diag, up = linearization_bands(vals, eps, dx, flux)
        ab = np.zeros((3, diag.size))
        ab[0, 1:] = up[:-1]
        ab[1] = diag
        ab[2, :-1] = lo[1:]
        vals[1:-1] -= solve_banded((1, 1), ab, r)
    r = stationary_residual(Field(u.grid, vals), eps, flux).interior
    if np.max(np.abs(r)) <= 1e3 * tol * scale:
        return Field(u.grid, vals)
    raise NonConvergence(f"Newton polish stalled at residual {np.max(np.abs(r)):.3e}")


def zero_crossings(u: Field) -> list[float]:
    """Interior sign changes, located by linear interpolation."""
    v = u.interior
    x = u.grid.interior
    out: list[float] = []
    for i in range(v.size - 1):
        if v[i] == 0.0 and 0 < i:
            out.append(float(x[i]))
        elif v[i] * v[i + 1] < 0.0:
            out.append(float(x[i] - v[i] * (x[i + 1] - x[i]) / (v[i + 1] - v[i])))
    return out


@dataclass(frozen=True)
class SteadyBranch:
    kind: str
    eps: float
    field: Field
    residual_l1: float
    zero_crossings: list[float]
    shooting: ShootingSolution | None = None


def _glue(grid: Grid, left: Callable[[np.ndarray], np.ndarray],
          right: Callable[[np.ndarray], np.ndarray], seam: float) -> Field:
    x = grid.nodes
    vals = np.where(x < seam, left(x), right(x))
    vals[0] = vals[-1] = 0.0
    return Field(grid, vals)


def build_branch(kind: str, eps: float, flux: FluxFunction, grid: Grid,
                 *, polish: bool = True) -> SteadyBranch:
    """One of the four exact branches on ``grid``.

    The continuous shooting solution is sampled on the grid and, unless
    ``polish`` is off, refined by Newton so that it solves the discrete
    system to rounding.

    Raises:
        NoBracket, NonConvergence: from the shooting step.
        C1MatchFailure: metastable branch with a slope jump above ``10 dx`` at the seam.
    """
    if kind not in BRANCH_KINDS:
        raise ValueError(f"unknown branch kind {kind!r}")
    ell = grid.ell
    half = 0.5 * ell
    x = grid.nodes
    shot: ShootingSolution | None = None
    if kind in ("positive", "negative"):
        shot = shoot_interval(eps, flux, 0.0, ell)
        vals = np.zeros_like(x)
        vals[1:-1] = shot.u(x[1:-1])
        u = Field(grid, vals)
        if polish:
            u = newton_polish(u, eps, flux)
        if kind == "negative":
            u = u.reflected()
    else:
        shot = shoot_interval(eps, flux, 0.0, half)
        if kind == "metastable":
            u = _glue(grid, lambda s: -shot.u(half - s), lambda s: shot.u(s - half), half)
            # both halves leave the seam with slope alpha; check the sampled field
            jump = _seam_slope_jump(u, half)
            if jump > 10.0 * grid.dx:
                raise C1MatchFailure(f"slope jump {jump:.3e} at ell/2 exceeds 10 dx")
        else:
            u = _glue(grid, lambda s: shot.u(s), lambda s: -shot.u(ell - s), half)
        if polish:
            u = newton_polish(u, eps, flux)
            if kind == "metastable":
                u = Field(grid, 0.5 * (u.values - u.values[::-1]))
    res = l1_norm(stationary_residual(u, eps, flux))
    return SteadyBranch(kind, eps, u, res, zero_crossings(u), shot)


def _seam_slope_jump(u: Field, seam: float) -> float:
    """Difference of one-sided slopes at ``seam`` from two-point stencils."""
    x = u.grid.nodes
    v = u.values
    dx = u.grid.dx
    i = int(np.searchsorted(x, seam))
    # left stencil ends strictly before the seam, right one starts after it
    il = i - 1 if x[i] > seam else i
    ir = i if x[i] > seam else i + 1
    if il < 1 or ir + 1 >= x.size:
        return 0.0
    sl = (v[il] - v[il - 1]) / dx
    sr = (v[ir + 1] - v[ir]) / dx
    return float(abs(sl - sr))


def discrete_subsolution(
    eps: float, flux: FluxFunction, grid: Grid, *, tol: float = 1e-12
) -> Field:
    """``alpha sin(pi x / ell)`` with the largest alpha that keeps ``P_h >= 0``.

    ``alpha`` is found by bisection on the discrete sign test, starting from the
    Burgers value ``(ell/pi)(1 - eps pi^2 / ell^2)`` as an upper bound.
    """
    ell = grid.ell
    s = np.sin(np.pi * grid.nodes / ell)
    s[0] = s[-1] = 0.0
    cap = (ell / np.pi) * (1.0 - eps * np.pi**2 / ell**2)
    if cap <= 0.0:
        raise NoBracket(f"no positive sine subsolution at eps={eps:g}: eps*pi^2/ell^2 >= 1")

    def ok(al: float) -> bool:
        r = stationary_residual(Field(grid, al * s), eps, flux).interior
        return bool(np.min(r) >= -tol * al)

    lo, hi = 0.0, cap
    if ok(hi):
        return Field(grid, hi * s)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    if lo == 0.0:
        raise NoBracket("could not tune a sine subsolution")
    return Field(grid, lo * s)


@dataclass(frozen=True)
class MonotoneResult:
    field: Field
    iterations: int
    error_estimate: float
    min_increment: float
    M: float
    K: float
    nondecreasing: bool


def _stabilization(eps: float, flux: FluxFunction, fields: Sequence[Field]) -> tuple[float, float]:
    # M = 2 sup |f''(u) u' - f''(u)| + 1 over the bracket; K covers |f'| for the
    # centred convection stencil (cell Peclet shift)
    m = 0.0
    k = 0.0
    for fld in fields:
        v = fld.values
        slope = np.gradient(v, fld.grid.dx)
        m = max(m, float(np.max(np.abs(flux.d2f(v) * slope - flux.d2f(v)))))
        k = max(k, float(np.max(np.abs(flux.df(v)))))
    return 2.0 * m + 1.0, k


def monotone_iterate_full(
    eps: float,
    flux: FluxFunction,
    sub: Field,
    sup: Field,
    grid: Grid,
    *,
    start: str = "sub",
    tol: float = 1e-10,
    chunk: int = 2000,
    max_iter: int = 4_000_000,
    check_tol: float = 1e-10,
) -> MonotoneResult:
    """Monotone iteration ``(eps D2 - K S - M) u_{k+1} = -B(u_k)`` from ``sub`` (or ``sup``).

    ``S`` is the neighbour-sum stencil ``/(2 dx)``; with ``K >= sup|f'|`` the
    map ``B`` is nondecreasing in every nodal value and ``-(eps D2 - K S - M)``
    is an M-matrix whenever ``K dx <= 2 eps``.  Stopping uses the geometric
    error estimate ``upd * rho / (1 - rho)`` with ``rho`` measured per chunk.

    Raises:
        OrderViolation: the bracket is not ordered, is not a discrete sub/super
            pair, or an iterate leaves it.
        NonConvergence: ``max_iter`` reached.
    """
    if sub.grid != grid or sup.grid != grid:
        raise ValueError("sub and super must live on grid")
    if np.any(sub.values > sup.values + check_tol):
        raise OrderViolation("sub > super somewhere")
    if np.min(stationary_residual(sub, eps, flux).interior) < -check_tol:
        raise OrderViolation("sub is not a discrete subsolution")
    if np.max(stationary_residual(sup, eps, flux).interior) > check_tol:
        raise OrderViolation("super is not a discrete supersolution")
    M, K = _stabilization(eps, flux, (sub, sup))
    dx = grid.dx
    if K * dx > 2.0 * eps:
        raise ValueError(f"cell Peclet condition K dx <= 2 eps fails (K={K:g}, dx={dx:g})")
    u = np.array((sub if start == "sub" else sup).values, copy=True)
    prev_upd = math.inf
    total = 0
    min_inc_all = math.inf
    max_inc_all = -math.inf
    err = math.inf
    while total < max_iter:
        before = u.copy()
        u, it, upd, min_inc = kernels.monotone_sweeps(u, eps, dx, K, M, flux, 0.0, chunk)
        total += it
        inc = u - before
        min_inc_all = min(min_inc_all, min_inc)
        max_inc_all = max(max_inc_all, float(np.max(inc)))
        if upd == 0.0:
            err = 0.0
            break
        if math.isfinite(prev_upd) and prev_upd > 0.0:
            rho = min((upd / prev_upd) ** (1.0 / it), 1.0 - 1e-15)
            err = upd * rho / (1.0 - rho)
            if err <= tol:
                break
        elif upd <= 1e-15:
            err = upd
            break
        prev_upd = upd
    else:
        raise NonConvergence(f"monotone iteration: error estimate {err:.3e} after {total} sweeps")
    if np.any(u < sub.values - check_tol) or np.any(u > sup.values + check_tol):
        raise OrderViolation("iterate left the order interval [sub, super]")
    scale = max(1.0, float(np.max(np.abs(u))))
    if start == "sub":
        monotone = min_inc_all >= -1e-13 * scale
    else:
        monotone = max_inc_all <= 1e-13 * scale
    if not monotone:
        raise OrderViolation("iterates are not monotone: stabilization too weak")
    return MonotoneResult(Field(grid, u), total, err, min_inc_all, M, K, monotone)


def monotone_iterate(eps: float, flux: FluxFunction, sub: Field, sup: Field, grid: Grid,
                     **kw) -> Field:
    """Fixed point of the monotone sweep; see :func:`monotone_iterate_full`."""
    return monotone_iterate_full(eps, flux, sub, sup, grid, **kw).field


def maximal_nonnegative(eps: float, flux: FluxFunction, grid: Grid, **kw) -> Field:
    """Largest discrete steady state in ``[0, x]``, by monotone iteration from ``x``.

    When no positive branch exists this is the zero state.
    """
    sup = grid.field(lambda x: x)
    sup = Field(grid, np.where(np.arange(grid.n + 2) == grid.n + 1, 0.0, sup.values))
    # x is not zero at x = ell; the supersolution used is x with the right
    # boundary value clamped, which only lowers it and keeps P_h <= 0 there
    return monotone_iterate(eps, flux, grid.zeros(), sup, grid, start="super", **kw)


@dataclass
class MonotonicityReport:
    eps_list: list[float]
    pairs: list[tuple[float, float]] = field(default_factory=list)
    max_violation: float = 0.0
    violations: int = 0
    degenerate: list[float] = field(default_factory=list)
    min_gap: float = math.inf


def epsilon_monotonicity_check(
    flux: FluxFunction, grid: Grid, eps_list: Sequence[float], *, threshold: float = 1e-8
) -> MonotonicityReport:
    """Nodewise ``U_{eps',+} > U_{eps,+}`` for consecutive ``eps' < eps``.

    A value of ``eps`` at which shooting finds no positive solution falls back
    to :func:`maximal_nonnegative` and is listed in ``degenerate``.
    """
    eps_list = [float(e) for e in eps_list]
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps_list must be strictly decreasing")
    rep = MonotonicityReport(eps_list)
    if len(eps_list) < 2:
        return rep
    states: list[np.ndarray] = []
    for e in eps_list:
        try:
            states.append(build_branch("positive", e, flux, grid).field.values)
        except NoBracket:
            rep.degenerate.append(e)
            states.append(maximal_nonnegative(e, flux, grid).values)
    for (ea, ua), (eb, ub) in zip(zip(eps_list, states), zip(eps_list[1:], states[1:])):
        diff = (ub - ua)[1:-1]
        rep.pairs.append((ea, eb))
        rep.min_gap = min(rep.min_gap, float(np.min(diff)))
        rep.violations += int(np.count_nonzero(-diff > threshold))
        rep.max_violation = max(rep.max_violation, float(np.max(-diff, initial=0.0)))
    return rep
