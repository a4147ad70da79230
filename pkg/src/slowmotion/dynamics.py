"""Time integration, interface tracking, the reduced interface ODE and the
diagnostics of the slow-motion theorems.

The PDE ``u_t = eps u_xx - f(u)_x + f'(u)`` is advanced by an IMEX scheme:
explicit local Lax-Friedrichs convection plus reaction, then a backward-Euler
diffusion solve.  The interface is tracked twice, by the zero crossing and by
the projection condition ``<psi_1(xi), u - U(xi)> = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.integrate import cumulative_trapezoid, solve_ivp
from scipy.optimize import brentq

from . import kernels
from .core import Field, FluxFunction, Grid, derivative, h1_norm, inner_product, l1_norm, l2_norm, stationary_residual
from .family import XI_STEP, theta_asymptotic
from .spectral import SpectralProvider

__all__ = [
    "CFLViolation",
    "NumericalBlowup",
    "MissingSnapshots",
    "InitialDatum",
    "Trajectory",
    "ReducedSolution",
    "TheoremReport",
    "ORIENTATIONS",
    "CFL",
    "max_stable_dt",
    "make_initial",
    "predicted_attractor",
    "step_imex",
    "evolve",
    "locate_zero",
    "project_interface",
    "reduced_ode",
    "fit_beta",
    "exit_time",
    "theorem_diagnostics",
    "flame_front",
]

CFL = 0.4
ORIENTATIONS = ("paper_u0meta", "corollary")


class CFLViolation(ValueError):
    """Time step above ``0.4 dx / max(1, max|f'(u)|)``."""


class NumericalBlowup(FloatingPointError):
    """A non-finite value appeared in the solution."""


class MissingSnapshots(ValueError):
    """Diagnostics need the field at every recorded time."""


def max_stable_dt(u: np.ndarray | Field, dx: float, flux: FluxFunction) -> float:
    vals = u.values if isinstance(u, Field) else np.asarray(u)
    return CFL * dx / max(1.0, float(np.max(np.abs(flux.df(vals)))))


@dataclass(frozen=True)
class InitialDatum:
    """Sign-changing datum with a single zero at ``a0``.

    ``orientation="paper_u0meta"`` gives ``u0 < 0`` on ``(0, a0)`` and ``u0 > 0``
    on ``(a0, ell)``; ``"corollary"`` flips the sign (positive on the left).
    """

    a0: float
    shape: str = "scaled_sine"
    amplitude: float = 0.5
    orientation: str = "paper_u0meta"


def make_initial(datum: InitialDatum, grid: Grid) -> Field:
    """Nodal datum; exactly odd about ``ell/2`` when ``a0 = ell/2``."""
    ell = grid.ell
    a0 = float(datum.a0)
    if not 0.0 < a0 < ell:
        raise ValueError(f"a0={a0!r} must lie in (0, ell)")
    if datum.orientation not in ORIENTATIONS:
        raise ValueError(f"orientation must be one of {ORIENTATIONS}")
    x = grid.nodes
    amp = float(datum.amplitude)
    left = x <= a0
    if datum.shape == "scaled_sine":
        vals = np.where(left, -amp * np.sin(np.pi * x / a0), amp * np.sin(np.pi * (x - a0) / (ell - a0)))
    elif datum.shape == "piecewise_linear":
        tent_l = np.minimum(x, a0 - x) / (0.5 * a0)
        tent_r = np.minimum(x - a0, ell - x) / (0.5 * (ell - a0))
        vals = np.where(left, -amp * tent_l, amp * tent_r)
    else:
        raise ValueError(f"unknown shape {datum.shape!r}")
    vals[0] = vals[-1] = 0.0
    if a0 == 0.5 * ell:
        vals = 0.5 * (vals - vals[::-1])
    if datum.orientation == "corollary":
        vals = -vals
    return Field(grid, vals)


def predicted_attractor(a0: float, ell: float, orientation: str = "paper_u0meta") -> str | None:
    """Stable branch the solution settles on, or ``None`` for the symmetric datum.

    For the negative-left datum the interface drifts to the nearer wall: ``a0 <
    ell/2`` ends on the positive branch.  The positive-left datum carries a
    compressive layer that relaxes directly and is mapped the other way.
    """
    if a0 == 0.5 * ell:
        return None
    near_left = a0 < 0.5 * ell
    if orientation == "corollary":
        near_left = not near_left
    return "positive" if near_left else "negative"


def step_imex(u: Field, dt: float, eps: float, flux: FluxFunction, nsteps: int = 1) -> Field:
    """``nsteps`` IMEX steps of size ``dt``.

    Raises:
        CFLViolation: ``dt`` exceeds the convective limit at the current state.
        NumericalBlowup: the result is not finite.
        ValueError: nonzero boundary values.
    """
    if not u.is_dirichlet():
        raise ValueError("step_imex needs zero boundary values")
    limit = max_stable_dt(u, u.grid.dx, flux)
    if dt > limit * (1.0 + 1e-12):
        raise CFLViolation(f"dt={dt:.6g} exceeds CFL limit {limit:.6g}")
    out = kernels.imex_advance(u.values, nsteps, dt, u.grid.dx, eps, flux)
    if not np.all(np.isfinite(out)):
        raise NumericalBlowup("non-finite values after IMEX step")
    return Field(u.grid, out)


def locate_zero(u: Field) -> tuple[float, str]:
    """Interface by linear interpolation of the sign change.

    With no sign change the wall convention applies: ``0`` for a positive
    field (no interface left of any point), ``ell`` for a negative one.  The
    flag is ``""``, ``"multiple"``, ``"wall"`` or ``"zero_field"``.
    """
    v = u.values[1:-1]
    x = u.grid.nodes[1:-1]
    s = np.sign(v)
    nz = np.nonzero(s)[0]
    if nz.size == 0:
        return math.nan, "zero_field"
    sn = s[nz]
    changes = np.nonzero(sn[1:] != sn[:-1])[0]
    if changes.size == 0:
        return (0.0 if sn[0] > 0 else u.grid.ell), "wall"
    flag = "" if changes.size == 1 else "multiple"
    # the crossing closest to the middle of the negative-to-positive pattern
    c = int(changes[0]) if changes.size == 1 else int(changes[np.argmin(np.abs(x[nz[changes]] - 0.5 * u.grid.ell))])
    i, j = int(nz[c]), int(nz[c + 1])
    xi = x[i] - v[i] * (x[j] - x[i]) / (v[j] - v[i])
    return float(xi), flag


def _proj_fn(u: Field, provider: SpectralProvider):
    def g(xi: float) -> float:
        st, sd = provider.get(xi)
        return inner_product(sd.psis[0], u - st.field)

    return g


def project_interface(u: Field, provider: SpectralProvider, seed: float, *,
                      xtol: float = 1e-13, margin: float = 0.0) -> tuple[float, float]:
    """Root of ``g(xi) = <psi_1(xi), u - U(xi)>`` near ``seed`` by Brent's method.

    The bracket grows geometrically around the seed inside
    ``[margin ell, (1 - margin) ell]``.  Returns ``(xi, |g(xi)|)``, or
    ``(nan, nan)`` when no bracket is found.
    """
    ell = u.grid.ell
    lo_lim, hi_lim = margin * ell, (1.0 - margin) * ell
    if not math.isfinite(seed):
        return math.nan, math.nan
    seed = min(max(seed, lo_lim), hi_lim)
    g = _proj_fn(u, provider)
    g0 = g(seed)
    if g0 == 0.0:
        return seed, 0.0
    width = 2.0 * u.grid.dx
    a = b = seed
    ga = gb = g0
    while width < ell:
        a2, b2 = max(seed - width, lo_lim), min(seed + width, hi_lim)
        if a2 < a:
            a, ga = a2, g(a2)
            if ga * g0 <= 0.0:
                b, gb = (seed, g0)
                break
        if b2 > b:
            b, gb = b2, g(b2)
            if gb * g0 <= 0.0:
                a, ga = (seed, g0)
                break
        if a2 <= lo_lim and b2 >= hi_lim:
            return math.nan, math.nan
        width *= 2.0
    else:
        return math.nan, math.nan
    if ga * gb > 0.0:
        return math.nan, math.nan
    root = brentq(g, a, b, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=200)
    return float(root), abs(g(root))


@dataclass
class Trajectory:
    eps: float
    grid: Grid
    dt: float
    times: list[float] = field(default_factory=list)
    xi_zero: list[float] = field(default_factory=list)
    xi_proj: list[float] = field(default_factory=list)
    v_l2: list[float] = field(default_factory=list)
    v_h1: list[float] = field(default_factory=list)
    u_l2: list[float] = field(default_factory=list)
    proj_residual: list[float] = field(default_factory=list)
    modal: list[np.ndarray] = field(default_factory=list)
    flags: list[str] = field(default_factory=list)
    snapshots: dict[float, Field] = field(default_factory=dict)
    final: Field | None = None

    @property
    def xi(self) -> np.ndarray:
        """``xi_proj`` where available, ``xi_zero`` elsewhere."""
        p = np.asarray(self.xi_proj, dtype=float)
        z = np.asarray(self.xi_zero, dtype=float)
        return np.where(np.isfinite(p), p, z)

    def t_form(self, threshold: float = 0.1) -> float | None:
        """First time with ``|v|_L2 < threshold |u0|_L2``."""
        if not self.times:
            return None
        ref = self.u_l2[0]
        for t, v in zip(self.times, self.v_l2):
            if math.isfinite(v) and v < threshold * ref:
                return t
        return None


def evolve(
    u0: Field,
    T: float,
    dt: float | None,
    eps: float,
    flux: FluxFunction,
    spectral_provider: SpectralProvider | None,
    *,
    stride: float = 0.5,
    snapshot_times: Sequence[float] = (),
    store_all_snapshots: bool = False,
    k_max: int | None = None,
) -> Trajectory:
    """Integrate to ``T`` and record both trackers, norms and modal coefficients.

    ``dt=None`` picks the CFL step from the bound ``max(|f'(u0)|, f'(ell))``.
    The step is shrunk so that it divides ``stride`` exactly; recorded times
    are therefore ``j * stride``.  Without a provider only ``xi_zero`` and
    ``|u|`` are recorded.
    """
    grid = u0.grid
    dx = grid.dx
    bound = max(1.0, float(np.max(np.abs(flux.df(u0.values)))), float(abs(flux.df(grid.ell))))
    dt_max = CFL * dx / bound if dt is None else float(dt)
    if dt is not None and dt > max_stable_dt(u0, dx, flux) * (1.0 + 1e-12):
        raise CFLViolation(f"dt={dt:.6g} exceeds CFL limit {max_stable_dt(u0, dx, flux):.6g}")
    nsub = max(1, int(math.ceil(stride / dt_max - 1e-9)))
    h = stride / nsub
    nrec = int(round(T / stride))
    snaps = {round(float(t) / stride) for t in snapshot_times}
    traj = Trajectory(float(eps), grid, h)
    u = u0
    prev_xi = math.nan
    for j in range(nrec + 1):
        t = j * stride
        _record(traj, t, u, spectral_provider, prev_xi, k_max)
        prev_xi = traj.xi[-1]
        if store_all_snapshots or j in snaps:
            traj.snapshots[t] = u
        if j == nrec:
            break
        u = step_imex(u, h, eps, flux, nsub)
    traj.final = u
    return traj


def _record(traj: Trajectory, t: float, u: Field, provider: SpectralProvider | None,
            prev_xi: float, k_max: int | None) -> None:
    xz, flag = locate_zero(u)
    traj.times.append(t)
    traj.xi_zero.append(xz)
    ul2 = l2_norm(u)
    traj.u_l2.append(ul2)
    if provider is None:
        traj.xi_proj.append(math.nan)
        traj.proj_residual.append(math.nan)
        traj.v_l2.append(math.nan)
        traj.v_h1.append(math.nan)
        traj.modal.append(np.full(k_max or 0, math.nan))
        traj.flags.append(flag)
        return
    seed = xz if flag in ("", "multiple") else (prev_xi if math.isfinite(prev_xi) else xz)
    xp, res = project_interface(u, provider, seed)
    if not math.isfinite(xp):
        flag = (flag + ",no_projection").lstrip(",")
        ref = xz if math.isfinite(xz) else prev_xi
    else:
        ref = xp
    traj.xi_proj.append(xp)
    traj.proj_residual.append(res)
    kk = k_max or provider.k_max
    if math.isfinite(ref) and 0.0 < ref < traj.grid.ell:
        st, sd = provider.get(ref)
        v = u - st.field
        traj.v_l2.append(l2_norm(v))
        traj.v_h1.append(h1_norm(v))
        traj.modal.append(sd.modal(v)[:kk])
    else:
        traj.v_l2.append(math.nan)
        traj.v_h1.append(math.nan)
        traj.modal.append(np.full(kk, math.nan))
    traj.flags.append(flag)


@dataclass(frozen=True)
class ReducedSolution:
    times: np.ndarray
    xi: np.ndarray
    beta: float
    theta_source: str
    xi_bar: float = 0.0


def fit_beta(times: np.ndarray, xi: np.ndarray, xi_bar: float = 0.0) -> float:
    """Least-squares decay rate of ``log|xi - xi_bar|``."""
    d = np.abs(np.asarray(xi) - xi_bar)
    ok = d > 1e-300
    if np.count_nonzero(ok) < 2:
        return 0.0
    slope = np.polyfit(np.asarray(times)[ok], np.log(d[ok]), 1)[0]
    return float(-slope)


def reduced_ode(
    xi0: float,
    T: float,
    eps: float,
    theta_source: str = "asymptotic",
    *,
    ell: float = 1.0,
    provider: SpectralProvider | None = None,
    xi_bar: float = 0.0,
    n_out: int = 401,
    t0: float = 0.0,
) -> ReducedSolution:
    """``dxi/dt = theta(xi)`` by adaptive Runge-Kutta (RK45).

    ``theta_source="asymptotic"`` uses ``-eps ell xi``; ``"spectral"`` uses the
    provider's interpolated table.
    """
    if not 0.0 <= xi0 <= ell:
        raise ValueError("xi0 must lie in [0, ell]")
    if theta_source == "asymptotic":
        def rhs(_t: float, y: np.ndarray) -> list[float]:
            return [theta_asymptotic(eps, y[0], ell)]
    elif theta_source == "spectral":
        if provider is None:
            raise ValueError("spectral theta needs a SpectralProvider")

        def rhs(_t: float, y: np.ndarray) -> list[float]:
            return [provider.theta_at(y[0])]
    else:
        raise ValueError(f"unknown theta_source {theta_source!r}")
    ts = np.linspace(t0, t0 + T, n_out)
    sol = solve_ivp(rhs, (t0, t0 + T), [float(xi0)], method="RK45", t_eval=ts, rtol=1e-10, atol=1e-13)
    xi = sol.y[0]
    beta = fit_beta(ts - t0, xi, xi_bar)
    return ReducedSolution(ts, xi, beta, theta_source, xi_bar)


def exit_time(traj: Trajectory | ReducedSolution, delta: float, *, threshold: float = 0.1,
              tracker: str = "zero") -> float | None:
    """First time after formation with ``|xi(t) - xi(t_form)| > delta``, interpolated.

    For a :class:`Trajectory` ``t_form`` is the first time with
    ``|v|_L2 < threshold |u0|_L2``; for a reduced solution it is the start.
    """
    if delta <= 0.0:
        raise ValueError("delta must be positive")
    if isinstance(traj, ReducedSolution):
        times, xi, tf = np.asarray(traj.times), np.asarray(traj.xi), float(traj.times[0])
    else:
        tf = traj.t_form(threshold)
        if tf is None:
            return None
        times = np.asarray(traj.times)
        xi = np.asarray(traj.xi_zero if tracker == "zero" else traj.xi, dtype=float)
    i0 = int(np.searchsorted(times, tf))
    ref = xi[i0]
    for i in range(i0 + 1, times.size):
        d = abs(xi[i] - ref)
        if not math.isfinite(d) or d > delta:
            dp = abs(xi[i - 1] - ref)
            if not math.isfinite(d) or d == dp:
                return float(times[i])
            return float(times[i - 1] + (delta - dp) * (times[i] - times[i - 1]) / (d - dp))
    return None


@dataclass
class TheoremReport:
    times: np.ndarray
    xi: np.ndarray
    r_l2: np.ndarray
    r_h1: np.ndarray
    z_l2: np.ndarray
    h_l2: np.ndarray
    mv_l2: np.ndarray
    q_l1: np.ndarray
    v_h1: np.ndarray
    omega: np.ndarray
    v0_l2: float
    remainder_constant: float
    quadratic_constant: float

    @property
    def r_over_omega(self) -> np.ndarray:
        return self.r_l2 / self.omega


def _integrated_lambdas(provider: SpectralProvider, times: np.ndarray, xi: np.ndarray, kmax: int
                        ) -> np.ndarray:
    lam = np.array([[provider.lambda_at(x, k) for k in range(1, kmax + 1)] for x in xi])
    return cumulative_trapezoid(lam, times, axis=0, initial=0.0)


def theorem_diagnostics(traj: Trajectory, provider: SpectralProvider) -> TheoremReport:
    """Decomposition ``v = z + R`` and the term sizes of the perturbation equation.

    ``z(t) = sum_{k>=2} v_k(0) exp(int_0^t lambda_k) phi_k(xi(t))`` with the
    integral taken along the recorded path (trapezoid rule on the
    interpolated spectral table).
    """
    times = np.asarray(traj.times, dtype=float)
    if any(t not in traj.snapshots for t in traj.times):
        raise MissingSnapshots("theorem_diagnostics needs a snapshot at every recorded time")
    xi = traj.xi
    if not np.all(np.isfinite(xi)):
        bad = int(np.argmin(np.isfinite(xi)))
        times, xi = times[:bad], xi[:bad]
    kmax = provider.k_max
    ints = _integrated_lambdas(provider, times, xi, kmax)
    flux = provider.flux
    eps = provider.eps
    grid = provider.grid
    v0 = traj.snapshots[traj.times[0]] - provider.state(xi[0]).field
    modal0 = provider.data(xi[0]).modal(v0)
    out = {k: np.empty(times.size) for k in ("r_l2", "r_h1", "z_l2", "h_l2", "mv_l2", "q_l1", "v_h1", "omega")}
    h = XI_STEP * grid.ell
    for i, (t, x) in enumerate(zip(times, xi)):
        st, sd = provider.get(x)
        u = traj.snapshots[float(t)]
        v = u - st.field
        z = grid.zeros()
        for k in range(1, kmax):
            z = z + sd.phis[k] * (modal0[k] * math.exp(ints[i, k]))
        r = v - z
        res = stationary_residual(st.field, eps, flux)
        theta = inner_product(sd.psis[0], res)
        hfield = res - st.d_xi * theta
        xp, xm = min(x + h, grid.ell), max(x - h, 0.0)
        dpsi = (provider.data(xp).psis[0] - provider.data(xm).psis[0]) * (1.0 / (xp - xm))
        mv = st.d_xi * (-theta * inner_product(dpsi, v))
        U = st.field.values
        w = flux.d2f(U) * v.values ** 2
        q = 0.5 * (-derivative(Field(grid, w)).values + flux.d3f(U) * v.values ** 2)
        out["r_l2"][i] = l2_norm(r)
        out["r_h1"][i] = h1_norm(r)
        out["z_l2"][i] = l2_norm(z)
        out["h_l2"][i] = l2_norm(hfield)
        out["mv_l2"][i] = l2_norm(mv)
        out["q_l1"][i] = l1_norm(Field(grid, q))
        out["v_h1"][i] = h1_norm(v)
        out["omega"][i] = l1_norm(res)
    v0n = l2_norm(v0)
    rc = float(np.max(out["r_l2"] / (out["omega"] * (v0n**2 + 1.0))))
    big = out["v_h1"] > 1e-8
    qc = float(np.max(out["q_l1"][big] / out["v_h1"][big] ** 2)) if np.any(big) else 0.0
    return TheoremReport(times, xi, out["r_l2"], out["r_h1"], out["z_l2"], out["h_l2"], out["mv_l2"],
                         out["q_l1"], out["v_h1"], out["omega"], v0n, rc, qc)


def flame_front(u: Field) -> Field:
    """``y(x) = -int_0^x u`` by the trapezoid rule."""
    return Field(u.grid, -cumulative_trapezoid(u.values, u.grid.nodes, initial=0.0))
