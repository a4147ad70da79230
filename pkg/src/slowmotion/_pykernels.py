"""Pure numpy reference kernels.

These define the semantics; ``_ckernels.pyx`` reproduces them loop for loop.
Both backends must agree to rounding on every call (see tests/test_kernels.py).
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve_banded

from .core import FluxFunction

BACKEND = "python"


def _f(u: np.ndarray, kind: int, gamma: float) -> np.ndarray:
    if kind == 0:
        return 0.5 * u * u
    return np.abs(u) ** gamma / gamma


def _df(u: np.ndarray, kind: int, gamma: float) -> np.ndarray:
    if kind == 0:
        return u.copy()
    return np.sign(u) * np.abs(u) ** (gamma - 1.0)


def symmetric_toeplitz_solve(ab: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve a persymmetric tridiagonal system so that reflection is exact.

    ``y = (S b + J S J b) / 2`` with ``J`` the index reversal.  Mathematically
    this is ``S b``; in floating point it makes ``b -> -J b`` map to
    ``y -> -J y`` bit for bit, which keeps odd data exactly odd.
    """
    y1 = solve_banded((1, 1), ab, b, check_finite=False)
    y2 = solve_banded((1, 1), ab, b[::-1].copy(), check_finite=False)[::-1]
    return 0.5 * (y1 + y2)


def diffusion_banded(n: int, r: float) -> np.ndarray:
    ab = np.empty((3, n))
    ab[0, 0] = 0.0
    ab[0, 1:] = -r
    ab[1, :] = 1.0 + 2.0 * r
    ab[2, :-1] = -r
    ab[2, -1] = 0.0
    return ab


def explicit_update(u: np.ndarray, dt: float, dx: float, kind: int, gamma: float) -> np.ndarray:
    """Convection (local Lax-Friedrichs) plus reaction, interior nodes only."""
    f = _f(u, kind, gamma)
    df = _df(u, kind, gamma)
    a = np.maximum(np.abs(df[:-1]), np.abs(df[1:]))
    flux = 0.5 * (f[:-1] + f[1:]) - 0.5 * a * (u[1:] - u[:-1])
    return u[1:-1] + dt * (-(flux[1:] - flux[:-1]) / dx + df[1:-1])


def imex_advance(
    u: np.ndarray, nsteps: int, dt: float, dx: float, eps: float, kind: int, gamma: float
) -> np.ndarray:
    """``nsteps`` IMEX steps for a built-in flux (``kind`` 0 = Burgers, 1 = power)."""
    u = np.array(u, dtype=float, copy=True)
    n = u.size - 2
    ab = diffusion_banded(n, eps * dt / (dx * dx))
    for _ in range(nsteps):
        rhs = explicit_update(u, dt, dx, kind, gamma)
        u[1:-1] = symmetric_toeplitz_solve(ab, rhs)
        u[0] = u[-1] = 0.0
    return u


def imex_advance_generic(
    u: np.ndarray, nsteps: int, dt: float, dx: float, eps: float, flux: FluxFunction
) -> np.ndarray:
    """Same scheme with an arbitrary :class:`FluxFunction` (numpy only)."""
    u = np.array(u, dtype=float, copy=True)
    n = u.size - 2
    ab = diffusion_banded(n, eps * dt / (dx * dx))
    for _ in range(nsteps):
        f = flux.f(u)
        df = flux.df(u)
        a = np.maximum(np.abs(df[:-1]), np.abs(df[1:]))
        fl = 0.5 * (f[:-1] + f[1:]) - 0.5 * a * (u[1:] - u[:-1])
        rhs = u[1:-1] + dt * (-(fl[1:] - fl[:-1]) / dx + df[1:-1])
        u[1:-1] = symmetric_toeplitz_solve(ab, rhs)
        u[0] = u[-1] = 0.0
    return u


def monotone_rhs(u: np.ndarray, dx: float, K: float, M: float, kind: int, gamma: float) -> np.ndarray:
    """``B(u)`` of the splitting ``P_h(u) = A u + B(u)``, interior nodes."""
    f = _f(u, kind, gamma)
    df = _df(u, kind, gamma)
    return (
        -(f[2:] - f[:-2]) / (2.0 * dx)
        + df[1:-1]
        + (K / (2.0 * dx)) * (u[2:] + u[:-2])
        + M * u[1:-1]
    )


def monotone_matrix(n: int, eps: float, dx: float, K: float, M: float) -> np.ndarray:
    """Banded form of ``-A``: diagonal ``2 eps/dx^2 + M``, off-diagonals ``-(eps/dx^2 - K/(2dx))``."""
    off = -(eps / (dx * dx) - K / (2.0 * dx))
    ab = np.empty((3, n))
    ab[0, 0] = 0.0
    ab[0, 1:] = off
    ab[1, :] = 2.0 * eps / (dx * dx) + M
    ab[2, :-1] = off
    ab[2, -1] = 0.0
    return ab


def monotone_sweeps(
    u: np.ndarray,
    eps: float,
    dx: float,
    K: float,
    M: float,
    kind: int,
    gamma: float,
    tol: float,
    maxit: int,
) -> tuple[np.ndarray, int, float, float]:
    """Iterate ``-A u_{k+1} = B(u_k)`` until the sup-norm update falls below ``tol``.

    Returns ``(u, iterations, last_update, min_increment)`` where
    ``min_increment`` is the most negative nodal change seen, which lets the
    caller detect a broken ordering.
    """
    u = np.array(u, dtype=float, copy=True)
    ab = monotone_matrix(u.size - 2, eps, dx, K, M)
    min_inc = np.inf
    upd = np.inf
    it = 0
    while it < maxit:
        new = symmetric_toeplitz_solve(ab, monotone_rhs(u, dx, K, M, kind, gamma))
        inc = new - u[1:-1]
        u[1:-1] = new
        it += 1
        upd = float(np.max(np.abs(inc)))
        min_inc = min(min_inc, float(np.min(inc)))
        if upd <= tol:
            break
    return u, it, upd, min_inc
