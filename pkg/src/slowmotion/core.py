"""Meshes, nodal fields, flux functions and the discrete stationary operator.

Everything here is immutable and pure.  Fields carry their boundary nodes, so a
field on a grid with ``n`` interior nodes holds ``n + 2`` values.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.typing import ArrayLike, NDArray

__all__ = [
    "FluxFunction",
    "GridMismatch",
    "Grid",
    "Field",
    "burgers_flux",
    "power_flux",
    "inner_product",
    "l1_norm",
    "l2_norm",
    "h1_norm",
    "derivative",
    "second_difference",
    "stationary_residual",
    "linearization_bands",
]

Array = NDArray[np.float64]


class GridMismatch(ValueError):
    """Two fields that must share a grid do not."""


@dataclass(frozen=True)
class FluxFunction:
    """Convex flux ``f`` with its first three derivatives.

    Construction checks ``f(0) = f'(0) = 0``, oddness of ``f'`` and ``f'' > 0``
    on a sample of ``[-check_range, check_range]`` (the origin is excluded from
    the convexity check).

    ``kind`` and ``gamma`` let the compiled kernels recognise the built-in
    fluxes; user-defined fluxes leave ``kind = "generic"`` and run on the
    numpy path.
    """

    eval_f: Callable[[ArrayLike], Array]
    eval_df: Callable[[ArrayLike], Array]
    eval_d2f: Callable[[ArrayLike], Array]
    eval_d3f: Callable[[ArrayLike], Array]
    name: str = "generic"
    kind: str = "generic"
    gamma: float = 2.0
    check_range: float = 1.0

    def __post_init__(self) -> None:
        if abs(float(self.eval_f(0.0))) > 1e-12 or abs(float(self.eval_df(0.0))) > 1e-12:
            raise ValueError(f"flux {self.name!r}: need f(0) = f'(0) = 0")
        s = np.linspace(-self.check_range, self.check_range, 201)
        s = s[s != 0.0]
        df = np.asarray(self.eval_df(s), dtype=float)
        if np.max(np.abs(df + np.asarray(self.eval_df(-s), dtype=float))) > 1e-10:
            raise ValueError(f"flux {self.name!r}: f' is not odd")
        if np.any(np.asarray(self.eval_d2f(s), dtype=float) <= 0.0):
            raise ValueError(f"flux {self.name!r}: f'' must be positive away from 0")

    def f(self, u: ArrayLike) -> Array:
        return np.asarray(self.eval_f(u), dtype=float)

    def df(self, u: ArrayLike) -> Array:
        return np.asarray(self.eval_df(u), dtype=float)

    def d2f(self, u: ArrayLike) -> Array:
        return np.asarray(self.eval_d2f(u), dtype=float)

    def d3f(self, u: ArrayLike) -> Array:
        return np.asarray(self.eval_d3f(u), dtype=float)


def burgers_flux() -> FluxFunction:
    """``f(u) = u**2 / 2``."""
    return FluxFunction(
        eval_f=lambda u: 0.5 * np.square(u),
        eval_df=lambda u: np.asarray(u, dtype=float) * 1.0,
        eval_d2f=lambda u: np.ones_like(np.asarray(u, dtype=float)),
        eval_d3f=lambda u: np.zeros_like(np.asarray(u, dtype=float)),
        name="burgers",
        kind="burgers",
        gamma=2.0,
    )


def power_flux(gamma: float) -> FluxFunction:
    """``f(u) = |u|**gamma / gamma`` for ``gamma > 1``; ``gamma = 2`` is Burgers.

    ``f'''`` is singular at the origin when ``gamma < 3``; it is evaluated as 0
    there.
    """
    if gamma <= 1.0:
        raise ValueError("power flux needs gamma > 1")
    g = float(gamma)

    def d3f(u: ArrayLike) -> Array:
        a = np.abs(np.asarray(u, dtype=float))
        with np.errstate(divide="ignore", invalid="ignore"):
            out = (g - 1.0) * (g - 2.0) * np.sign(u) * a ** (g - 3.0)
        return np.where(a > 0.0, out, 0.0)

    return FluxFunction(
        eval_f=lambda u: np.abs(np.asarray(u, dtype=float)) ** g / g,
        eval_df=lambda u: np.sign(u) * np.abs(np.asarray(u, dtype=float)) ** (g - 1.0),
        eval_d2f=lambda u: (g - 1.0) * np.abs(np.asarray(u, dtype=float)) ** (g - 2.0),
        eval_d3f=d3f,
        name=f"power{g:g}",
        kind="power",
        gamma=g,
    )


@dataclass(frozen=True)
class Grid:
    """Uniform mesh ``x_i = i * ell / (n + 1)``, ``i = 0 .. n + 1``."""

    ell: float
    n: int
    nodes: Array = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.n < 3:
            raise ValueError("need at least 3 interior nodes")
        if not self.ell > 0.0:
            raise ValueError("interval length must be positive")
        x = self.ell * (np.arange(self.n + 2, dtype=float) / (self.n + 1))
        x[-1] = self.ell
        x.flags.writeable = False
        object.__setattr__(self, "nodes", x)

    @property
    def dx(self) -> float:
        return self.ell / (self.n + 1)

    @property
    def interior(self) -> Array:
        return self.nodes[1:-1]

    def zeros(self) -> "Field":
        return Field(self, np.zeros(self.n + 2))

    def field(self, fn: Callable[[Array], ArrayLike]) -> "Field":
        """Sample ``fn`` on the nodes."""
        return Field(self, np.asarray(fn(self.nodes), dtype=float))

    def refined(self) -> "Grid":
        """The grid with ``dx`` halved (nodes of ``self`` are kept)."""
        return Grid(self.ell, 2 * self.n + 1)


@dataclass(frozen=True)
class Field:
    """Nodal values on a grid, boundary nodes included."""

    grid: Grid
    values: Array

    def __post_init__(self) -> None:
        v = np.array(self.values, dtype=float, copy=True)
        if v.shape != (self.grid.n + 2,):
            raise GridMismatch(
                f"field has {v.shape} values, grid needs {(self.grid.n + 2,)}"
            )
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def interior(self) -> Array:
        return self.values[1:-1]

    def is_dirichlet(self, tol: float = 0.0) -> bool:
        return abs(self.values[0]) <= tol and abs(self.values[-1]) <= tol

    def with_values(self, values: ArrayLike) -> "Field":
        return Field(self.grid, np.asarray(values, dtype=float))

    def reflected(self) -> "Field":
        """The odd reflection ``x -> -u(ell - x)``."""
        return Field(self.grid, -self.values[::-1])

    def __add__(self, other: "Field") -> "Field":
        _same_grid(self, other)
        return Field(self.grid, self.values + other.values)

    def __sub__(self, other: "Field") -> "Field":
        _same_grid(self, other)
        return Field(self.grid, self.values - other.values)

    def __neg__(self) -> "Field":
        return Field(self.grid, -self.values)

    def __mul__(self, c: float) -> "Field":
        return Field(self.grid, self.values * float(c))

    __rmul__ = __mul__


def _same_grid(a: Field, b: Field) -> None:
    if a.grid is not b.grid and a.grid != b.grid:
        raise GridMismatch("fields live on different grids")


def _trapezoid_weights(grid: Grid) -> Array:
    w = np.full(grid.n + 2, grid.dx)
    w[0] = w[-1] = 0.5 * grid.dx
    return w


def inner_product(a: Field, b: Field) -> float:
    """L2(0, ell) pairing by the composite trapezoid rule."""
    _same_grid(a, b)
    return float(np.sum(_trapezoid_weights(a.grid) * a.values * b.values))


def l1_norm(a: Field) -> float:
    return float(np.sum(_trapezoid_weights(a.grid) * np.abs(a.values)))


def l2_norm(a: Field) -> float:
    return float(np.sqrt(inner_product(a, a)))


def derivative(a: Field) -> Field:
    """Centred first difference, one-sided at the two ends."""
    return Field(a.grid, np.gradient(a.values, a.grid.dx, edge_order=2))


def h1_norm(a: Field) -> float:
    """``sqrt(|a|_L2^2 + |a'|_L2^2)``; ``a'`` from cell differences (midpoint rule)."""
    dx = a.grid.dx
    slope = np.diff(a.values) / dx
    return float(np.sqrt(inner_product(a, a) + dx * np.sum(slope * slope)))


def second_difference(values: Array, dx: float) -> Array:
    """Three-point second difference at the interior nodes."""
    return (values[2:] - 2.0 * values[1:-1] + values[:-2]) / (dx * dx)


def stationary_residual(u: Field, eps: float, flux: FluxFunction) -> Field:
    """Nodal ``eps u'' - (f(u))' + f'(u)``; zero at the two boundary nodes.

    Second derivative by the three-point stencil, the flux derivative by the
    conservative centred difference ``(f(u[i+1]) - f(u[i-1])) / (2 dx)``.
    """
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    v = u.values
    dx = u.grid.dx
    fv = flux.f(v)
    r = np.zeros_like(v)
    r[1:-1] = eps * second_difference(v, dx) - (fv[2:] - fv[:-2]) / (2.0 * dx) + flux.df(v[1:-1])
    return Field(u.grid, r)


def linearization_bands(
    values: Array, eps: float, dx: float, flux: FluxFunction
) -> tuple[Array, Array, Array]:
    """Tridiagonal rows of ``v -> eps v'' - (f'(U) v)' + f''(U) v`` at interior nodes.

    Row ``i`` reads ``lo[i] v[i-1] + diag[i] v[i] + up[i] v[i+1]``; ``lo[0]`` and
    ``up[-1]`` multiply boundary values and are returned for completeness.  This
    is also the exact Jacobian of :func:`stationary_residual`.
    """
    u = np.asarray(values, dtype=float)
    d1 = flux.df(u)
    c = eps / (dx * dx)
    lo = c + d1[:-2] / (2.0 * dx)
    up = c - d1[2:] / (2.0 * dx)
    diag = -2.0 * c + flux.d2f(u[1:-1])
    return lo, diag, up
