"""Backend selection for the hot loops.

The compiled extension is used when it imports and the flux is one of the
built-in families; otherwise the numpy reference runs.  Setting
``SLOWMOTION_PURE_PYTHON=1`` forces the reference backend.
"""

from __future__ import annotations

import os
from types import ModuleType

import numpy as np

from . import _pykernels
from .core import FluxFunction


def _load() -> ModuleType:
    if os.environ.get("SLOWMOTION_PURE_PYTHON", "") not in ("", "0"):
        return _pykernels
    try:
        from . import _ckernels  # type: ignore[attr-defined]
    except ImportError:
        return _pykernels
    return _ckernels


_backend = _load()
BACKEND: str = _backend.BACKEND


def flux_code(flux: FluxFunction) -> tuple[int, float] | None:
    """Kernel code for a built-in flux, ``None`` for a generic one."""
    if flux.kind == "burgers":
        return 0, 2.0
    if flux.kind == "power":
        return 1, float(flux.gamma)
    return None


def imex_advance(
    u: np.ndarray, nsteps: int, dt: float, dx: float, eps: float, flux: FluxFunction,
    backend: ModuleType | None = None,
) -> np.ndarray:
    mod = backend or _backend
    code = flux_code(flux)
    if code is None:
        return _pykernels.imex_advance_generic(u, nsteps, dt, dx, eps, flux)
    return mod.imex_advance(np.ascontiguousarray(u, dtype=float), int(nsteps), dt, dx, eps, *code)


def monotone_sweeps(
    u: np.ndarray, eps: float, dx: float, K: float, M: float, flux: FluxFunction,
    tol: float, maxit: int, backend: ModuleType | None = None,
) -> tuple[np.ndarray, int, float, float]:
    code = flux_code(flux)
    if code is None:
        raise NotImplementedError("monotone iteration supports the built-in fluxes only")
    mod = backend or _backend
    return mod.monotone_sweeps(
        np.ascontiguousarray(u, dtype=float), eps, dx, K, M, code[0], code[1], tol, int(maxit)
    )


def backends() -> dict[str, ModuleType]:
    """Every importable backend, keyed by name (for tests and benchmarks)."""
    out: dict[str, ModuleType] = {"python": _pykernels}
    try:
        from . import _ckernels  # type: ignore[attr-defined]

        out["cython"] = _ckernels
    except ImportError:
        pass
    return out
