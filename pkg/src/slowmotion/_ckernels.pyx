# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot loops in ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, pow, isfinite

cnp.import_array()

BACKEND = "cython"


cdef inline double _f(double u, int kind, double gamma) noexcept nogil:
    if kind == 0:
        return 0.5 * u * u
    return pow(fabs(u), gamma) / gamma


cdef inline double _df(double u, int kind, double gamma) noexcept nogil:
    cdef double a
    if kind == 0:
        return u
    a = pow(fabs(u), gamma - 1.0)
    if u > 0.0:
        return a
    if u < 0.0:
        return -a
    return 0.0


cdef void _thomas(double off, double diag, double[::1] cp, double[::1] b,
                  double[::1] y, Py_ssize_t n) noexcept nogil:
    # constant-coefficient symmetric tridiagonal; cp holds the factored upper row
    cdef Py_ssize_t i
    cdef double denom
    y[0] = b[0] / diag
    for i in range(1, n):
        denom = diag - off * cp[i - 1]
        y[i] = (b[i] - off * y[i - 1]) / denom
    for i in range(n - 2, -1, -1):
        y[i] = y[i] - cp[i] * y[i + 1]


cdef void _factor(double off, double diag, double[::1] cp, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i
    cp[0] = off / diag
    for i in range(1, n):
        cp[i] = off / (diag - off * cp[i - 1])


cdef void _equivariant_solve(double off, double diag, double[::1] cp, double[::1] b,
                             double[::1] rb, double[::1] y1, double[::1] y2,
                             Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i
    _thomas(off, diag, cp, b, y1, n)
    for i in range(n):
        rb[i] = b[n - 1 - i]
    _thomas(off, diag, cp, rb, y2, n)
    for i in range(n):
        b[i] = 0.5 * (y1[i] + y2[n - 1 - i])


def imex_advance(u_in, long nsteps, double dt, double dx, double eps, int kind, double gamma):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] arr = np.array(u_in, dtype=np.float64, copy=True)
    cdef double[::1] u = arr
    cdef Py_ssize_t m = u.shape[0]
    cdef Py_ssize_t n = m - 2
    cdef double r = eps * dt / (dx * dx)
    cdef double off = -r
    cdef double diag = 1.0 + 2.0 * r
    cdef double[::1] cp = np.empty(n)
    cdef double[::1] b = np.empty(n)
    cdef double[::1] rb = np.empty(n)
    cdef double[::1] y1 = np.empty(n)
    cdef double[::1] y2 = np.empty(n)
    cdef double[::1] fl = np.empty(m - 1)
    cdef double[::1] fv = np.empty(m)
    cdef double[::1] dfv = np.empty(m)
    cdef Py_ssize_t i
    cdef long s
    cdef double a, a2
    with nogil:
        _factor(off, diag, cp, n)
        for s in range(nsteps):
            for i in range(m):
                fv[i] = _f(u[i], kind, gamma)
                dfv[i] = _df(u[i], kind, gamma)
            for i in range(m - 1):
                a = fabs(dfv[i])
                a2 = fabs(dfv[i + 1])
                if a2 > a:
                    a = a2
                fl[i] = 0.5 * (fv[i] + fv[i + 1]) - 0.5 * a * (u[i + 1] - u[i])
            for i in range(n):
                b[i] = u[i + 1] + dt * (-(fl[i + 1] - fl[i]) / dx + dfv[i + 1])
            _equivariant_solve(off, diag, cp, b, rb, y1, y2, n)
            for i in range(n):
                u[i + 1] = b[i]
            u[0] = 0.0
            u[m - 1] = 0.0
    return arr


def monotone_sweeps(u_in, double eps, double dx, double K, double M, int kind,
                    double gamma, double tol, long maxit):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] arr = np.array(u_in, dtype=np.float64, copy=True)
    cdef double[::1] u = arr
    cdef Py_ssize_t m = u.shape[0]
    cdef Py_ssize_t n = m - 2
    cdef double off = -(eps / (dx * dx) - K / (2.0 * dx))
    cdef double diag = 2.0 * eps / (dx * dx) + M
    cdef double[::1] cp = np.empty(n)
    cdef double[::1] b = np.empty(n)
    cdef double[::1] rb = np.empty(n)
    cdef double[::1] y1 = np.empty(n)
    cdef double[::1] y2 = np.empty(n)
    cdef double[::1] fv = np.empty(m)
    cdef Py_ssize_t i
    cdef long it = 0
    cdef double upd = 1e308
    cdef double min_inc = 1e308
    cdef double inc
    with nogil:
        _factor(off, diag, cp, n)
        while it < maxit:
            for i in range(m):
                fv[i] = _f(u[i], kind, gamma)
            for i in range(n):
                b[i] = (-(fv[i + 2] - fv[i]) / (2.0 * dx) + _df(u[i + 1], kind, gamma)
                        + (K / (2.0 * dx)) * (u[i + 2] + u[i]) + M * u[i + 1])
            _equivariant_solve(off, diag, cp, b, rb, y1, y2, n)
            upd = 0.0
            for i in range(n):
                inc = b[i] - u[i + 1]
                u[i + 1] = b[i]
                if fabs(inc) > upd:
                    upd = fabs(inc)
                if inc < min_inc:
                    min_inc = inc
            it += 1
            if upd <= tol:
                break
    return arr, it, upd, min_inc
