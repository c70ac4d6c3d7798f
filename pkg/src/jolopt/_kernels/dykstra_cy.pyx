# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled Dykstra projection kernel; see dykstra_py for the reference."""

from libc.math cimport sqrt

import numpy as np

cimport numpy as cnp

cnp.import_array()


def dykstra_project(point, lower, upper, indptr, indices, data, offset, sqnorm,
                    double tol, long max_sweeps):
    """Drop-in replacement for dykstra_py.dykstra_project."""
    cdef cnp.ndarray[double, ndim=1] x_arr = np.array(point, dtype=np.float64)
    cdef double[::1] x = x_arr
    cdef const double[::1] lo_b = np.ascontiguousarray(lower, dtype=np.float64)
    cdef const double[::1] hi_b = np.ascontiguousarray(upper, dtype=np.float64)
    cdef const long[::1] iptr = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef const long[::1] idx = np.ascontiguousarray(indices, dtype=np.int64)
    cdef const double[::1] val = np.ascontiguousarray(data, dtype=np.float64)
    cdef const double[::1] off = np.ascontiguousarray(offset, dtype=np.float64)
    cdef const double[::1] sqn = np.ascontiguousarray(sqnorm, dtype=np.float64)

    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t m = off.shape[0]
    cdef cnp.ndarray[double, ndim=1] p_box_arr = np.zeros(n)
    cdef cnp.ndarray[double, ndim=1] t_hs_arr = np.zeros(m)
    cdef double[::1] p_box = p_box_arr
    cdef double[::1] t_hs = t_hs_arr

    cdef double tol_sq = tol * tol
    cdef long sweeps = 0
    cdef bint converged = False
    cdef Py_ssize_t i, j, s, lo, hi
    cdef double resid, y, xi, pn, diff, dot, viol, t, step, worst, d

    with nogil:
        while sweeps < max_sweeps:
            sweeps += 1
            resid = 0.0

            for i in range(n):
                y = x[i] + p_box[i]
                xi = y
                if xi < lo_b[i]:
                    xi = lo_b[i]
                if xi > hi_b[i]:
                    xi = hi_b[i]
                pn = y - xi
                diff = pn - p_box[i]
                resid += diff * diff
                p_box[i] = pn
                x[i] = xi

            for j in range(m):
                lo = iptr[j]
                hi = iptr[j + 1]
                dot = 0.0
                for s in range(lo, hi):
                    dot += val[s] * x[idx[s]]
                viol = (dot + t_hs[j] * sqn[j] - off[j]) / sqn[j]
                t = viol if viol > 0.0 else 0.0
                step = t_hs[j] - t
                if step != 0.0:
                    for s in range(lo, hi):
                        x[idx[s]] += step * val[s]
                resid += step * step * sqn[j]
                t_hs[j] = t

            if resid <= tol_sq:
                worst = 0.0
                for i in range(n):
                    d = lo_b[i] - x[i]
                    if d > worst:
                        worst = d
                    d = x[i] - hi_b[i]
                    if d > worst:
                        worst = d
                for j in range(m):
                    lo = iptr[j]
                    hi = iptr[j + 1]
                    dot = 0.0
                    for s in range(lo, hi):
                        dot += val[s] * x[idx[s]]
                    d = (dot - off[j]) / sqrt(sqn[j])
                    if d > worst:
                        worst = d
                if worst <= tol:
                    converged = True
                    break

    return x_arr, bool(converged), int(sweeps)
