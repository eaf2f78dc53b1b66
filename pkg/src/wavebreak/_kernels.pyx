# cython: language_level=3
"""Compiled inner loops.

Only one kernel lives here: evaluation of a one-sided trigonometric series
at arbitrary (off-grid) points.  It is the hot loop behind characteristic
tracking, extremum refinement and the real-space principal-value quadrature,
all of which need a band-limited field at thousands of scattered points.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin

cnp.import_array()


def trig_sum(const double complex[:, ::1] coef, double base, double x0,
             const double[::1] points):
    """Return ``Re sum_k coef[r, k] exp(i k base (y - x0))`` for every row r.

    The phase factor is advanced by complex rotation, so each point costs one
    ``cos``/``sin`` pair regardless of the number of modes.
    """
    cdef Py_ssize_t nrows = coef.shape[0]
    cdef Py_ssize_t nmodes = coef.shape[1]
    cdef Py_ssize_t npts = points.shape[0]
    cdef Py_ssize_t p, k, r
    cdef double theta, wr, wi, zr, zi, tr
    cdef double complex c
    out_arr = np.zeros((nrows, npts), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    for p in range(npts):
        theta = base * (points[p] - x0)
        wr = cos(theta)
        wi = sin(theta)
        zr = 1.0
        zi = 0.0
        for k in range(nmodes):
            for r in range(nrows):
                c = coef[r, k]
                out[r, p] += c.real * zr - c.imag * zi
            tr = zr * wr - zi * wi
            zi = zr * wi + zi * wr
            zr = tr
    return out_arr
