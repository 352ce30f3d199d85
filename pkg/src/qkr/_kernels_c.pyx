# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops; mirrors ``_kernels_py`` function for function."""
import numpy as np

from libc.math cimport sin, cos, log, sqrt, fabs, fmod, hypot, ceil, cbrt

cdef double TWO_PI = 6.283185307179586
cdef double BIG = 1e250
cdef double SMALL = 1e-250
cdef double SERIES_LIMIT = 1e-3


cdef inline double wrap2pi(double x) nogil:
    cdef double r = fmod(x, TWO_PI)
    if r < 0:
        r += TWO_PI
    # fmod of a tiny negative can round up to exactly 2 pi
    if r >= TWO_PI:
        r -= TWO_PI
    return r


def miller_start(double z, long nmax):
    cdef double az = fabs(z)
    cdef long m = max(nmax, <long>ceil(az)) + 32 + <long>(8.0 * cbrt(az))
    return m + (m & 1)


def bessel_jn_array(double z, long nmax):
    out_arr = np.zeros(nmax + 1)
    cdef double[::1] out = out_arr
    cdef double az, two_over_z, j_next, j_cur, j_prev, even_sum, norm
    cdef long m, k, i
    cdef double half, q, term
    if z == 0.0:
        out[0] = 1.0
        return out_arr
    if fabs(z) < SERIES_LIMIT:
        half = 0.5 * z
        q = half * half
        term = 1.0
        for i in range(nmax + 1):
            out[i] = term * (1.0 - q / (i + 1) + q * q / (2.0 * (i + 1) * (i + 2)))
            term *= half / (i + 1)
        return out_arr
    az = fabs(z)
    m = miller_start(az, nmax)
    two_over_z = 2.0 / az
    j_next = 0.0
    j_cur = 1e-30
    even_sum = 0.0
    with nogil:
        for k in range(m, 0, -1):
            if k <= nmax:
                out[k] = j_cur
            if k % 2 == 0:
                even_sum += j_cur
            j_prev = k * two_over_z * j_cur - j_next
            j_next = j_cur
            j_cur = j_prev
            if fabs(j_cur) > BIG:
                j_cur *= SMALL
                j_next *= SMALL
                even_sum *= SMALL
                for i in range(nmax + 1):
                    out[i] *= SMALL
        out[0] = j_cur
        norm = j_cur + 2.0 * even_sum
        for i in range(nmax + 1):
            out[i] /= norm
            if z < 0 and i % 2 == 1:
                out[i] = -out[i]
    return out_arr


def banded_apply(src, coef):
    cdef const double complex[::1] s = np.ascontiguousarray(src, dtype=np.complex128)
    cdef const double complex[::1] c = np.ascontiguousarray(coef, dtype=np.complex128)
    cdef Py_ssize_t n = s.shape[0]
    cdef Py_ssize_t band = (c.shape[0] - 1) // 2
    out_arr = np.zeros(n, dtype=np.complex128)
    cdef double complex[::1] out = out_arr
    cdef Py_ssize_t k, l, m, lo, hi
    cdef double complex acc
    with nogil:
        for k in range(n):
            acc = 0
            lo = k - band
            if lo < 0:
                lo = 0
            hi = k + band
            if hi > n - 1:
                hi = n - 1
            for m in range(lo, hi + 1):
                acc = acc + c[k - m + band] * s[m]
            out[k] = acc
    return out_arr


def orbit(double x0, double P0, double K, long n):
    out_arr = np.empty((n + 1, 2))
    cdef double[:, ::1] out = out_arr
    cdef double x = wrap2pi(x0)
    cdef double P = P0
    cdef long i
    out[0, 0] = x
    out[0, 1] = P
    with nogil:
        for i in range(1, n + 1):
            x = wrap2pi(x + P)
            P = P - K * sin(x)
            out[i, 0] = x
            out[i, 1] = P
    return out_arr


def tangent_orbit(double x0, double P0, double dx0, double dP0, double K, long n):
    out_arr = np.empty((n + 1, 4))
    cdef double[:, ::1] out = out_arr
    cdef double x = wrap2pi(x0)
    cdef double P = P0
    cdef double dx = dx0
    cdef double dP = dP0
    cdef long i
    out[0, 0] = x
    out[0, 1] = P
    out[0, 2] = dx
    out[0, 3] = dP
    with nogil:
        for i in range(1, n + 1):
            x = wrap2pi(x + P)
            P = P - K * sin(x)
            dx = dx + dP
            dP = dP - K * cos(x) * dx
            out[i, 0] = x
            out[i, 1] = P
            out[i, 2] = dx
            out[i, 3] = dP
    return out_arr


def lyapunov_log_growth(double x0, double P0, double K, long n, long renorm_every):
    cdef double x = wrap2pi(x0)
    cdef double P = P0
    cdef double dx = sqrt(0.5)
    cdef double dP = sqrt(0.5)
    cdef double total = 0.0
    cdef double r
    cdef long i
    with nogil:
        for i in range(1, n + 1):
            x = wrap2pi(x + P)
            P = P - K * sin(x)
            dx = dx + dP
            dP = dP - K * cos(x) * dx
            if i % renorm_every == 0 or i == n:
                r = hypot(dx, dP)
                total += log(r)
                dx /= r
                dP /= r
    return total
