"""Reference implementations of the inner loops (pure Python / numpy).

Every function here has a twin with the same signature in ``_kernels_c.pyx``.
"""
import math

import numpy as np

_BIG = 1e250
_SMALL = 1e-250
SERIES_LIMIT = 1e-3


def miller_start(z: float, nmax: int) -> int:
    """Even starting order for the backward recurrence."""
    az = abs(z)
    m = max(nmax, int(math.ceil(az))) + 32 + int(8.0 * az ** (1.0 / 3.0))
    return m + (m & 1)


def bessel_jn_array(z, nmax):
    """Return ``J_0(z) ... J_nmax(z)`` by Miller's backward recurrence.

    The unnormalized sequence is scaled with ``J_0 + 2 sum J_2k = 1``.
    """
    z = float(z)
    nmax = int(nmax)
    out = np.zeros(nmax + 1)
    if z == 0.0:
        out[0] = 1.0
        return out
    if abs(z) < SERIES_LIMIT:
        # the recurrence would overflow (2/z is huge); three series terms suffice
        half = 0.5 * z
        q = half * half
        term = 1.0
        for n in range(nmax + 1):
            out[n] = term * (1.0 - q / (n + 1) + q * q / (2.0 * (n + 1) * (n + 2)))
            term *= half / (n + 1)
        return out
    az = abs(z)
    m = miller_start(az, nmax)
    two_over_z = 2.0 / az
    j_next = 0.0
    j_cur = 1e-30
    even_sum = 0.0
    for k in range(m, 0, -1):
        # j_cur holds J_k, produce J_{k-1}
        if k <= nmax:
            out[k] = j_cur
        if k % 2 == 0:
            even_sum += j_cur
        j_prev = k * two_over_z * j_cur - j_next
        j_next = j_cur
        j_cur = j_prev
        if abs(j_cur) > _BIG:
            j_cur *= _SMALL
            j_next *= _SMALL
            even_sum *= _SMALL
            out *= _SMALL
    out[0] = j_cur
    norm = j_cur + 2.0 * even_sum
    out /= norm
    if z < 0:
        out[1::2] *= -1.0
    return out


def banded_apply(src, coef):
    """``out[k] = sum_l coef[l + band] * src[k - l]`` for ``|l| <= band``.

    Terms with ``k - l`` outside the array are dropped (zero amplitude beyond
    the window).
    """
    src = np.asarray(src, dtype=np.complex128)
    coef = np.asarray(coef, dtype=np.complex128)
    n = src.shape[0]
    band = (coef.shape[0] - 1) // 2
    out = np.zeros(n, dtype=np.complex128)
    for l in range(-band, band + 1):
        c = coef[l + band]
        if c == 0 or abs(l) >= n:
            continue
        if l >= 0:
            out[l:] += c * src[: n - l]
        else:
            out[: n + l] += c * src[-l:]
    return out


def orbit(x0, P0, K, n):
    """Standard-map orbit, rows ``(x_i, P_i)`` for ``i = 0..n``; ``x`` reduced mod 2 pi."""
    two_pi = 2.0 * math.pi
    out = np.empty((int(n) + 1, 2))
    x = float(x0) % two_pi
    P = float(P0)
    out[0, 0] = x
    out[0, 1] = P
    for i in range(1, int(n) + 1):
        x = (x + P) % two_pi
        P = P - K * math.sin(x)
        out[i, 0] = x
        out[i, 1] = P
    return out


def tangent_orbit(x0, P0, dx0, dP0, K, n):
    """Orbit plus tangent vector, rows ``(x, P, dx, dP)``."""
    two_pi = 2.0 * math.pi
    out = np.empty((int(n) + 1, 4))
    x = float(x0) % two_pi
    P = float(P0)
    dx = float(dx0)
    dP = float(dP0)
    out[0] = (x, P, dx, dP)
    for i in range(1, int(n) + 1):
        x = (x + P) % two_pi
        P = P - K * math.sin(x)
        dx = dx + dP
        dP = dP - K * math.cos(x) * dx
        out[i] = (x, P, dx, dP)
    return out


def lyapunov_log_growth(x0, P0, K, n, renorm_every):
    """Accumulated ``log`` growth of a tangent vector over ``n`` steps.

    The tangent vector starts at unit length along ``(1, 1)/sqrt 2`` and is
    renormalized every ``renorm_every`` steps.
    """
    two_pi = 2.0 * math.pi
    x = float(x0) % two_pi
    P = float(P0)
    dx = dP = math.sqrt(0.5)
    total = 0.0
    for i in range(1, int(n) + 1):
        x = (x + P) % two_pi
        P = P - K * math.sin(x)
        dx = dx + dP
        dP = dP - K * math.cos(x) * dx
        if i % renorm_every == 0 or i == n:
            r = math.hypot(dx, dP)
            total += math.log(r)
            dx /= r
            dP /= r
    return total
