# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels. Same algorithms and signatures as _pykernels."""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, cos, sin, log, atan2, hypot, floor, fabs, sqrt, M_PI

cnp.import_array()

cdef double INV_SQRT_PI = 0.56418958354775628695
cdef double EULER_GAMMA = 0.57721566490153286061
cdef double TRAP_H = 0.49159571455659640   # sqrt(pi / 13)
cdef int TRAP_TERMS = 15
cdef double TRAP_RADIUS = 10.0


cdef inline double complex _cexp(double complex z) nogil:
    cdef double m = exp(z.real)
    return m * cos(z.imag) + 1j * (m * sin(z.imag))


cdef inline double complex _clog(double complex z) nogil:
    return log(hypot(z.real, z.imag)) + 1j * atan2(z.imag, z.real)


cdef inline double _cabs(double complex z) nogil:
    return hypot(z.real, z.imag)


cdef double complex _faddeeva_trapezoid(double complex z) nogil:
    cdef double x = z.real, y = z.imag, t, r
    cdef double complex z2 = z * z, acc = 0, val
    cdef int k
    r = x / TRAP_H
    cdef double frac = fabs(r - floor(r + 0.5))
    if frac > 0.25:
        for k in range(1, TRAP_TERMS + 1):
            t = k * TRAP_H
            acc = acc + exp(-t * t) / (z2 - t * t)
        val = 1j * TRAP_H / M_PI * (1.0 / z + 2.0 * z * acc)
        if y < M_PI / TRAP_H:
            val = val + 2.0 * _cexp(-z2) / (1.0 - _cexp(-2j * M_PI * z / TRAP_H))
    else:
        for k in range(1, TRAP_TERMS + 1):
            t = (k - 0.5) * TRAP_H
            acc = acc + exp(-t * t) / (z2 - t * t)
        val = 2j * TRAP_H / M_PI * z * acc
        if y < M_PI / TRAP_H:
            val = val + 2.0 * _cexp(-z2) / (1.0 + _cexp(-2j * M_PI * z / TRAP_H))
    return val


cdef double complex _faddeeva_upper(double complex z) nogil:
    cdef double r = _cabs(z)
    cdef double complex tail = 0
    cdef int k, depth
    if r < TRAP_RADIUS:
        return _faddeeva_trapezoid(z)
    if r < 15.0:
        depth = 12
    elif r < 30.0:
        depth = 8
    elif r < 100.0:
        depth = 5
    else:
        depth = 3
    for k in range(depth, 0, -1):
        tail = (0.5 * k) / (z - tail)
    return 1j * INV_SQRT_PI / (z - tail)


cdef double complex _erfcx(double complex z) nogil:
    if z.real >= 0.0:
        return _faddeeva_upper(1j * z)
    return 2.0 * _cexp(z * z) - _faddeeva_upper(-1j * z)


cdef double complex _e1_series(double complex z) nogil:
    cdef double complex acc = 0, term = 1, step
    cdef int k = 1
    while True:
        term = term * (-z / k)
        step = term / k
        acc = acc + step
        if _cabs(step) <= 1e-17 * _cabs(acc) or k > 500:
            break
        k += 1
    return -EULER_GAMMA - _clog(z) - acc


cdef double complex _expint_cf(int order, double complex z) nogil:
    cdef double r = _cabs(z)
    cdef int depth = 10 + <int>(200.0 / r * (1.0 + (-z.real / r if z.real < 0 else 0.0)))
    cdef double complex tail = 0
    cdef int k
    for k in range(depth, 0, -1):
        tail = (k * (order - 1 + k)) / (z + order + 2 * k - tail)
    return 1.0 / (z + order - tail)


cdef double complex _expint_scaled_asymptotic(int order, double complex z) nogil:
    cdef double complex acc = 1, term = 1, nxt
    cdef int k
    for k in range(1, <int>_cabs(z) + 1):
        nxt = -term * (order + k - 1) / z
        if _cabs(nxt) >= _cabs(term):
            break
        term = nxt
        acc = acc + term
    return acc / z


cdef inline bint _near_negative_axis(double complex z) nogil:
    return _cabs(z) + z.real <= 4.0


cdef double complex _e1_scaled_near_axis(double complex z) nogil:
    if _cabs(z) <= 40.0:
        return _cexp(z) * _e1_series(z)
    return _expint_scaled_asymptotic(1, z)


cdef double complex _expint_scaled(int order, double complex z) nogil:
    cdef double complex val
    cdef int k
    if _cabs(z) > 2.0 and not _near_negative_axis(z):
        return _expint_cf(order, z)
    if _cabs(z) > 40.0:
        return _expint_scaled_asymptotic(order, z)
    if _cabs(z) > 2.0:
        val = _e1_scaled_near_axis(z)
    else:
        val = _cexp(z) * _e1_series(z)
    for k in range(1, order):
        val = (1.0 - z * val) / k
    return val


cdef double complex _e1(double complex z) nogil:
    if _cabs(z) <= 2.0 or (_near_negative_axis(z) and _cabs(z) <= 40.0):
        return _e1_series(z)
    if _near_negative_axis(z):
        return _cexp(-z) * _expint_scaled_asymptotic(1, z)
    return _cexp(-z) * _expint_cf(1, z)


def erfcx(z):
    """Scaled complementary error function exp(z^2) erfc(z) for complex z."""
    return _erfcx(complex(z))


def expint_scaled(int order, z):
    """exp(z) * E_order(z) for order >= 1 and z off the negative real axis."""
    cdef double complex w = complex(z)
    if w == 0:
        raise ValueError("exponential integral is singular at z = 0")
    return _expint_scaled(order, w)


def e1(z):
    """Exponential integral E1(z)."""
    cdef double complex w = complex(z)
    if w == 0:
        raise ValueError("exponential integral is singular at z = 0")
    return _e1(w)


def erfcx_array(z):
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] zin = np.ascontiguousarray(z, dtype=np.complex128).ravel()
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] out = np.empty(zin.shape[0], dtype=np.complex128)
    cdef Py_ssize_t i
    with nogil:
        for i in range(zin.shape[0]):
            out[i] = _erfcx(zin[i])
    return out.reshape(np.shape(z))


def expint_scaled_array(int order, z):
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] zin = np.ascontiguousarray(z, dtype=np.complex128).ravel()
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] out = np.empty(zin.shape[0], dtype=np.complex128)
    cdef Py_ssize_t i
    for i in range(zin.shape[0]):
        if zin[i] == 0:
            raise ValueError("exponential integral is singular at z = 0")
    with nogil:
        for i in range(zin.shape[0]):
            out[i] = _expint_scaled(order, zin[i])
    return out.reshape(np.shape(z))


def e1_array(z):
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] zin = np.ascontiguousarray(z, dtype=np.complex128).ravel()
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] out = np.empty(zin.shape[0], dtype=np.complex128)
    cdef Py_ssize_t i
    for i in range(zin.shape[0]):
        if zin[i] == 0:
            raise ValueError("exponential integral is singular at z = 0")
    with nogil:
        for i in range(zin.shape[0]):
            out[i] = _e1(zin[i])
    return out.reshape(np.shape(z))


def cosine_product_moments(double omega, phases, nodes, weights, bint with_gradient):
    """Moments of exp(-v/omega) * prod cos^2((v - phi_j)/2) over v >= 0.

    Folds the half-line onto one period with closed-form geometric sums and
    integrates with the given rule. Returns (N0..N3) and optionally the SCV
    gradient with respect to (omega, phases).
    """
    cdef const double[::1] ph = np.ascontiguousarray(phases, dtype=np.float64)
    cdef const double[::1] v = np.ascontiguousarray(nodes, dtype=np.float64)
    cdef const double[::1] wt = np.ascontiguousarray(weights, dtype=np.float64)
    cdef Py_ssize_t n = ph.shape[0], G = v.shape[0], i, j
    cdef double L = 2.0 * M_PI
    cdef double q = exp(-L / omega)
    cdef double g = 1.0 / (1.0 - q)
    cdef double j1 = q * g * g
    cdef double j2 = q * (1.0 + q) * g * g * g
    cdef double j3 = q * (1.0 + 4.0 * q + q * q) * g * g * g * g
    cdef double s0, s1, s2, s3, vi, base, prod, c
    cdef double N0 = 0, N1 = 0, N2 = 0, N3 = 0
    cdef double[::1] F = np.empty(max(n, 1))
    cdef double[::1] before = np.empty(max(n, 1))
    cdef double[::1] gph
    cdef double d0, d1, d2, mix, after
    out_grad = None
    # first pass: moments
    for i in range(G):
        vi = v[i]
        prod = 1.0
        for j in range(n):
            c = cos(0.5 * (vi - ph[j]))
            prod *= c * c
        base = wt[i] * exp(-vi / omega) * prod
        s0 = g
        s1 = vi * g + L * j1
        s2 = vi * vi * g + 2.0 * vi * L * j1 + L * L * j2
        s3 = vi * vi * vi * g + 3.0 * vi * vi * L * j1 + 3.0 * vi * L * L * j2 + L * L * L * j3
        N0 += base * s0
        N1 += base * s1
        N2 += base * s2
        N3 += base * s3
    N = np.array([N0, N1, N2, N3])
    if not with_gradient:
        return N, None
    d0 = N2 / (N1 * N1)
    d1 = -2.0 * N2 * N0 / (N1 * N1 * N1)
    d2 = N0 / (N1 * N1)
    grad = np.zeros(n + 1)
    gph = grad
    gph[0] = (d0 * N1 + d1 * N2 + d2 * N3) / (omega * omega)
    # second pass: phase derivatives via prefix/suffix products
    for i in range(G):
        vi = v[i]
        for j in range(n):
            c = cos(0.5 * (vi - ph[j]))
            F[j] = c * c
        before[0] = 1.0
        for j in range(1, n):
            before[j] = before[j - 1] * F[j - 1]
        s0 = g
        s1 = vi * g + L * j1
        s2 = vi * vi * g + 2.0 * vi * L * j1 + L * L * j2
        mix = wt[i] * exp(-vi / omega) * (d0 * s0 + d1 * s1 + d2 * s2)
        after = 1.0
        for j in range(n - 1, -1, -1):
            gph[j + 1] += 0.5 * sin(vi - ph[j]) * before[j] * after * mix
            after *= F[j]
    return N, grad
