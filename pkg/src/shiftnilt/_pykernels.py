"""Pure-Python implementations of the numerical kernels.

Every function here has a compiled twin in ``_ckernels.pyx`` with the same
signature and the same algorithm; ``kernels.py`` picks one at import time.
"""
import cmath
import math

import numpy as np

_INV_SQRT_PI = 1.0 / math.sqrt(math.pi)
_EULER_GAMMA = 0.57721566490153286061

# Modified trapezoidal rule for the Faddeeva function: step H with
# pi^2 / H^2 = 13 pi, which leaves ~1e-17 of discretisation error.
_TRAP_H = math.sqrt(math.pi / 13.0)
_TRAP_TERMS = 15
_TRAP_RADIUS = 10.0


def _faddeeva_trapezoid(z):
    x, y = z.real, z.imag
    z2 = z * z
    frac = abs(x / _TRAP_H - round(x / _TRAP_H))
    acc = 0j
    if frac > 0.25:
        # nodes at k*H: the real part of z sits between them
        for k in range(1, _TRAP_TERMS + 1):
            t = k * _TRAP_H
            acc += math.exp(-t * t) / (z2 - t * t)
        val = 1j * _TRAP_H / math.pi * (1.0 / z + 2.0 * z * acc)
        if y < math.pi / _TRAP_H:
            val += 2.0 * cmath.exp(-z2) / (1.0 - cmath.exp(-2j * math.pi * z / _TRAP_H))
    else:
        # nodes at (k - 1/2)*H
        for k in range(1, _TRAP_TERMS + 1):
            t = (k - 0.5) * _TRAP_H
            acc += math.exp(-t * t) / (z2 - t * t)
        val = 2j * _TRAP_H / math.pi * z * acc
        if y < math.pi / _TRAP_H:
            val += 2.0 * cmath.exp(-z2) / (1.0 + cmath.exp(-2j * math.pi * z / _TRAP_H))
    return val


def _faddeeva_cf_depth(r):
    if r < 15.0:
        return 12
    if r < 30.0:
        return 8
    if r < 100.0:
        return 5
    return 3


def _faddeeva_upper(z):
    """w(z) = exp(-z^2) erfc(-iz) for Im z >= 0."""
    r = abs(z)
    if r < _TRAP_RADIUS:
        return _faddeeva_trapezoid(z)
    # Laplace continued fraction
    tail = 0j
    for k in range(_faddeeva_cf_depth(r), 0, -1):
        tail = (0.5 * k) / (z - tail)
    return 1j * _INV_SQRT_PI / (z - tail)


def erfcx(z):
    """Scaled complementary error function exp(z^2) erfc(z) for complex z."""
    z = complex(z)
    if z.real >= 0.0:
        return _faddeeva_upper(1j * z)
    return 2.0 * cmath.exp(z * z) - _faddeeva_upper(-1j * z)


def _e1_series(z):
    acc = 0j
    term = 1 + 0j
    k = 1
    while True:
        term *= -z / k
        step = term / k
        acc += step
        if abs(step) <= 1e-17 * abs(acc) or k > 500:
            break
        k += 1
    return -_EULER_GAMMA - cmath.log(z) - acc


def _expint_cf(order, z):
    # exp(z) E_n(z) = 1/(z + n - 1*n/(z + n + 2 - 2(n+1)/(z + n + 4 - ...)))
    r = abs(z)
    depth = 10 + int(200.0 / r * (1.0 + max(0.0, -z.real / r)))
    tail = 0j
    for k in range(depth, 0, -1):
        tail = k * (order - 1 + k) / (z + order + 2 * k - tail)
    return 1.0 / (z + order - tail)


def _expint_scaled_asymptotic(order, z):
    # exp(z) E_n(z) ~ (1/z) sum (-1)^k n (n+1) ... (n+k-1) / z^k, stopped at the smallest term
    acc = term = 1 + 0j
    for k in range(1, int(abs(z)) + 1):
        nxt = -term * (order + k - 1) / z
        if abs(nxt) >= abs(term):
            break
        term = nxt
        acc += term
    return acc / z


def _near_negative_axis(z):
    # The continued fraction converges slowly here; the power series does not
    # cancel badly because |E1| grows like exp(|Re z|).
    return abs(z) + z.real <= 4.0


def _e1_scaled_near_axis(z):
    if abs(z) <= 40.0:
        return cmath.exp(z) * _e1_series(z)
    return _expint_scaled_asymptotic(1, z)


def expint_scaled(order, z):
    """exp(z) * E_order(z) for order >= 1 and z off the negative real axis."""
    z = complex(z)
    if z == 0:
        raise ValueError("exponential integral is singular at z = 0")
    if abs(z) > 2.0 and not _near_negative_axis(z):
        return _expint_cf(order, z)
    if abs(z) > 40.0:
        return _expint_scaled_asymptotic(order, z)
    val = _e1_scaled_near_axis(z) if abs(z) > 2.0 else cmath.exp(z) * _e1_series(z)
    for k in range(1, order):
        val = (1.0 - z * val) / k
    return val


def e1(z):
    """Exponential integral E1(z)."""
    z = complex(z)
    if z == 0:
        raise ValueError("exponential integral is singular at z = 0")
    if abs(z) <= 2.0 or (_near_negative_axis(z) and abs(z) <= 40.0):
        return _e1_series(z)
    if _near_negative_axis(z):
        return cmath.exp(-z) * _expint_scaled_asymptotic(1, z)
    return cmath.exp(-z) * _expint_cf(1, z)


def erfcx_array(z):
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape, dtype=complex)
    flat_in, flat_out = z.ravel(), out.ravel()
    for i in range(flat_in.size):
        flat_out[i] = erfcx(flat_in[i])
    return out


def expint_scaled_array(order, z):
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape, dtype=complex)
    flat_in, flat_out = z.ravel(), out.ravel()
    for i in range(flat_in.size):
        flat_out[i] = expint_scaled(order, flat_in[i])
    return out


def e1_array(z):
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape, dtype=complex)
    flat_in, flat_out = z.ravel(), out.ravel()
    for i in range(flat_in.size):
        flat_out[i] = e1(flat_in[i])
    return out


def periodic_moment_sums(v, q):
    """S_m(v) = sum_j q^j (v + 2 pi j)^m for m = 0..3, closed form in q."""
    L = 2.0 * math.pi
    g = 1.0 / (1.0 - q)
    j1 = q * g * g
    j2 = q * (1.0 + q) * g ** 3
    j3 = q * (1.0 + 4.0 * q + q * q) * g ** 4
    return (
        np.full_like(v, g),
        v * g + L * j1,
        v * v * g + 2.0 * v * L * j1 + L * L * j2,
        v ** 3 * g + 3.0 * v * v * L * j1 + 3.0 * v * L * L * j2 + L ** 3 * j3,
    )


def cosine_product_moments(omega, phases, nodes, weights, with_gradient):
    """Moments of exp(-v/omega) * prod cos^2((v - phi_j)/2) over v >= 0.

    The integral over [0, inf) is folded onto one period [0, 2 pi) using the
    geometric sums above, then integrated with the supplied quadrature rule.
    Returns (N0, N1, N2, N3) and, when requested, the gradient of the SCV
    with respect to (omega, phases).
    """
    phases = np.asarray(phases, dtype=float)
    factors = np.cos((nodes[None, :] - phases[:, None]) / 2.0) ** 2
    prod = np.prod(factors, axis=0)
    q = math.exp(-2.0 * math.pi / omega)
    base = weights * np.exp(-nodes / omega)
    sums = periodic_moment_sums(nodes, q)
    bp = base * prod
    N = np.array([float(bp @ s) for s in sums])
    if not with_gradient:
        return N, None
    scv_d = np.array([N[2] / N[1] ** 2, -2.0 * N[2] * N[0] / N[1] ** 3, N[0] / N[1] ** 2])
    # dN_m / d omega = N_{m+1} / omega^2
    g_omega = float(scv_d @ (N[1:4] / omega ** 2))
    ones = np.ones((1, nodes.size))
    before = np.cumprod(np.vstack([ones, factors[:-1]]), axis=0)
    after = np.cumprod(np.vstack([ones, factors[::-1][:-1]]), axis=0)[::-1]
    d_prod = 0.5 * np.sin(nodes[None, :] - phases[:, None]) * before * after
    mix = base * (scv_d[0] * sums[0] + scv_d[1] * sums[1] + scv_d[2] * sums[2])
    grad = np.empty(phases.size + 1)
    grad[0] = g_omega
    grad[1:] = d_prod @ mix
    return N, grad
