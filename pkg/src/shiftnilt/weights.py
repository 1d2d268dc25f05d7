"""Zeros of the weight function, the left/main/right split, and quadrature checks.

The inversion sum equals the integral of h(tT) f_{N,theta}(t) over t >= 0.
Splitting that integral at the zeros of f around t = 1 separates the main
term from the left and right error terms.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .framework import Method, NiltError, shift_coefficients, weight_function_value, weight_integral

DEFAULT_T_MAX = 4.0
ZERO_XTOL = 1e-13
TAIL_TOL = 1e-12
QUAD_TOL = 1e-10


class MainIntervalError(NiltError):
    pass


class QuadratureError(NiltError):
    def __init__(self, message, error_estimate):
        super().__init__(f"{message} (estimated error {error_estimate:.3e})")
        self.error_estimate = error_estimate


@dataclass(frozen=True)
class WeightDecomposition:
    zeros: tuple
    main_index: int
    f_left: float
    f_main: float
    f_right: float

    @property
    def z_lower(self):
        return self.zeros[self.main_index]

    @property
    def z_upper(self):
        return self.zeros[self.main_index + 1]

    @property
    def total(self):
        return self.f_left + self.f_main + self.f_right


def _cme_zeros(form, t_max):
    rate = form.omega * form.lam
    out = []
    for p in form.phases:
        # cos^2((rate t - p)/2) vanishes where rate t = p + pi + 2 pi m
        m = math.ceil(-(p + math.pi) / (2 * math.pi))
        while True:
            t = (p + math.pi + 2 * math.pi * m) / rate
            if t > t_max:
                break
            if t > 0:
                out.append(t)
            m += 1
    return sorted(out)


def _bracketed_zeros(coeffs, t_max):
    # remove the common exponential decay; the zeros are unchanged
    mu = float(coeffs.nodes.real.max())
    rel_nodes = coeffs.nodes - mu
    weights = coeffs.weights

    def g(t):
        return float((weights * np.exp(-rel_nodes * t)).sum().real)

    step = min(0.01, 1.0 / (4 * max(coeffs.order_n, 1)))
    grid = np.arange(0.0, t_max + step, step)
    grid = grid[grid <= t_max]
    vals = ((weights[None, :] * np.exp(-np.outer(grid, rel_nodes))).sum(axis=1)).real
    out = []
    for i in range(1, grid.size):
        a, b = vals[i - 1], vals[i]
        if b == 0.0:
            out.append(float(grid[i]))
        elif a != 0.0 and (a < 0) != (b < 0):
            out.append(brentq(g, grid[i - 1], grid[i], xtol=ZERO_XTOL, rtol=4 * np.finfo(float).eps))
    return out


def find_zeros(coeffs, t_max: float = DEFAULT_T_MAX):
    """Zeros of f_N in (0, t_max].

    CME sets have double zeros located analytically from their phases; the
    others are found by sign changes on a fine grid followed by root polishing.
    """
    if not t_max > 1:
        raise ValueError("t_max must exceed 1")
    form = coeffs.source
    if coeffs.method_tag is Method.CME and hasattr(form, "phases"):
        return _cme_zeros(form, t_max)
    return _bracketed_zeros(coeffs, t_max)


def _main_interval(zeros):
    below = [i for i, z in enumerate(zeros) if z <= 1.0]
    if len(below) <= 1:
        raise MainIntervalError("main interval undetected: no zero below 1 in the scan window")
    i = below[-1]
    if i + 1 >= len(zeros):
        raise MainIntervalError("main interval undetected: no zero above 1 in the scan window")
    return i


def decompose_weight(coeffs, t_max: float = DEFAULT_T_MAX) -> WeightDecomposition:
    """Integrals of f_N left of, inside, and right of the zero pair around 1."""
    zeros = [0.0] + list(find_zeros(coeffs, t_max))
    i = _main_interval(zeros)
    lo, hi = zeros[i], zeros[i + 1]
    return WeightDecomposition(
        zeros=tuple(zeros),
        main_index=i,
        f_left=weight_integral(coeffs, 0.0, lo) if lo > 0 else 0.0,
        f_main=weight_integral(coeffs, lo, hi),
        f_right=weight_integral(coeffs, hi),
    )


def _envelope(coeffs, oracle, T):
    amp = float(np.abs(coeffs.weights).sum())
    rate = float(coeffs.nodes.real.min())

    def env(tau):
        with np.errstate(over="ignore", under="ignore"):
            h = np.abs([oracle(float(x) * T) for x in np.atleast_1d(tau)])
            return amp * np.exp(-rate * np.asarray(tau)) * h

    return env, rate


def truncation_point(coeffs, oracle, T, tol=TAIL_TOL):
    """Where the sampled tail bound of |h(tT) f_{N,theta}(t)| drops below tol.

    |f_{N,theta}(t)| <= sum|eta_k(theta)| exp(-min Re beta_k(theta) t); sup|h|
    over [t, 4t] is estimated on a sample grid and the remaining tail is
    taken as that sup times max(3t, 1/rate).
    """
    env, rate = _envelope(coeffs, oracle, T)
    t = 1.0
    while t < 1e4:
        tau = np.linspace(t, 4 * t, 256)
        span = 3 * t if rate <= 0 else max(3 * t, 1.0 / rate)
        if float(np.max(env(tau))) * span < tol:
            return t
        t *= 1.25
    raise QuadratureError("integrand tail does not decay", float("inf"))


def _piece_width(coeffs):
    top = float(np.abs(coeffs.nodes.imag).max())
    return 0.05 if top == 0 else min(0.05, math.pi / top)


def _integrate(func, a, b, width, tol, points=()):
    edges = np.unique(np.concatenate([np.arange(a, b, width), [b], [p for p in points if a < p < b]]))
    total, err = 0.0, 0.0
    per_piece = tol / max(edges.size - 1, 1)
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, e = quad(func, lo, hi, epsabs=per_piece, epsrel=0.0, limit=100)
        total += val
        err += e
    if err > 10 * tol:
        raise QuadratureError("quadrature did not reach tolerance", err)
    return total


def _integrand(coeffs, oracle, T):
    def f(t):
        return oracle(t * T) * weight_function_value(coeffs, t)

    return f


def quadrature_oracle(query, coeffs, T: float, theta: float = 0.0, *, tol=QUAD_TOL, points=()):
    """Integral of h(tT) f_{N,theta}(t) over t >= 0 by adaptive quadrature."""
    if query.oracle is None:
        raise ValueError("quadrature needs a time-domain oracle")
    shifted = shift_coefficients(coeffs, theta)
    t_cut = truncation_point(shifted, query.oracle, T)
    return _integrate(_integrand(shifted, query.oracle, T), 0.0, t_cut, _piece_width(shifted), tol, points)


def decompose_estimate(query, coeffs, T: float, theta: float = 0.0, *, t_max=DEFAULT_T_MAX,
                       tol=QUAD_TOL, points=()):
    """(eps_left, h_main, eps_right): the integral split at the zero pair around 1."""
    if query.oracle is None:
        raise ValueError("decomposition needs a time-domain oracle")
    shifted = shift_coefficients(coeffs, theta)
    zeros = [0.0] + list(find_zeros(coeffs, t_max))
    i = _main_interval(zeros)
    lo, hi = zeros[i], zeros[i + 1]
    t_cut = max(truncation_point(shifted, query.oracle, T), hi + 1.0)
    f = _integrand(shifted, query.oracle, T)
    w = _piece_width(shifted)
    left = _integrate(f, 0.0, lo, w, tol / 3, points) if lo > 0 else 0.0
    main = _integrate(f, lo, hi, w, tol / 3, points)
    right = _integrate(f, hi, t_cut, w, tol / 3, points)
    return left, main, right


def figure_series(coeffs, ts, theta: float = 0.0, oracle=None, T=None):
    """Columns t, f_{N,theta}(t) and, with an oracle and T, h(tT) and the product."""
    ts = np.asarray(ts, dtype=float)
    f = weight_function_value(shift_coefficients(coeffs, theta), ts)
    cols = {"t": ts, "f": np.atleast_1d(f)}
    if oracle is not None and T is not None:
        h = np.array([oracle(t * T) for t in ts])
        cols["h"] = h
        cols["product"] = h * cols["f"]
    return cols
