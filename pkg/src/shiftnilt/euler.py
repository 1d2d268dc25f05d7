"""Euler-summation coefficients for even n.

Nodes beta_k = alpha + i pi k with alpha = n ln(10) / 6. Every weight,
including the real node's, carries a factor 1/2 relative to the
(-1)^k e^alpha xi_k pattern because the conjugate pairs are stored
expanded; with that factor the 1/s and 1/(1+s) checks pass.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numpy as np

from .framework import CoefficientSet, Method


@dataclass(frozen=True)
class EulerRecipe:
    n: int
    alpha: float
    xi: tuple

    def mp_coefficients(self, dps):
        """Half-set (k = 0..n) of weights and nodes as mpmath numbers."""
        return euler_coefficients_mp(self.n, dps)


def _check_order(n):
    if not isinstance(n, (int, np.integer)) or n < 2 or n > 128:
        raise ValueError("Euler order must be an even integer in [2, 128]")
    if n % 2:
        raise ValueError("Euler defined only for even n")


def _xi_fractions(n):
    """xi_1..xi_n as exact rationals (numerator, 2^(n/2))."""
    m = n // 2
    denom = 2 ** m
    num = [0] * (n + 1)
    for k in range(1, m + 1):
        num[k] = denom
    num[n] = 1
    for k in range(1, m):
        num[n - k] = num[n - k + 1] + comb(m, k)
    return num[1:], denom


def euler_recipe(n: int) -> EulerRecipe:
    _check_order(n)
    num, denom = _xi_fractions(n)
    xi = tuple(a / denom for a in num)
    return EulerRecipe(n=n, alpha=n * math.log(10) / 6, xi=xi)


def xi_by_recursion(n: int) -> np.ndarray:
    """xi computed with the floating-point recursion down to index n/2."""
    _check_order(n)
    m = n // 2
    xi = np.ones(n + 1)
    xi[n] = 2.0 ** -m
    for k in range(1, m + 1):
        xi[n - k] = xi[n - k + 1] + 2.0 ** -m * comb(m, k)
    return xi[1:]


def _layout(half_weights, half_nodes, n):
    w = np.empty(2 * n + 1, dtype=complex)
    b = np.empty(2 * n + 1, dtype=complex)
    w[: n + 1] = half_weights
    b[: n + 1] = half_nodes
    k = np.arange(1, n + 1)
    w[2 * n + 1 - k] = np.conj(half_weights[1:])
    b[2 * n + 1 - k] = np.conj(half_nodes[1:])
    return w, b


@lru_cache(maxsize=None)
def euler_coefficients(n: int, real_weight_factor: float = 0.5, pair_weight_factor: float = 0.5) -> CoefficientSet:
    """Euler coefficient set of order n (N = 2n+1 nodes).

    The factor arguments exist so tests can show why the half-weight
    convention is the one that inverts 1/s correctly.
    """
    recipe = euler_recipe(n)
    a = recipe.alpha
    k = np.arange(n + 1)
    nodes = a + 1j * math.pi * k
    nodes[0] = a
    signs = np.where(k % 2 == 0, 1.0, -1.0)
    xi = np.concatenate([[1.0], recipe.xi])
    weights = signs * math.exp(a) * xi * pair_weight_factor
    weights[0] = math.exp(a) * real_weight_factor
    w, b = _layout(weights.astype(complex), nodes, n)
    return CoefficientSet(n, w, b, Method.EULER, 0.0, recipe)


def euler_coefficients_mp(n: int, dps: int = 60):
    """Weights and nodes for k = 0..n as mpmath numbers."""
    import mpmath

    _check_order(n)
    num, denom = _xi_fractions(n)
    with mpmath.workdps(dps):
        a = n * mpmath.log(10) / 6
        ea = mpmath.exp(a)
        nodes = [mpmath.mpc(a)] + [mpmath.mpc(a, mpmath.pi * k) for k in range(1, n + 1)]
        weights = [mpmath.mpc(ea / 2)]
        for k in range(1, n + 1):
            sign = -1 if k % 2 else 1
            weights.append(mpmath.mpc(sign * ea * mpmath.mpf(num[k - 1]) / denom / 2))
    return weights, nodes


def euler_n_for_order(order: int) -> int:
    """Largest even n whose N = 2n+1 set needs at most ``order`` transform calls.

    With conjugate symmetry an order-n Euler set costs n+1 distinct
    evaluations, so a budget of 30 maps to n = 28.
    """
    if order < 3:
        raise ValueError("order must be at least 3")
    n = order - 1
    return n - (n % 2)

