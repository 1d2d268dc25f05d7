from fractions import Fraction
from math import comb

import numpy as np
import pytest

from shiftnilt.euler import (
    euler_coefficients,
    euler_coefficients_mp,
    euler_n_for_order,
    euler_recipe,
    xi_by_recursion,
)
from shiftnilt.framework import Method, TransformQuery, evaluate_nilt, weight_integral
from shiftnilt.weights import decompose_weight

ONE_OVER_S = TransformQuery(lambda s: 1.0 / s, abscissa=0.0)


def xi_by_definition(n):
    # xi_k = 1 for k <= n/2, then the binomial tail sums 2^-m sum_{j=0}^{n-k} C(m, j)
    m = n // 2
    out = []
    for k in range(1, n + 1):
        if k <= m:
            out.append(Fraction(1))
        else:
            out.append(Fraction(sum(comb(m, j) for j in range(0, n - k + 1)), 2 ** m))
    return out


@pytest.mark.parametrize("n", [2, 4, 10, 28, 58, 100])
def test_xi_matches_binomial_definition(n):
    assert euler_recipe(n).xi == pytest.approx([float(x) for x in xi_by_definition(n)], rel=1e-15)
    assert np.allclose(xi_by_recursion(n), [float(x) for x in xi_by_definition(n)], rtol=1e-15)


@pytest.mark.parametrize("n", [3, 29, 0, 130])
def test_invalid_orders(n):
    with pytest.raises(ValueError):
        euler_coefficients(n)


def test_odd_order_message():
    with pytest.raises(ValueError, match="even n"):
        euler_recipe(29)


def test_layout(euler28):
    c = euler28
    assert c.size == 57
    assert c.method_tag is Method.EULER
    assert np.allclose(c.nodes[1:29].imag, np.pi * np.arange(1, 29))
    assert np.allclose(c.nodes.real, c.nodes.real[0])
    signs = np.sign(c.weights[1:29].real)
    assert np.all(signs == np.where(np.arange(1, 29) % 2, -1, 1))


def test_half_weight_convention_inverts_constants(euler28):
    # With every weight halved, f_N integrates to one and 1/s maps to 1.
    assert evaluate_nilt(euler28, ONE_OVER_S, 1.0) == pytest.approx(1.0, abs=1e-8)
    assert weight_integral(euler28, 0.0) == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("factors", [(1.0, 1.0), (0.5, 1.0), (1.0, 0.5)])
def test_other_weight_conventions_fail_constant_oracle(factors):
    c = euler_coefficients(28, *factors)
    assert abs(evaluate_nilt(c, ONE_OVER_S, 1.0) - 1.0) > 0.1


def test_mp_coefficients_match_double(euler28):
    w, b = euler_coefficients_mp(28, 40)
    assert np.allclose([complex(x) for x in w], euler28.weights[:29], rtol=1e-14)
    assert np.allclose([complex(x) for x in b], euler28.nodes[:29], rtol=1e-15)


@pytest.mark.parametrize("order,n", [(30, 28), (60, 58), (31, 30), (3, 2)])
def test_order_mapping(order, n):
    assert euler_n_for_order(order) == n


def test_order_mapping_rejects_tiny_budget():
    with pytest.raises(ValueError):
        euler_n_for_order(2)


@pytest.mark.parametrize(
    "n,expected",
    [
        (28, (0.9534, 1.0465, -0.1492, 1.1967, -0.0475)),
        (58, (0.9772, 1.0227, -0.1529, 1.2012, -0.0484)),
    ],
)
def test_weight_decomposition(n, expected):
    d = decompose_weight(euler_coefficients(n))
    got = (d.z_lower, d.z_upper, d.f_left, d.f_main, d.f_right)
    assert np.allclose(got, expected, atol=1e-3)
    assert d.total == pytest.approx(1.0, abs=1e-8)
