import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from shiftnilt import _pykernels, kernels
from shiftnilt.cme import _period_rule, cme_form

BACKENDS = ["python"]
try:
    kernels.backend_module("compiled")
    BACKENDS.append("compiled")
except ImportError:  # pragma: no cover - extension not built
    pass


@pytest.fixture(params=BACKENDS)
def backend(request):
    return kernels.backend_module(request.param)


def rel_err(a, b):
    return np.abs(a - b) / np.abs(b)


def test_backend_is_reported():
    assert kernels.BACKEND in ("compiled", "python")


def test_unknown_backend_rejected():
    with pytest.raises(ValueError):
        kernels.backend_module("fortran")


def test_erfcx_matches_brute_force(backend, special_oracle):
    z, ref = special_oracle["erfcx"]
    assert rel_err(backend.erfcx_array(z), ref).max() < 1e-12


def test_e1_matches_brute_force(backend, special_oracle):
    z, ref = special_oracle["e1"]
    assert rel_err(backend.e1_array(z), ref).max() < 1e-12


def test_scalar_and_array_forms_agree(backend, special_oracle):
    z, _ = special_oracle["erfcx"]
    assert np.array_equal(backend.erfcx_array(z[:50]), [backend.erfcx(x) for x in z[:50]])
    z, _ = special_oracle["e1"]
    assert np.array_equal(backend.e1_array(z[:50]), [backend.e1(x) for x in z[:50]])


def test_erfcx_real_axis_values(backend):
    assert backend.erfcx(0) == pytest.approx(1.0, rel=1e-15)
    assert backend.erfcx(1.0).real == pytest.approx(math.exp(1) * math.erfc(1), rel=1e-14)
    assert backend.erfcx(-2.0).real == pytest.approx(math.exp(4) * math.erfc(-2), rel=1e-14)


def test_e1_singular_at_zero(backend):
    with pytest.raises(ValueError):
        backend.e1(0)
    with pytest.raises(ValueError):
        backend.expint_scaled(3, 0)


def test_e1_negative_axis_branch(backend):
    # E1(-x + i0) = -Ei(x) - i pi
    import mpmath as mp

    for x in (0.5, 3.0, 10.0, 50.0):
        val = backend.e1(complex(-x, 1e-300))
        ref = complex(-mp.ei(x), -mp.pi)
        assert abs(val - ref) / abs(ref) < 1e-12


@given(st.floats(-50, 50), st.floats(-200, 200))
def test_backends_agree_on_erfcx(x, y):
    z = complex(x, y)
    if (z * z).real > 600:
        return
    a = _pykernels.erfcx(z)
    for name in BACKENDS:
        b = kernels.backend_module(name).erfcx(z)
        assert abs(a - b) <= 1e-13 * abs(a)


@given(st.floats(0.01, 300), st.floats(-300, 300), st.integers(1, 4))
def test_expint_recurrence(x, y, order):
    # E_{n+1}(z) = (exp(-z) - z E_n(z)) / n, in scaled form
    z = complex(x, y)
    for name in BACKENDS:
        m = kernels.backend_module(name)
        lhs = m.expint_scaled(order + 1, z)
        rhs = (1 - z * m.expint_scaled(order, z)) / order
        assert abs(lhs - rhs) <= 1e-11 * max(abs(lhs), 1e-300) + 1e-13 * abs(z * m.expint_scaled(order, z))


@given(st.floats(0.01, 300), st.floats(-300, 300))
def test_e1_conjugate_symmetry(x, y):
    z = complex(x, y)
    assert kernels.e1(z.conjugate()) == pytest.approx(kernels.e1(z).conjugate(), rel=1e-14, abs=0)


def direct_moments(omega, phases, m_max=3, periods=200):
    # brute-force moments of exp(-v/omega) prod cos^2((v-p)/2) by dense quadrature
    v = np.linspace(0.0, periods * 2 * math.pi, 400_001)
    f = np.exp(-v / omega)
    for p in phases:
        f = f * np.cos((v - p) / 2) ** 2
    from scipy.integrate import simpson

    return np.array([simpson(v ** m * f, x=v) for m in range(m_max + 1)])


@pytest.mark.parametrize("n", [1, 3, 7])
def test_cosine_product_moments_against_direct_integration(backend, n):
    form = cme_form(n)
    nodes, weights = _period_rule(n, 20)
    N, _ = backend.cosine_product_moments(float(form.omega), np.asarray(form.phases), nodes, weights, False)
    ref = direct_moments(form.omega, form.phases)
    assert np.allclose(N, ref, rtol=1e-7)


@pytest.mark.parametrize("n", [2, 10, 29])
def test_cosine_product_gradient_matches_finite_differences(backend, n):
    # away from the optimum, where the gradient is not ~0
    form = cme_form(n)
    nodes, weights = _period_rule(n, 20)
    rng = np.random.default_rng(n)
    omega = float(form.omega) * 1.1
    phases = np.asarray(form.phases, dtype=float) + rng.normal(0, 0.05, n)

    def scv_of(om, ph):
        N, _ = backend.cosine_product_moments(om, ph, nodes, weights, False)
        return N[2] * N[0] / N[1] ** 2 - 1

    N, grad = backend.cosine_product_moments(omega, phases, nodes, weights, True)
    h = 1e-6
    fd = [(scv_of(omega * (1 + h), phases) - scv_of(omega * (1 - h), phases)) / (2 * h * omega)]
    for j in range(n):
        e = np.zeros(n)
        e[j] = h
        fd.append((scv_of(omega, phases + e) - scv_of(omega, phases - e)) / (2 * h))
    scale = max(np.abs(fd).max(), 1e-12)
    assert np.abs(np.asarray(grad) - fd).max() < 1e-5 * scale


def test_backends_agree_on_moments():
    if len(BACKENDS) < 2:
        pytest.skip("compiled extension not built")
    form = cme_form(40)
    nodes, weights = _period_rule(40, 20)
    a = kernels.backend_module("python").cosine_product_moments(form.omega, np.asarray(form.phases), nodes,
                                                                weights, True)
    b = kernels.backend_module("compiled").cosine_product_moments(form.omega, np.asarray(form.phases), nodes,
                                                                  weights, True)
    assert np.allclose(a[0], b[0], rtol=1e-12)
    assert np.allclose(a[1], b[1], rtol=1e-9, atol=1e-12)
