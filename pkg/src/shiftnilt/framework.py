"""Coefficient sets, the inversion sum, the weight function and shifting.

A coefficient set holds nodes beta_k and weights eta_k; the inversion of a
transform H at time T is

    h_N(T, theta) = sum_k exp(theta) eta_k / T * H((beta_k + theta) / T)

and the associated weight function is f_N(t) = sum_k eta_k exp(-beta_k t).
Shifting by theta multiplies f_N(t) by exp(-theta (t - 1)).
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import numpy as np


class Method(str, enum.Enum):
    EULER = "euler"
    CME = "cme"


class NiltError(Exception):
    """Base class for numerical failures of the inversion toolkit."""


class ConvergenceRegionError(NiltError, ValueError):
    """A shifted node would evaluate the transform left of its abscissa."""

    def __init__(self, k, s, abscissa):
        self.k = k
        self.s = s
        self.abscissa = abscissa
        super().__init__(
            f"node outside convergence region: k={k}, Re(s)={s.real!r} <= abscissa {abscissa!r}"
        )


class TransformEvaluationError(NiltError):
    """The transform returned a non-finite value at an admissible node."""


class DivergentIntegralError(NiltError, ValueError):
    pass


class AccuracyWarning(UserWarning):
    """Imaginary residue of a conjugate-symmetric sum is larger than rounding noise."""


NILT_RESIDUE_TOL = 1e-8
WEIGHT_RESIDUE_TOL = 1e-10
SYMMETRY_RTOL = 1e-12


def _readonly(a):
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class CoefficientSet:
    """Nodes and weights of one inversion method at one order.

    ``base_weights``/``base_nodes`` are the unshifted vectors; ``theta`` is the
    accumulated shift, applied on access, so repeated shifts compose exactly.
    Layout: index 0 is the real node, index k and 2n+1-k are conjugates.
    """

    order_n: int
    base_weights: np.ndarray
    base_nodes: np.ndarray
    method_tag: Method
    theta: float = 0.0
    source: Any = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "base_weights", _readonly(self.base_weights))
        object.__setattr__(self, "base_nodes", _readonly(self.base_nodes))
        object.__setattr__(self, "method_tag", Method(self.method_tag))
        n = self.order_n
        if n < 0:
            raise ValueError("order_n must be non-negative")
        size = 2 * n + 1
        if self.base_weights.shape != (size,) or self.base_nodes.shape != (size,):
            raise ValueError(f"expected {size} weights and nodes for order {n}")
        b, e = self.base_nodes, self.base_weights
        if b[0].imag != 0.0:
            raise ValueError("node 0 must be real")
        if n:
            k = np.arange(1, n + 1)
            mirror = 2 * n + 1 - k
            scale_b = np.abs(b).max()
            scale_e = np.abs(e).max()
            if np.abs(b[mirror] - np.conj(b[k])).max() > SYMMETRY_RTOL * scale_b:
                raise ValueError("nodes are not conjugate-symmetric")
            if np.abs(e[mirror] - np.conj(e[k])).max() > SYMMETRY_RTOL * scale_e:
                raise ValueError("weights are not conjugate-symmetric")
        if self.method_tag is Method.CME:
            re = b.real
            if np.ptp(re) > SYMMETRY_RTOL * abs(re[0]):
                raise ValueError("CME nodes must share one real part")

    @property
    def size(self):
        return 2 * self.order_n + 1

    @property
    def weights(self):
        if self.theta == 0.0:
            return self.base_weights
        with np.errstate(over="ignore"):
            return np.exp(self.theta) * self.base_weights

    @property
    def nodes(self):
        if self.theta == 0.0:
            return self.base_nodes
        return self.base_nodes + self.theta

    @property
    def dominant_real_part(self):
        return float(self.base_nodes.real.max()) + self.theta

    def __repr__(self):
        return (
            f"CoefficientSet(method={self.method_tag.value}, n={self.order_n}, "
            f"theta={self.theta!r}, mu={self.dominant_real_part:.6g})"
        )


@dataclass(frozen=True)
class TransformQuery:
    """A Laplace-domain function with its abscissa of convergence.

    ``transform`` accepts a complex ndarray and returns an ndarray of the same
    shape. ``mp_transform`` optionally evaluates one mpmath complex number and
    enables the extended-precision path.
    """

    transform: Callable[[np.ndarray], np.ndarray]
    abscissa: float = -math.inf
    is_bounded_hint: bool = False
    oracle: Optional[Callable[[float], float]] = None
    mp_transform: Optional[Callable[[Any], Any]] = None
    name: str = ""


@dataclass(frozen=True)
class NiltResult:
    value: float
    theta_hat: float
    objective_evals: int
    lower_bound_hit: bool
    upper_bound_hit: bool
    theta_lower: float
    theta_upper: float
    iterations: int = 0
    restarts: int = 0
    warnings: tuple = ()

    @property
    def bound_hit(self):
        return self.lower_bound_hit or self.upper_bound_hit


def shift_coefficients(coeffs: CoefficientSet, theta: float) -> CoefficientSet:
    """Shift nodes by theta and scale weights by exp(theta)."""
    if theta == 0.0:
        return coeffs
    return CoefficientSet(
        coeffs.order_n,
        coeffs.base_weights,
        coeffs.base_nodes,
        coeffs.method_tag,
        coeffs.theta + theta,
        coeffs.source,
    )


def check_admissible(coeffs, abscissa, T, theta):
    """Raise ConvergenceRegionError if some (beta_k + theta)/T has Re <= abscissa."""
    s = (coeffs.nodes + theta) / T
    if abscissa == -math.inf:
        return s
    bad = np.nonzero(~(s.real > abscissa))[0]
    if bad.size:
        k = int(bad[0])
        raise ConvergenceRegionError(k, s[k], abscissa)
    return s


def inversion_terms(coeffs, query, T, theta=0.0):
    """Individual complex terms of the inversion sum."""
    if not T > 0:
        raise ValueError("T must be positive")
    s = check_admissible(coeffs, query.abscissa, T, theta)
    with np.errstate(all="ignore"):
        values = np.asarray(query.transform(s), dtype=complex)
        if values.shape != s.shape:
            raise TransformEvaluationError("transform must map an array to an array of equal shape")
        bad = np.nonzero(~np.isfinite(values))[0]
        if bad.size:
            k = int(bad[0])
            raise TransformEvaluationError(f"transform is not finite at node k={k}, s={s[k]!r}")
        return np.exp(theta) * coeffs.weights / T * values


def paired_sum(terms, n):
    """Sum with each conjugate pair added first, so residues reflect asymmetry only."""
    if n == 0:
        return terms[0]
    return terms[0] + (terms[1 : n + 1] + terms[: n : -1]).sum()


def evaluate_nilt(coeffs: CoefficientSet, query: TransformQuery, T: float, theta: float = 0.0,
                  *, check_residue: bool = True) -> float:
    """Approximate h(T) by the shifted inversion sum."""
    with np.errstate(all="ignore"):
        total = paired_sum(inversion_terms(coeffs, query, T, theta), coeffs.order_n)
    if check_residue and abs(total.imag) > NILT_RESIDUE_TOL * abs(total.real):
        warnings.warn(
            f"imaginary residue {total.imag:.3e} exceeds {NILT_RESIDUE_TOL:g} x |value| "
            f"(value {total.real:.3e}, T={T}, theta={theta})",
            AccuracyWarning,
            stacklevel=2,
        )
    return float(total.real)


def evaluate_nilt_mp(coeffs: CoefficientSet, query: TransformQuery, T: float, theta: float = 0.0,
                     dps: int = 60) -> float:
    """Inversion sum in extended precision.

    Needs a coefficient set whose ``source`` can regenerate its nodes and
    weights with mpmath (``mp_coefficients(dps)``) and a query with
    ``mp_transform``. Only the conjugate-pair half of the sum is evaluated.
    """
    import mpmath

    if query.mp_transform is None:
        raise ValueError("query has no extended-precision transform")
    maker = getattr(coeffs.source, "mp_coefficients", None)
    if maker is None:
        raise ValueError("coefficient set cannot be regenerated in extended precision")
    n = coeffs.order_n
    check_admissible(coeffs, query.abscissa, T, theta)
    with mpmath.workdps(dps):
        weights, nodes = maker(dps)
        shift = mpmath.mpf(coeffs.theta) + mpmath.mpf(theta)
        scale = mpmath.exp(shift) / mpmath.mpf(T)
        total = weights[0] * query.mp_transform((nodes[0] + shift) / T)
        for k in range(1, n + 1):
            total += 2 * mpmath.re(weights[k] * query.mp_transform((nodes[k] + shift) / T))
        return float(mpmath.re(total * scale))


def weight_function_value(coeffs: CoefficientSet, t):
    """f_{N,theta}(t) at a scalar or array of t >= 0.

    A shifted set is evaluated as exp(-theta (t - 1)) f_N(t) from its base
    arrays, so large shifts cannot overflow the scaled weights. Sets whose
    source has a closed product form (CME) are evaluated through it; the
    others sum the exponentials.
    """
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise ValueError("weight function is defined for t >= 0")
    product = getattr(coeffs.source, "weight_value", None)
    if product is not None:
        out = np.asarray(product(t_arr, coeffs.theta), dtype=float)
        return float(out) if out.ndim == 0 else out
    flat = t_arr.reshape(-1)
    with np.errstate(over="ignore", invalid="ignore", under="ignore"):
        terms = coeffs.base_weights[None, :] * np.exp(-np.outer(flat, coeffs.base_nodes))
        total = terms.sum(axis=1)
        scale = np.sqrt((np.abs(terms) ** 2).sum(axis=1))
        factor = np.exp(-coeffs.theta * (flat - 1.0)) if coeffs.theta else 1.0
    if np.any(np.abs(total.imag) > WEIGHT_RESIDUE_TOL * np.maximum(scale, np.finfo(float).tiny)):
        warnings.warn("weight function imaginary residue above tolerance", AccuracyWarning, stacklevel=2)
    with np.errstate(over="ignore", invalid="ignore"):
        out = (factor * total.real).reshape(t_arr.shape)
    return float(out) if out.ndim == 0 else out


def weight_integral(coeffs: CoefficientSet, lo: float, hi: float = math.inf) -> float:
    """Closed-form integral of f_N over [lo, hi]."""
    if not 0 <= lo < hi:
        raise ValueError("need 0 <= lo < hi")
    b, e = coeffs.nodes, coeffs.weights
    if hi == math.inf:
        if np.any(b.real <= 0):
            raise DivergentIntegralError("divergent tail integral: a node has non-positive real part")
        upper = 0.0
    else:
        upper = np.exp(-b * hi)
    with np.errstate(over="ignore", invalid="ignore"):
        val = (e * (np.exp(-b * lo) - upper) / b).sum()
    return float(val.real)


def weight_moment(coeffs: CoefficientSet, m: int) -> float:
    """Closed-form m-th moment of f_N over [0, inf)."""
    b, e = coeffs.nodes, coeffs.weights
    if np.any(b.real <= 0):
        raise DivergentIntegralError("divergent moment: a node has non-positive real part")
    return float((math.factorial(m) * e / b ** (m + 1)).sum().real)
