"""Optimal shifting: theta bounds, golden-section search, CME-S and Euler-S.

For a nonnegative h the CME inversion value is convex in theta, and every
error term is nonnegative, so the smallest value is the most accurate one.
CME-S minimises it directly; Euler-S reuses the CME minimiser with the Euler
coefficients, whose value is not convex in theta.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .framework import (
    AccuracyWarning,
    NiltError,
    NiltResult,
    TransformEvaluationError,
    evaluate_nilt,
    evaluate_nilt_mp,
)

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0

BOUND_HIT_NOTE = (
    "theta_hat reached the lower bound a*T - mu set by the abscissa (a > -inf and "
    "theta_hat = theta_lower); the result may be inaccurate"
)


@dataclass(frozen=True)
class ShiftSearchConfig:
    epsilon: float = 0.1
    default_lower_when_unbounded: float = -1000.0
    bounded_upper: float = 10.0
    expansion_factor: float = 4.0
    max_restarts: int = 8
    upper_rule: str = "algorithm"  # or "prose": max(theta_lower + 1000, 0)
    euler_check_rtol: float = 0.05

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.max_restarts < 1:
            raise ValueError("max_restarts must be at least 1")
        if self.upper_rule not in ("algorithm", "prose"):
            raise ValueError("upper_rule is 'algorithm' or 'prose'")


class SearchOutcome(NamedTuple):
    theta_hat: float
    evals: int
    iterations: int


class ThetaBounds(NamedTuple):
    lower: float
    upper: float
    lower_is_hard: bool
    upper_is_hard: bool


def theta_bounds(query, T, coeffs, cfg=None) -> ThetaBounds:
    """Search interval for theta.

    A finite abscissa a gives the hard lower bound a*T - mu; otherwise the
    configured default is used and may be expanded later.
    """
    cfg = cfg or ShiftSearchConfig()
    if not T > 0:
        raise ValueError("T must be positive")
    mu = coeffs.dominant_real_part
    a = query.abscissa
    if a == -math.inf:
        lower, hard = cfg.default_lower_when_unbounded, False
    else:
        lower, hard = a * T - mu, True
    if query.is_bounded_hint:
        upper, upper_hard = cfg.bounded_upper, True
    elif cfg.upper_rule == "prose":
        upper, upper_hard = max(lower + 1000.0, 0.0), False
    else:
        upper, upper_hard = max(lower + 10.0, 10.0), False
    if not upper > lower:
        upper = lower + 10.0
    return ThetaBounds(lower, upper, hard, upper_hard)


def golden_section_search(objective, theta_lower, theta_upper, epsilon=0.1) -> SearchOutcome:
    """Golden-section minimisation of a unimodal function.

    Keeps one interior value per iteration, so the evaluation count is the
    iteration count plus two.
    """
    if not theta_lower < theta_upper:
        raise ValueError("need theta_lower < theta_upper")
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    t0, t3 = theta_lower, theta_upper
    t1 = GOLDEN * t0 + (1 - GOLDEN) * t3
    t2 = (1 - GOLDEN) * t0 + GOLDEN * t3
    f1, f2 = objective(t1), objective(t2)
    evals, iterations = 2, 0
    while t3 - t0 > epsilon:
        iterations += 1
        if f1 < f2:
            t3, t2, f2 = t2, t1, f1
            t1 = GOLDEN * t0 + (1 - GOLDEN) * t3
            f1 = objective(t1)
        else:
            t0, t1, f1 = t1, t2, f2
            t2 = (1 - GOLDEN) * t0 + GOLDEN * t3
            f2 = objective(t2)
        evals += 1
    return SearchOutcome((t0 + t3) / 2, evals, iterations)


def nilt_objective(coeffs, query, T):
    """theta -> h_N(T, theta), with overflow and non-finite values mapped to +inf."""

    def objective(theta):
        try:
            with np.errstate(all="ignore"):
                v = evaluate_nilt(coeffs, query, T, theta, check_residue=False)
        except (TransformEvaluationError, OverflowError, FloatingPointError):
            return math.inf
        return v if math.isfinite(v) else math.inf

    return objective


def optimize_shift(query, T, coeffs, cfg=None):
    """Golden-section search for theta_hat with bound expansion and restarts."""
    cfg = cfg or ShiftSearchConfig()
    bounds = theta_bounds(query, T, coeffs, cfg)
    lo, hi = bounds.lower, bounds.upper
    objective = nilt_objective(coeffs, query, T)
    evals = iterations = restarts = 0
    notes = []
    while True:
        out = golden_section_search(objective, lo, hi, cfg.epsilon)
        evals += out.evals
        iterations += out.iterations
        low_hit = out.theta_hat - lo < cfg.epsilon
        high_hit = hi - out.theta_hat < cfg.epsilon
        expand_low = low_hit and not bounds.lower_is_hard
        expand_high = high_hit and not bounds.upper_is_hard
        if not (expand_low or expand_high):
            break
        if restarts >= cfg.max_restarts:
            notes.append(f"restart budget exhausted with theta_hat={out.theta_hat:.6g} at a search bound")
            break
        width = hi - lo
        if expand_low:
            lo -= cfg.expansion_factor * width
        if expand_high:
            hi += cfg.expansion_factor * width
        restarts += 1
    if low_hit and bounds.lower_is_hard:
        notes.append(BOUND_HIT_NOTE)
    return out.theta_hat, dict(
        evals=evals,
        iterations=iterations,
        restarts=restarts,
        lower=lo,
        upper=hi,
        lower_hit=low_hit,
        upper_hit=high_hit,
        notes=notes,
    )


def _cme_set(n, coeffs):
    if coeffs is not None:
        return coeffs
    from .cme import cme_coefficients

    return cme_coefficients(n)


def cme_s(query, T, n=None, cfg=None, *, coeffs=None) -> NiltResult:
    """CME inversion at the theta minimising the CME value itself."""
    cme = _cme_set(n, coeffs)
    theta, info = optimize_shift(query, T, cme, cfg)
    value = evaluate_nilt(cme, query, T, theta)
    return NiltResult(
        value=value,
        theta_hat=theta,
        objective_evals=info["evals"],
        lower_bound_hit=info["lower_hit"],
        upper_bound_hit=info["upper_hit"],
        theta_lower=info["lower"],
        theta_upper=info["upper"],
        iterations=info["iterations"],
        restarts=info["restarts"],
        warnings=tuple(info["notes"]),
    )


class EulerShiftWarning(AccuracyWarning):
    """Euler-S disagrees with both reference estimates; the shift may not suit Euler."""


def _relative_gap(a, b):
    scale = max(abs(a), abs(b), np.finfo(float).tiny)
    return abs(a - b) / scale


def euler_s(query, T, n, cfg=None, *, cme_coeffs=None, cme_n=None, dps=None, euler_coeffs=None) -> NiltResult:
    """Euler inversion at the CME-optimal theta.

    The CME value is only used to choose theta. The result carries a warning
    when the shifted Euler value is negative or disagrees by more than
    ``euler_check_rtol`` with both the CME-S value and the unshifted Euler
    value, since no single shift is guaranteed to suit the Euler weights.
    ``dps`` switches the Euler sums to extended precision.
    """
    from .euler import euler_coefficients

    cfg = cfg or ShiftSearchConfig()
    base = cme_s(query, T, cme_n if cme_n is not None else n, cfg, coeffs=cme_coeffs)
    euler = euler_coefficients(n) if euler_coeffs is None else euler_coeffs
    if dps:
        value = evaluate_nilt_mp(euler, query, T, base.theta_hat, dps)
        plain = evaluate_nilt_mp(euler, query, T, 0.0, dps)
    else:
        value = evaluate_nilt(euler, query, T, base.theta_hat)
        plain = evaluate_nilt(euler, query, T, 0.0)
    notes = list(base.warnings)
    concern = None
    if value < 0:
        concern = f"Euler-S value {value:.6g} is negative although theta was tuned for a nonnegative h"
    elif (_relative_gap(value, base.value) > cfg.euler_check_rtol
          and _relative_gap(value, plain) > cfg.euler_check_rtol):
        concern = (
            f"Euler-S value {value:.6g} disagrees with CME-S {base.value:.6g} and "
            f"unshifted Euler {plain:.6g}; the CME-optimal shift may not suit Euler"
        )
    if concern:
        notes.append(concern)
        warnings.warn(concern, EulerShiftWarning, stacklevel=2)
    return NiltResult(
        value=value,
        theta_hat=base.theta_hat,
        objective_evals=base.objective_evals,
        lower_bound_hit=base.lower_bound_hit,
        upper_bound_hit=base.upper_bound_hit,
        theta_lower=base.theta_lower,
        theta_upper=base.theta_upper,
        iterations=base.iterations,
        restarts=base.restarts,
        warnings=tuple(notes),
    )


__all__ = [
    "GOLDEN",
    "ShiftSearchConfig",
    "SearchOutcome",
    "ThetaBounds",
    "theta_bounds",
    "golden_section_search",
    "nilt_objective",
    "optimize_shift",
    "cme_s",
    "euler_s",
    "EulerShiftWarning",
    "NiltError",
]
