"""Builtin Laplace transform pairs with their time-domain functions."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import kernels
from .framework import TransformQuery

SQRT_PI = math.sqrt(math.pi)


def erfcx_complex(z):
    """exp(z^2) erfc(z); scalar in, scalar out, array in, array out."""
    if np.ndim(z) == 0:
        return kernels.erfcx(z)
    return kernels.erfcx_array(z)


def e1_complex(z):
    """Exponential integral E1(z) for z != 0 off the negative real axis."""
    if np.ndim(z) == 0:
        return kernels.e1(z)
    return kernels.e1_array(z)


def expint_scaled(order, z):
    """exp(z) E_order(z)."""
    if np.ndim(z) == 0:
        return kernels.expint_scaled(order, z)
    return kernels.expint_scaled_array(order, z)


@dataclass(frozen=True)
class TestPair:
    name: str
    transform: Callable
    abscissa: float
    oracle: Callable[[float], float]
    bounded: bool
    smooth: bool
    mp_transform: Optional[Callable] = None
    expression: str = ""
    description: str = ""
    discontinuities: Callable[[float, float], list] = None

    __test__ = False  # not a pytest class

    def query(self) -> TransformQuery:
        return TransformQuery(
            transform=self.transform,
            abscissa=self.abscissa,
            is_bounded_hint=self.bounded,
            oracle=self.oracle,
            mp_transform=self.mp_transform,
            name=self.name,
        )

    def breakpoints(self, lo, hi):
        return [] if self.discontinuities is None else self.discontinuities(lo, hi)


# -- transforms ---------------------------------------------------------------


def _gauss(s):
    return SQRT_PI / 2 * erfcx_complex(s / 2)


def _exp(s):
    return 1.0 / (1.0 + s)


def _exp_sqrt(s):
    r = np.sqrt(s)
    return 1.0 / s - SQRT_PI / 2 * erfcx_complex(1.0 / (2.0 * r)) / (s * r)


def _poly3(s):
    # 1 - s + s^2 e^s E1(s) equals 2 e^s E3(s), which avoids cancellation
    return 2.0 * expint_scaled(3, s)


def _sin_plus_1(s):
    return 1.0 / (1.0 + s * s) + 1.0 / s


def _delayed_exp(s):
    return np.exp(-s) / (1.0 + s)


def _square_wave(s):
    s = np.asarray(s, dtype=complex)
    out = np.empty_like(s)
    pos = s.real > 0
    with np.errstate(over="ignore"):
        e = np.exp(-s[pos])
        out[pos] = e / (s[pos] * (1.0 + e))
        out[~pos] = 1.0 / (s[~pos] * (1.0 + np.exp(s[~pos])))
    return out if out.ndim else complex(out)


# -- extended precision twins -------------------------------------------------


def _mp():
    import mpmath

    return mpmath


def _gauss_mp(s):
    mp = _mp()
    return mp.sqrt(mp.pi) / 2 * mp.exp((s / 2) ** 2) * mp.erfc(s / 2)


def _exp_mp(s):
    return 1 / (1 + s)


def _exp_sqrt_mp(s):
    mp = _mp()
    r = mp.sqrt(s)
    return 1 / s - mp.sqrt(mp.pi) / 2 * mp.exp(1 / (4 * s)) * mp.erfc(1 / (2 * r)) / (s * r)


def _poly3_mp(s):
    mp = _mp()
    return 2 * mp.exp(s) * mp.expint(3, s)


def _sin_plus_1_mp(s):
    return 1 / (1 + s * s) + 1 / s


def _delayed_exp_mp(s):
    return _mp().exp(-s) / (1 + s)


def _square_wave_mp(s):
    return 1 / (s * (1 + _mp().exp(s)))


# -- oracles ------------------------------------------------------------------


def _integers_between(lo, hi):
    return [float(k) for k in range(max(1, math.ceil(lo)), math.floor(hi) + 1)]


_PAIRS = [
    TestPair("exp-t2", _gauss, -math.inf, lambda t: math.exp(-t * t), True, True, _gauss_mp,
             "sqrt(3.141592653589793)/2*erfcx(s/2)", "exp(-t^2)"),
    TestPair("exp-t", _exp, -1.0, lambda t: math.exp(-t), True, True, _exp_mp,
             "1/(1+s)", "exp(-t)"),
    TestPair("exp-sqrt-t", _exp_sqrt, 0.0, lambda t: math.exp(-math.sqrt(t)), True, True, _exp_sqrt_mp,
             "1/s - sqrt(3.141592653589793)/2*erfcx(1/(2*sqrt(s)))/(s*sqrt(s))", "exp(-sqrt(t))"),
    TestPair("poly3", _poly3, 0.0, lambda t: 2.0 / (1.0 + t) ** 3, True, True, _poly3_mp,
             "1 - s + s^2*exp(s)*e1(s)", "2/(1+t)^3"),
    TestPair("sin-plus-1", _sin_plus_1, 0.0, lambda t: math.sin(t) + 1.0, True, True, _sin_plus_1_mp,
             "1/(1+s^2)+1/s", "sin(t)+1"),
    TestPair("delayed-exp", _delayed_exp, -1.0, lambda t: math.exp(1.0 - t) if t >= 1.0 else 0.0,
             True, False, _delayed_exp_mp, "exp(-s)/(1+s)", "U(t-1) exp(1-t)",
             lambda lo, hi: [1.0] if lo < 1.0 < hi else []),
    TestPair("square-wave", _square_wave, 0.0, lambda t: float(math.floor(t) % 2), True, False,
             _square_wave_mp, "1/(s+s*exp(s))", "floor(t) mod 2", _integers_between),
]

_BY_NAME = {p.name: p for p in _PAIRS}

DECAYING = ("exp-t2", "exp-t", "exp-sqrt-t", "poly3")
REGULAR = ("sin-plus-1", "delayed-exp", "square-wave")


def builtin_registry():
    """All builtin pairs, in a stable order."""
    return list(_PAIRS)


def builtin(name) -> TestPair:
    try:
        return _BY_NAME[name]
    except KeyError:
        raise KeyError(f"unknown builtin {name!r}; choose from {', '.join(_BY_NAME)}") from None
