"""Brute-force reference values for erfcx and E1.

Run once with ``python3 tests/oracles/special_functions.py``; it writes
tests/data/special_oracle.json. The values come from high-precision power
series for moderate |z| and from the divergent asymptotic series truncated
far below double precision for large |z|. None of the package kernels are
used.
"""
import json
import math
from pathlib import Path

import mpmath as mp
import numpy as np

OUT = Path(__file__).resolve().parent.parent / "data" / "special_oracle.json"
POINTS = 1000
SEED = 20240601


def erfc_series(z):
    """1 - (2/sqrt(pi)) sum (-1)^k z^(2k+1) / (k! (2k+1)) with enough guard digits."""
    with mp.workdps(30 + int(abs(z) ** 2 / 1.15) + 10):
        z = mp.mpc(z)
        term, total, k = z, z, 0
        z2 = z * z
        while True:
            k += 1
            term *= -z2 / k
            add = term / (2 * k + 1)
            total += add
            if abs(add) < mp.mpf(10) ** (-mp.mp.dps) * abs(total) and k > abs(z2):
                break
        return 1 - 2 / mp.sqrt(mp.pi) * total


def erfcx_asymptotic(z):
    """(1/(z sqrt(pi))) sum (-1)^k (2k-1)!! / (2 z^2)^k, stopped at the smallest term."""
    with mp.workdps(40):
        z = mp.mpc(z)
        x = 1 / (2 * z * z)
        term, total, k = mp.mpf(1), mp.mpf(1), 0
        while True:
            k += 1
            nxt = -term * (2 * k - 1) * x
            if abs(nxt) >= abs(term) or abs(nxt) < mp.mpf(10) ** -35:
                break
            term = nxt
            total += term
        return total / (z * mp.sqrt(mp.pi))


def erfcx_oracle(z):
    z = complex(z)
    if abs(z) <= 10:
        with mp.workdps(40):
            v = erfc_series(z)
            return complex(mp.exp(mp.mpc(z) ** 2) * v)
    if z.real >= 0:
        return complex(erfcx_asymptotic(z))
    with mp.workdps(40):
        return complex(2 * mp.exp(mp.mpc(z) ** 2) - erfcx_asymptotic(-z))


def e1_series(z):
    """-gamma - log z - sum (-z)^k / (k k!)."""
    with mp.workdps(30 + int(abs(z) / 2.3) + 10):
        z = mp.mpc(z)
        term, total, k = mp.mpf(1), mp.mpf(0), 0
        while True:
            k += 1
            term *= -z / k
            add = term / k
            total += add
            if abs(add) < mp.mpf(10) ** (-mp.mp.dps) * max(abs(total), 1) and k > abs(z):
                break
        return -mp.euler - mp.log(z) - total


def e1_asymptotic(z):
    """exp(-z)/z sum (-1)^k k! / z^k, stopped at the smallest term."""
    with mp.workdps(40):
        z = mp.mpc(z)
        term, total, k = mp.mpf(1), mp.mpf(1), 0
        while True:
            k += 1
            nxt = -term * k / z
            if abs(nxt) >= abs(term) or abs(nxt) < mp.mpf(10) ** -35:
                break
            term = nxt
            total += term
        return mp.exp(-z) / z * total


def e1_oracle(z):
    z = complex(z)
    if abs(z) <= 45:
        with mp.workdps(40):
            return complex(e1_series(z))
    return complex(e1_asymptotic(z))


def sample(rng, max_arg, r_lo, r_hi, accept):
    pts = []
    while len(pts) < POINTS:
        r = math.exp(rng.uniform(math.log(r_lo), math.log(r_hi)))
        phi = rng.uniform(-max_arg, max_arg)
        z = complex(r * math.cos(phi), r * math.sin(phi))
        if accept(z):
            pts.append(z)
    return pts


def main():
    rng = np.random.default_rng(SEED)
    # erfcx is used at s/2 and 1/(2 sqrt(s)) with s in or near the right half plane.
    ez = sample(rng, 0.6 * math.pi, 1e-3, 1e6, lambda z: (z * z).real < 600)
    # E1 is used at s near the right half plane.
    e1z = sample(rng, 0.75 * math.pi, 1e-3, 1e6, lambda z: abs(z.real) < 600)
    doc = {
        "erfcx": [[z.real, z.imag, v.real, v.imag] for z in ez for v in [erfcx_oracle(z)]],
        "e1": [[z.real, z.imag, v.real, v.imag] for z in e1z for v in [e1_oracle(z)]],
        "domain": {"erfcx": "|arg z| <= 0.6 pi, 1e-3 <= |z| <= 1e6, Re(z^2) < 600",
                   "e1": "|arg z| <= 0.75 pi, 1e-3 <= |z| <= 1e6, |Re z| < 600"},
        "seed": SEED,
    }
    OUT.write_text(json.dumps(doc))
    print(f"wrote {len(ez)} erfcx and {len(e1z)} E1 reference values to {OUT}")


if __name__ == "__main__":
    main()
