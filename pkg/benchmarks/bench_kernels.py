"""Compare the compiled kernels with the pure-Python fallback.

Run with ``python3 benchmarks/bench_kernels.py``. Kernel timings call both
backends in-process; the end-to-end CME-S timing runs a child interpreter per
backend because the backend is fixed at import.
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from shiftnilt import kernels
from shiftnilt.cme import _period_rule, cme_form

END_TO_END = """
import time
from shiftnilt import builtin, cme_coefficients, cme_s, BACKEND
q = builtin("exp-t2").query()
c = cme_coefficients(59)
t0 = time.perf_counter()
for T in (1.0, 2.0, 5.0, 10.0):
    cme_s(q, T, coeffs=c)
print(BACKEND, time.perf_counter() - t0)
"""


def best_of(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def kernel_cases(rng):
    z = rng.uniform(-20, 20, 2000) + 1j * rng.uniform(-20, 20, 2000)
    cases = [
        ("erfcx x2000", lambda m: m.erfcx_array(z)),
        ("e1 x2000", lambda m: m.e1_array(z)),
    ]
    for n in (29, 59):
        form = cme_form(n)
        nodes, weights = _period_rule(n, 20)
        omega = float(form.omega)
        phases = np.ascontiguousarray(form.phases, dtype=float)
        cases.append((f"scv+grad n={n}", lambda m, o=omega, p=phases, x=nodes, w=weights:
                      m.cosine_product_moments(o, p, x, w, True)))
    return cases


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    try:
        compiled = kernels.backend_module("compiled")
    except ImportError:
        print("compiled extension not built; only the Python backend is available")
        return 1
    python = kernels.backend_module("python")
    rng = np.random.default_rng(1)
    print(f"{'kernel':20s} {'compiled [ms]':>14s} {'python [ms]':>12s} {'speedup':>8s}")
    for name, fn in kernel_cases(rng):
        tc = best_of(lambda: fn(compiled), args.repeat)
        tp = best_of(lambda: fn(python), max(1, args.repeat // 2))
        print(f"{name:20s} {tc * 1e3:14.3f} {tp * 1e3:12.3f} {tp / tc:8.1f}")
    for env_value in (None, "1"):
        env = dict(os.environ)
        env.pop("SHIFTNILT_PURE_PYTHON", None)
        if env_value:
            env["SHIFTNILT_PURE_PYTHON"] = env_value
        out = subprocess.run([sys.executable, "-c", END_TO_END], env=env, capture_output=True, text=True, check=True)
        backend, seconds = out.stdout.split()
        print(f"CME-S exp(-t^2), n=59, 4 T values, {backend:8s} backend: {float(seconds) * 1e3:9.1f} ms")
    return 0


if __name__ == "__main__":
    sys.exit(main())
