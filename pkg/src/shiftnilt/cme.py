"""Concentrated matrix-exponential (CME) weight functions.

A CME weight has the cosine-product form

    f(t) = c exp(-lam t) prod_j cos^2((omega lam t - phi_j) / 2)

which is nonnegative by construction. Expanding the product into harmonics
d_k gives nodes lam (1 - i k omega) and weights c d_k. The shape parameters
(omega, phi) are chosen to minimise the squared coefficient of variation;
lam and c then fix unit mass and unit mean.
"""
from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import dataclass, field, replace
from functools import lru_cache
from pathlib import Path

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.optimize import minimize

from . import kernels
from .framework import CoefficientSet, Method

TWO_PI = 2.0 * math.pi
GENERATOR_VERSION = "cme-gen-1"
CACHE_FORMAT = "shiftnilt-cme-cache"
CACHE_VERSION = 1
CACHE_FILENAME = "cme_cache.json"
CACHE_ENV = "SHIFTNILT_CACHE_DIR"
MAIN_MASS_FLOOR = 0.99
MAIN_MASS_MIN_ORDER = 3


class CmeOptimizationError(RuntimeError):
    def __init__(self, message, best):
        super().__init__(message)
        self.best = best


class CacheError(ValueError):
    pass


class CacheMissingError(CacheError, LookupError):
    pass


@dataclass(frozen=True)
class CmeSpectralForm:
    n: int
    c: float
    lam: float
    omega: float
    phases: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "phases", tuple(float(p) for p in self.phases))
        for name in ("c", "lam", "omega"):
            v = float(getattr(self, name))
            object.__setattr__(self, name, v)
            if not (math.isfinite(v) and v > 0):
                label = "lambda" if name == "lam" else name
                raise ValueError(f"invariant violated: {label} must be positive and finite, got {v!r}")
        if len(self.phases) != self.n:
            raise ValueError(f"invariant violated: expected {self.n} phases, got {len(self.phases)}")
        if any(not (0.0 <= p < TWO_PI) for p in self.phases):
            raise ValueError("invariant violated: phases must lie in [0, 2 pi)")

    @classmethod
    def from_shape(cls, omega, phases, c=1.0, lam=1.0):
        """Build a form with phases reduced modulo 2 pi and sorted."""
        return cls(len(phases), c, lam, omega, canonical_phases(phases))

    def weight_value(self, t, theta=0.0):
        """Shifted weight function exp(-theta (t - 1)) f_N(t) in product form.

        Nonnegative by construction, unlike the exponential sum, whose terms
        cancel to a few ulps of the largest weight.
        """
        t = np.asarray(t, dtype=float)
        u = self.omega * self.lam * t
        with np.errstate(over="ignore", under="ignore"):
            val = self.c * np.exp(-self.lam * t - theta * (t - 1.0))
        for p in self.phases:
            val = val * np.cos((u - p) / 2.0) ** 2
        return val

    def mp_coefficients(self, dps):
        raise ValueError("CME sets have no extended-precision generator")


def canonical_phases(phases):
    p = np.mod(np.asarray(phases, dtype=float), TWO_PI)
    p[p >= TWO_PI] = 0.0
    return tuple(float(x) for x in np.sort(p))


def product_form_value(form: CmeSpectralForm, t):
    """Direct evaluation of the cosine product; the oracle for the expansion."""
    return form.weight_value(t)


def laurent_convolution(phases):
    """Harmonic amplitudes d_{-n..n} by iterated convolution of single factors.

    cos^2((v - p)/2) = 1/2 + e^{i(v-p)}/4 + e^{-i(v-p)}/4. Exact in
    arithmetic but loses accuracy for n above ~30; kept as an oracle.
    """
    d = np.array([1.0 + 0j])
    for p in phases:
        d = np.convolve(d, [0.25 * np.exp(1j * p), 0.5, 0.25 * np.exp(-1j * p)])
    return d


def harmonic_spectrum(phases):
    """Harmonic amplitudes d_{-n..n} from an FFT of the sampled product.

    The product is a trigonometric polynomial of degree n, so 4n+8 samples
    recover it exactly up to rounding, with no growth in n.
    """
    phases = np.asarray(phases, dtype=float)
    n = phases.size
    m = 4 * n + 8
    v = TWO_PI * np.arange(m) / m
    prod = np.prod(np.cos((v[None, :] - phases[:, None]) / 2.0) ** 2, axis=0)
    half = np.fft.rfft(prod)[: n + 1] / m
    half[0] = half[0].real
    d = np.empty(2 * n + 1, dtype=complex)
    d[n:] = half
    d[:n] = np.conj(half[1:][::-1])
    return d


def expand_spectral_form(form: CmeSpectralForm, spectrum=None) -> CoefficientSet:
    """Exponential-sum coefficient set of a spectral form."""
    n = form.n
    d = harmonic_spectrum(form.phases) if spectrum is None else np.asarray(spectrum, dtype=complex)
    k = np.arange(n + 1)
    half_nodes = form.lam * (1.0 - 1j * k * form.omega)
    half_nodes[0] = form.lam
    half_weights = form.c * d[n:]
    w = np.empty(2 * n + 1, dtype=complex)
    b = np.empty(2 * n + 1, dtype=complex)
    w[: n + 1] = half_weights
    b[: n + 1] = half_nodes
    w[n + 1 :] = np.conj(half_weights[1:][::-1])
    b[n + 1 :] = np.conj(half_nodes[1:][::-1])
    return CoefficientSet(n, w, b, Method.CME, 0.0, form)


def closed_form_moments(form: CmeSpectralForm, orders=(0, 1, 2)):
    """Moments int t^m f(t) dt from the harmonic expansion."""
    d = harmonic_spectrum(form.phases)
    k = np.arange(-form.n, form.n + 1)
    beta = form.lam * (1.0 - 1j * k * form.omega)
    return np.array([(form.c * math.factorial(m) * d / beta ** (m + 1)).sum().real for m in orders])


def scv(form: CmeSpectralForm) -> float:
    """Squared coefficient of variation from closed-form moments."""
    m0, m1, m2 = closed_form_moments(form)
    return m2 * m0 / m1 ** 2 - 1.0


@lru_cache(maxsize=None)
def _period_rule(n, points):
    x, w = leggauss(points)
    edges = np.linspace(0.0, TWO_PI, 2 * n + 9)
    lo, hi = edges[:-1, None], edges[1:, None]
    nodes = ((hi - lo) / 2 * x + (hi + lo) / 2).ravel()
    weights = ((hi - lo) / 2 * w).ravel()
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def scv_stable(omega, phases, with_gradient=False, points=20):
    """SCV from moments integrated over one period of the product.

    Numerically stable for every supported n, unlike the exponential-sum
    moments whose terms cancel heavily beyond n ~ 35. Returns (scv, grad)
    when ``with_gradient``; grad is with respect to (omega, phi_1..phi_n).
    """
    phases = np.asarray(phases, dtype=float)
    v, w = _period_rule(phases.size, points)
    N, grad = kernels.cosine_product_moments(float(omega), phases, v, w, with_gradient)
    value = N[2] * N[0] / N[1] ** 2 - 1.0
    return (value, grad) if with_gradient else value


def normalize(form: CmeSpectralForm) -> CmeSpectralForm:
    """Rescale lam for unit mean and c for unit mass."""
    if form.n == 0:
        return replace(form, c=1.0, lam=1.0)
    unit = replace(form, c=1.0, lam=1.0)
    m0, m1 = closed_form_moments(unit, (0, 1))
    if not (m0 > 0 and m1 > 0 and math.isfinite(m0) and math.isfinite(m1)):
        raise ValueError("degenerate spectrum: non-positive mass")
    lam = m1 / m0
    return replace(form, c=lam / m0, lam=lam)


@dataclass(frozen=True)
class CmeOptimizerOptions:
    seed: int = 0
    gap_candidates: int = 4
    random_starts: int = 0
    max_evals: int = 200_000
    gtol: float = 1e-14


class _Budget:
    def __init__(self, limit):
        self.limit = limit
        self.used = 0


def _objective(y, budget):
    budget.used += 1
    if budget.used > budget.limit:
        raise StopIteration
    omega = math.exp(y[0])
    val, grad = scv_stable(omega, y[1:], with_gradient=True)
    if not math.isfinite(val) or val <= 0 or not np.all(np.isfinite(grad)):
        return 1e3, np.zeros_like(y)
    grad = grad.copy()
    grad[0] *= omega
    return val, grad


def _local_minimize(omega, phases, opts, budget):
    y0 = np.concatenate([[math.log(omega)], np.asarray(phases, dtype=float)])
    best_y, best_f = y0, _objective(y0, budget)[0]
    try:
        for method, extra in (("BFGS", {}), ("L-BFGS-B", {"ftol": 1e-16})):
            r = minimize(_objective, best_y, args=(budget,), jac=True, method=method,
                         options=dict(maxiter=20000, gtol=opts.gtol, **extra))
            if r.fun < best_f:
                best_y, best_f = r.x, float(r.fun)
    except StopIteration:
        pass
    return best_f, math.exp(best_y[0]), best_y[1:]


def _candidates(omega, phases, opts, rng, widen=False):
    ph = np.sort(np.mod(phases, TWO_PI))
    if ph.size == 0:
        return [(omega, np.array([math.pi]))]
    gaps = np.diff(np.concatenate([ph, [ph[0] + TWO_PI]]))
    count = ph.size if widen else opts.gap_candidates
    out = [(omega, np.append(ph, ph[i] + gaps[i] / 2)) for i in np.argsort(-gaps, kind="stable")[:count]]
    for _ in range(opts.random_starts + (4 if widen else 0)):
        out.append((omega, np.append(ph, rng.uniform(0, TWO_PI))))
    return out


def _optimize_next(previous, n, opts, rng):
    """Optimise order n starting from the order n-1 shape."""
    if previous is None:
        starts = [(0.8, np.array([3.0]))]
    else:
        starts = _candidates(previous.omega, np.asarray(previous.phases), opts, rng)
    budget = _Budget(opts.max_evals)
    best = None
    for widen in (False, True):
        if widen:
            starts = _candidates(previous.omega, np.asarray(previous.phases), opts, rng, widen=True)
        for omega, phases in starts:
            f, om, ph = _local_minimize(omega, phases, opts, budget)
            if best is None or f < best[0]:
                best = (f, om, ph)
        prev_scv = 1.0 if previous is None else scv_stable(previous.omega, previous.phases)
        if best[0] < prev_scv or previous is None:
            break
    f, om, ph = best
    form = normalize(CmeSpectralForm.from_shape(om, ph))
    if budget.used > budget.limit:
        raise CmeOptimizationError(f"evaluation budget exhausted at n={n}", form)
    if not (0 < f < 1):
        raise CmeOptimizationError(f"optimizer did not find a concentrating shape at n={n}", form)
    return form


def optimize_cme_sequence(max_n, options=None, callback=None):
    """Optimise orders 1..max_n by continuation; returns the list of forms."""
    if not 1 <= max_n <= 60:
        raise ValueError("CME order must be in [1, 60]")
    opts = options or CmeOptimizerOptions()
    rng = np.random.default_rng(opts.seed)
    forms = []
    previous = None
    for n in range(1, max_n + 1):
        previous = _optimize_next(previous, n, opts, rng)
        forms.append(previous)
        if callback is not None:
            callback(previous)
    return forms


def optimize_cme(n, options=None):
    """Optimised, normalised spectral form of order n (continuation from n = 1)."""
    return optimize_cme_sequence(n, options)[-1]


# -- cache -----------------------------------------------------------------


def _encode(form, seed):
    return {
        "n": form.n,
        "c": repr(form.c),
        "lambda": repr(form.lam),
        "omega": repr(form.omega),
        "phases": [repr(p) for p in form.phases],
        "scv": repr(float(scv_stable(form.omega, form.phases))) if form.n else "1.0",
        "generator_version": GENERATOR_VERSION,
        "seed": seed,
    }


def _decode(rec):
    try:
        n = int(rec["n"])
        form = CmeSpectralForm(
            n,
            float(rec["c"]),
            float(rec["lambda"]),
            float(rec["omega"]),
            tuple(float(p) for p in rec["phases"]),
        )
    except (KeyError, TypeError) as exc:
        raise CacheError(f"malformed cache record: {exc!r}") from exc
    except ValueError as exc:
        raise CacheError(f"cache record n={rec.get('n')!r} rejected: {exc}") from exc
    return form


def check_form(form):
    """Sanity checks applied to every loaded form."""
    from .weights import MainIntervalError, decompose_weight

    if form.n >= MAIN_MASS_MIN_ORDER:
        try:
            dec = decompose_weight(expand_spectral_form(form))
        except MainIntervalError as exc:
            raise CacheError(f"cache record n={form.n} rejected: f_main undefined ({exc})") from exc
        if dec.f_main < MAIN_MASS_FLOOR:
            raise CacheError(
                f"cache record n={form.n} rejected: f_main={dec.f_main:.4f} below {MAIN_MASS_FLOOR}"
            )


def save_cache(forms, path, seed=0):
    """Write forms to a versioned JSON cache atomically."""
    path = Path(path)
    doc = {
        "format": CACHE_FORMAT,
        "version": CACHE_VERSION,
        "records": [_encode(f, seed) for f in sorted(forms, key=lambda f: f.n)],
    }
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            json.dump(doc, fh, indent=1)
            fh.write("\n")
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_cache(path, validate=True):
    """Read and validate a cache file; returns forms sorted by n."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise CacheError(f"malformed cache file {path}: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("format") != CACHE_FORMAT:
        raise CacheError(f"{path} is not a {CACHE_FORMAT} document")
    if doc.get("version") != CACHE_VERSION:
        raise CacheError(f"unsupported cache version {doc.get('version')!r}")
    records = doc.get("records")
    if not isinstance(records, list):
        raise CacheError("cache has no record list")
    forms = [_decode(r) for r in records]
    if validate:
        for f in forms:
            check_form(f)
    return sorted(forms, key=lambda f: f.n)


def default_cache_path():
    override = os.environ.get(CACHE_ENV)
    if override:
        return Path(override) / CACHE_FILENAME
    return Path(__file__).with_name("data") / CACHE_FILENAME


@lru_cache(maxsize=8)
def _cached_forms(path):
    if not os.path.exists(path):
        raise CacheMissingError(
            f"no CME cache at {path}; run `shiftnilt generate-cme --output {path}`"
        )
    return {f.n: f for f in load_cache(path)}


def cme_form(n, path=None):
    forms = _cached_forms(str(path or default_cache_path()))
    if n not in forms:
        raise CacheMissingError(
            f"CME order {n} not in cache; run `shiftnilt generate-cme --max-n {max(n, 1)}`"
        )
    return forms[n]


@lru_cache(maxsize=None)
def _cme_coefficients(n, path):
    return expand_spectral_form(cme_form(n, path))


def cme_coefficients(n, path=None) -> CoefficientSet:
    """CME coefficient set of order n from the coefficient cache."""
    return _cme_coefficients(n, str(path or default_cache_path()))


def available_orders(path=None):
    return sorted(_cached_forms(str(path or default_cache_path())))


def cme_n_for_order(order: int) -> int:
    """CME order n using exactly ``order`` transform calls (n + 1 distinct nodes)."""
    if order < 2:
        raise ValueError("order must be at least 2")
    return order - 1
