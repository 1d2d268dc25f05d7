"""Reproduce the weight-function and shifted-inversion tables and compare them
against reference values with per-cell tolerances."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .cme import CACHE_VERSION, cme_coefficients, cme_n_for_order
from .euler import euler_coefficients, euler_n_for_order
from .framework import evaluate_nilt, evaluate_nilt_mp
from .shift import ShiftSearchConfig, cme_s, euler_s
from .transforms import builtin
from .weights import decompose_weight

REFERENCE_PATH = Path(__file__).with_name("data") / "reference_values.json"
EULER_DPS = 60


def load_reference(path=REFERENCE_PATH):
    with open(path) as fh:
        return json.load(fh)


@dataclass(frozen=True)
class Table1Row:
    method: str
    order: int
    n: int
    z_lower: float
    z_upper: float
    f_left: float
    f_main: float
    f_right: float


@dataclass(frozen=True)
class BenchRow:
    function: str
    T: float
    order: int
    cme_n: int
    euler_n: int
    precise: float
    cme: float
    cme_s: float
    euler: float
    euler_s: float
    theta_hat: float
    evals: int
    iterations: int


@dataclass
class BenchReport:
    rows: list
    metadata: dict = field(default_factory=dict)


def table1(orders=(30, 60), cache=None):
    out = []
    for method in ("euler", "cme"):
        for order in orders:
            if method == "euler":
                n = euler_n_for_order(order)
                coeffs = euler_coefficients(n)
            else:
                n = cme_n_for_order(order)
                coeffs = cme_coefficients(n, cache)
            d = decompose_weight(coeffs)
            out.append(Table1Row(method, order, n, d.z_lower, d.z_upper, d.f_left, d.f_main, d.f_right))
    return out


def bench_row(function, T, order, cfg=None, extended=True, cache=None):
    """One inversion-table row; ``extended`` evaluates Euler sums with mpmath."""
    pair = builtin(function)
    q = pair.query()
    cn, en = cme_n_for_order(order), euler_n_for_order(order)
    cme = cme_coefficients(cn, cache)
    eul = euler_coefficients(en)
    shifted = cme_s(q, T, cfg=cfg, coeffs=cme)
    dps = EULER_DPS if extended else None
    es = euler_s(q, T, en, cfg, cme_coeffs=cme, dps=dps)
    plain_euler = evaluate_nilt_mp(eul, q, T, 0.0, EULER_DPS) if extended else evaluate_nilt(eul, q, T)
    return BenchRow(
        function=function,
        T=T,
        order=order,
        cme_n=cn,
        euler_n=en,
        precise=pair.oracle(T),
        cme=evaluate_nilt(cme, q, T),
        cme_s=shifted.value,
        euler=plain_euler,
        euler_s=es.value,
        theta_hat=shifted.theta_hat,
        evals=shifted.objective_evals,
        iterations=shifted.iterations,
    )


def table2(reference=None, cfg=None, extended=True, cache=None):
    reference = reference or load_reference()
    cfg = cfg or ShiftSearchConfig()
    rows = [bench_row(r["function"], float(r["T"]), int(r["order"]), cfg, extended, cache)
            for r in reference["table2"]]
    meta = {"cache_version": CACHE_VERSION, "epsilon": cfg.epsilon, "euler_precision": "mp60" if extended else "double"}
    return BenchReport(rows, meta)


@dataclass(frozen=True)
class Comparison:
    table: str
    key: str
    column: str
    reference: float
    computed: float
    kind: str
    tol: float

    @property
    def deviation(self):
        if self.kind == "abs":
            return abs(self.computed - self.reference)
        return abs(self.computed - self.reference) / abs(self.reference)

    @property
    def passed(self):
        return math.isfinite(self.computed) and self.deviation <= self.tol


_T1_POLICY = {
    "euler": {"z_lower": "euler_weight", "z_upper": "euler_weight", "f_left": "euler_weight",
              "f_main": "euler_weight", "f_right": "euler_weight"},
    "cme": {"z_lower": "cme_zero", "z_upper": "cme_zero", "f_left": "cme_side",
            "f_main": "cme_main", "f_right": "cme_side"},
}
_T2_POLICY = {"precise": "precise", "cme": "cme", "cme_s": "cme", "euler": "euler",
              "euler_s": "euler", "theta_hat": "theta", "evals": "evals"}


def compare(t1_rows, report, reference=None):
    reference = reference or load_reference()
    policy = reference["tolerance_policy"]
    out = []
    t1 = {(r.method, r.order): r for r in t1_rows}
    for ref in reference["table1"]:
        row = t1.get((ref["method"], ref["order"]))
        if row is None:
            continue
        for col, pol in _T1_POLICY[ref["method"]].items():
            p = policy[pol]
            out.append(Comparison("table1", f"{ref['method']} order {ref['order']}", col,
                                  ref[col], getattr(row, col), p["kind"], p["tol"]))
    t2 = {(r.function, r.T, r.order): r for r in report.rows}
    for ref in reference["table2"]:
        row = t2.get((ref["function"], float(ref["T"]), int(ref["order"])))
        if row is None:
            continue
        for col, pol in _T2_POLICY.items():
            p = policy[pol]
            out.append(Comparison("table2", f"{ref['function']} T={ref['T']} order {ref['order']}", col,
                                  ref[col], getattr(row, col), p["kind"], p["tol"]))
    return out


def rows_as_dicts(rows):
    return [asdict(r) for r in rows]
