"""Datasets behind the published comparison plots, as plain tables.

Every dataset is a :class:`Dataset`: a metadata dict, a column list and rows
of strings.  Curves are stored in long format (one row per quantity, point
and method) so one schema serves every figure:

``quantity, N, d, k, lambda, method, m, beta, value, abs_error``

``method`` is ``exact`` (self-converged diagonalization), ``pade`` (plain
near-diagonal approximant in the coupling) or ``borel-pade`` (Borel or
Borel-Leroy sum).  ``abs_error`` is taken against the ``exact`` row of the
same point.  Pole datasets use ``quantity, m, re, im, class, abs_residue``.

Sweep points are independent and may be evaluated by a process pool; rows
are always emitted in grid order.
"""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import gmpy2
from gmpy2 import mpfr, mpq

from .errors import QmtResumError
from .pade import auto_pade, find_poles, pade_staircase
from .pipeline import QUANTITIES, ModelSpec, exact_value, get_series, pade_value, resum_value
from .resum import PV, BorelSpec, borel_pade, optimal_beta
from .series import DEFAULT_PREC, format_float, workprec

SCHEMA_VERSION = 1
CURVE_COLUMNS = ["quantity", "N", "d", "k", "lambda", "method", "m", "beta", "value", "abs_error"]
POLE_COLUMNS = ["quantity", "m", "re", "im", "class", "abs_residue"]
FIGURES = ("fig2a", "fig2b", "fig3", "fig4", "fig5", "excited", "fig6", "fig7")


@dataclass
class Dataset:
    figure: str
    meta: dict
    columns: list
    rows: list = field(default_factory=list)

    def header(self) -> dict:
        return {"schema_version": SCHEMA_VERSION, "figure": self.figure, **self.meta}

    def to_csv(self) -> str:
        buf = io.StringIO()
        for key, val in self.header().items():
            buf.write(f"# {key}: {json.dumps(val, sort_keys=True)}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        w.writerows(self.rows)
        return buf.getvalue()

    def to_json(self) -> str:
        body = {**self.header(), "columns": self.columns, "rows": self.rows}
        return json.dumps(body, indent=1, sort_keys=True) + "\n"

    def write(self, path: str | None, fmt: str = "csv") -> str:
        text = self.to_csv() if fmt == "csv" else self.to_json()
        if path:
            with open(path, "w") as fh:
                fh.write(text)
        return text


def parse_range(text: str) -> list:
    """``"lo:hi:step"`` (inclusive, exact decimal arithmetic) or a comma list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"range must be lo:hi:step, got {text!r}")
        lo, hi, step = (Fraction(p) for p in parts)
        if step <= 0 or hi < lo:
            raise ValueError(f"empty range {text!r}")
        n = int((hi - lo) / step)
        pts = [lo + i * step for i in range(n + 1)]
    else:
        pts = [Fraction(p) for p in text.split(",") if p.strip()]
    if not pts:
        raise ValueError("empty grid")
    return [_fmt_grid(p) for p in pts]


def _fmt_grid(p: Fraction) -> str:
    """Shortest decimal spelling of a grid point."""
    if p.denominator == 1:
        return str(p.numerator)
    s = format(float(p), ".15g")
    return s


def fmt(x, digits: int = 20) -> str:
    if x is None:
        return "nan"
    if isinstance(x, gmpy2.mpc):
        x = x.real
    return format_float(x, digits)


# ---------------------------------------------------------------------------
# point evaluation (process-pool friendly: plain tuples in and out)


def _point(task: tuple) -> str:
    model_name, N, d, quantity, k, lam, method, m, beta = task
    model = ModelSpec(model_name, N=N, d=d)
    try:
        if method == "exact":
            return fmt(exact_value(model, quantity, k, lam))
        if method == "pade":
            return fmt(pade_value(model, quantity, k, lam, m))
        spec = BorelSpec(mpq(model.gevrey), mpq(Fraction(beta)), PV)
        value, _ = resum_value(model, quantity, k, lam, m, spec)
        return fmt(value)
    except QmtResumError:
        return "nan"


def _run(tasks: list, jobs: int = 1) -> list:
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_point, tasks, chunksize=1))
    return [_point(t) for t in tasks]


def _curves(figure: str, meta: dict, model_points: list, jobs: int) -> Dataset:
    """``model_points``: ``(model, quantity, k, lam, [(method, m, beta), ...])``."""
    tasks, keys = [], []
    for model, q, k, lam, methods in model_points:
        for method, m, beta in [("exact", 0, "")] + methods:
            tasks.append((model.name, model.N, model.d, q, k, lam, method, m, beta))
            keys.append((model, q, k, lam, method, m, beta))
    values = _run(tasks, jobs)
    exact = {}
    for key, val in zip(keys, values):
        if key[4] == "exact":
            exact[key[:4]] = val
    rows = []
    for (model, q, k, lam, method, m, beta), val in zip(keys, values):
        ref = exact[(model, q, k, lam)]
        if method == "exact" or "nan" in (val, ref):
            err = "" if method == "exact" else "nan"
        else:
            err = format_float(abs(mpfr(val) - mpfr(ref)), 3)
        d = model.d if model.name == "ddim" else ""
        rows.append([q, model.N, d, k, lam, method, m or "", beta, val, err])
    return Dataset(figure, meta, CURVE_COLUMNS, rows)


# ---------------------------------------------------------------------------
# figures


def fig2a(k_range="0.1:10:0.1", lam="1", m=100, jobs=1) -> Dataset:
    model = ModelSpec("quartic")
    pts = [(model, "E", k, lam, [("pade", m, ""), ("borel-pade", m, "1")]) for k in parse_range(k_range)]
    meta = {"title": "quartic oscillator ground-state energy: Pade and Borel-Pade vs diagonalization",
            "model": "quartic", "sweep": "k", "lambda": lam, "m": m}
    return _curves("fig2a", meta, pts, jobs)


def fig2b(k_range="0.1:10:0.1", lam="1", orders=(50, 100, 200), jobs=1) -> Dataset:
    model = ModelSpec("quartic")
    pts = [(model, "E", k, lam, [("borel-pade", m, "1") for m in orders]) for k in parse_range(k_range)]
    meta = {"title": "quartic oscillator ground-state energy: Borel-Pade convergence in m",
            "model": "quartic", "sweep": "k", "lambda": lam, "orders": list(orders)}
    return _curves("fig2b", meta, pts, jobs)


def pade_pole_rows(model: ModelSpec, quantity: str, m_max: int, positive_only: bool = False) -> list:
    """Poles of the near-diagonal Pade approximants of the Taylor series, ``m = 1..m_max``."""
    s = get_series(model, quantity, m_max).taylor()
    rows = []
    for m, p in enumerate(pade_staircase(s, m_max)):
        if m == 0:
            continue
        for pole in find_poles(p, DEFAULT_PREC).poles:
            if positive_only and not (pole.is_real and pole.location.real > 0):
                continue
            rows.append([quantity, m, fmt(pole.location.real), fmt(pole.location.imag),
                         pole.classification, format(float(abs(pole.residue)), ".3e")])
    return rows


def real_pole_counts(model: ModelSpec, quantity: str, m_max: int = 100) -> dict:
    """Number of positive real poles of each near-diagonal Pade approximant."""
    s = get_series(model, quantity, m_max).taylor()
    out = {}
    for m, p in enumerate(pade_staircase(s, m_max)):
        if m:
            out[m] = len(find_poles(p, DEFAULT_PREC).positive_real())
    return out


def fig3(m_max=100, positive_only=True) -> Dataset:
    model = ModelSpec("quartic")
    rows = []
    for q in ("g11", "g12", "g22"):
        rows += pade_pole_rows(model, q, m_max, positive_only)
    meta = {"title": "real poles (coupling plane, k = 1) of Pade approximants of the quartic metric series",
            "model": "quartic", "orders": f"1..{m_max}", "positive_real_only": positive_only}
    return Dataset("fig3", meta, POLE_COLUMNS, rows)


def fig4(m=100) -> Dataset:
    model = ModelSpec("quartic")
    rows = []
    for q in QUANTITIES:
        s = get_series(model, q, m)
        pade, poles, _ = borel_pade(s, BorelSpec(mpq(1), mpq(1), PV), m)
        for pole in poles.poles:
            rows.append([q, m, fmt(pole.location.real), fmt(pole.location.imag),
                         pole.classification, format(float(abs(pole.residue)), ".3e")])
    meta = {"title": "Borel-plane poles of the Borel-Pade transforms (quartic energy and metric)",
            "model": "quartic", "m": m, "expected_accumulation": "-1/3"}
    return Dataset("fig4", meta, POLE_COLUMNS, rows)


def fig5(k_range="0.01:0.2:0.01", lam="1", orders=(25, 50, 100), jobs=1) -> Dataset:
    model = ModelSpec("quartic")
    pts = [(model, q, k, lam, [("borel-pade", m, "1") for m in orders])
           for q in ("g11", "g12", "g22") for k in parse_range(k_range)]
    meta = {"title": "quartic ground-state metric: principal-value Borel-Pade vs diagonalization",
            "model": "quartic", "sweep": "k", "lambda": lam, "orders": list(orders)}
    return _curves("fig5", meta, pts, jobs)


def excited(k_range="0.05:1:0.05", lam="1", levels=(1, 2, 3, 4), m=50, jobs=1) -> Dataset:
    pts = [(ModelSpec("quartic", N=N), q, k, lam, [("borel-pade", m, "1")])
           for N in levels for q in ("g11", "g12", "g22") for k in parse_range(k_range)]
    meta = {"title": "quartic excited-state metric: principal-value Borel-Pade vs diagonalization",
            "model": "quartic", "levels": list(levels), "sweep": "k", "lambda": lam, "m": m}
    return _curves("excited", meta, pts, jobs)


def beta_star(quantity: str, k_ref="0.5", lam="1", m=100, grid=("0.5", "10", "0.25")):
    """``(beta*, delta, table)`` for a sextic quantity at the reference point."""
    from .pipeline import physical, reduced_coupling

    model = ModelSpec("sextic")
    s = get_series(model, quantity, m)
    exact = exact_value(model, quantity, k_ref, lam)
    with workprec(DEFAULT_PREC):
        reduced_exact = exact / physical(s, k_ref, mpfr(1))
    g = reduced_coupling(model, k_ref, lam)
    return optimal_beta(s, 2, g, reduced_exact, grid=grid, m=m)


def fig6(k_range="0.05:1:0.05", lam="1", m=100, betas: dict | None = None, extra=("0.5", "2.5"),
         k_ref="0.5", quantities=QUANTITIES, jobs=1) -> Dataset:
    """Sextic Borel-Leroy (alpha = 2) curves for ``beta*``, ``beta* +- 1`` and ``extra``.

    ``betas`` maps quantity to a precomputed ``beta*`` (rational string);
    missing entries are searched at ``(k_ref, lam)``.
    """
    model = ModelSpec("sextic")
    betas = dict(betas or {})
    pts = []
    for q in quantities:
        if q not in betas:
            betas[q] = str(beta_star(q, k_ref, lam, m)[0])
        b = Fraction(betas[q])
        cand = [b, b + 1] + ([b - 1] if b - 1 > 0 else []) + [Fraction(x) for x in extra]
        seen = []
        for c in cand:
            if c not in seen:
                seen.append(c)
        methods = [("borel-pade", m, str(c)) for c in seen]
        pts += [(model, q, k, lam, methods) for k in parse_range(k_range)]
    meta = {"title": "sextic oscillator: Borel-Leroy (alpha = 2) sums for several beta vs diagonalization",
            "model": "sextic", "sweep": "k", "lambda": lam, "m": m, "beta_star": betas,
            "beta_star_reference": {"k": k_ref, "lambda": lam}}
    return _curves("fig6", meta, pts, jobs)


def fig7(k_range="0.1:2:0.1", lam="1", dims=(3, 4, 5, 6), m=100, jobs=1) -> Dataset:
    pts = [(ModelSpec("ddim", d=d), q, k, lam, [("borel-pade", m, "1")])
           for d in dims for q in QUANTITIES for k in parse_range(k_range)]
    meta = {"title": "radial quartic oscillator in d dimensions: Borel-Pade vs diagonalization",
            "model": "ddim", "dims": list(dims), "sweep": "k", "lambda": lam, "m": m}
    return _curves("fig7", meta, pts, jobs)


def exact_sweep(model: ModelSpec, quantities, k_range, lam="1", jobs=1) -> Dataset:
    """Diagonalization-only curves (the reference lines of every figure)."""
    tasks, keys = [], []
    for q in quantities:
        for k in parse_range(k_range):
            tasks.append((model.name, model.N, model.d, q, k, lam, "exact", 0, ""))
            keys.append((q, k))
    values = _run(tasks, jobs)
    d = model.d if model.name == "ddim" else ""
    rows = [[q, model.N, d, k, lam, "exact", "", "", v, ""] for (q, k), v in zip(keys, values)]
    meta = {"title": f"diagonalization reference values for {model.label()}", "model": model.name,
            "sweep": "k", "lambda": lam}
    return Dataset("sweep", meta, CURVE_COLUMNS, rows)


def build(figure: str, options: dict | None = None, jobs: int = 1) -> Dataset:
    """Dispatch on a figure id with keyword ``options`` (strings allowed)."""
    options = dict(options or {})
    table = {"fig2a": fig2a, "fig2b": fig2b, "fig3": fig3, "fig4": fig4, "fig5": fig5,
             "excited": excited, "fig6": fig6, "fig7": fig7}
    if figure not in table:
        raise ValueError(f"unknown figure id {figure!r}; choose from {FIGURES}")
    fn = table[figure]
    if figure not in ("fig3", "fig4"):
        options["jobs"] = jobs
    return fn(**options)
