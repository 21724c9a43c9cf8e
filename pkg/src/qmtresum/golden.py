"""Published exact coefficient tables and their comparison with computed series.

The bundled ``data/appendix.json`` holds the tabulated rationals as strings:

* ``quartic.a``: ground-state energy coefficients ``a_0 .. a_5``;
* ``sextic.{a, c11, c12, c22}``: sextic ground state, ``n = 0..10``;
* ``ddim.<d>.{a, c11, c12, c22}``: radial quartic, ``d = 3..6``, ``n = 0..10``.

Comparison is string equality of the canonical ``p/q`` form.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from .pipeline import ModelSpec, get_series
from .series import format_rational

_QUANTITY = {"a": "E", "c11": "g11", "c12": "g12", "c22": "g22"}


@lru_cache(maxsize=1)
def load_tables(path: str | None = None) -> dict:
    if path is None:
        text = resources.files("qmtresum").joinpath("data/appendix.json").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    return json.loads(text)


@dataclass(frozen=True)
class Mismatch:
    table: str
    column: str
    n: int
    expected: str
    computed: str

    def __str__(self):
        return f"{self.table}/{self.column}[{self.n}]: expected {self.expected}, computed {self.computed}"


def _compare(label: str, model: ModelSpec, columns: dict) -> tuple:
    checked, bad = 0, []
    for col, expected in columns.items():
        m = len(expected) - 1
        s = get_series(model, _QUANTITY[col], max(m, 1))
        for n, want in enumerate(expected):
            got = format_rational(s.coeffs[n])
            checked += 1
            if got != want:
                bad.append(Mismatch(label, col, n, want, got))
    return checked, bad


def table_names(tables: dict | None = None) -> list:
    tables = tables or load_tables()
    names = []
    for key, val in tables.items():
        if key == "ddim":
            names += [f"ddim{d}" for d in sorted(val, key=int)]
        else:
            names.append(key)
    return names


def verify_tables(only: str | None = None, tables: dict | None = None) -> dict:
    """Compare every table (or those whose name starts with ``only``).

    Returns ``{name: (entries_checked, [Mismatch, ...])}``.
    """
    tables = tables or load_tables()
    out = {}
    for name in table_names(tables):
        if only and not name.startswith(only):
            continue
        if name.startswith("ddim"):
            d = name[4:]
            out[name] = _compare(name, ModelSpec("ddim", d=int(d)), tables["ddim"][d])
        else:
            out[name] = _compare(name, ModelSpec(name), tables[name])
    return out
