"""Perturbative series for ``H = p^2/2 + k q^2/2 + lambda q^(2K)``, K = 2 or 3.

Everything is computed at ``k = 1`` in the unnormalized ladder basis
``|j) = (a^dag)^j |0>`` with ``(j|j) = j!``; ``q = (a + a^dag)/sqrt(2)``.
The ``k`` dependence is restored from the exact scaling
``Psi_{k,lambda}(q) = k^(1/8) Psi_{1,g}(k^(1/4) q)``, ``g = lambda k^(-(K+1)/2)``.

Stored coefficients follow the tabulated conventions::

    E      = sqrt(k) [a_0 + sum_{n>=1} (-1)^(n+1) a_n g^n]
    g_11   = k^-2          sum_n c11_n (-g)^n
    g_12   = k^-(K+3)/2    sum_n c12_n (-g)^n
    g_22   = k^-(K+1)      sum_n c22_n (-g)^n
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from gmpy2 import fac, mpq

from .rspt import BandedOperator, LadderBasis, StateSeries, apply_dilatation, qmt_taylor, solve_rspt
from .series import PowerSeries

MODELS = {2: "quartic", 3: "sextic"}


@dataclass(frozen=True)
class OscillatorModel:
    K: int
    N: int = 0

    def __post_init__(self):
        if self.K not in (2, 3):
            raise ValueError(f"K must be 2 (quartic) or 3 (sextic), got {self.K}")
        if self.N < 0:
            raise ValueError("state index must be non-negative")

    @property
    def name(self) -> str:
        return MODELS[self.K]

    @property
    def variable(self) -> str:
        return "-lambda/k^(3/2)" if self.K == 2 else "-lambda/k^2"


@dataclass(frozen=True)
class QmtSeries:
    """The three independent metric components as power series."""

    c11: PowerSeries
    c12: PowerSeries
    c22: PowerSeries

    def __getitem__(self, key: str) -> PowerSeries:
        key = str(key)
        if key == "21":
            key = "12"
        return {"11": self.c11, "12": self.c12, "22": self.c22}[key]

    def items(self):
        return (("11", self.c11), ("12", self.c12), ("22", self.c22))


def _ladder_column(j: int, power: int) -> dict:
    """``(a + a^dag)^power |j)`` as ``{j': integer coefficient}``."""
    v = {j: 1}
    for _ in range(power):
        w: dict = {}
        for jj, c in v.items():
            if jj > 0:
                w[jj - 1] = w.get(jj - 1, 0) + jj * c
            w[jj + 1] = w.get(jj + 1, 0) + c
        v = w
    return v


def perturb_matrix_element(K: int, i: int, j: int):
    """``(i| q^(2K) |j) / (i|i)``: the coefficient of ``|i)`` in ``q^(2K)|j)``.

    For ``i == j`` this is the normalized expectation value.
    """
    if i < 0 or j < 0:
        raise ValueError("basis indices must be non-negative")
    if abs(i - j) > 2 * K or (i - j) % 2:
        return mpq(0)
    return mpq(_ladder_column(j, 2 * K).get(i, 0), 2**K)


def _basis(model: OscillatorModel, order: int) -> LadderBasis:
    K, N = model.K, model.N
    parity = N % 2
    target = N // 2
    size = target + K * (order + 2) + 3
    labels = tuple(parity + 2 * i for i in range(size))

    def v_column(i):
        j = labels[i]
        return {(jj - j) // 2: mpq(c, 2**K) for jj, c in _ladder_column(j, 2 * K).items()}

    def d_column(i):
        # (a^2 - a^dag^2)/8
        j = labels[i]
        out = {1: mpq(-1, 8)}
        if j >= 2:
            out[-1] = mpq(j * (j - 1), 8)
        return out

    energies = np.array([mpq(j) + mpq(1, 2) for j in labels], dtype=object)
    norms = np.array([mpq(fac(j)) for j in labels], dtype=object)
    return LadderBasis(
        labels=labels,
        energies=energies,
        norms=norms,
        target=target,
        perturbation=BandedOperator(size, v_column),
        dilatation=BandedOperator(size, d_column),
        scaling=mpq(K + 1, 2),
        band=K,
    )


@lru_cache(maxsize=32)
def state_series(model: OscillatorModel, m: int) -> StateSeries:
    """RSPT corrections of state ``N`` through order ``m`` (intermediate normalization)."""
    if m < 0:
        raise ValueError("order must be non-negative")
    return solve_rspt(_basis(model, m + 1), m)


def dilatation_apply(states: StateSeries) -> StateSeries:
    """Apply ``(a^2 - a^dag^2)/8`` to every order."""
    return apply_dilatation(states)


def energy_series(model: OscillatorModel, m: int) -> PowerSeries:
    states = state_series(model, m)
    coeffs = [states.energies[0]] + [(-1) ** (n + 1) * states.energies[n] for n in range(1, m + 1)]
    return PowerSeries(
        coeffs,
        variable=model.variable,
        coupling_sign=-1,
        tail_sign=-1,
        prefactor=(mpq(1, 2), mpq(1)),
        meta={"quantity": "E", "model": model.name, "N": model.N},
    )


def qmt_prefactor_powers(K: int) -> dict:
    """Powers of ``k`` in front of each metric component."""
    return {"11": mpq(-2), "12": mpq(-(K + 3), 2), "22": mpq(-(K + 1))}


def _qmt_from_taylor(taylor: dict, variable: str, powers: dict, meta: dict) -> QmtSeries:
    comps = {}
    for key, t in taylor.items():
        comps[key] = PowerSeries(
            [(-1) ** n * c for n, c in enumerate(t)],
            variable=variable,
            coupling_sign=-1,
            prefactor=(powers[key], mpq(1)),
            meta={**meta, "quantity": f"g{key}"},
        )
    return QmtSeries(comps["11"], comps["12"], comps["22"])


@lru_cache(maxsize=32)
def qmt_series(model: OscillatorModel, m: int) -> QmtSeries:
    """Exact QMT coefficients ``c_ij^(N;n)`` for ``n = 0..m``."""
    if m < 1:
        raise ValueError("qmt_series needs m >= 1")
    taylor = qmt_taylor(state_series(model, m + 1), m)
    return _qmt_from_taylor(
        taylor, model.variable, qmt_prefactor_powers(model.K), {"model": model.name, "N": model.N}
    )


def qmt_from_states(states: StateSeries, m: int, K: int) -> QmtSeries:
    """QMT series from arbitrary (not necessarily normalized) state corrections."""
    model = OscillatorModel(K)
    return _qmt_from_taylor(qmt_taylor(states, m), model.variable, qmt_prefactor_powers(K), {})
