"""d-dimensional isotropic quartic oscillator, ``l = 0`` sector.

Radial basis at ``k = omega = 1``: ``|j) = exp(-x/2) L_j^(alpha)(x)`` with
``x = r^2`` and ``alpha = d/2 - 1``.  Relative to ``(0|0)`` the norms are
``(alpha+1)_j / j!``, so everything stays rational for integer ``d``.

Useful identities (three-term Laguerre recurrences)::

    x |j)        = -(j+1)|j+1) + (2j+alpha+1)|j) - (j+alpha)|j-1)
    D |j)        = [(j+1)|j+1) - (j+alpha)|j-1)] / 4

with ``D = d/8 + r d_r / 4`` the dilatation generator.  The perturbation is
``r^4 = x^2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from gmpy2 import mpq

from .perturb1d import QmtSeries, _qmt_from_taylor, qmt_prefactor_powers
from .rspt import BandedOperator, LadderBasis, StateSeries, qmt_taylor, solve_rspt
from .series import PowerSeries

VARIABLE = "-lambda/k^(3/2)"


@dataclass(frozen=True)
class RadialModel:
    d: int
    N: int = 0
    l: int = 0

    def __post_init__(self):
        if self.l != 0:
            raise ValueError("only the l = 0 channel is implemented")
        if self.d < 1:
            raise ValueError("dimension must be >= 1")
        if self.N < 0:
            raise ValueError("radial quantum number must be non-negative")

    @property
    def alpha(self):
        return mpq(self.d, 2) - 1


def _x_column(j: int, alpha) -> dict:
    out = {j + 1: mpq(-(j + 1)), j: 2 * j + alpha + 1}
    if j >= 1:
        out[j - 1] = -(j + alpha)
    return out


def _apply_x(v: dict, alpha) -> dict:
    w: dict = {}
    for j, c in v.items():
        for jj, e in _x_column(j, alpha).items():
            w[jj] = w.get(jj, 0) + e * c
    return w


def _rpower_column(j: int, power: int, alpha) -> dict:
    if power % 2:
        raise ValueError("only even powers of r are polynomial in x = r^2")
    v = {j: mpq(1)}
    for _ in range(power // 2):
        v = _apply_x(v, alpha)
    return v


def radial_norms(d: int, size: int) -> list:
    """``(j|j)/(0|0) = (alpha+1)_j / j!``."""
    alpha = mpq(d, 2) - 1
    out = [mpq(1)]
    for j in range(1, size):
        out.append(out[-1] * (alpha + j) / j)
    return out


def radial_matrix_element(d: int, power: int, i: int, j: int):
    """Coefficient of ``|i)`` in ``r^power |j)`` (``omega = 1``).

    Equals ``(i|r^power|j)/(i|i)``; on the diagonal it is the normalized
    expectation value.
    """
    if power not in (2, 4):
        raise ValueError("power must be 2 or 4")
    if i < 0 or j < 0:
        raise ValueError("basis indices must be non-negative")
    if abs(i - j) > power // 2:
        return mpq(0)
    return mpq(_rpower_column(j, power, mpq(d, 2) - 1).get(i, 0))


def _basis(model: RadialModel, order: int) -> LadderBasis:
    alpha = model.alpha
    size = model.N + 2 * (order + 2) + 3
    labels = tuple(range(size))

    def v_column(j):
        return {jj - j: c for jj, c in _rpower_column(j, 4, alpha).items()}

    def d_column(j):
        out = {1: mpq(j + 1, 4)}
        if j >= 1:
            out[-1] = -(j + alpha) / 4
        return out

    energies = np.array([2 * mpq(j) + mpq(model.d, 2) for j in labels], dtype=object)
    norms = np.array(radial_norms(model.d, size), dtype=object)
    return LadderBasis(
        labels=labels,
        energies=energies,
        norms=norms,
        target=model.N,
        perturbation=BandedOperator(size, v_column),
        dilatation=BandedOperator(size, d_column),
        scaling=mpq(3, 2),
        band=2,
    )


@lru_cache(maxsize=32)
def radial_state_series(model: RadialModel, m: int) -> StateSeries:
    if m < 0:
        raise ValueError("order must be non-negative")
    return solve_rspt(_basis(model, m + 1), m)


def energy_series_d(model: RadialModel, m: int) -> PowerSeries:
    states = radial_state_series(model, m)
    coeffs = [states.energies[0]] + [(-1) ** (n + 1) * states.energies[n] for n in range(1, m + 1)]
    return PowerSeries(
        coeffs,
        variable=VARIABLE,
        coupling_sign=-1,
        tail_sign=-1,
        prefactor=(mpq(1, 2), mpq(1)),
        meta={"quantity": "E", "model": "ddim", "d": model.d, "N": model.N},
    )


@lru_cache(maxsize=32)
def qmt_series_d(model: RadialModel, m: int) -> QmtSeries:
    if m < 1:
        raise ValueError("qmt_series_d needs m >= 1")
    taylor = qmt_taylor(radial_state_series(model, m + 1), m)
    return _qmt_from_taylor(taylor, VARIABLE, qmt_prefactor_powers(2), {"model": "ddim", "d": model.d, "N": model.N})
