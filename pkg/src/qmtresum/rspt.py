"""Exact Rayleigh-Schroedinger recursion in an orthogonal, unnormalized basis.

The engine is model agnostic.  A :class:`LadderBasis` supplies

* rational zeroth-order energies ``eps_i`` (at ``k = 1``),
* rational norms ``(i|i)`` of the basis vectors,
* the perturbation ``V`` and the dilatation generator ``D`` as banded
  operators acting on coefficient vectors (``V|j) = sum_i M_ij |i)``).

Vectors are numpy object arrays of ``mpq`` over a compressed index ``i``
(the 1D engine drops the odd-parity half of the ladder).  Every quantity stays
an exact rational: RSPT divides only by energy differences, and inner
products only involve the rational norms.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from gmpy2 import mpq

from .series import convolve


def zeros(n: int) -> np.ndarray:
    out = np.empty(n, dtype=object)
    out[:] = [mpq(0)] * n
    return out


class BandedOperator:
    """Banded linear map stored as ``offset -> coefficient`` arrays.

    ``bands[s][i]`` is the coefficient carrying component ``i`` to ``i + s``.
    Components pushed outside ``[0, size)`` are dropped; callers size the
    basis so that this never touches tracked orders.
    """

    def __init__(self, size: int, column: Callable[[int], dict]):
        self.size = size
        bands: dict[int, np.ndarray] = {}
        for i in range(size):
            for s, c in column(i).items():
                if c == 0:
                    continue
                if s not in bands:
                    bands[s] = zeros(size)
                bands[s][i] = mpq(c)
        self.bands = dict(sorted(bands.items()))

    @property
    def reach(self) -> int:
        return max((abs(s) for s in self.bands), default=0)

    def element(self, i: int, j: int):
        """Coefficient of basis vector ``i`` in ``op |j)``."""
        band = self.bands.get(i - j)
        if band is None or not 0 <= j < self.size:
            return mpq(0)
        return band[j]

    def apply(self, v: np.ndarray) -> np.ndarray:
        n = self.size
        out = zeros(n)
        for s, c in self.bands.items():
            if s >= 0:
                out[s:] += c[: n - s] * v[: n - s]
            else:
                out[:s] += c[-s:] * v[-s:]
        return out


@dataclass(frozen=True)
class LadderBasis:
    """Zeroth-order data for one (model, state) pair at ``k = 1``."""

    labels: tuple            # physical quantum number for each compressed index
    energies: np.ndarray     # eps_i
    norms: np.ndarray        # (i|i)
    target: int              # compressed index of the unperturbed state
    perturbation: BandedOperator
    dilatation: BandedOperator
    scaling: object          # (K+1)/2 in d_k = D - scaling * g d_g
    band: int                # compressed reach of one application of V

    @property
    def size(self) -> int:
        return len(self.labels)


@dataclass(frozen=True)
class StateSeries:
    """Order-by-order corrections ``psi_n`` of ``psi(g) = sum_n psi_n g^n``."""

    basis: LadderBasis
    orders: tuple
    energies: tuple          # Taylor coefficients E_n in g
    normalization: str = "intermediate"

    @property
    def m(self) -> int:
        return len(self.orders) - 1

    def support(self, n: int) -> list:
        """Physical labels carrying a nonzero amplitude at order ``n``."""
        v = self.orders[n]
        return [self.basis.labels[i] for i in range(len(v)) if v[i] != 0]

    def amplitude(self, n: int, label: int):
        try:
            i = self.basis.labels.index(label)
        except ValueError:
            return mpq(0)
        return self.orders[n][i]

    def scaled(self, factor) -> "StateSeries":
        """Same states times a common rational (gauge transformation)."""
        return StateSeries(self.basis, tuple(v * factor for v in self.orders), self.energies, "scaled")


def solve_rspt(basis: LadderBasis, m: int) -> StateSeries:
    """Intermediate-normalized RSPT corrections ``psi_0 .. psi_m``.

    ``(H0 - E0) psi_n = -V psi_{n-1} + sum_{k=1}^n E_k psi_{n-k}``, with
    ``E_n = (V psi_{n-1})_target`` because ``<N|psi_n> = 0`` for ``n >= 1``.
    """
    size, t = basis.size, basis.target
    gaps = basis.energies - basis.energies[t]
    gaps[t] = mpq(1)
    psi0 = zeros(size)
    psi0[t] = mpq(1)
    orders = [psi0]
    energies = [basis.energies[t]]
    for n in range(1, m + 1):
        vpsi = basis.perturbation.apply(orders[-1])
        e_n = vpsi[t]
        energies.append(e_n)
        rhs = -vpsi
        for k in range(1, n + 1):
            if energies[k] != 0:
                rhs += energies[k] * orders[n - k]
        new = rhs / gaps
        new[t] = mpq(0)
        orders.append(new)
    return StateSeries(basis, tuple(orders), tuple(energies))


def energy_from_states(states: StateSeries) -> list:
    """Recompute ``E_n = <N|V|psi_{n-1}>/<N|N>`` from stored corrections."""
    b = states.basis
    out = [b.energies[b.target]]
    for n in range(1, states.m + 1):
        out.append(b.perturbation.apply(states.orders[n - 1])[b.target])
    return out


def apply_dilatation(states: StateSeries) -> StateSeries:
    d = states.basis.dilatation
    return StateSeries(states.basis, tuple(d.apply(v) for v in states.orders), states.energies, "dilated")


def _gram(xs, ys, weights, nmax):
    """``W[a, b] = <x_a | y_b>`` for ``a + b <= nmax``."""
    out = {}
    for a, x in enumerate(xs):
        wx = x * weights
        for b in range(min(len(ys), nmax - a + 1)):
            out[a, b] = np.dot(wx, ys[b])
    return out


def qmt_taylor(states: StateSeries, m: int) -> dict:
    """Taylor coefficients in ``g`` of ``(g_kk, g_kg, g_gg)`` at ``k = 1``.

    With ``psi`` not normalized, the metric is the Fubini-Study form
    ``g_ij = <d_i psi|d_j psi>/<psi|psi> - <d_i psi|psi><psi|d_j psi>/<psi|psi>^2``,
    where ``d_g psi = sum_n (n+1) psi_{n+1} g^n`` and
    ``d_k psi = sum_n (D psi_n - scaling * n * psi_n) g^n``.
    Needs ``states.m >= m + 1``.
    """
    if states.m < m + 1:
        raise ValueError(f"need state corrections through order {m + 1}, have {states.m}")
    b = states.basis
    c = mpq(b.scaling)
    psi = states.orders[: m + 2]
    dpsi = [b.dilatation.apply(v) for v in psi]
    w = b.norms
    top = m + 2
    w0 = _gram(psi, psi, w, top)
    w1 = _gram(psi, dpsi, w, top)
    w2 = _gram(dpsi, dpsi, w, top)

    def collect(term):
        return [sum((term(a, n - a) for a in range(n + 1)), mpq(0)) for n in range(m + 1)]

    norm = collect(lambda a, q: w0[a, q])
    b_k = collect(lambda a, q: w1[a, q] - c * q * w0[a, q])
    b_g = collect(lambda a, q: (q + 1) * w0[a, q + 1])
    a_kk = collect(lambda a, q: w2[a, q] - c * q * w1[q, a] - c * a * w1[a, q] + c * c * a * q * w0[a, q])
    a_kg = collect(lambda a, q: (q + 1) * (w1[q + 1, a] - c * a * w0[a, q + 1]))
    a_gg = collect(lambda a, q: (a + 1) * (q + 1) * w0[a + 1, q + 1])

    def div(num, den):
        out = []
        for n in range(m + 1):
            acc = num[n]
            for i in range(n):
                acc -= out[i] * den[n - i]
            out.append(acc / den[0])
        return out

    norm2 = convolve(norm, norm, m)
    result = {}
    for key, (a_ij, bi, bj) in {"11": (a_kk, b_k, b_k), "12": (a_kg, b_k, b_g), "22": (a_gg, b_g, b_g)}.items():
        first = div(a_ij, norm)
        second = div(convolve(bi, bj, m), norm2)
        result[key] = [first[n] - second[n] for n in range(m + 1)]
    return result
