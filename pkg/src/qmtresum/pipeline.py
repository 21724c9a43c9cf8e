"""Model/quantity bookkeeping shared by the figures and the command line.

A quantity ``Q`` of the oscillator ``p^2/2 + k x^2/2 + lambda x^(2K)`` is
``Q(k, lambda) = c k^p F(g)`` with the reduced coupling
``g = lambda / k^((K+1)/2)`` (``K = 2`` for the radial quartic), where
``F`` is the perturbative series in ``g`` and ``(p, c)`` is the series'
``prefactor``.  This module turns series into physical values and pairs
them with the diagonalization oracle.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import gmpy2
from gmpy2 import mpfr, mpq

from . import oracle
from .perturb1d import OscillatorModel, energy_series, qmt_series
from .radial import RadialModel, energy_series_d, qmt_series_d
from .resum import PV, BorelSpec, resum_leroy
from .series import DEFAULT_PREC, PowerSeries, workprec

MODELS = ("quartic", "sextic", "ddim")
QUANTITIES = ("E", "g11", "g12", "g22")


@dataclass(frozen=True)
class ModelSpec:
    """``name`` in :data:`MODELS`, level ``N`` and dimension ``d`` (radial only)."""

    name: str
    N: int = 0
    d: int = 3

    def __post_init__(self):
        if self.name not in MODELS:
            raise ValueError(f"unknown model {self.name!r}; choose from {MODELS}")
        if self.name == "ddim" and self.N != 0:
            raise ValueError("the radial model supports the ground state only")

    @property
    def K(self) -> int:
        return 3 if self.name == "sextic" else 2

    @property
    def gevrey(self) -> int:
        """Expected Gevrey order of the coefficients (``K - 1``)."""
        return self.K - 1

    def label(self) -> str:
        if self.name == "ddim":
            return f"ddim(d={self.d})"
        return f"{self.name}(N={self.N})"


@lru_cache(maxsize=64)
def get_series(model: ModelSpec, quantity: str, m: int) -> PowerSeries:
    """Exact series of ``quantity`` (``E``, ``g11``, ``g12``, ``g22``) to order ``m``."""
    if quantity not in QUANTITIES:
        raise ValueError(f"unknown quantity {quantity!r}; choose from {QUANTITIES}")
    if model.name == "ddim":
        rm = RadialModel(model.d, 0)
        if quantity == "E":
            return energy_series_d(rm, m)
        return qmt_series_d(rm, m)[quantity[1:]]
    om = OscillatorModel(model.K, model.N)
    if quantity == "E":
        return energy_series(om, m)
    return qmt_series(om, m)[quantity[1:]]


def reduced_coupling(model: ModelSpec, k, lam, prec: int = DEFAULT_PREC):
    """``g = lambda / k^((K+1)/2)``."""
    with workprec(prec):
        return mpfr(lam) / mpfr(k) ** (mpfr(model.K + 1) / 2)


def physical(s: PowerSeries, k, value, prec: int = DEFAULT_PREC):
    """Attach the ``c k^p`` prefactor of ``s`` to a value of its reduced sum."""
    power, const = s.prefactor
    with workprec(prec):
        return mpfr(const) * mpfr(k) ** mpfr(power) * value


def default_spec(model: ModelSpec, beta=None, prescription: str = PV) -> BorelSpec:
    """Ordinary Borel (``alpha = beta = 1``) for quartic models, ``alpha = 2`` otherwise."""
    alpha = model.gevrey
    if beta is None:
        beta = mpq(1)
    return BorelSpec(mpq(alpha), beta, prescription)


def resum_value(model: ModelSpec, quantity: str, k, lam, m: int, spec: BorelSpec | None = None,
                tol=mpfr("1e-30"), prec: int = DEFAULT_PREC):
    """Borel-Pade value of ``quantity`` at ``(k, lambda)``; returns ``(value, ResumResult)``."""
    s = get_series(model, quantity, m)
    spec = spec or default_spec(model)
    g = reduced_coupling(model, k, lam, prec)
    if g == 0:
        base = s.taylor().coeffs[0]
        return physical(s, k, mpfr(base), prec), None
    res = resum_leroy(s, g, spec, m=m, tol=tol, prec=prec)
    val = res.value.real if isinstance(res.value, gmpy2.mpc) else res.value
    return physical(s, k, val, prec), res


def pade_value(model: ModelSpec, quantity: str, k, lam, m: int, prec: int = DEFAULT_PREC):
    """Plain near-diagonal Pade approximant of the series, evaluated at ``g``."""
    from .pade import auto_pade, evaluate

    s = get_series(model, quantity, m)
    p = auto_pade(s.taylor(), prec)
    g = reduced_coupling(model, k, lam, prec)
    return physical(s, k, evaluate(p, g, prec), prec)


def problem(model: ModelSpec, k, lam, basis_size: int = 200, omega=None) -> oracle.SpectralProblem:
    return oracle.SpectralProblem(model.name, float(k), float(lam), basis_size=basis_size,
                                  d=model.d, omega=omega)


@lru_cache(maxsize=512)
def _exact_all(model: ModelSpec, k: float, lam: float, prec: int, target: float):
    ref = oracle.reference(problem(model, k, lam, basis_size=40), model.N, prec=prec, target=target)
    g11, g12, g22 = ref.metric
    return {"E": ref.energy, "g11": g11, "g12": g12, "g22": g22}


def exact_value(model: ModelSpec, quantity: str, k, lam, prec: int = 160, target: float = 1e-30):
    """High-precision diagonalization value (self-converged in the basis size)."""
    return _exact_all(model, float(k), float(lam), prec, target)[quantity]


def float_exact(model: ModelSpec, quantity: str, k, lam, basis_size: int = 200) -> float:
    """Float64 diagonalization at a fixed basis size (``sqrt(k)`` frequency)."""
    p = problem(model, k, lam, basis_size)
    if quantity == "E":
        return float(oracle.eigensolve(oracle.build_hamiltonian(p), count=model.N + 2,
                                       check_half=False).values[model.N])
    g = oracle.qmt_numeric(p, model.N)
    i, j = int(quantity[1]) - 1, int(quantity[2]) - 1
    return float(g[i, j])
