"""Truncated power series over exact rationals or big floats.

Two scalar kinds are used throughout the package:

* exact rationals, ``gmpy2.mpq`` (always in lowest terms, positive
  denominator -- GMP maintains this canonical form);
* big floats, ``gmpy2.mpfr`` with at least :data:`DEFAULT_PREC` bits.

The kind of a value is simply its type, see :func:`kind_of`.  Perturbative
coefficients are always rational; floats only appear once a series is divided
by non-rational Gamma values or evaluated numerically.
"""

from __future__ import annotations

import contextlib
import json
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Sequence

import gmpy2
from gmpy2 import mpfr, mpq, mpz

from .errors import ConventionError, DegenerateInputError

DEFAULT_PREC = 256

RATIONAL = "rational"
BIGFLOAT = "bigfloat"


@contextlib.contextmanager
def workprec(bits: int):
    """Temporarily set the gmpy2 working precision (thread-local)."""
    with gmpy2.context(gmpy2.get_context(), precision=int(bits)) as ctx:
        yield ctx


def kind_of(x) -> str:
    if isinstance(x, (mpq, mpz, int, Fraction)):
        return RATIONAL
    if isinstance(x, (mpfr, float)):
        return BIGFLOAT
    raise TypeError(f"unsupported scalar type {type(x).__name__}")


def to_rational(x):
    """Convert an int/Fraction/str/mpq to ``mpq``.

    Big floats are converted exactly (they are dyadic rationals), so the
    result carries the rounding already present in ``x``.
    """
    if isinstance(x, mpq):
        return x
    if isinstance(x, str):
        return parse_rational(x)
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    return mpq(x)


def to_bigfloat(x, prec: int = DEFAULT_PREC):
    with workprec(prec):
        if isinstance(x, Fraction):
            return mpfr(mpq(x.numerator, x.denominator))
        return mpfr(x)


def format_rational(x) -> str:
    """Canonical ``p/q`` string; integers print without a denominator."""
    x = to_rational(x)
    return str(x)


def format_float(x, digits: int = 30) -> str:
    """Scientific notation ``d.ddd...e+XX`` with ``digits`` digits after the point."""
    if not isinstance(x, mpfr):
        # enough bits for the requested digits; mpfr(x) alone rounds to 53
        x = mpfr(x, max(64, int(3.33 * digits) + 16))
    if gmpy2.is_nan(x):
        return "nan"
    if gmpy2.is_infinite(x):
        return "inf" if x > 0 else "-inf"
    if x == 0:
        return "0." + "0" * digits + "e+00"
    mant, exp, _ = x.digits(10, digits + 1)
    sign = "-" if mant.startswith("-") else ""
    mant = mant.lstrip("-")
    return f"{sign}{mant[0]}.{mant[1:]}e{exp - 1:+03d}"


def parse_rational(text: str):
    text = text.strip()
    if "/" in text:
        p, q = text.split("/")
        return mpq(int(p), int(q))
    return mpq(int(text))


@dataclass(frozen=True)
class PowerSeries:
    """Truncated series ``sum_{n=0}^m coeffs[n] x^n``.

    Parameters
    ----------
    coeffs
        Coefficients ``c_0 .. c_m`` (``mpq`` or ``mpfr``).
    variable
        Human-readable descriptor of the expansion variable, e.g.
        ``"-lambda/k^(3/2)"``.  Arithmetic requires equal descriptors.
    coupling_sign
        ``-1`` when the expansion variable is minus the physical coupling
        (the tabulated convention of the oscillator series), else ``+1``.
    tail_sign
        Extra sign multiplying every term with ``n >= 1``.  The energy
        tables use ``E = a_0 - sum_{n>=1} a_n x^n`` in ``x = -g``, i.e.
        ``tail_sign = -1``.
    prefactor
        ``(power of k, constant)`` factored out in front of the sum.
    """

    coeffs: tuple
    variable: str = "x"
    coupling_sign: int = 1
    tail_sign: int = 1
    prefactor: tuple = (mpq(0), mpq(1))
    meta: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(self.coeffs))
        if not self.coeffs:
            raise DegenerateInputError("a series needs at least one coefficient")

    @property
    def m(self) -> int:
        return len(self.coeffs) - 1

    @property
    def kind(self) -> str:
        return RATIONAL if all(kind_of(c) == RATIONAL for c in self.coeffs) else BIGFLOAT

    def __len__(self):
        return len(self.coeffs)

    def __getitem__(self, n):
        return self.coeffs[n]

    def _like(self, coeffs, **changes) -> "PowerSeries":
        return replace(self, coeffs=tuple(coeffs), meta=dict(self.meta), **changes)

    def truncate(self, m: int) -> "PowerSeries":
        if m < 0 or m > self.m:
            raise DegenerateInputError(f"cannot truncate order {self.m} series at {m}")
        return self._like(self.coeffs[: m + 1])

    def taylor(self) -> "PowerSeries":
        """Plain Taylor coefficients in the (positive) physical coupling."""
        out = []
        for n, c in enumerate(self.coeffs):
            sign = self.coupling_sign**n * (self.tail_sign if n else 1)
            out.append(c if sign > 0 else -c)
        name = self.variable[1:] if self.coupling_sign < 0 and self.variable.startswith("-") else self.variable
        return self._like(out, variable=name, coupling_sign=1, tail_sign=1)

    def __neg__(self):
        return self._like([-c for c in self.coeffs])

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return add(self, -other)

    def __mul__(self, other):
        if isinstance(other, PowerSeries):
            return multiply(self, other)
        return self._like([c * other for c in self.coeffs])

    __rmul__ = __mul__

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    def to_dict(self) -> dict:
        if self.kind == RATIONAL:
            coeffs = [format_rational(c) for c in self.coeffs]
        else:
            coeffs = [format_float(c, 60) for c in self.coeffs]
        return {
            "kind": self.kind,
            "variable": self.variable,
            "coupling_sign": self.coupling_sign,
            "tail_sign": self.tail_sign,
            "prefactor": [format_rational(self.prefactor[0]), format_rational(self.prefactor[1])],
            "order": self.m,
            "coeffs": coeffs,
            **({"meta": self.meta} if self.meta else {}),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PowerSeries":
        if data.get("kind", RATIONAL) == RATIONAL:
            coeffs = [parse_rational(c) for c in data["coeffs"]]
        else:
            with workprec(max(DEFAULT_PREC, 200)):
                coeffs = [mpfr(c) for c in data["coeffs"]]
        pref = data.get("prefactor", ["0", "1"])
        return cls(
            coeffs,
            variable=data.get("variable", "x"),
            coupling_sign=int(data.get("coupling_sign", 1)),
            tail_sign=int(data.get("tail_sign", 1)),
            prefactor=(parse_rational(pref[0]), parse_rational(pref[1])),
            meta=dict(data.get("meta", {})),
        )


def series(coeffs: Iterable, **kw) -> PowerSeries:
    """Build a rational series from ints, Fractions or ``"p/q"`` strings."""
    return PowerSeries(tuple(to_rational(c) if not isinstance(c, mpfr) else c for c in coeffs), **kw)


def _check_compatible(s1: PowerSeries, s2: PowerSeries):
    if (s1.variable, s1.coupling_sign, s1.tail_sign) != (s2.variable, s2.coupling_sign, s2.tail_sign):
        raise ConventionError(
            f"series conventions differ: {s1.variable!r}/{s1.coupling_sign}/{s1.tail_sign} "
            f"vs {s2.variable!r}/{s2.coupling_sign}/{s2.tail_sign}"
        )


def add(s1: PowerSeries, s2: PowerSeries) -> PowerSeries:
    _check_compatible(s1, s2)
    m = min(s1.m, s2.m)
    return s1._like([s1[n] + s2[n] for n in range(m + 1)])


def multiply(s1: PowerSeries, s2: PowerSeries) -> PowerSeries:
    """Cauchy product truncated at ``min(m1, m2)``."""
    _check_compatible(s1, s2)
    if s1.tail_sign != 1:
        raise ConventionError("products are only defined for plain (tail_sign=+1) series")
    m = min(s1.m, s2.m)
    a, b = s1.coeffs, s2.coeffs
    out = []
    for n in range(m + 1):
        acc = a[0] * b[n]
        for i in range(1, n + 1):
            acc += a[i] * b[n - i]
        out.append(acc)
    return s1._like(out)


def divide(s1: PowerSeries, s2: PowerSeries) -> PowerSeries:
    """Series quotient ``s1 / s2``; requires ``s2[0] != 0``."""
    _check_compatible(s1, s2)
    if s2[0] == 0:
        raise DegenerateInputError("series division needs a nonzero constant term")
    m = min(s1.m, s2.m)
    a, b = s1.coeffs, s2.coeffs
    q = []
    for n in range(m + 1):
        acc = a[n]
        for i in range(n):
            acc -= q[i] * b[n - i]
        q.append(acc / b[0])
    return s1._like(q)


def differentiate(s: PowerSeries) -> PowerSeries:
    if s.m < 1:
        raise DegenerateInputError("differentiation needs m >= 1")
    return s._like([(n + 1) * s[n + 1] for n in range(s.m)])


def integrate(s: PowerSeries) -> PowerSeries:
    """Formal antiderivative with zero constant term (order grows by one)."""
    zero = s[0] * 0
    return s._like([zero] + [s[n] / (n + 1) for n in range(s.m + 1)])


def evaluate(s: PowerSeries, x):
    """Full sum of the stored coefficients at ``x`` (Horner)."""
    acc = s[s.m] * 0
    for c in reversed(s.coeffs):
        acc = acc * x + c
    return acc


def partial_sums(s: PowerSeries, x) -> list:
    """``S_j = sum_{n<=j} c_n x^n`` for ``j = 0..m``."""
    out = []
    acc = s[0] * 0
    xn = x * 0 + 1
    for c in s.coeffs:
        acc = acc + c * xn
        out.append(acc)
        xn = xn * x
    return out


def optimal_truncation_index(s: PowerSeries, x) -> int:
    """Smallest ``n >= 1`` where ``|c_n x^n|`` is minimal (superasymptotic rule)."""
    if x == 0:
        raise DegenerateInputError("optimal truncation needs |x| > 0")
    if all(c == 0 for c in s.coeffs):
        raise DegenerateInputError("optimal truncation of an all-zero series")
    if s.m < 1:
        return 0
    with workprec(max(DEFAULT_PREC, gmpy2.get_context().precision)):
        xx = abs(mpfr(x))
        terms = [abs(mpfr(s[n])) * xx**n for n in range(1, s.m + 1)]
    best = min(terms)
    return 1 + terms.index(best)


def superasymptotic_sum(s: PowerSeries, x):
    """Partial sum up to (and including) the optimal truncation index."""
    n_star = optimal_truncation_index(s, x)
    return partial_sums(s.truncate(n_star), x)[-1]


def convolve(a: Sequence, b: Sequence, m: int) -> list:
    """Plain-list Cauchy product used by the perturbation engines."""
    out = []
    for n in range(m + 1):
        acc = mpq(0)
        for i in range(max(0, n - len(b) + 1), min(n, len(a) - 1) + 1):
            acc += a[i] * b[n - i]
        out.append(acc)
    return out
