"""Large-order growth fits ``|a_n| ~ S A^-n Gamma(alpha n + beta)``.

* ``A^-1``: Richardson limit of ``r_n = |a_{n+1}| / (|a_n| (alpha n)^alpha)``,
  which behaves as ``A^-1 (1 + (beta + (alpha-1)/2)/n + O(n^-2))``.
* ``beta``: with ``A^-1`` fixed, each ratio ``|a_{n+1}/a_n| A`` equals
  ``Gamma(alpha n + alpha + beta)/Gamma(alpha n + beta)`` up to ``O(n^-2)``
  corrections; solving that for ``beta_n`` and extrapolating gives ``beta``.
  (For ``alpha = 1`` this is ``r_n = a_{n+1}/(a_n (n + beta))``.)
* ``S``: Richardson limit of ``|a_n| A^n / Gamma(alpha n + beta)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import gmpy2
from gmpy2 import mpfr, mpq

from .errors import ClassificationError, DegenerateInputError
from .series import DEFAULT_PREC, PowerSeries, format_float, workprec

DEFAULT_DEPTH = 4
CANDIDATES = (1, 2)


@dataclass(frozen=True)
class AsymptoticFit:
    alpha: int
    A_inverse: object
    beta: object
    S: object
    uncertainty: dict = field(default_factory=dict)
    residuals: tuple = ()       # (n, relative residual) for the last usable orders
    orders_used: tuple = ()
    depth: int = DEFAULT_DEPTH

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "A_inverse": format_float(self.A_inverse),
            "beta": format_float(self.beta),
            "S": format_float(self.S),
            "singularity": format_float(singularity_location(self)),
            "uncertainty": {k: float(v) for k, v in self.uncertainty.items()},
            "residuals": [[n, float(r)] for n, r in self.residuals],
            "orders_used": list(self.orders_used),
            "richardson_depth": self.depth,
        }


def _abs_coeffs(s, prec) -> list:
    c = s.coeffs if isinstance(s, PowerSeries) else s
    with workprec(prec):
        return [abs(mpfr(x)) for x in c]


def richardson(seq: list, start: int, depth: int):
    """Richardson limit of ``seq[n]`` (``n`` = index) assuming a ``1/n`` expansion.

    Uses ``seq[start .. start + depth]``:
    ``sum_j seq[N+j] (N+j)^k (-1)^(k+j) / (j! (k-j)!)`` with ``N = start``.
    """
    if start < 1 or start + depth > len(seq) - 1:
        raise DegenerateInputError("not enough terms for the requested Richardson depth")
    acc = 0
    for j in range(depth + 1):
        n = start + j
        acc += seq[n] * mpfr(n) ** depth * (-1) ** (depth + j) / (math.factorial(j) * math.factorial(depth - j))
    return acc


def _limit(seq: list, depth: int, last: int):
    """Richardson estimate ending at index ``last`` plus its last-order delta."""
    a = richardson(seq, last - depth, depth)
    b = richardson(seq, last - depth - 1, depth)
    return a, abs(a - b)


def detect_gevrey_order(s, prec: int = DEFAULT_PREC) -> int:
    """Gevrey order ``alpha`` from the growth of ``log|a_{n+1}/a_n|`` against ``log n``.

    Raises
    ------
    ClassificationError
        For zeros in the tail, non-factorial or oscillating growth.
    """
    a = _abs_coeffs(s, prec)
    m = len(a) - 1
    if m < 20:
        raise DegenerateInputError("Gevrey detection needs m >= 20")
    with workprec(prec):
        if any(x == 0 for x in a[m // 2:]):
            raise ClassificationError("zero coefficients in the tail; growth law undefined")
        lr = {n: gmpy2.log(a[n + 1] / a[n]) for n in range(m // 2, m)}
        n1, n2 = m // 2, m - 1
        slope = (lr[n2] - lr[n1]) / (gmpy2.log(n2) - gmpy2.log(n1))
        # local slopes must agree in sign with a factorial trend
        half = (n1 + n2) // 2
        s1 = (lr[half] - lr[n1]) / (gmpy2.log(half) - gmpy2.log(n1))
        s2 = (lr[n2] - lr[half]) / (gmpy2.log(n2) - gmpy2.log(half))
    est = float(slope)
    best = min(CANDIDATES, key=lambda c: abs(c - est))
    if abs(best - est) > 0.5 or abs(float(s1) - float(s2)) > 0.5:
        raise ClassificationError(f"growth slope {est:.3f} matches no Gevrey order in {CANDIDATES}")
    return best


def _solve_beta(ratio, alpha: int, n: int):
    """``beta`` with ``prod_{j<alpha} (alpha n + beta + j) = ratio``."""
    if alpha == 1:
        return ratio - n
    if alpha == 2:
        x = (-1 + gmpy2.sqrt(1 + 4 * ratio)) / 2
        return x - 2 * n
    x = gmpy2.root(ratio, alpha) - mpfr(alpha - 1) / 2
    for _ in range(100):
        f = mpfr(1)
        df = mpfr(0)
        for j in range(alpha):
            df = df * (x + j) + f
            f *= x + j
        step = (f - ratio) / df
        x -= step
        if abs(step) < mpfr(2) ** (-gmpy2.get_context().precision + 8) * abs(x):
            break
    return x - alpha * n


def fit_growth(s, alpha=None, depth: int = DEFAULT_DEPTH, last: int | None = None,
               prec: int = DEFAULT_PREC) -> AsymptoticFit:
    """Fit ``(A^-1, beta, S)`` for a given (or detected) Gevrey order.

    Parameters
    ----------
    s
        Series or coefficient list; only ``|a_n|`` is used.
    alpha
        1, 2 or ``None``/``"auto"`` for :func:`detect_gevrey_order`.
    depth
        Richardson depth.
    last
        Highest order to use (defaults to ``m``).
    """
    a = _abs_coeffs(s, prec)
    m = len(a) - 1 if last is None else last
    if m < 30:
        raise DegenerateInputError("fit_growth needs m >= 30")
    if alpha in (None, "auto"):
        alpha = detect_gevrey_order(a[: m + 1], prec)
    alpha = int(alpha)
    if alpha < 1:
        raise ValueError("alpha must be a positive integer")
    with workprec(prec):
        if any(x == 0 for x in a[m // 3: m + 1]):
            raise ClassificationError("zero coefficients in the fitted range")
        n0 = 1
        r = [None] * m
        for n in range(n0, m):
            r[n] = a[n + 1] / (a[n] * mpfr(alpha * n) ** alpha)
        A_inv, dA = _limit(r, depth, m - 1)

        b = [None] * m
        for n in range(n0, m):
            b[n] = _solve_beta(a[n + 1] / (a[n] * A_inv), alpha, n)
        beta, dbeta = _limit(b, depth, m - 1)

        logA = gmpy2.log(A_inv)
        sn = [None] * (m + 1)
        for n in range(n0, m + 1):
            sn[n] = gmpy2.exp(gmpy2.log(a[n]) - n * logA - gmpy2.lgamma(alpha * n + beta)[0])
        S, dS = _limit(sn, depth, m)

        residuals = []
        for n in range(max(n0, m - 9), m + 1):
            model = S * gmpy2.exp(n * logA + gmpy2.lgamma(alpha * n + beta)[0])
            residuals.append((n, (a[n] - model) / a[n]))
    return AsymptoticFit(
        alpha=alpha,
        A_inverse=A_inv,
        beta=beta,
        S=S,
        uncertainty={"A_inverse": dA, "beta": dbeta, "S": dS},
        residuals=tuple(residuals),
        orders_used=(m - depth - 1, m),
        depth=depth,
    )


def singularity_location(fit: AsymptoticFit):
    """Borel-plane singularity ``-1/A^-1`` of an alternating series."""
    return -1 / fit.A_inverse


def synthetic_series(S, A_inverse, alpha, beta, m: int, prec: int = DEFAULT_PREC) -> list:
    """``S A^-n Gamma(alpha n + beta)`` for ``n = 0..m`` (test data)."""
    with workprec(prec):
        S, Ai, be = mpfr(S), mpfr(A_inverse), mpfr(beta)
        return [S * Ai**n * gmpy2.gamma(alpha * n + be) for n in range(m + 1)]
