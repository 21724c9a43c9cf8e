"""Adaptive Gauss-Legendre panels in gmpy2 arithmetic.

Nodes and weights come from mpmath's Gauss-Legendre generator and are cached
per (degree, precision).  The panel loop compares the rule on ``[a, b]`` with
the sum of the same rule on both halves and bisects until the difference is
below the panel's share of the absolute tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import mpmath
from gmpy2 import mpfr
from mpmath.calculus.quadrature import GaussLegendre

from .series import workprec

DEFAULT_DEGREE = 4  # 3 * 2**(4-1) = 24 nodes


@lru_cache(maxsize=16)
def gauss_legendre(degree: int, prec: int) -> tuple:
    """``(nodes, weights)`` on ``[-1, 1]`` as ``mpfr`` tuples (``3 * 2**(degree-1)`` points)."""
    ctx = mpmath.mp.clone()
    ctx.prec = prec + 16
    raw = GaussLegendre(ctx).calc_nodes(degree, prec + 16)
    with workprec(prec):
        xs = tuple(mpfr(str(x)) for x, _ in raw)
        ws = tuple(mpfr(str(w)) for _, w in raw)
    return xs, ws


@dataclass
class PanelLog:
    """Bookkeeping collected while integrating."""

    evaluations: int = 0
    panels: int = 0
    max_depth: int = 0
    delta: object = 0
    unresolved: list = field(default_factory=list)


def _rule(f, a, b, xs, ws):
    half = (b - a) / 2
    mid = (a + b) / 2
    acc = 0
    for x, w in zip(xs, ws):
        acc += w * f(mid + half * x)
    return acc * half


def integrate(f, breakpoints, abs_tol, prec: int, degree: int = DEFAULT_DEGREE,
              max_depth: int = 48, log: PanelLog | None = None):
    """Integrate ``f`` over consecutive ``breakpoints`` adaptively.

    ``f`` may return real or complex ``gmpy2`` numbers.  Returns
    ``(value, log)``; ``log.delta`` sums the accepted panel differences, which
    is the quadrature part of the error estimate.
    """
    log = log or PanelLog()
    xs, ws = gauss_legendre(degree, prec)
    npts = len(xs)
    total_len = breakpoints[-1] - breakpoints[0]
    with workprec(prec):
        total = mpfr(0)
        delta = mpfr(0)
        stack = []
        for a, b in zip(breakpoints[:-1], breakpoints[1:]):
            a, b = mpfr(a), mpfr(b)
            stack.append((a, b, _rule(f, a, b, xs, ws), 0))
            log.evaluations += npts
        while stack:
            a, b, whole, depth = stack.pop()
            m = (a + b) / 2
            left = _rule(f, a, m, xs, ws)
            right = _rule(f, m, b, xs, ws)
            log.evaluations += 2 * npts
            diff = abs(left + right - whole)
            share = abs_tol * (b - a) / total_len
            if diff <= share or depth >= max_depth:
                if diff > share:
                    log.unresolved.append((float(a), float(b)))
                total += left + right
                delta += diff
                log.panels += 1
                log.max_depth = max(log.max_depth, depth)
            else:
                stack.append((m, b, right, depth + 1))
                stack.append((a, m, left, depth + 1))
        log.delta = delta
    return total, log
