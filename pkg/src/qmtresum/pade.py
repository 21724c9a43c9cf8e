"""Pade approximants, their poles and zeros.

Rational input is solved exactly: the Toeplitz system for the denominator is
handed to FLINT's multimodular rational solver (a pure-Python fraction-free
Bareiss elimination is kept as an independent cross-check), and the
whole near-diagonal staircase ``[m//2 / (m+1)//2]`` for ``m = 0, 1, ...`` can
be generated at once from the continued-fraction (Viskovatov) recurrence.
Big-float input goes through Gaussian elimination with partial pivoting at
raised precision, followed by a residual check on the matching condition.

Roots of the numerator and denominator are seeded with numpy's companion
eigenvalues and polished simultaneously (Aberth-Ehrlich) in ``mpc``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import gmpy2
import mpmath
import flint
import numpy as np
from gmpy2 import mpc, mpfr, mpq, mpz

from .errors import DegenerateInputError, DegeneratePadeError, NumericError, PoleProximityError
from .series import BIGFLOAT, DEFAULT_PREC, RATIONAL, PowerSeries, format_float, kind_of, workprec

REAL_TOL = mpfr("1e-20")
FROISSART_DISTANCE = mpfr("1e-8")
FROISSART_RESIDUE = mpfr("1e-12")
PROXIMITY = mpfr("1e-20")
MATCH_TOL = mpfr("1e-30")

PHYSICAL = "physical-negative-real"
SPURIOUS = "positive-real-spurious"
FROISSART = "froissart-doublet"
COMPLEX = "complex"


@dataclass(frozen=True)
class PadeApproximant:
    """``[P/Q](u) = (p_0 + ... + p_P u^P) / (1 + q_1 u + ... + q_Q u^Q)``.

    ``q`` includes ``q_0 = 1``.  ``meta`` records the requested orders and any
    automatic order reduction.
    """

    p: tuple
    q: tuple
    P: int
    Q: int
    kind: str
    meta: dict = field(default_factory=dict, compare=False, hash=False)

    def __call__(self, u):
        return evaluate(self, u)

    def taylor(self, n: int) -> list:
        """First ``n + 1`` Taylor coefficients of ``p / q``."""
        out = []
        for i in range(n + 1):
            acc = self.p[i] if i <= self.P else self.p[0] * 0
            for j in range(1, min(i, self.Q) + 1):
                acc -= self.q[j] * out[i - j]
            out.append(acc)
        return out

    def to_dict(self) -> dict:
        fmt = (lambda x: str(mpq(x))) if self.kind == RATIONAL else (lambda x: format_float(x, 60))
        return {
            "P": self.P,
            "Q": self.Q,
            "kind": self.kind,
            "numerator": [fmt(x) for x in self.p],
            "denominator": [fmt(x) for x in self.q],
            "meta": {k: v for k, v in self.meta.items()},
        }


@dataclass(frozen=True)
class Pole:
    location: object            # mpc
    residue: object             # mpc
    classification: str
    partner: int | None = None  # index into PoleReport.zeros for Froissart pairs

    @property
    def is_real(self) -> bool:
        return abs(self.location.imag) < REAL_TOL * (1 + abs(self.location.real))

    @property
    def on_positive_axis(self) -> bool:
        return self.is_real and self.location.real > 0


@dataclass(frozen=True)
class PoleReport:
    poles: tuple
    zeros: tuple

    def __len__(self):
        return len(self.poles)

    def by_class(self, classification: str) -> list:
        return [p for p in self.poles if p.classification == classification]

    def real(self) -> list:
        return [p for p in self.poles if p.is_real]

    def positive_real(self) -> list:
        return sorted((p for p in self.poles if p.on_positive_axis), key=lambda p: p.location.real)

    def smallest_real(self):
        real = self.real()
        return min(real, key=lambda p: abs(p.location)) if real else None

    def rows(self) -> list:
        """``(re, im, class)`` rows for scatter output."""
        return [(p.location.real, p.location.imag, p.classification) for p in self.poles]


# ---------------------------------------------------------------------------
# linear algebra


def _integerize(row):
    den = 1
    for x in row:
        den = math.lcm(den, int(mpq(x).denominator))
    return [mpz(mpq(x) * den) for x in row]


def bareiss_solve(A: list, b: list) -> list:
    """Exact solution of ``A x = b`` over the rationals (fraction-free)."""
    n = len(A)
    M = [_integerize(list(A[i]) + [b[i]]) for i in range(n)]
    prev = mpz(1)
    for k in range(n):
        if M[k][k] == 0:
            for r in range(k + 1, n):
                if M[r][k] != 0:
                    M[k], M[r] = M[r], M[k]
                    break
            else:
                raise DegeneratePadeError("singular Toeplitz system")
        akk, Mk = M[k][k], M[k]
        for i in range(k + 1, n):
            Mi = M[i]
            aik = Mi[k]
            for j in range(k + 1, n + 1):
                Mi[j] = (Mi[j] * akk - aik * Mk[j]) // prev
            Mi[k] = mpz(0)
        prev = akk
    x = [mpq(0)] * n
    for i in reversed(range(n)):
        s = mpq(M[i][n])
        for j in range(i + 1, n):
            s -= M[i][j] * x[j]
        x[i] = s / M[i][i]
    return x


def _to_fmpq(x):
    x = mpq(x)
    return flint.fmpq(int(x.numerator), int(x.denominator))


def _from_fmpq(x):
    return mpq(int(x.p), int(x.q))


def exact_solve(A: list, b: list) -> list:
    """Exact solution of ``A x = b`` over the rationals (FLINT)."""
    n = len(A)
    M = flint.fmpq_mat([[_to_fmpq(x) for x in row] for row in A])
    B = flint.fmpq_mat([[_to_fmpq(x)] for x in b])
    try:
        X = M.solve(B)
    except ZeroDivisionError as exc:
        raise DegeneratePadeError("singular Toeplitz system") from exc
    return [_from_fmpq(X[i, 0]) for i in range(n)]


def _exact_numerator(c: list, q: list, P: int) -> list:
    """Coefficients ``0..P`` of ``c(u) q(u)``."""
    prod = flint.fmpq_poly([_to_fmpq(x) for x in c[: P + 1]]) * flint.fmpq_poly([_to_fmpq(x) for x in q])
    coeffs = [_from_fmpq(x) for x in prod.coeffs()]
    return (coeffs + [mpq(0)] * (P + 1))[: P + 1]


def float_solve(A: list, b: list, prec: int) -> list:
    """Gaussian elimination with partial pivoting in ``mpfr``."""
    n = len(A)
    with workprec(prec):
        M = [[mpfr(x) for x in A[i]] + [mpfr(b[i])] for i in range(n)]
        scale = max((abs(x) for row in M for x in row[:n]), default=mpfr(0))
        for k in range(n):
            piv = max(range(k, n), key=lambda r: abs(M[r][k]))
            if abs(M[piv][k]) <= scale * mpfr(2) ** (-prec + 8):
                raise DegeneratePadeError("singular Toeplitz system (numerically)")
            M[k], M[piv] = M[piv], M[k]
            for i in range(k + 1, n):
                f = M[i][k] / M[k][k]
                if f:
                    Mi, Mk = M[i], M[k]
                    for j in range(k + 1, n + 1):
                        Mi[j] -= f * Mk[j]
        x = [mpfr(0)] * n
        for i in reversed(range(n)):
            s = M[i][n]
            for j in range(i + 1, n):
                s -= M[i][j] * x[j]
            x[i] = s / M[i][i]
    return x


# ---------------------------------------------------------------------------
# construction


def _coeff_list(s) -> list:
    return list(s.coeffs) if isinstance(s, PowerSeries) else list(s)


def _series_kind(c) -> str:
    return RATIONAL if all(kind_of(x) == RATIONAL for x in c) else BIGFLOAT


def pade_approx(s, P: int, Q: int, prec: int = DEFAULT_PREC) -> PadeApproximant:
    """``[P/Q]`` approximant of a series (``PowerSeries`` or coefficient list).

    Raises
    ------
    DegeneratePadeError
        If the denominator system is singular.
    """
    c = _coeff_list(s)
    if P < 0 or Q < 0:
        raise DegenerateInputError("Pade orders must be non-negative")
    if P + Q > len(c) - 1:
        raise DegenerateInputError(f"[{P}/{Q}] needs {P + Q + 1} coefficients, have {len(c)}")
    kind = _series_kind(c[: P + Q + 1])
    if kind == RATIONAL:
        c = [mpq(x) for x in c]
        zero, one = mpq(0), mpq(1)
    else:
        with workprec(prec):
            c = [mpfr(x) for x in c]
        zero, one = mpfr(0), mpfr(1)

    def cc(k):
        return c[k] if k >= 0 else zero

    A = [[cc(P + i - j) for j in range(1, Q + 1)] for i in range(1, Q + 1)]
    b = [-cc(P + i) for i in range(1, Q + 1)]
    if kind == RATIONAL:
        qs = exact_solve(A, b) if Q else []
        q = [one] + list(qs)
        p = _exact_numerator(c, q, P)
        return PadeApproximant(tuple(p), tuple(q), P, Q, kind, {"requested": [P, Q]})
    qs = _float_denominator(A, b, c, P, Q, prec)
    q = [one] + list(qs)
    with workprec(prec):
        p = [sum((q[j] * cc(i - j) for j in range(min(i, Q) + 1)), zero) for i in range(P + 1)]
    return PadeApproximant(tuple(p), tuple(q), P, Q, kind, {"requested": [P, Q]})


def _float_denominator(A, b, c, P, Q, prec):
    if not Q:
        return []
    work = prec + 64
    for _ in range(4):
        qs = float_solve(A, b, work)
        with workprec(work):
            q = [mpfr(1)] + qs
            worst = mpfr(0)
            for i in range(P + 1, P + Q + 1):
                terms = [q[j] * (c[i - j] if i - j >= 0 else 0) for j in range(Q + 1)]
                size = sum(abs(t) for t in terms)
                if size:
                    worst = max(worst, abs(sum(terms)) / size)
        if worst <= MATCH_TOL:
            return qs
        work *= 2
    raise NumericError("Pade residual check failed at every precision tried", {"residual": str(worst)})


def auto_orders(m: int) -> tuple:
    return m // 2, (m + 1) // 2


def auto_pade(s, prec: int = DEFAULT_PREC) -> PadeApproximant:
    """Near-diagonal ``[m//2 / (m+1)//2]`` approximant with automatic fallback.

    If the Toeplitz system is singular, ``Q`` is lowered one step at a time;
    every substitution is listed in ``meta["reduced"]``.
    """
    c = _coeff_list(s)
    m = len(c) - 1
    if m < 1:
        raise DegenerateInputError("auto_pade needs m >= 1")
    P, Q = auto_orders(m)
    reduced = []
    while True:
        try:
            out = pade_approx(c, P, Q, prec)
        except DegeneratePadeError:
            reduced.append([P, Q])
            Q -= 1
            continue
        out.meta["requested"] = list(auto_orders(m))
        if reduced:
            out.meta["reduced"] = reduced
        return out


def pade_staircase(s, m_max: int | None = None) -> list:
    """Exact near-diagonal approximants for every ``m = 0 .. m_max``.

    Uses the continued-fraction three-term recurrence
    ``X_k = X_{k-1} - a_k u X_{k-2}`` for numerator, denominator and the
    residual series ``B_k f - A_k``; entry ``m`` equals
    ``auto_pade(truncate(s, m))`` (``m = 0`` gives the constant).  If a
    partial numerator cannot be formed (non-normal table) the affected
    orders fall back to :func:`auto_pade`.
    """
    c = [mpq(x) for x in _coeff_list(s)]
    if m_max is None:
        m_max = len(c) - 1
    c = c[: m_max + 1]
    out = [PadeApproximant((c[0],), (mpq(1),), 0, 0, RATIONAL, {"requested": [0, 0]})]
    r_old, r_cur = list(c), [mpq(0)] + c[1:]
    a_old, a_cur = [mpq(0)], [c[0]]
    b_old, b_cur = [mpq(1)], [mpq(1)]
    broken = False
    for k in range(1, m_max + 1):
        if not broken and r_old[k - 1] == 0:
            broken = True
        if broken:
            out.append(auto_pade(c[: k + 1]))
            continue
        a = r_cur[k] / r_old[k - 1]
        r_new = [r_cur[0]] + [r_cur[i] - a * r_old[i - 1] for i in range(1, len(r_cur))]

        def step(x1, x2):
            x = list(x1) + [mpq(0)] * max(0, len(x2) + 1 - len(x1))
            for i, v in enumerate(x2):
                x[i + 1] -= a * v
            return x

        a_new, b_new = step(a_cur, a_old), step(b_cur, b_old)
        P, Q = auto_orders(k)
        num = (a_new + [mpq(0)] * (P + 1))[: P + 1]
        den = (b_new + [mpq(0)] * (Q + 1))[: Q + 1]
        out.append(PadeApproximant(tuple(num), tuple(den), P, Q, RATIONAL, {"requested": [P, Q]}))
        r_old, r_cur = r_cur, r_new
        a_old, a_cur = a_cur, a_new
        b_old, b_cur = b_cur, b_new
    return out


# ---------------------------------------------------------------------------
# evaluation


def _horner(coeffs, u):
    acc = coeffs[-1] * 0
    for c in reversed(coeffs):
        acc = acc * u + c
    return acc


def evaluate(p: PadeApproximant, u, prec: int = DEFAULT_PREC):
    """``p(u)/q(u)``; exact for rational approximant and rational ``u``.

    Raises :class:`PoleProximityError` when the denominator vanishes to
    within ``1e-20`` of its natural scale ``sum |q_j| |u|^j``.
    """
    if p.kind == RATIONAL and isinstance(u, (int, mpz, mpq)):
        den = _horner(p.q, mpq(u))
        if den == 0:
            raise PoleProximityError(f"u = {u} is a pole")
        return _horner(p.p, mpq(u)) / den
    with workprec(prec):
        if isinstance(u, (complex, mpc)):
            uu = mpc(u)
        else:
            uu = mpfr(u)
        den = _horner([mpfr(x) for x in p.q], uu)
        scale = _horner([abs(mpfr(x)) for x in p.q], abs(uu))
        if abs(den) <= PROXIMITY * scale:
            raise PoleProximityError(f"evaluation point {u} lies on a denominator root")
        return _horner([mpfr(x) for x in p.p], uu) / den


# ---------------------------------------------------------------------------
# roots and poles


def _trim(coeffs):
    c = list(coeffs)
    while len(c) > 1 and c[-1] == 0:
        c.pop()
    return c


def _seed_roots(coeffs) -> list:
    """Float64 companion-matrix roots after rescaling ``u -> s v``."""
    n = len(coeffs) - 1
    with workprec(DEFAULT_PREC):
        c = [mpfr(x) for x in coeffs]
        s = (abs(c[0]) / abs(c[-1])) ** (mpfr(1) / n) if c[0] else mpfr(1)
        scaled = [c[j] * s**j for j in range(n + 1)]
        big = max(abs(x) for x in scaled)
        arr = np.array([float(x / big) for x in reversed(scaled)])
    roots = np.roots(arr)
    return [complex(r) * float(s) for r in roots]


def polish_roots(coeffs, prec: int = DEFAULT_PREC, maxiter: int = 500) -> list:
    """All roots of ``sum_j coeffs[j] u^j`` to about ``prec`` bits.

    Raises
    ------
    NumericError
        With the polynomial attached, if the iteration does not converge.
    """
    coeffs = _trim(coeffs)
    n = len(coeffs) - 1
    if n < 1:
        return []
    seeds = _seed_roots(coeffs)
    # clustered roots lose many bits to conditioning: retry with more guard bits
    for work in (2 * prec + 64, 4 * prec + 64):
        try:
            return _aberth(coeffs, seeds, prec, work, maxiter)
        except NumericError:
            continue
    try:
        with mpmath.workprec(prec + 64):
            mc = [mpmath.mpf(int(mpq(x).numerator)) / int(mpq(x).denominator) if kind_of(x) == RATIONAL
                  else mpmath.mpf(str(x)) for x in reversed(coeffs)]
            rts = mpmath.polyroots(mc, maxsteps=400, extraprec=4 * prec)
        with workprec(prec):
            return [mpc(mpfr(str(mpmath.re(r))), mpfr(str(mpmath.im(r)))) for r in rts]
    except Exception as exc:  # mpmath raises NoConvergence or ZeroDivisionError
        raise NumericError(f"root finding failed: {exc}", {"coefficients": [str(x) for x in coeffs]}) from exc


def _aberth(coeffs, seeds, prec, work, maxiter):
    n = len(coeffs) - 1
    with workprec(work):
        c = [mpfr(x) for x in coeffs]
        dc = [j * c[j] for j in range(1, n + 1)]
        z = [mpc(s) for s in seeds]
        # split exact duplicates so the repulsion term is defined
        for i in range(n):
            for j in range(i):
                if z[i] == z[j]:
                    z[i] += mpc(0, 1) * mpfr(2) ** -20 * (1 + abs(z[i]))
        eps = mpfr(2) ** (-prec)
        done = [False] * n
        for _ in range(maxiter):
            moved = False
            for i in range(n):
                if done[i]:
                    continue
                zi = z[i]
                pv = _horner(c, zi)
                if pv == 0:
                    done[i] = True
                    continue
                w = pv / _horner(dc, zi)
                s = sum((1 / (zi - z[j]) for j in range(n) if j != i), mpc(0))
                corr = w / (1 - w * s)
                z[i] = zi - corr
                if abs(corr) <= eps * (1 + abs(z[i])):
                    done[i] = True
                else:
                    moved = True
            if not moved:
                return z
    raise NumericError("Aberth iteration did not converge", {"coefficients": [str(x) for x in coeffs]})


def find_poles(p: PadeApproximant, prec: int = DEFAULT_PREC) -> PoleReport:
    """Denominator roots with residues and a deterministic classification.

    A root is *real* when ``|Im| < 1e-20 (1 + |Re|)``.  It is a Froissart
    doublet when a numerator zero lies within ``1e-8`` or its residue is below
    ``1e-12`` in modulus; otherwise real roots are split by sign and the rest
    are ``complex``.
    """
    qc = _trim(p.q)
    if len(qc) < 2:
        raise DegenerateInputError("approximant has no denominator roots (Q = 0)")
    roots = polish_roots(qc, prec)
    pc = _trim(p.p)
    zeros = polish_roots(pc, prec) if len(pc) > 1 and any(pc) else []
    poles = []
    with workprec(prec + 32):
        qf = [mpfr(x) for x in qc]
        dq = [j * qf[j] for j in range(1, len(qf))]
        pf = [mpfr(x) for x in p.p]
        for r in sorted(roots, key=lambda z: (abs(z), z.real, z.imag)):
            res = _horner(pf, r) / _horner(dq, r)
            partner = None
            if zeros:
                dist, idx = min((abs(r - z0), i) for i, z0 in enumerate(zeros))
                if dist < FROISSART_DISTANCE:
                    partner = idx
            real = abs(r.imag) < REAL_TOL * (1 + abs(r.real))
            if real:
                r = mpc(r.real, 0)
            if partner is not None or abs(res) < FROISSART_RESIDUE:
                cls = FROISSART
            elif real:
                cls = PHYSICAL if r.real < 0 else SPURIOUS
            else:
                cls = COMPLEX
            poles.append(Pole(r, res, cls, partner))
    return PoleReport(tuple(poles), tuple(zeros))
