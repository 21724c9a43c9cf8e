"""Borel and Borel-Leroy resummation of Pade-continued Borel transforms.

For a series ``f(z) = sum_n c_n z^n`` the (alpha, beta) Borel transform is
``B(u) = sum_n c_n u^n / Gamma(alpha n + beta)`` and the inverse reads, after
``u = z t^alpha``,

    f(z) = int_0^oo B(z t^alpha) exp(-t) t^(beta - 1) dt.

With ``alpha = beta = 1`` this is ``(1/z) int_0^oo B(u) exp(-u/z) du``.  All
integrals are done in ``t`` with adaptive Gauss-Legendre panels
(:mod:`qmtresum.quadrature`) and a certified tail bound.

Principal value: each simple pole ``u_r > 0`` of the Pade approximant maps to
``t_r = (u_r/z)^(1/alpha)`` where the integrand behaves like
``C_r exp(-t) / (t - t_r)``.  That term is subtracted under the integral and
added back in closed form, ``PV int_0^oo exp(-t)/(t - a) dt = -exp(-a) Ei(a)``.
Lateral sums integrate along ``t = s exp(+-i theta)`` instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import gmpy2
from gmpy2 import mpc, mpfr, mpq

from .errors import (
    DegenerateInputError,
    DomainError,
    NumericError,
    PoleOnContourError,
    QmtResumError,
    UnsupportedSingularityError,
)
from .pade import PadeApproximant, PoleReport, auto_pade, find_poles
from .quadrature import PanelLog, integrate
from .series import DEFAULT_PREC, RATIONAL, PowerSeries, workprec

ORDINARY = "ordinary"
PV = "principal-value"
LATERAL_PLUS = "lateral-plus"
LATERAL_MINUS = "lateral-minus"
PRESCRIPTIONS = (ORDINARY, PV, LATERAL_PLUS, LATERAL_MINUS)
ALIASES = {"pv": PV, "lateral+": LATERAL_PLUS, "lateral-": LATERAL_MINUS, "+": LATERAL_PLUS, "-": LATERAL_MINUS}

DEFAULT_TOL = mpfr("1e-30")
DEFAULT_GRID = ("0.5", "10", "0.25")


def _exact(x):
    """``mpq`` for ints, Fractions, ``mpq`` and decimal strings; ``mpfr`` otherwise."""
    if isinstance(x, mpq):
        return x
    if isinstance(x, (int, Fraction)):
        return mpq(Fraction(x))
    if isinstance(x, str):
        return mpq(Fraction(x))
    if isinstance(x, float):
        return mpq(Fraction(repr(x)))
    return x


def normalize_prescription(name: str) -> str:
    name = ALIASES.get(name, name)
    if name not in PRESCRIPTIONS:
        raise ValueError(f"unknown prescription {name!r}; choose one of {PRESCRIPTIONS}")
    return name


@dataclass(frozen=True)
class BorelSpec:
    alpha: object = mpq(1)
    beta: object = mpq(1)
    prescription: str = ORDINARY

    def __post_init__(self):
        object.__setattr__(self, "alpha", _exact(self.alpha))
        object.__setattr__(self, "beta", _exact(self.beta))
        object.__setattr__(self, "prescription", normalize_prescription(self.prescription))
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")

    @property
    def integer_alpha(self) -> bool:
        return isinstance(self.alpha, mpq) and self.alpha.denominator == 1


@dataclass(frozen=True)
class ResumResult:
    value: object
    prescription: str
    error_estimate: object
    diagnostics: dict = field(default_factory=dict, compare=False)

    def __float__(self):
        return float(self.value.real if isinstance(self.value, mpc) else self.value)


# ---------------------------------------------------------------------------
# Borel transform


def _plain(s) -> list:
    if isinstance(s, PowerSeries):
        return list(s.taylor().coeffs)
    return list(s)


def _gamma(x, prec):
    with workprec(prec):
        x = mpfr(x)
        if x <= 0 and gmpy2.is_integer(x):
            raise DomainError(f"Gamma has a pole at {x}")
        return gmpy2.gamma(x)


def borel_coeffs(s, spec: BorelSpec, prec: int = DEFAULT_PREC) -> PowerSeries:
    """``c_n / Gamma(alpha n + beta)`` as a series in the Borel variable.

    Exact rationals for integer ``alpha`` and positive integer ``beta``;
    big floats otherwise.  Input with a sign-flipped expansion variable is
    first converted to plain Taylor coefficients in the coupling.
    """
    c = _plain(s)
    a, b = spec.alpha, spec.beta
    exact = spec.integer_alpha and isinstance(b, mpq) and b.denominator == 1 and b > 0
    meta = {"alpha": str(a), "beta": str(b)}
    if exact and all(isinstance(x, mpq) for x in c):
        out = [x / gmpy2.fac(int(a * n + b) - 1) for n, x in enumerate(c)]
        return PowerSeries(out, variable="u", meta=meta)
    with workprec(prec):
        out = [mpfr(x) / _gamma(a * n + b, prec) for n, x in enumerate(c)]
    return PowerSeries(out, variable="u", meta=meta)


def scaled_borel(s, spec: BorelSpec, prec: int = DEFAULT_PREC):
    """Borel coefficients up to a common constant: ``(coeffs, scale)``.

    For integer ``alpha`` and rational ``beta > 0``,
    ``Gamma(alpha n + beta) = Gamma(beta) (beta)_(alpha n)``, so the
    coefficients ``c_n / (beta)_(alpha n)`` stay rational and
    ``scale = 1/Gamma(beta)``.  Pade approximants commute with the constant.
    """
    c = _plain(s)
    a, b = spec.alpha, spec.beta
    if spec.integer_alpha and isinstance(b, mpq) and b > 0 and all(isinstance(x, mpq) for x in c):
        out = []
        poch = mpq(1)
        k = 0
        for n, x in enumerate(c):
            while k < a * n:
                poch *= b + k
                k += 1
            out.append(x / poch)
        if b.denominator == 1:
            f = gmpy2.fac(int(b) - 1)
            return [x / f for x in out], mpfr(1)
        with workprec(prec):
            return out, 1 / _gamma(b, prec)
    return list(borel_coeffs(c, spec, prec).coeffs), mpfr(1)


@lru_cache(maxsize=256)
def _cached_pade(coeffs: tuple, prec: int):
    pade = auto_pade(list(coeffs), prec)
    try:
        poles = find_poles(pade, prec)
    except DegenerateInputError:
        poles = PoleReport((), ())
    return pade, poles


def borel_pade(s, spec: BorelSpec, m: int | None = None, prec: int = DEFAULT_PREC):
    """``(pade, poles, scale)`` for the (alpha, beta) Borel transform of ``s``."""
    coeffs, scale = scaled_borel(s, spec, prec)
    if m is not None:
        if m > len(coeffs) - 1:
            raise DegenerateInputError(f"series has order {len(coeffs) - 1} < {m}")
        coeffs = coeffs[: m + 1]
    pade, poles = _cached_pade(tuple(coeffs), prec)
    return pade, poles, scale


# ---------------------------------------------------------------------------
# Laplace-type integral


def _horner(coeffs, u):
    acc = coeffs[-1]
    for c in reversed(coeffs[:-1]):
        acc = acc * u + c
    return acc


def _abs_horner(coeffs, r):
    acc = abs(coeffs[-1])
    for c in reversed(coeffs[:-1]):
        acc = acc * r + abs(c)
    return acc


def _guard_bits(p: PadeApproximant, samples) -> int:
    """Bits lost to cancellation in Horner evaluation of numerator/denominator."""
    worst = 0
    with workprec(64):
        for coeffs in (p.p, p.q):
            c = [mpfr(x) for x in coeffs]
            for u in samples:
                val = abs(_horner(c, mpfr(u)))
                size = _abs_horner(c, abs(mpfr(u)))
                if size == 0:
                    continue
                lost = float(gmpy2.log2(size / val)) if val else 64.0
                worst = max(worst, lost)
    return int(math.ceil(worst))


def _upper_gamma_bound(beta, x):
    """Upper bound of ``Gamma(beta, x) = int_x^oo t^(beta-1) e^-t dt`` for ``x > 2 beta``."""
    base = x ** (beta - 1) * gmpy2.exp(-x)
    if beta <= 1:
        return base
    return base / (1 - (beta - 1) / x)


class _Laplace:
    def __init__(self, pade, poles, z, alpha, beta, prescription, tol, prec):
        self.pade, self.poles = pade, poles
        self.alpha, self.beta = alpha, beta
        self.prescription = prescription
        self.tol = tol
        self.prec = prec
        with workprec(prec):
            self.z = mpfr(z)
        if not self.z > 0:
            raise DomainError("the coupling z must be positive")

        positive = sorted(poles.positive_real(), key=lambda p: p.location.real)
        for p1, p2 in zip(positive, positive[1:]):
            if abs(p2.location.real - p1.location.real) < mpfr("1e-12") * (1 + abs(p1.location.real)):
                raise UnsupportedSingularityError(f"double pole on the integration axis near {p1.location.real}")
        if positive and prescription == ORDINARY:
            raise PoleOnContourError(
                f"Pade approximant has {len(positive)} pole(s) on the positive axis "
                f"(first at u = {float(positive[0].location.real):.6g}); use the principal-value or a lateral prescription"
            )
        self.axis_poles = positive

    # -- setup helpers -----------------------------------------------------

    def _t_of_u(self, u):
        return (u / self.z) ** (1 / mpfr(self.alpha))

    def _setup(self):
        alpha, beta = self.alpha, self.beta
        t_poles = [self._t_of_u(p.location.real) for p in self.axis_poles]
        self.t_poles = t_poles
        # Coefficients C_r of exp(-t)/(t - t_r) in the integrand near each axis pole.
        self.c_poles = [
            p.residue.real * t_r ** (beta - 1) / (self.z * alpha * t_r ** (alpha - 1))
            for p, t_r in zip(self.axis_poles, t_poles)
        ]
        # Scale of the nearest singularity as seen from t = 0.
        near = [abs(self._t_of_u(abs(p.location))) for p in self.poles.poles]
        scale = min(near) if near else mpfr(1)
        h0 = min(mpfr(1) / 8, scale / 4)
        if t_poles:
            h0 = min(h0, t_poles[0] / 4)
        self.h0 = h0
        self.integer_beta = isinstance(beta, mpq) and beta.denominator == 1

    def _theta(self):
        """Rotation angle of the lateral ray in the t plane."""
        args = []
        for p in self.poles.poles:
            if p.on_positive_axis:
                continue
            arg = abs(gmpy2.phase(p.location)) / mpfr(self.alpha)
            if arg > 0:
                args.append(arg)
        theta = mpfr("0.1")
        if args:
            theta = min(theta, min(args) / 2)
        return theta

    # -- integrands ----------------------------------------------------------

    def _borel(self, u):
        return _horner(self.pc, u) / _horner(self.qc, u)

    def _weight(self, t):
        if self.integer_beta:
            return gmpy2.exp(-t) * t ** (int(self.beta) - 1)
        return gmpy2.exp(-t + (self.beta_f - 1) * gmpy2.log(t))

    def _u(self, t):
        if self.alpha_int:
            return self.z * t ** self.alpha_int
        return self.z * gmpy2.exp(self.alpha_f * gmpy2.log(t))

    def _axis(self, t):
        val = self._borel(self._u(t)) * self._weight(t)
        if self.t_poles:
            e = gmpy2.exp(-t)
            for c, tr in zip(self.c_poles, self.t_poles):
                val -= c * e / (t - tr)
        return val

    def _subtracted_only(self, t):
        e = gmpy2.exp(-t)
        return -sum((c * e / (t - tr) for c, tr in zip(self.c_poles, self.t_poles)), mpfr(0))

    def _first_panel(self, y):
        # t = h0 y^(1/beta): dt t^(beta-1) = h0^beta / beta dy
        t = self.h0 * y ** (1 / self.beta_f) * self.omega
        return self._borel(self._u(t)) * gmpy2.exp(-t)

    def _ray(self, s):
        t = s * self.omega
        return self._borel(self._u(t)) * self._weight(t) * self.omega

    # -- driver ----------------------------------------------------------------

    def run(self) -> ResumResult:
        with workprec(self.prec + 32):
            self._setup()
        lateral = self.prescription in (LATERAL_PLUS, LATERAL_MINUS)
        alpha, beta = self.alpha, self.beta
        self.alpha_int = int(alpha) if isinstance(alpha, mpq) and alpha.denominator == 1 else 0
        theta = mpfr(0)
        if lateral:
            theta = self._theta()
            if self.prescription == LATERAL_MINUS:
                theta = -theta

        # Horner conditioning decides the working precision.
        t_probe = [0, self.h0, 1, 4, 16, 64]
        guard = _guard_bits(self.pade, [self.z * t ** mpfr(alpha) for t in t_probe])
        work = self.prec + 32 + min(guard, 4 * self.prec)
        log = PanelLog()
        with workprec(work):
            self.beta_f = mpfr(beta)
            self.alpha_f = mpfr(alpha)
            self.pc = [mpfr(x) for x in self.pade.p]
            self.qc = [mpfr(x) for x in self.pade.q]
            self.omega = mpc(gmpy2.cos(theta), gmpy2.sin(theta)) if lateral else mpfr(1)
            cos_t = gmpy2.cos(theta)
            f_main = self._ray if lateral else self._axis

            # rough magnitude for the absolute tolerance
            coarse = [0, self.h0] + [self.h0 * 2**j for j in range(1, 40) if self.h0 * 2**j < 2]
            coarse += [mpfr(2 + 2 * j) for j in range(20)]
            size = abs(self._first_panel_value(integrate, lateral, log, coarse_only=True))
            from .quadrature import _rule, gauss_legendre
            xs, ws = gauss_legendre(4, work)
            for a, b in zip(coarse[1:-1], coarse[2:]):
                size += abs(_rule(lambda t: abs(f_main(t)), mpfr(a), mpfr(b), xs, ws))
            if self.t_poles:
                size += sum(abs(c) for c in self.c_poles)
            if size == 0:
                size = mpfr(1)
            abs_tol = mpfr(self.tol) * size

            # tail: choose t_max so that the remainder bound is below tol / 10
            t_max = max(mpfr(8), 2 * (self.t_poles[-1] if self.t_poles else 0) + 4)
            while True:
                bsup = self._tail_sup(t_max, lateral)
                x = t_max * cos_t
                if x > 2 * abs(self.beta_f) + 2:
                    bound = bsup * _upper_gamma_bound(self.beta_f, x) / cos_t ** self.beta_f
                    if self.t_poles and not lateral:
                        bound += sum(abs(c) for c in self.c_poles) * gmpy2.exp(-t_max) / (t_max - self.t_poles[-1])
                    if bound <= abs_tol / 10 or t_max > 4000:
                        break
                t_max += 4

            start = self.h0
            points = [start]
            while points[-1] * 2 < 2:
                points.append(points[-1] * 2)
            points.append(mpfr(2))
            while points[-1] + 2 < t_max:
                points.append(points[-1] + 2)
            points.append(t_max)
            if not lateral:
                for tr in self.t_poles:
                    if start < tr < t_max and tr not in points:
                        points.append(tr)
                points.sort()

            head = self._first_panel_value(integrate, lateral, log, abs_tol=abs_tol / 4)
            body, log = integrate(f_main, points, abs_tol, work, log=log)
            total = head + body
            pv_terms = []
            for c, tr in zip(self.c_poles, self.t_poles):
                if lateral:
                    continue
                pv_terms.append(-c * gmpy2.exp(-tr) * gmpy2.eint(tr))
            total += sum(pv_terms, mpfr(0))
            err = log.delta + bound

        with workprec(self.prec):
            value = +total
            if lateral:
                value = mpc(total)
        diagnostics = {
            "nodes": log.evaluations,
            "panels": log.panels,
            "max_depth": log.max_depth,
            "unresolved_panels": log.unresolved,
            "excised_poles": [str(p.location.real) for p in self.axis_poles] if not lateral else [],
            "axis_poles": [str(p.location.real) for p in self.axis_poles],
            "t_max": float(t_max),
            "u_max": float(self.z * t_max ** mpfr(alpha)),
            "tail_bound": float(bound),
            "quadrature_delta": float(log.delta),
            "working_precision": work,
            "theta": float(theta),
        }
        return ResumResult(value, self.prescription, err, diagnostics)

    def _first_panel_value(self, integrate_fn, lateral, log, coarse_only=False, abs_tol=None):
        """Integral over ``[0, h0]`` along the (possibly rotated) ray."""
        from .quadrature import _rule, gauss_legendre

        if coarse_only:
            xs, ws = gauss_legendre(4, gmpy2.get_context().precision)
            if self.integer_beta:
                f = self._ray if lateral else (lambda t: self._borel(self._u(t)) * self._weight(t))
                return _rule(f, mpfr(0), self.h0, xs, ws)
            fac = self.h0 ** self.beta_f / self.beta_f * (self.omega ** self.beta_f if lateral else 1)
            return fac * _rule(self._first_panel, mpfr(0), mpfr(1), xs, ws)
        if self.integer_beta:
            f = self._ray if lateral else self._axis
            val, _ = integrate_fn(f, [mpfr(0), self.h0], abs_tol, gmpy2.get_context().precision, log=log)
            return val
        fac = self.h0 ** self.beta_f / self.beta_f * (self.omega ** self.beta_f if lateral else 1)
        val, _ = integrate_fn(self._first_panel, [mpfr(0), mpfr(1)], abs_tol / abs(fac) if fac else abs_tol,
                              gmpy2.get_context().precision, log=log)
        val = val * fac
        if self.t_poles and not lateral:
            sub, _ = integrate_fn(self._subtracted_only, [mpfr(0), self.h0], abs_tol,
                                  gmpy2.get_context().precision, log=log)
            val += sub
        return val

    def _tail_sup(self, t_max, lateral):
        """Safety-padded estimate of ``sup |B(z t^alpha)|`` for ``t >= t_max``."""
        vals = []
        for f in (1, mpfr("1.5"), 2, 4, 16, 256, 10**6):
            t = t_max * f * self.omega
            try:
                vals.append(abs(self._borel(self._u(t))))
            except ZeroDivisionError:
                return mpfr("inf")
        if self.pade.P == self.pade.Q and self.qc[-1]:
            vals.append(abs(self.pc[-1] / self.qc[-1]))
        return 2 * max(vals)


def laplace(pade: PadeApproximant, z, alpha=1, beta=1, prescription: str = ORDINARY,
            poles: PoleReport | None = None, tol=DEFAULT_TOL, prec: int = DEFAULT_PREC) -> ResumResult:
    """``int_0^oo B(z t^alpha) exp(-t) t^(beta-1) dt`` with ``B = pade``."""
    prescription = normalize_prescription(prescription)
    if poles is None:
        poles = find_poles(pade, prec) if len([x for x in pade.q if x != 0]) > 1 else PoleReport((), ())
    spec = BorelSpec(alpha, beta, prescription)
    return _Laplace(pade, poles, z, spec.alpha, spec.beta, prescription, tol, prec).run()


def resum_ordinary(p: PadeApproximant, z, **kw) -> ResumResult:
    """Ordinary Borel sum ``(1/z) int_0^oo p(u) exp(-u/z) du``."""
    return laplace(p, z, 1, 1, ORDINARY, **kw)


def resum_pv(p: PadeApproximant, z, **kw) -> ResumResult:
    """Principal-value Borel sum; poles on ``(0, oo)`` are excised analytically."""
    return laplace(p, z, 1, 1, PV, **kw)


def resum_lateral(p: PadeApproximant, z, side: int = +1, **kw) -> ResumResult:
    """Lateral Borel sum along a ray just above (``side=+1``) or below the axis.

    ``error_estimate`` includes ``|Im value|``, the ambiguity of the sum.
    """
    res = laplace(p, z, 1, 1, LATERAL_PLUS if side > 0 else LATERAL_MINUS, **kw)
    amb = abs(res.value.imag)
    res.diagnostics["ambiguity"] = float(amb)
    return ResumResult(res.value, res.prescription, res.error_estimate + amb, res.diagnostics)


def resum_leroy(s, z, spec: BorelSpec, m: int | None = None, tol=DEFAULT_TOL,
                prec: int = DEFAULT_PREC) -> ResumResult:
    """Borel-Leroy sum: transform, near-diagonal Pade, Laplace-type inversion.

    ``s`` may be a :class:`PowerSeries` (its Taylor form in the physical
    coupling is used) or a list of plain coefficients; ``z`` is the coupling.
    """
    pade, poles, scale = borel_pade(s, spec, m, prec)
    res = _Laplace(pade, poles, z, spec.alpha, spec.beta, spec.prescription, tol, prec).run()
    with workprec(prec):
        value = res.value * scale
        err = res.error_estimate * abs(scale)
    if spec.prescription in (LATERAL_PLUS, LATERAL_MINUS):
        res.diagnostics["ambiguity"] = float(abs(value.imag))
        err += abs(value.imag)
    res.diagnostics.update({"alpha": str(spec.alpha), "beta": str(spec.beta), "P": pade.P, "Q": pade.Q})
    if "reduced" in pade.meta:
        res.diagnostics["pade_reduced"] = pade.meta["reduced"]
    return ResumResult(value, spec.prescription, err, res.diagnostics)


# ---------------------------------------------------------------------------
# beta* search


def beta_grid(lo="0.5", hi="10", step="0.25") -> list:
    lo, hi, step = Fraction(str(lo)), Fraction(str(hi)), Fraction(str(step))
    if step <= 0 or hi < lo:
        raise DegenerateInputError("empty beta grid")
    n = int((hi - lo) / step)
    return [mpq(lo + i * step) for i in range(n + 1)]


def optimal_beta(s, alpha, z_ref, exact_ref, grid=DEFAULT_GRID, m: int | None = None,
                 prescription: str = PV, tol=mpfr("1e-25"), prec: int = DEFAULT_PREC,
                 refine_steps: int = 12, max_denominator: int = 4096):
    """Variational Leroy offset ``beta*`` minimizing ``|exact_ref - sum(beta)|``.

    Scans the grid, then runs one golden-section search inside the cell
    around the best grid point.  Trial values are rounded to rationals with
    denominator at most ``max_denominator`` so the Borel coefficients stay
    exact.  Ties go to the smaller ``beta``.

    Returns
    -------
    (beta_star, delta, table)
        ``table`` maps every evaluated ``beta`` to its error.
    """
    grid_pts = beta_grid(*grid)
    step = mpq(Fraction(str(grid[2])))
    with workprec(prec):
        exact_ref = mpfr(exact_ref)
    table = {}

    def delta(b):
        if b in table:
            return table[b]
        try:
            res = resum_leroy(s, z_ref, BorelSpec(alpha, b, prescription), m=m, tol=tol, prec=prec)
            val = res.value.real if isinstance(res.value, mpc) else res.value
            table[b] = abs(exact_ref - val)
        except QmtResumError:
            table[b] = None
        return table[b]

    for b in grid_pts:
        delta(b)
    ok = [(d, b) for b, d in table.items() if d is not None]
    if not ok:
        raise NumericError("resummation failed at every grid point", {"grid": [str(b) for b in grid_pts]})
    best_d, best_b = min(ok, key=lambda x: (x[0], x[1]))

    lo = max(best_b - step, grid_pts[0])
    hi = min(best_b + step, grid_pts[-1])
    if refine_steps and hi > lo:
        invphi = (math.sqrt(5) - 1) / 2

        def snap(x):
            return mpq(Fraction(x).limit_denominator(max_denominator))

        a, b = Fraction(lo), Fraction(hi)
        c = snap(b - invphi * (b - a))
        d = snap(a + invphi * (b - a))
        for _ in range(refine_steps):
            dc, dd = delta(c), delta(d)
            dc = dc if dc is not None else mpfr("inf")
            dd = dd if dd is not None else mpfr("inf")
            if dc <= dd:
                b = Fraction(d)
            else:
                a = Fraction(c)
            c = snap(b - invphi * (b - a))
            d = snap(a + invphi * (b - a))
            if c >= d:
                break
        ok = [(d_, b_) for b_, d_ in table.items() if d_ is not None]
        best_d, best_b = min(ok, key=lambda x: (x[0], x[1]))
    return best_b, best_d, dict(sorted(table.items()))
