import random
from math import factorial

import mpmath
import pytest
from gmpy2 import mpc, mpfr, mpq

from qmtresum.errors import PoleOnContourError, UnsupportedSingularityError
from qmtresum.pade import auto_pade, pade_approx
from qmtresum.perturb1d import OscillatorModel, energy_series
from qmtresum.pipeline import ModelSpec, exact_value, resum_value
from qmtresum.resum import (
    LATERAL_MINUS,
    LATERAL_PLUS,
    PV,
    BorelSpec,
    beta_grid,
    borel_coeffs,
    laplace,
    optimal_beta,
    resum_lateral,
    resum_leroy,
    resum_ordinary,
    resum_pv,
)
from qmtresum.series import series, workprec

mpmath.mp.dps = 60
EULER = mpfr(str(mpmath.e * mpmath.e1(1)), 256)          # int e^-u / (1 + u)
PV_POLE = mpfr(str(mpmath.ei(1) / mpmath.e), 256)         # PV int e^-u / (1 - u)
PI_OVER_E = mpfr(str(mpmath.pi / mpmath.e), 256)
TIGHT = mpfr("1e-25")

EULER_SERIES = series([(-1) ** n * factorial(n) for n in range(31)])
POLE = pade_approx(series([1] * 4), 0, 1)


def test_borel_coeffs():
    s = series([factorial(n) for n in range(10)])
    assert list(borel_coeffs(s, BorelSpec(1, 1)).coeffs) == [1] * 10
    b = borel_coeffs(series([5, 1]), BorelSpec(2, mpq(3)))
    assert b[0] == mpq(5, 2)     # a_0 / Gamma(3)


def test_borel_ratio_quartic():
    b = borel_coeffs(energy_series(OscillatorModel(2), 100), BorelSpec(1, 1))
    assert abs(float(b[100] / b[99]) + 3) < 0.05


def test_euler_series():
    for prescription in ("ordinary", PV):
        v = resum_leroy(EULER_SERIES, mpq(1), BorelSpec(1, 1, prescription)).value
        assert abs(v - EULER) < TIGHT


def test_constant_series():
    for alpha, beta in ((1, 1), (2, mpq(1, 2)), (2, mpq(9, 2)), (1, mpq(5, 2))):
        for z in (mpq(1, 3), mpq(4)):
            res = resum_leroy([mpq(7), mpq(0)], z, BorelSpec(alpha, beta))
            assert abs(res.value - 7) < TIGHT


def test_pv_simple_pole():
    res = resum_pv(POLE, 1)
    assert abs(res.value - PV_POLE) < TIGHT
    assert res.diagnostics["excised_poles"]
    with pytest.raises(PoleOnContourError):
        resum_ordinary(POLE, 1)


def test_pv_matches_epsilon_limit():
    # the symmetric excision limit, done independently with mpmath
    f = lambda u: mpmath.exp(-u) / (1 - u)
    for eps in ("1e-6",):
        e = mpmath.mpf(eps)
        lim = mpmath.quad(f, [0, 1 - e]) + mpmath.quad(f, [1 + e, 2, mpmath.inf])
        assert abs(lim - mpmath.mpf(str(PV_POLE))) < 1e-5


def test_lateral_sums():
    plus = resum_lateral(POLE, 1, +1)
    minus = resum_lateral(POLE, 1, -1)
    with workprec(256):
        assert abs(plus.value - minus.value.conjugate()) < TIGHT
        mean = (plus.value + minus.value) / 2
        assert abs(mean.real - PV_POLE) < TIGHT and abs(mean.imag) < TIGHT
        half = (plus.value - minus.value) / mpc(0, 2)
        assert abs(abs(half.real) - PI_OVER_E) < TIGHT
    assert plus.error_estimate >= abs(plus.value.imag)


def test_lateral_without_axis_poles():
    p = auto_pade(borel_coeffs(EULER_SERIES, BorelSpec(1, 1)))
    res = laplace(p, 1, prescription=LATERAL_PLUS)
    assert abs(res.value.imag) < TIGHT
    assert abs(res.value.real - EULER) < TIGHT


def test_pv_equals_real_part_of_lateral():
    rng = random.Random(11)
    for _ in range(5):
        a, b = mpq(rng.randint(1, 9), 4), mpq(rng.randint(1, 9), 3)
        # 1/((1 - u/a)(1 + u/b)): one pole on the axis
        c = [sum((1 / a) ** i * (-1 / b) ** (n - i) for i in range(n + 1)) for n in range(4)]
        p = pade_approx(c, 0, 2)
        pv = resum_pv(p, 1)
        lat = resum_lateral(p, 1, +1)
        assert abs(pv.value - lat.value.real) <= pv.error_estimate + lat.error_estimate + TIGHT


def test_double_pole_rejected():
    p = pade_approx([mpq(n + 1) for n in range(5)], 0, 2)   # 1/(1-u)^2
    with pytest.raises(UnsupportedSingularityError):
        resum_pv(p, 1)


def test_leroy_reduction_random():
    rng = random.Random(5)
    for _ in range(20):
        c = [mpq(rng.randint(-20, 20), rng.randint(1, 6)) * factorial(n) * (-1) ** n for n in range(9)]
        c[0] = c[0] or mpq(1)
        p = auto_pade(borel_coeffs(c, BorelSpec(1, 1)))
        try:
            direct = resum_pv(p, mpq(1, 2))
        except UnsupportedSingularityError:
            continue
        via = resum_leroy(c, mpq(1, 2), BorelSpec(1, 1, PV))
        assert abs(direct.value - via.value) < TIGHT


def test_quadrature_self_validation():
    p = auto_pade(borel_coeffs(energy_series(OscillatorModel(2), 40), BorelSpec(1, 1)))
    loose = laplace(p, 1, tol=mpfr("1e-20"))
    tight = laplace(p, 1, tol=mpfr("1e-40"))
    assert abs(loose.value - tight.value) <= loose.error_estimate
    assert loose.error_estimate >= 0


def test_beta_grid():
    g = beta_grid()
    assert g[0] == mpq(1, 2) and g[-1] == 10 and len(g) == 39


def test_optimal_beta_euler():
    ref = EULER
    s = EULER_SERIES.truncate(20)
    b, delta, table = optimal_beta(s, 1, mpq(1), ref, grid=("0.5", "3", "0.5"), refine_steps=4)
    grid = beta_grid("0.5", "3", "0.5")
    assert all(delta <= table[g] for g in grid if table[g] is not None)
    assert mpq(1, 2) <= b <= 3


def test_quartic_energy_converges():
    model = ModelSpec("quartic")
    exact = exact_value(model, "E", 1, 1)
    errs = [abs(resum_value(model, "E", 1, 1, m)[0] - exact) for m in (25, 100)]
    assert errs[1] < errs[0]
    assert errs[1] / exact < mpfr("1e-6")
