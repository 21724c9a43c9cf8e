import gmpy2
from gmpy2 import mpfr

from qmtresum.quadrature import PanelLog, gauss_legendre, integrate
from qmtresum.series import workprec


def test_nodes_are_symmetric():
    xs, ws = gauss_legendre(4, 200)
    assert len(xs) == 24
    with workprec(200):
        assert abs(sum(ws) - 2) < mpfr("1e-55")
        assert abs(sum(xs)) < mpfr("1e-55")


def test_exponential():
    with workprec(256):
        val, log = integrate(lambda t: gmpy2.exp(-t), [mpfr(0), mpfr(1), mpfr(40)], mpfr("1e-40"), 256)
        exact = 1 - gmpy2.exp(mpfr(-40))
        assert abs(val - exact) < mpfr("1e-38")
        assert log.evaluations > 0


def test_endpoint_singularity_is_reported():
    with workprec(256):
        log = PanelLog()
        val, log = integrate(lambda t: gmpy2.sqrt(t), [mpfr(0), mpfr(1)], mpfr("1e-30"), 256, log=log)
        err = abs(val - mpfr(2) / 3)
        assert err < mpfr("1e-26")
        # the sqrt cusp exhausts the depth limit; the panel is flagged and the
        # accumulated delta still covers the true error
        assert log.max_depth == 48 and log.unresolved
        assert err <= log.delta


def test_complex_integrand():
    with workprec(200):
        f = lambda t: gmpy2.exp(gmpy2.mpc(0, 1) * t)
        val, _ = integrate(f, [mpfr(0), gmpy2.const_pi()], mpfr("1e-40"), 200)
        assert abs(val - gmpy2.mpc(0, 2)) < mpfr("1e-38")


def test_more_nodes_stay_within_delta():
    with workprec(256):
        f = lambda t: 1 / (1 + t * t)
        a, la = integrate(f, [mpfr(0), mpfr(10)], mpfr("1e-25"), 256, degree=4)
        b, _ = integrate(f, [mpfr(0), mpfr(10)], mpfr("1e-25"), 256, degree=5)
        assert abs(a - b) <= la.delta + mpfr("1e-25")
