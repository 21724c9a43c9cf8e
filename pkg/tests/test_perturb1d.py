import pytest
from gmpy2 import mpq

from qmtresum.oracle import SpectralProblem, qmt_reference
from qmtresum.perturb1d import (
    OscillatorModel,
    dilatation_apply,
    energy_series,
    perturb_matrix_element,
    qmt_from_states,
    qmt_series,
    state_series,
)
from qmtresum.rspt import StateSeries
from qmtresum.series import optimal_truncation_index, superasymptotic_sum

QUARTIC = OscillatorModel(2)
SEXTIC = OscillatorModel(3)


def test_matrix_elements():
    assert perturb_matrix_element(2, 0, 0) == mpq(3, 4)
    assert perturb_matrix_element(3, 0, 0) == mpq(15, 8)
    assert perturb_matrix_element(2, 0, 1) == 0
    assert perturb_matrix_element(2, 3, 0) == 0
    assert perturb_matrix_element(2, 10, 0) == 0


def test_matrix_element_symmetry_with_norms():
    # (i|V|j) is symmetric, so e(i,j) i! = e(j,i) j!
    from math import factorial

    for i in range(8):
        for j in range(8):
            lhs = perturb_matrix_element(3, i, j) * factorial(i)
            rhs = perturb_matrix_element(3, j, i) * factorial(j)
            assert lhs == rhs


def test_quartic_energy_coefficients():
    e = energy_series(QUARTIC, 5)
    assert [str(c) for c in e.coeffs] == ["1/2", "3/4", "21/8", "333/16", "30885/128", "916731/256"]


def test_sextic_energy_coefficient():
    assert energy_series(SEXTIC, 2)[2] == mpq(3495, 64)


def test_excited_zeroth_order():
    for N in range(5):
        assert energy_series(OscillatorModel(2, N), 3)[0] == N + mpq(1, 2)


def test_invalid_models():
    with pytest.raises(ValueError):
        OscillatorModel(4)
    with pytest.raises(ValueError):
        OscillatorModel(2, -1)


def test_state_series_structure():
    st = state_series(QUARTIC, 6)
    assert st.support(0) == [0]
    assert st.amplitude(0, 0) == 1
    assert set(st.support(1)) <= {2, 4}
    for n in range(1, 7):
        assert st.amplitude(n, 0) == 0
        assert all(j % 2 == 0 and j <= 4 * n for j in st.support(n))
    st3 = state_series(OscillatorModel(3, 1), 4)
    for n in range(1, 5):
        assert all(j % 2 == 1 and abs(j - 1) <= 6 * n for j in st3.support(n))
        assert st3.amplitude(n, 1) == 0


def test_energy_recomputed_from_state():
    from qmtresum.rspt import energy_from_states

    for model in (QUARTIC, SEXTIC, OscillatorModel(2, 3)):
        st = state_series(model, 12)
        assert energy_from_states(st) == list(st.energies)


def test_dilatation():
    st = state_series(QUARTIC, 2)
    d = dilatation_apply(st)
    assert d.support(0) == [2]
    assert d.amplitude(0, 2) == mpq(-1, 8)
    # <0|D^2|0> with (0|0) = 1
    dd = dilatation_apply(d)
    assert dd.amplitude(0, 0) == mpq(-1, 32)
    assert all(j % 2 == 0 for n in range(3) for j in dd.support(n))


def test_qmt_zeroth_order():
    sex = qmt_series(SEXTIC, 3)
    assert [sex[key][0] for key in ("11", "12", "22")] == [mpq(1, 32), mpq(45, 64), mpq(685, 32)]
    assert sex["11"][1] == mpq(315, 128)
    quart = qmt_series(QUARTIC, 3)
    assert [quart[key][0] for key in ("11", "12", "22")] == [mpq(1, 32), mpq(3, 16), mpq(39, 32)]
    assert quart["21"] is quart["12"]


def test_gauge_invariance():
    st = state_series(QUARTIC, 9)
    base = qmt_series(QUARTIC, 8)
    scaled = qmt_from_states(st.scaled(mpq(-7, 3)), 8, 2)
    for key, s in base.items():
        assert list(scaled[key].coeffs) == list(s.coeffs)


def test_gauge_invariance_under_series_rescaling():
    # psi(g) -> (1 + 2g - g^2/3) psi(g) is also a pure gauge change
    st = state_series(SEXTIC, 7)
    f = [mpq(1), mpq(2), mpq(-1, 3)]
    orders = []
    for n in range(len(st.orders)):
        acc = st.orders[n] * f[0]
        for a in range(1, min(n, 2) + 1):
            acc = acc + st.orders[n - a] * f[a]
        orders.append(acc)
    other = StateSeries(st.basis, tuple(orders), st.energies, "rescaled")
    base = qmt_series(SEXTIC, 6)
    for key, s in base.items():
        assert list(qmt_from_states(other, 6, 3)[key].coeffs) == list(s.coeffs)


def test_growth_ratio():
    c = qmt_series(QUARTIC, 100)["11"].coeffs
    n = 99
    ratio = c[n + 1] / ((n + mpq(5, 2)) * c[n])
    assert abs(float(ratio) - 3) < 0.02 * 3


@pytest.mark.parametrize("lam", ["0.005", "0.01"])
def test_qmt_agrees_with_diagonalization(lam):
    x = mpq(lam)
    ref = qmt_reference(SpectralProblem("quartic", 1.0, float(lam)), prec=128, target=1e-25)
    series = qmt_series(QUARTIC, 40)
    for key, val in zip(("11", "12", "22"), ref):
        t = series[key].taylor()
        est = superasymptotic_sum(t, x)
        assert optimal_truncation_index(t, x) > 5
        assert abs(float(est) / float(val) - 1) < 1e-4


def test_excited_energy_agrees_with_diagonalization():
    from qmtresum.oracle import energy_reference

    x = mpq(1, 200)
    p = SpectralProblem("quartic", 1.0, 0.005)
    for N in range(1, 5):
        e = energy_series(OscillatorModel(2, N), 50).taylor()
        ref = energy_reference(p, N, prec=128, target=1e-25)
        assert abs(float(superasymptotic_sum(e, x)) / float(ref) - 1) < 1e-4
