import pytest
from gmpy2 import mpq

from qmtresum.perturb1d import OscillatorModel, energy_series, qmt_series
from qmtresum.pipeline import ModelSpec, resum_value
from qmtresum.radial import (
    RadialModel,
    energy_series_d,
    qmt_series_d,
    radial_matrix_element,
    radial_state_series,
)


@pytest.mark.parametrize("d", [2, 3, 4, 5, 6, 7])
def test_moments(d):
    assert radial_matrix_element(d, 2, 0, 0) == mpq(d, 2)
    assert radial_matrix_element(d, 4, 0, 0) == mpq(d * (d + 2), 4)
    assert radial_matrix_element(d, 4, 3, 0) == 0
    assert radial_matrix_element(d, 2, 0, 2) == 0


def test_moments_excited():
    # <j|r^2|j> = 2j + d/2 for the isotropic oscillator
    for d in (3, 4):
        for j in range(5):
            assert radial_matrix_element(d, 2, j, j) == 2 * j + mpq(d, 2)


def test_energy_examples():
    assert energy_series_d(RadialModel(3), 1)[1] == mpq(15, 4)
    assert energy_series_d(RadialModel(6), 0)[0] == 3
    for d in range(2, 7):
        assert energy_series_d(RadialModel(d), 0)[0] == mpq(d, 2)


def test_one_dimension_reduces_to_line():
    radial = energy_series_d(RadialModel(1), 30)
    line = energy_series(OscillatorModel(2), 30)
    assert list(radial.coeffs) == list(line.coeffs)
    q1, q2 = qmt_series_d(RadialModel(1), 12), qmt_series(OscillatorModel(2), 12)
    for key in ("11", "12", "22"):
        assert list(q1[key].coeffs) == list(q2[key].coeffs)


def test_qmt_examples():
    q3 = qmt_series_d(RadialModel(3), 2)
    assert [q3[key][0] for key in ("11", "12", "22")] == [mpq(3, 32), mpq(15, 16), mpq(315, 32)]
    assert qmt_series_d(RadialModel(5), 2)["12"][0] == mpq(35, 16)
    for d in range(3, 7):
        assert qmt_series_d(RadialModel(d), 1)["11"][0] == mpq(d, 32)


def test_support_and_normalization():
    st = radial_state_series(RadialModel(4, 1), 5)
    for n in range(1, 6):
        assert st.amplitude(n, 1) == 0
        assert all(abs(j - 1) <= 2 * n for j in st.support(n))


def test_rejected_inputs():
    with pytest.raises(ValueError):
        RadialModel(3, l=1)
    with pytest.raises(ValueError):
        RadialModel(3, -1)


def test_gamma_offset():
    from qmtresum.asymptotics import fit_growth

    for d in range(3, 7):
        fit = fit_growth(energy_series_d(RadialModel(d), 60), alpha=1)
        assert abs(float(fit.beta) / (d / 2) - 1) < 0.05
        assert abs(float(fit.A_inverse) - 3) < 0.03


@pytest.mark.slow
def test_resummed_metric_grows_with_dimension():
    vals = {}
    for d in range(3, 7):
        for q in ("g12", "g22"):
            vals[d, q] = float(resum_value(ModelSpec("ddim", d=d), q, 1, 1, 100)[0])
    for d in range(3, 6):
        assert vals[d + 1, "g12"] > vals[d, "g12"]
        assert vals[d + 1, "g22"] > vals[d, "g22"]
