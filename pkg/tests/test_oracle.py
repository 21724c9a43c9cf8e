import numpy as np
import pytest
from gmpy2 import mpfr

from qmtresum.errors import DegeneracyError, StepSizeError
from qmtresum.oracle import (
    SpectralProblem,
    _check_gap,
    build_hamiltonian,
    eigensolve,
    energy_reference,
    qmt_finite_difference,
    qmt_numeric,
    qmt_reference,
    reference,
)


def closed_forms(model, k, d=3):
    # lambda = 0 metric: harmonic ground state, two intermediate states each
    if model == "quartic":
        return 1 / (32 * k**2), 3 / (16 * k**2.5), 39 / (32 * k**3)
    if model == "sextic":
        return 1 / (32 * k**2), 45 / (64 * k**3), 685 / (32 * k**4)
    return d / (32 * k**2), None, None


def test_problem_validation():
    with pytest.raises(ValueError):
        SpectralProblem("cubic", 1, 1)
    with pytest.raises(ValueError):
        SpectralProblem("quartic", 0, 1)
    with pytest.raises(ValueError):
        SpectralProblem("quartic", 1, -1)
    with pytest.raises(ValueError):
        SpectralProblem("quartic", 1, 1, basis_size=5)


def test_harmonic_diagonal():
    H = build_hamiltonian(SpectralProblem("sextic", 2.25, 0, basis_size=30))
    dense = H.to_dense()
    assert np.allclose(dense, np.diag(1.5 * (np.arange(30) + 0.5)), atol=1e-14)
    R = build_hamiltonian(SpectralProblem("ddim", 4, 0, basis_size=20, d=3))
    assert np.allclose(R.to_dense(), np.diag(2 * (2 * np.arange(20) + 1.5)), atol=1e-13)


def test_parity_blocks():
    dense = build_hamiltonian(SpectralProblem("quartic", 1, 0.7, basis_size=40)).to_dense()
    i, j = np.indices(dense.shape)
    assert np.all(dense[(i + j) % 2 == 1] == 0)
    assert np.allclose(dense, dense.T)


def test_harmonic_spectrum():
    res = eigensolve(build_hamiltonian(SpectralProblem("quartic", 1, 0, basis_size=50)), count=10)
    assert np.allclose(res.values, np.arange(10) + 0.5, atol=1e-12)
    assert np.allclose(np.linalg.norm(res.vectors, axis=0), 1, atol=1e-12)
    assert "delta_half" in res.convergence


def test_self_convergence_quartic():
    e = [eigensolve(build_hamiltonian(SpectralProblem("quartic", 1, 1, basis_size=s)), count=1).values[0]
         for s in (200, 400)]
    assert abs(e[0] - e[1]) < 1e-10


def test_self_convergence_sextic():
    e = [eigensolve(build_hamiltonian(SpectralProblem("sextic", 1, 1, basis_size=s)), count=1).values[0]
         for s in (200, 600)]
    assert abs(e[0] - e[1]) < 1e-8


@pytest.mark.parametrize("model", ["quartic", "sextic", "ddim"])
@pytest.mark.parametrize("k", [0.5, 1.0, 2.0])
def test_closed_forms_sum_over_states(model, k):
    g = qmt_numeric(SpectralProblem(model, k, 0, basis_size=60))
    for got, want in zip((g[0, 0], g[0, 1], g[1, 1]), closed_forms(model, k)):
        if want is not None:
            assert abs(got / want - 1) < 1e-10


@pytest.mark.parametrize("d", [1, 3, 4, 5, 6])
def test_radial_closed_form(d):
    g = qmt_numeric(SpectralProblem("ddim", 1.0, 0, basis_size=40, d=d))
    assert abs(g[0, 0] / (d / 32) - 1) < 1e-10


def test_closed_forms_finite_difference():
    # the lambda stencil straddles lambda = 0, so the step must beat the
    # O(h^2) error of the steep lambda direction
    for model, h in (("quartic", 1e-5), ("sextic", 1e-6)):
        g = qmt_finite_difference(SpectralProblem(model, 1.0, 0, basis_size=80), h=h)
        for got, want in zip((g[0, 0], g[0, 1], g[1, 1]), closed_forms(model, 1.0)):
            assert abs(got / want - 1) < 1e-7


def test_finite_difference_is_second_order():
    p = SpectralProblem("quartic", 1.0, 1.0, basis_size=120)
    exact = qmt_numeric(p)
    errs = [np.max(np.abs(qmt_finite_difference(p, h=h) - exact) / np.abs(exact)) for h in (2e-2, 1e-2)]
    assert 3.0 < errs[0] / errs[1] < 5.0


def test_cross_method():
    p = SpectralProblem("quartic", 1.0, 1.0, basis_size=150)
    a, b = qmt_numeric(p), qmt_finite_difference(p)
    assert np.max(np.abs(a - b) / np.abs(a)) < 1e-6


def test_symmetric_positive():
    for model in ("quartic", "sextic", "ddim"):
        g = qmt_numeric(SpectralProblem(model, 0.7, 0.4, basis_size=150))
        assert g[0, 1] == g[1, 0]
        assert np.min(np.linalg.eigvalsh(g)) >= -1e-12


def test_basis_doubling():
    ref = reference(SpectralProblem("quartic", 1.0, 1.0), prec=128, target=1e-25)
    assert ref.delta["metric"] < 1e-25
    g = [qmt_numeric(SpectralProblem("quartic", 1.0, 1.0, basis_size=s)) for s in (200, 400)]
    assert np.max(np.abs(g[0] - g[1]) / np.abs(g[1])) < 1e-8


def test_reference_agrees_with_float_path():
    p = SpectralProblem("sextic", 1.0, 1.0, basis_size=300)
    g = qmt_numeric(p)
    ref = qmt_reference(SpectralProblem("sextic", 1.0, 1.0), prec=128, target=1e-25)
    for got, want in zip((g[0, 0], g[0, 1], g[1, 1]), ref):
        assert abs(got / float(want) - 1) < 1e-8


def test_reference_independent_of_frequency():
    vals = [energy_reference(SpectralProblem("quartic", 1.0, 1.0, omega=w), prec=200, target=1e-45)
            for w in (1.3, 2.5)]
    assert abs(vals[0] - vals[1]) < mpfr("1e-44")


def test_excited_levels():
    E1 = energy_reference(SpectralProblem("quartic", 1.0, 0.0), 1, prec=128, target=1e-30)
    assert abs(E1 - mpfr("1.5")) < mpfr("1e-30")
    g = qmt_numeric(SpectralProblem("quartic", 1.0, 0.2, basis_size=120), N=2)
    assert g[0, 0] > 0


def test_degeneracy_error():
    with pytest.raises(DegeneracyError):
        _check_gap(np.array([0.5, 0.5 + 1e-12, 2.0]), 0)
    _check_gap(np.array([0.5, 1.5]), 0)


def test_step_size_error():
    with pytest.raises(StepSizeError):
        qmt_finite_difference(SpectralProblem("quartic", 10.0, 0.0, basis_size=200), h=9.9)
