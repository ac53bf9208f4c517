import numpy as np
import pytest

import optobell as ob
from optobell.dynamics import INPUTS, OUTPUTS, adjoint_row


def _random_stable_params(rng):
    while True:
        p = ob.symmetric_params(
            kappa=rng.uniform(0.01, 0.2),
            r_e=rng.uniform(0.5, 1.0),
            gamma=10 ** rng.uniform(-6, -3),
            G_minus=10 ** rng.uniform(-3, -1),
            r=rng.uniform(0.0, 0.9),
        )
        if ob.check_stability(p).stable:
            return p


def test_drift_matrix(probe_params):
    m = ob.drift_matrix(probe_params)
    assert m.shape == (6, 6)
    assert m[0, 0] == pytest.approx(1j - 0.05)
    assert m[2, 2] == pytest.approx(-1j - 0.05)
    assert m[4, 4] == pytest.approx(-1j - 0.5e-5)
    assert m[0, 4] == m[0, 5] == pytest.approx(-0.02j)
    assert m[4, 2] == m[4, 3] == pytest.approx(-0.2j)

    # Conjugate rows are the adjoints of the mode rows.
    for row in (0, 2, 4):
        np.testing.assert_allclose(m[row + 1], adjoint_row(m[row]))
    assert m[1, 1] == pytest.approx(-1j - 0.05)
    assert m[1, 4] == m[1, 5] == pytest.approx(0.02j)


def test_empty_cavity():
    p = ob.symmetric_params(kappa=0.1, r_e=0.9, gamma=1e-5, G_minus=0.0, r=0.0)
    kappa_e = 0.09

    S = ob.solve_full_scattering(p, omega=0.0)
    assert S.entry("a_o", "a_i") == pytest.approx(2 * 0.9 - 1)
    assert S.entry("c_o", "c_i") == pytest.approx(2 * 0.9 - 1)
    assert S.entry("a_o", "c_i_dag") == pytest.approx(0)

    # One mechanical frequency away from resonance.
    S = ob.solve_full_scattering(p, omega=1.0)
    expected = abs(kappa_e / (0.05 + 1j) - 1)
    assert abs(S.entry("a_o", "a_i")) == pytest.approx(expected)
    assert abs(S.entry("c_o", "c_i")) == pytest.approx(expected)


def test_scattering_matrix():
    entries = np.arange(40, dtype=complex).reshape(4, 10)
    S = ob.ScatteringMatrix(0.0, entries)
    assert S.entry("c_o", "a_I") == 24
    assert not S.entries.flags.writeable

    T = S.without_input("b_i")
    assert T.entry("a_o", "b_i") == 0
    assert S.entry("a_o", "b_i") == 8

    with pytest.raises(ob.ParameterError):
        ob.ScatteringMatrix(0.0, np.zeros((3, 10)))

    assert len(OUTPUTS) == 4
    assert len(INPUTS) == 10


def test_commutators_preserved():
    rng = np.random.default_rng(20240611)
    worst = 0.0
    for _ in range(500):
        p = _random_stable_params(rng)
        for omega in np.linspace(-0.05, 0.05, 11):
            worst = max(worst, ob.commutator_residual(ob.solve_full_scattering(p, omega)))
    assert worst < 1e-9


def test_commutator_fault_injection(probe_params):
    S = ob.solve_full_scattering(probe_params)
    assert ob.commutator_residual(S) < 1e-9
    assert ob.commutator_residual(S.without_input("a_I")) > 1e-6
    assert ob.commutator_residual(S.without_input("b_i_dag")) > 1e-9


def test_rwa_commutators(probe_params):
    S = ob.output_scattering(probe_params, 0.0, method="rwa")
    assert ob.commutator_residual(S) < 1e-9


def test_bogolyubov():
    cosh, sinh, G = ob.bogolyubov(0.6, 1.0)
    assert G == pytest.approx(0.8)
    assert cosh == pytest.approx(1.25)
    assert sinh == pytest.approx(0.75)
    assert cosh**2 - sinh**2 == pytest.approx(1.0)

    with pytest.raises(ob.InstabilityError):
        ob.bogolyubov(1.0, 1.0)
    with pytest.raises(ob.InstabilityError):
        ob.bogolyubov(1.2, 1.0)


def test_rwa_matches_full_at_weak_coupling(weak_params):
    full = ob.coefficients_from_scattering(ob.solve_full_scattering(weak_params))
    rwa = ob.rwa_coefficients(weak_params)
    for name, value in rwa.as_dict().items():
        assert abs(value - getattr(full, name)) < 1e-3, name

    assert ob.counter_rotating_weight(ob.solve_full_scattering(weak_params)) < 1e-3
    assert ob.counter_rotating_weight(ob.output_scattering(weak_params, method="rwa")) == 0.0


def _rwa_deviation(p):
    full = ob.coefficients_from_scattering(ob.solve_full_scattering(p))
    rwa = ob.rwa_coefficients(p)
    return {name: abs(value - getattr(full, name)) for name, value in rwa.as_dict().items()}


def test_rwa_deviation_shrinks_with_linewidth():
    deviations = [
        max(_rwa_deviation(ob.symmetric_params(kappa=kappa, r_e=0.9, gamma=1e-5, G_minus=0.2, r=0.1)).values())
        for kappa in (0.1, 0.02, 0.01)
    ]
    assert deviations[0] > deviations[1] > deviations[2]

    # At G_minus = 0.2 the counter-rotating terms still shift A_x and A_m
    # by a few 1e-3.
    narrow = _rwa_deviation(ob.symmetric_params(kappa=0.01, r_e=0.9, gamma=1e-5, G_minus=0.2, r=0.1))
    assert narrow["A_x"] < 5e-3
    assert narrow["A_m"] < 5e-3


def test_counter_rotating_weight_grows_with_linewidth():
    narrow = ob.symmetric_params(kappa=0.01, r_e=0.9, gamma=1e-5, G_minus=0.2, r=0.1)
    wide = narrow.replace(kappa_a=0.1, kappa_c=0.1, kappa_e_a=0.09, kappa_e_c=0.09)
    w_narrow = ob.counter_rotating_weight(ob.solve_full_scattering(narrow))
    w_wide = ob.counter_rotating_weight(ob.solve_full_scattering(wide))
    assert 0 < w_narrow < w_wide


def test_rwa_large_cooperativity(large_cooperativity):
    p = large_cooperativity(0.1, r_e=0.9)
    exact = ob.rwa_coefficients(p)
    limit = ob.rwa_large_cooperativity(p.r, p.r_e, p.C_minus)
    for name, value in limit.as_dict().items():
        assert abs(value - getattr(exact, name)) < 1e-6, name

    assert limit.A_d == pytest.approx(2 * 0.9 / 0.99 - 1)
    assert limit.C_x == pytest.approx(-limit.A_x)
    assert limit.A_m == pytest.approx(0.1 * limit.C_m)
    assert limit.C_m.real == 0 and limit.C_m.imag < 0

    with pytest.raises(ob.ParameterError):
        ob.rwa_large_cooperativity(1.0, 0.9, 1e5)


def test_rwa_requires_identical_cavities(probe_params):
    skewed = probe_params.replace(kappa_c=0.2, kappa_e_c=0.18)
    with pytest.raises(ob.ParameterError):
        ob.rwa_coefficients(skewed)
    with pytest.raises(ob.ParameterError):
        ob.output_scattering(probe_params, method="bogus")


def test_coefficient_embedding(probe_params):
    coeffs = ob.rwa_coefficients(probe_params)
    S = ob.scattering_from_coefficients(coeffs)
    assert ob.coefficients_from_scattering(S) == coeffs
    assert S.entry("a_o_dag", "a_i_dag") == pytest.approx(np.conj(coeffs.A_d))
    assert S.entry("c_o_dag", "a_i") == pytest.approx(np.conj(coeffs.C_x))
    assert S.entry("a_o", "b_i_dag") == coeffs.A_m


def test_singular_system():
    p = ob.SystemParams(0.1, 0.1, 0.09, 0.09, 1e-13, 0.0, 0.0)
    with pytest.raises(ob.SingularSystemError) as info:
        ob.solve_full_scattering(p, omega=0.0)
    assert info.value.omega == 0.0
    assert info.value.condition > 1e12
    assert isinstance(info.value, ArithmeticError)
