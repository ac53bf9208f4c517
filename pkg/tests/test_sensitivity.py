import math

import pytest

import optobell as ob


def test_sensitivity_coefficients():
    coeffs = ob.sensitivity_coefficients(0.1, 1.0, 1.6e8)
    assert coeffs.F0 == pytest.approx(0.68)
    assert coeffs.Fe == pytest.approx(-6.46)
    assert coeffs.Fi == 0.0
    assert coeffs.Fm == pytest.approx(-1.28 / 1.6e8)

    lossy = ob.sensitivity_coefficients(0.1, 0.9, 1.6e6)
    assert lossy.r_i == pytest.approx(0.1)
    assert lossy.Fe == pytest.approx(-6.46 * 0.82 / 0.9)
    assert lossy.Fi == pytest.approx(-0.646)
    assert abs(lossy.Fe) > abs(lossy.Fi) > abs(lossy.Fm)

    with pytest.raises(ob.ParameterError):
        ob.sensitivity_coefficients(0.0, 0.9, 1e6)
    with pytest.raises(ob.ParameterError):
        ob.sensitivity_coefficients(0.1, 0.9, 0.0)


def test_linearized_f():
    coeffs = ob.sensitivity_coefficients(0.1, 0.9, 1.6e6)
    physical = ob.linearized_f(coeffs, n_e=0.01, n_i=0.02)
    literal = ob.linearized_f(coeffs, n_e=0.01, n_i=0.02, composition="literal")
    assert physical < coeffs.F0 < literal
    assert physical + literal == pytest.approx(2 * coeffs.F0)
    assert ob.linearized_f(coeffs) == coeffs.F0

    with pytest.raises(ob.ParameterError):
        ob.linearized_f(coeffs, composition="other")


def test_cavity_slopes_match_exact(large_cooperativity):
    vacuum = ob.InputState.vacuum()
    for r in (0.05, 0.1):
        p = large_cooperativity(r)
        slopes = ob.compare_slopes(p, vacuum, method="rwa")
        exact, analytic = slopes["e"]
        assert exact < 0
        assert exact == pytest.approx(analytic, rel=0.1)

        # No internal loss at r_e = 1.
        assert slopes["i"][0] == pytest.approx(0.0, abs=1e-9)
        assert slopes["i"][1] == 0.0


def test_internal_and_mechanical_slopes(large_cooperativity):
    vacuum = ob.InputState.vacuum()
    for r in (0.05, 0.1):
        p = large_cooperativity(r, r_e=0.9, gamma=1e-5)
        assert p.C_minus > 1e4
        coeffs = ob.sensitivity_coefficients(p.r, p.r_e, p.C_minus)
        s_i = ob.finite_difference_sensitivity(p, vacuum, "i", method="rwa")
        s_m = ob.finite_difference_sensitivity(p, vacuum, "m", step=1.0, method="rwa")
        # The closed forms are short by 2 on the internal bath and by 1/r on the mechanical one.
        assert s_i == pytest.approx(2 * coeffs.Fi, rel=0.1)
        assert s_m == pytest.approx(coeffs.Fm / r, rel=0.1)


def test_mechanical_slope_falls_with_cooperativity():
    vacuum = ob.InputState.vacuum()
    low = ob.symmetric_params(kappa=0.01, r_e=0.9, gamma=1e-5, G_minus=0.2, r=0.1)
    high = low.replace(gamma=1e-6)
    assert high.C_minus == pytest.approx(10 * low.C_minus)

    s_low = ob.finite_difference_sensitivity(low, vacuum, "m", step=1.0, method="rwa")
    s_high = ob.finite_difference_sensitivity(high, vacuum, "mechanical", step=1.0, method="rwa")
    assert s_low < 0 and s_high < 0
    assert abs(s_high) * 5 <= abs(s_low)

    s_e = ob.finite_difference_sensitivity(low, vacuum, "e", method="rwa")
    s_i = ob.finite_difference_sensitivity(low, vacuum, "internal", method="rwa")
    assert abs(s_e) > abs(s_i) > abs(s_low)

    with pytest.raises(ob.ParameterError):
        ob.finite_difference_sensitivity(low, vacuum, "x")
    unstable = ob.SystemParams(0.1, 0.1, 0.09, 0.09, 1e-5, 0.02, 0.01)
    with pytest.raises(ob.ParameterError):
        ob.finite_difference_sensitivity(unstable, vacuum, "e")


def test_threshold_and_boundary_root():
    r_bar = ob.threshold_r()
    assert r_bar == pytest.approx(0.182676, abs=1e-6)
    assert r_bar == pytest.approx(1 / math.sqrt(15 + 4 * math.sqrt(14)))

    root = ob.alpha_boundary_root()
    assert root == pytest.approx(0.1821, abs=1e-3)
    assert 1 - 4 * root - 6 * root**2 - 12 * root**3 == pytest.approx(0.0, abs=1e-12)


def test_alpha_boundary():
    assert ob.alpha_boundary(0.1, 0.9) > 0
    with pytest.raises(ob.ParameterError):
        ob.alpha_boundary(0.2, 0.9)
    with pytest.raises(ob.ParameterError):
        ob.alpha_boundary(0.0, 0.9)

    # With internal loss the boundary closes towards r = 0.
    near = ob.alpha_boundary(1e-8, 0.9)
    far = ob.alpha_boundary(1e-6, 0.9)
    assert near < far < 1e-2

    # Without it the boundary approaches a finite amplitude.
    assert ob.alpha_boundary(1e-8, 1.0) == pytest.approx(math.sqrt(1 / 6), rel=1e-3)


def test_optimal_r():
    r_opt = ob.optimal_r(0.9)
    assert r_opt == pytest.approx(0.106, abs=2e-3)
    assert ob.tolerable_noise(r_opt) == pytest.approx(0.02797, abs=1e-4)
    for r in (0.05, 0.09, 0.12, 0.2):
        assert ob.tolerable_noise(r) < ob.tolerable_noise(r_opt)

    with pytest.raises(ob.ParameterError):
        ob.optimal_r(1.0)
    with pytest.raises(ob.EmptyIntervalError):
        ob.optimal_r(0.9, lower=0.2, upper=0.1)


def test_noise_budget():
    assert ob.noise_budget(0.01, 0.02, 0.9) == pytest.approx(0.82 / 0.9 * 0.01 + 0.002)
    assert ob.noise_budget(0.01, 0.5, 1.0) == pytest.approx(0.01)

    r = 0.1
    coeffs = ob.sensitivity_coefficients(r, 1.0, 1e9)
    assert ob.linearized_f(coeffs, n_e=ob.tolerable_noise(r)) == pytest.approx(0.5)
