import logging
import math
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np
from scipy import optimize

from .bell import evaluate_point
from .errors import ConvergenceError, EmptyIntervalError, ParameterError
from .model import InputState, SystemParams, check_stability

LOGGER = logging.getLogger(__name__)

BATHS = ("m", "e", "i")
_BATH_ALIASES = {"m": "m", "mechanical": "m", "e": "e", "external": "e", "i": "i", "internal": "i"}


@dataclass(frozen=True)
class SensitivityCoefficients:
    """First-order noise expansion ``F = F0 - Fm n_m - Fe n_e - Fi n_i``.

    The coefficients carry the signs of their closed forms, which are all
    negative for ``0 < r < 1/4``. See `linearized_f` for how they are composed.

    Attributes:
        F0 (float): Noiseless value, ``(2r - 1)^2 + 4 r^2``.
        Fm (float): Mechanical-bath coefficient.
        Fe (float): External-bath coefficient.
        Fi (float): Internal-bath coefficient.
        r (float): Coupling ratio.
        r_e (float): External coupling ratio.
        r_i (float): Internal loss ratio ``1 - r_e``.
        C_minus (float): Red-sideband cooperativity.
    """

    F0: float
    Fm: float
    Fe: float
    Fi: float
    r: float
    r_e: float
    r_i: float
    C_minus: float


def _noiseless(r: float) -> float:
    return (2 * r - 1) ** 2 + 4 * r**2


def _cavity_numerator(r: float) -> float:
    return (2 * r - 1) ** 2 + r**2 * (16 * r - 1)


def sensitivity_coefficients(r: float, r_e: float, C_minus: float) -> SensitivityCoefficients:
    """Closed-form noise sensitivities, to lowest order in ``1/C_minus``.

    ``Fe`` matches the exact slope at small ``r``. The exact internal slope is
    ``2 * Fi`` and the exact mechanical slope is ``Fm / r``; both closed forms
    are kept as written.

    Args:
        r: Coupling ratio, in (0, 1).
        r_e: External coupling ratio, in (0, 1].
        C_minus: Red-sideband cooperativity.

    Returns:
        SensitivityCoefficients: The four coefficients, signed as in their closed forms.
    """
    if not (0 < r < 1):
        raise ParameterError("r must lie in (0, 1) (got " + repr(r) + ")")
    if not (0 < r_e <= 1):
        raise ParameterError("r_e must lie in (0, 1] (got " + repr(r_e) + ")")
    if not C_minus > 0:
        raise ParameterError("C_minus must be positive (got " + repr(C_minus) + ")")

    r_i = 1 - r_e
    cavity = _cavity_numerator(r) / r
    return SensitivityCoefficients(
        F0=_noiseless(r),
        Fm=-2 * ((2 * r - 1) ** 2 + 2 * r**2 * (10 * r - 1)) / C_minus,
        Fe=-cavity * (r_e**2 + r_i**2) / r_e,
        Fi=-cavity * r_i,
        r=r,
        r_e=r_e,
        r_i=r_i,
        C_minus=C_minus,
    )


def linearized_f(
    coeffs: SensitivityCoefficients,
    n_m: float = 0.0,
    n_e: float = 0.0,
    n_i: float = 0.0,
    composition: str = "physical",
) -> float:
    """Evaluate the first-order noise expansion.

    Args:
        coeffs: Output of `sensitivity_coefficients`.
        n_m, n_e, n_i: Bath occupations.
        composition: ``"literal"`` subtracts the signed coefficients, so
            noise raises ``F``. ``"physical"`` subtracts their magnitudes.

    Returns:
        float: The linearized ``F``.
    """
    if composition == "literal":
        return coeffs.F0 - coeffs.Fm * n_m - coeffs.Fe * n_e - coeffs.Fi * n_i
    elif composition == "physical":
        return coeffs.F0 - abs(coeffs.Fm) * n_m - abs(coeffs.Fe) * n_e - abs(coeffs.Fi) * n_i
    raise ParameterError("unknown composition '" + str(composition) + "', expected 'physical' or 'literal'")


def _with_bath(inputs: InputState, bath: str, n: float) -> InputState:
    if bath == "m":
        return inputs.replace(n_m=n)
    elif bath == "e":
        return inputs.replace(n_e_a=n, n_e_c=n)
    return inputs.replace(n_i_a=n, n_i_c=n)


def _baseline(inputs: InputState, bath: str) -> float:
    if bath == "m":
        return inputs.n_m
    elif bath == "e":
        return inputs.n_e_a
    return inputs.n_i_a


def finite_difference_sensitivity(
    params: SystemParams,
    inputs: InputState,
    bath: str,
    step: float = 1e-4,
    omega: float = 0.0,
    method: str = "full",
) -> float:
    """Numerical slope ``dF/dn`` of the exact pipeline for one bath.

    The external and internal baths move both cavities together. A central
    difference is used when the baseline occupation allows it, otherwise a
    second-order one-sided difference.

    Args:
        params: Stable device parameters.
        inputs: Baseline probes and occupations.
        bath: ``"m"``, ``"e"`` or ``"i"``.
        step: Occupation step.
        omega: Analysis frequency.
        method: ``"full"`` or ``"rwa"`` scattering.

    Returns:
        float: The slope, negative when noise degrades the violation.
    """
    key = _BATH_ALIASES.get(bath)
    if key is None:
        raise ParameterError("unknown bath '" + str(bath) + "', expected one of m, e, i")
    if not check_stability(params).stable:
        raise ParameterError("finite differences need stable parameters")

    def F(n):
        return evaluate_point(params, _with_bath(inputs, key, n), omega, method)[1].F

    n0 = _baseline(inputs, key)
    if n0 >= step:
        return (F(n0 + step) - F(n0 - step)) / (2 * step)
    return (-3 * F(n0) + 4 * F(n0 + step) - F(n0 + 2 * step)) / (2 * step)


def compare_slopes(
    params: SystemParams, inputs: InputState, omega: float = 0.0, method: str = "full"
) -> Dict[str, Tuple[float, float]]:
    """Numerical slopes next to the negated magnitudes of the closed-form coefficients."""
    coeffs = sensitivity_coefficients(params.r, params.r_e, params.C_minus)
    analytic = {"m": coeffs.Fm, "e": coeffs.Fe, "i": coeffs.Fi}
    return {
        bath: (
            finite_difference_sensitivity(params, inputs, bath, omega=omega, method=method),
            -abs(analytic[bath]),
        )
        for bath in BATHS
    }


def _boundary_polynomial(r: float) -> float:
    return 1 - 4 * r - 6 * r**2 - 12 * r**3


def alpha_boundary(r_bar: float, r_e: float) -> float:
    """Small-probe estimate of the largest probe amplitude that still violates.

    Args:
        r_bar: Coupling ratio, positive.
        r_e: External coupling ratio, in (0, 1].

    Returns:
        float: The boundary amplitude.

    Raises:
        ParameterError: If there is no boundary at this ``r_bar``.
    """
    if not r_bar > 0:
        raise ParameterError("r_bar must be positive (got " + repr(r_bar) + ")")
    if not (0 < r_e <= 1):
        raise ParameterError("r_e must lie in (0, 1] (got " + repr(r_e) + ")")
    K0 = 28 * r_e**2
    K1 = 2 * (1 - 2 * r_e + 4 * r_e**2)
    K2 = 2 * (1 - r_e) ** 2
    radicand = r_e * r_bar * _boundary_polynomial(r_bar) / (K0 * r_bar**2 + K1 * r_bar + K2)
    if radicand < 0:
        raise ParameterError("no boundary at r=" + repr(r_bar))
    return math.sqrt(radicand)


def alpha_boundary_root() -> float:
    """Coupling ratio at which the small-probe boundary closes."""
    return optimize.brentq(_boundary_polynomial, 0.0, 0.25, xtol=1e-14)


def threshold_r() -> float:
    """Largest violating coupling ratio at large cooperativity and vanishing probes."""
    return (15 + 4 * math.sqrt(14)) ** -0.5


def tolerable_noise(r: float) -> float:
    """Largest combined cavity noise ``n_T`` that keeps the linearized ``F`` at 1/2.

    ``n_T`` weights the external occupation by ``(r_e^2 + r_i^2)/r_e`` and the
    internal one by ``r_i``; see `noise_budget`.
    """
    if not (0 < r < 1):
        raise ParameterError("r must lie in (0, 1) (got " + repr(r) + ")")
    F_T = -_cavity_numerator(r) / r
    return (0.5 - _noiseless(r)) / F_T


def noise_budget(n_e: float, n_i: float, r_e: float) -> float:
    r_i = 1 - r_e
    return (r_e**2 + r_i**2) / r_e * n_e + r_i * n_i


def optimal_r(r_e: float, lower: float = 1e-4, upper: float = 0.25 - 1e-4, grid: int = 200) -> float:
    """Coupling ratio that tolerates the most cavity noise.

    A grid pre-scan brackets the maximum of `tolerable_noise`, which is then
    refined by bounded scalar minimization.

    Args:
        r_e: External coupling ratio, in (0, 1).
        lower, upper: Search interval.
        grid: Number of pre-scan points.

    Returns:
        float: The optimal coupling ratio.
    """
    if not (0 < r_e < 1):
        raise ParameterError("r_e must lie in (0, 1) (got " + repr(r_e) + ")")
    if not lower < upper:
        raise EmptyIntervalError("empty search interval [" + repr(lower) + ", " + repr(upper) + "]")

    rs = np.linspace(lower, upper, grid)
    values = np.array([tolerable_noise(r) for r in rs])
    best = int(np.argmax(values))
    lo, hi = rs[max(best - 1, 0)], rs[min(best + 1, grid - 1)]

    res = optimize.minimize_scalar(
        lambda r: -tolerable_noise(r), bounds=(lo, hi), method="bounded", options={"xatol": 1e-10}
    )
    if not res.success:
        raise ConvergenceError("optimal r search failed: " + str(res.message))
    LOGGER.debug("optimal r %.10f, tolerable noise %.6g", res.x, -res.fun)
    return float(res.x)
