import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

import numpy as np
from scipy import constants

from .errors import ConvergenceError, InstabilityError, ParameterError

LOGGER = logging.getLogger(__name__)


def _require_positive(name: str, value: float):
    if not (value > 0 and math.isfinite(value)):
        raise ParameterError(name + " must be positive and finite (got " + repr(value) + ")")


def _require_nonnegative(name: str, value: float):
    if not (value >= 0 and math.isfinite(value)):
        raise ParameterError(name + " must be nonnegative and finite (got " + repr(value) + ")")


@dataclass(frozen=True)
class SystemParams:
    """Rates and linearized couplings of the two-cavity, one-resonator device.

    All rates are in units of the mechanical frequency.

    Attributes:
        kappa_a (float): Total linewidth of cavity A.
        kappa_c (float): Total linewidth of cavity C.
        kappa_e_a (float): External coupling rate of cavity A.
        kappa_e_c (float): External coupling rate of cavity C.
        gamma (float): Mechanical linewidth.
        G_plus (float): Linearized blue-sideband coupling on cavity A.
        G_minus (float): Linearized red-sideband coupling on cavity C.
        omega_m (float): Mechanical frequency, the unit of all rates.
        delta_a (float): Drive detuning of cavity A, ``omega_d - omega``.
            Defaults to ``+omega_m``.
        delta_c (float): Drive detuning of cavity C. Defaults to ``-omega_m``.
    """

    kappa_a: float
    kappa_c: float
    kappa_e_a: float
    kappa_e_c: float
    gamma: float
    G_plus: float
    G_minus: float
    omega_m: float = 1.0
    delta_a: Optional[float] = None
    delta_c: Optional[float] = None

    def __post_init__(self):
        _require_positive("omega_m", self.omega_m)
        _require_positive("gamma", self.gamma)
        for x in ("a", "c"):
            kappa = getattr(self, "kappa_" + x)
            kappa_e = getattr(self, "kappa_e_" + x)
            _require_positive("kappa_" + x, kappa)
            _require_positive("kappa_e_" + x, kappa_e)
            if kappa_e > kappa * (1 + 1e-12):
                raise ParameterError(
                    "kappa_e_" + x + " cannot exceed kappa_" + x + " (got " + repr(kappa_e) + " > " + repr(kappa) + ")"
                )
        _require_nonnegative("G_plus", self.G_plus)
        _require_nonnegative("G_minus", self.G_minus)

        # Frozen, so defaults are filled through object.__setattr__.
        if self.delta_a is None:
            object.__setattr__(self, "delta_a", self.omega_m)
        if self.delta_c is None:
            object.__setattr__(self, "delta_c", -self.omega_m)
        if not (math.isfinite(self.delta_a) and math.isfinite(self.delta_c)):
            raise ParameterError("detunings must be finite")

    @property
    def kappa_i_a(self) -> float:
        return max(self.kappa_a - self.kappa_e_a, 0.0)

    @property
    def kappa_i_c(self) -> float:
        return max(self.kappa_c - self.kappa_e_c, 0.0)

    @property
    def r(self) -> float:
        """Ratio ``G_plus / G_minus``."""
        if self.G_minus == 0:
            return 0.0 if self.G_plus == 0 else math.inf
        return self.G_plus / self.G_minus

    @property
    def r_e(self) -> float:
        """Coupling ratio of cavity A; both cavities share it in symmetric setups."""
        return self.kappa_e_a / self.kappa_a

    @property
    def r_i(self) -> float:
        return 1 - self.r_e

    @property
    def C_minus(self) -> float:
        """Red-sideband cooperativity ``4 G_minus^2 / (kappa gamma)``."""
        return 4 * self.G_minus**2 / (self.kappa_c * self.gamma)

    @property
    def is_symmetric(self) -> bool:
        return math.isclose(self.kappa_a, self.kappa_c) and math.isclose(self.kappa_e_a, self.kappa_e_c)

    def replace(self, **changes) -> "SystemParams":
        return replace(self, **changes)


def symmetric_params(
    kappa: float,
    r_e: float,
    gamma: float,
    G_minus: float,
    r: float,
    omega_m: float = 1.0,
    delta_a: Optional[float] = None,
    delta_c: Optional[float] = None,
) -> SystemParams:
    """Create parameters for two identical cavities.

    Args:
        kappa: Total linewidth of both cavities.
        r_e: External coupling ratio ``kappa_e / kappa``, in (0, 1].
        gamma: Mechanical linewidth.
        G_minus: Red-sideband coupling.
        r: Coupling ratio ``G_plus / G_minus``, in [0, 1).
        omega_m: Mechanical frequency.
        delta_a, delta_c: Detunings, defaulting to the blue and red sidebands.

    Returns:
        SystemParams: The parameter set with ``G_plus = r * G_minus``.
    """
    if not (0 < r_e <= 1):
        raise ParameterError("r_e must lie in (0, 1] (got " + repr(r_e) + ")")
    if not (0 <= r < 1):
        raise ParameterError("r must lie in [0, 1) (got " + repr(r) + ")")
    return SystemParams(
        kappa_a=kappa,
        kappa_c=kappa,
        kappa_e_a=r_e * kappa,
        kappa_e_c=r_e * kappa,
        gamma=gamma,
        G_plus=r * G_minus,
        G_minus=G_minus,
        omega_m=omega_m,
        delta_a=delta_a,
        delta_c=delta_c,
    )


@dataclass(frozen=True)
class InputState:
    """Coherent probes and thermal occupations at the five input ports.

    Attributes:
        alpha_i (complex): Coherent probe amplitude at the external port of A.
        chi_i (complex): Coherent probe amplitude at the external port of C.
        n_e_a (float): Thermal occupation of the external port of A.
        n_e_c (float): Thermal occupation of the external port of C.
        n_i_a (float): Thermal occupation of the internal loss port of A.
        n_i_c (float): Thermal occupation of the internal loss port of C.
        n_m (float): Occupation of the mechanical bath.
    """

    alpha_i: complex = 0j
    chi_i: complex = 0j
    n_e_a: float = 0.0
    n_e_c: float = 0.0
    n_i_a: float = 0.0
    n_i_c: float = 0.0
    n_m: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "alpha_i", complex(self.alpha_i))
        object.__setattr__(self, "chi_i", complex(self.chi_i))
        for name in ("n_e_a", "n_e_c", "n_i_a", "n_i_c", "n_m"):
            _require_nonnegative(name, getattr(self, name))

    @classmethod
    def vacuum(cls) -> "InputState":
        return cls()

    @classmethod
    def thermal(cls, n_e: float = 0.0, n_i: float = 0.0, n_m: float = 0.0, alpha: complex = 0j, chi: complex = 0j):
        """Symmetric baths: ``n_e`` on both external ports and ``n_i`` on both internal ports."""
        return cls(alpha_i=alpha, chi_i=chi, n_e_a=n_e, n_e_c=n_e, n_i_a=n_i, n_i_c=n_i, n_m=n_m)

    def occupations(self) -> Tuple[float, float, float, float, float]:
        """Occupations in port order (a_i, c_i, a_I, c_I, b_i)."""
        return (self.n_e_a, self.n_e_c, self.n_i_a, self.n_i_c, self.n_m)

    def replace(self, **changes) -> "InputState":
        return replace(self, **changes)


@dataclass(frozen=True)
class RawDriveSpec:
    """Single-photon couplings and strong pump tones, before linearization.

    Frequencies and rates are in units of the mechanical frequency.

    Attributes:
        g_a (float): Single-photon coupling of cavity A.
        g_c (float): Single-photon coupling of cavity C.
        alpha_in_A (complex): Pump amplitude on cavity A.
        alpha_in_C (complex): Pump amplitude on cavity C.
        omega_a (float): Resonance of cavity A.
        omega_c (float): Resonance of cavity C.
        omega_d_A (float): Pump frequency on cavity A.
        omega_d_C (float): Pump frequency on cavity C.
        kappa_a, kappa_c, kappa_e_a, kappa_e_c, gamma (float): Rates, as in
            `SystemParams`.
        omega_m (float): Mechanical frequency.
        sideband_tolerance (float): Tolerance of `check_sidebands`.
    """

    g_a: float
    g_c: float
    alpha_in_A: complex
    alpha_in_C: complex
    omega_a: float
    omega_c: float
    omega_d_A: float
    omega_d_C: float
    kappa_a: float
    kappa_c: float
    kappa_e_a: float
    kappa_e_c: float
    gamma: float
    omega_m: float = 1.0
    sideband_tolerance: float = 1e-9

    def check_sidebands(self) -> bool:
        """Whether A is pumped on its blue sideband and C on its red sideband."""
        tol = self.sideband_tolerance
        return (
            abs(self.omega_d_A - self.omega_a - self.omega_m) <= tol
            and abs(self.omega_d_C - self.omega_c + self.omega_m) <= tol
        )


@dataclass(frozen=True)
class StabilityReport:
    """Outcome of `check_stability`.

    Attributes:
        max_real_part (float): Largest real part among the drift eigenvalues.
        stable (bool): Whether ``max_real_part < 0``.
        eigenvalues (tuple[complex, ...]): All six drift eigenvalues.
    """

    max_real_part: float
    stable: bool
    eigenvalues: Tuple[complex, ...] = field(default=())


def _mechanical_displacement(spec: RawDriveSpec, alpha_A: complex, alpha_C: complex) -> complex:
    drive = spec.g_a * abs(alpha_A) ** 2 + spec.g_c * abs(alpha_C) ** 2
    return -1j * drive / (1j * spec.omega_m + spec.gamma / 2)


def _cavity_field(alpha_in: complex, kappa: float, omega: float, omega_d: float, g: float, b_s: complex) -> complex:
    return alpha_in / (kappa / 2 + 1j * (omega - omega_d + 2 * g * b_s.real))


def linearize_drives(
    spec: RawDriveSpec, tol: float = 1e-12, max_iter: int = 1000, damping: float = 0.5
) -> SystemParams:
    """Linearize the strong pumps into effective couplings.

    The intracavity fields and the static mechanical displacement are solved
    self-consistently by damped fixed-point iteration. Pump phases are
    absorbed into the fluctuation operators, so the returned couplings are
    real and nonnegative.

    Args:
        spec: Couplings, pumps and rates of the device.
        tol: Convergence tolerance on the cavity fields, relative to their size.
        max_iter: Maximum number of iterations.
        damping: Fraction of the new iterate mixed into the old one.

    Returns:
        SystemParams: Rates of ``spec`` with ``G_plus = |g_a alpha_A|``,
        ``G_minus = |g_c alpha_C|`` and the static detunings.

    Raises:
        ConvergenceError: If the fixed point is not reached.
        InstabilityError: If ``G_plus >= G_minus``.
    """
    for name in ("kappa_a", "kappa_c", "gamma", "omega_m"):
        _require_positive(name, getattr(spec, name))

    alpha_A = 2 * complex(spec.alpha_in_A) / spec.kappa_a
    alpha_C = 2 * complex(spec.alpha_in_C) / spec.kappa_c
    b_s = 0j
    for it in range(max_iter):
        b_s = _mechanical_displacement(spec, alpha_A, alpha_C)
        new_A = _cavity_field(spec.alpha_in_A, spec.kappa_a, spec.omega_a, spec.omega_d_A, spec.g_a, b_s)
        new_C = _cavity_field(spec.alpha_in_C, spec.kappa_c, spec.omega_c, spec.omega_d_C, spec.g_c, b_s)
        change = max(abs(new_A - alpha_A), abs(new_C - alpha_C))
        scale = 1 + max(abs(new_A), abs(new_C))
        alpha_A = (1 - damping) * alpha_A + damping * new_A
        alpha_C = (1 - damping) * alpha_C + damping * new_C
        if change <= tol * scale:
            LOGGER.debug("steady state converged after %d iterations", it + 1)
            break
    else:
        raise ConvergenceError("steady-state fixed point did not converge in " + str(max_iter) + " iterations")

    G_plus = abs(spec.g_a * alpha_A)
    G_minus = abs(spec.g_c * alpha_C)
    if G_plus >= G_minus:
        raise InstabilityError(
            "G_plus >= G_minus violated (G_plus=" + repr(G_plus) + ", G_minus=" + repr(G_minus) + ")"
        )

    shift = 2 * b_s.real
    return SystemParams(
        kappa_a=spec.kappa_a,
        kappa_c=spec.kappa_c,
        kappa_e_a=spec.kappa_e_a,
        kappa_e_c=spec.kappa_e_c,
        gamma=spec.gamma,
        G_plus=G_plus,
        G_minus=G_minus,
        omega_m=spec.omega_m,
        delta_a=spec.omega_d_A - spec.omega_a - spec.g_a * shift,
        delta_c=spec.omega_d_C - spec.omega_c - spec.g_c * shift,
    )


def check_stability(params: SystemParams) -> StabilityReport:
    """Report the largest real part of the drift-matrix spectrum.

    Args:
        params: Device parameters.

    Returns:
        StabilityReport: The spectrum and its stability flag.
    """
    from .dynamics import drift_matrix

    eigenvalues = np.linalg.eigvals(drift_matrix(params))
    max_real = float(np.max(eigenvalues.real))
    return StabilityReport(
        max_real_part=max_real,
        stable=max_real < 0,
        eigenvalues=tuple(complex(x) for x in eigenvalues),
    )


def bose_occupancy(temperature: float, frequency: float) -> float:
    """Thermal occupation of a bosonic mode.

    Args:
        temperature: Bath temperature in kelvin.
        frequency: Mode frequency in hertz.

    Returns:
        float: ``1 / (exp(h f / (k_B T)) - 1)``.
    """
    _require_positive("temperature", temperature)
    _require_positive("frequency", frequency)
    x = constants.h * frequency / (constants.k * temperature)
    if x > 700:
        return 0.0
    return 1 / math.expm1(x)


def mechanical_occupancy(temperature: float, omega_m_hz: float) -> float:
    return bose_occupancy(temperature, omega_m_hz)


def thermal_ratio(temperature: float, frequency: float) -> float:
    """High-temperature estimate ``k_B T / (h f)`` of the thermal occupation.

    Quoted bath occupations of hardware platforms are often this ratio rather
    than `bose_occupancy`, which is exponentially smaller once ``h f > k_B T``.
    """
    _require_positive("temperature", temperature)
    _require_positive("frequency", frequency)
    return constants.k * temperature / (constants.h * frequency)
