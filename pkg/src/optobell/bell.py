import cmath
import logging
import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence, Tuple

import numpy as np

from .dynamics import output_scattering
from .errors import NoSignalError, ParameterError
from .model import InputState, SystemParams
from .moments import CorrelatorSet, OutputGaussianState, correlators, ordered_moment, propagate_moments, wick_fourth_moment

LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class DetectionConfig:
    """Beam splitters and local oscillators of the two detection stations.

    Attributes:
        eta_1 (float): Transmissivity of the beam splitter on the A output.
        eta_2 (float): Transmissivity of the beam splitter on the C output.
        beta_1 (float): Amplitude of the first local oscillator.
        beta_2 (float): Amplitude of the second local oscillator.
        theta (float): Phase of the first local oscillator, in radians.
        phi (float): Phase of the second local oscillator, in radians.
    """

    eta_1: float = 0.5
    eta_2: float = 0.5
    beta_1: float = 1.0
    beta_2: float = 1.0
    theta: float = 0.0
    phi: float = 0.0

    def __post_init__(self):
        for name in ("eta_1", "eta_2"):
            value = getattr(self, name)
            if not (0 < value < 1):
                raise ParameterError(name + " must lie in (0, 1) (got " + repr(value) + ")")
        for name in ("beta_1", "beta_2"):
            value = getattr(self, name)
            if not (value >= 0 and math.isfinite(value)):
                raise ParameterError(name + " must be nonnegative (got " + repr(value) + ")")

    def replace(self, **changes) -> "DetectionConfig":
        return replace(self, **changes)


@dataclass(frozen=True)
class BellMetrics:
    """CHSH figures of merit of one output state.

    Attributes:
        C (float): Phase-insensitive correlation amplitude.
        D (float): Phase-sensitive correlation amplitude.
        Z (float): Normalization ``2 sqrt(fourth) + n_a + n_c``.
        F (float): ``C^2 + D^2``.
        beta_opt (float): Optimal local oscillator amplitude.
        S_max (float): Maximal CHSH value ``2 sqrt(2) sqrt(F)``.
        zeta_0 (float): Phase offset with ``tan(zeta_0) = (C + D) / (C - D)``.
        barred_angles (tuple[float, float, float, float]): Optimal
            ``(theta_1, phi_1, theta_2, phi_2)`` after phase absorption.
        raw_angles (tuple[float, float, float, float]): The same settings as
            local oscillator phases.
        violation (bool): Whether ``F > 1/2``.
    """

    C: float
    D: float
    Z: float
    F: float
    beta_opt: float
    S_max: float
    zeta_0: float
    barred_angles: Tuple[float, float, float, float]
    raw_angles: Tuple[float, float, float, float]
    violation: bool


def _port(cfg: DetectionConfig, station: int, sign: str) -> Tuple[complex, complex]:
    if station == 1:
        eta, beta, angle = cfg.eta_1, cfg.beta_1, cfg.theta
    else:
        eta, beta, angle = cfg.eta_2, cfg.beta_2, cfg.phi
    lo = beta * cmath.exp(1j * angle)
    if sign == "+":
        return math.sqrt(eta), 1j * math.sqrt(1 - eta) * lo
    return 1j * math.sqrt(1 - eta), math.sqrt(eta) * lo


def detection_state(state: OutputGaussianState, cfg: DetectionConfig, signs: str = "++") -> OutputGaussianState:
    """Gaussian state of one detected field at each station.

    Args:
        state: Output state of the two cavities.
        cfg: Detection setup. The local oscillators act as classical displacements.
        signs: Two characters, ``"+"`` for the d detector and ``"-"`` for the
            e detector of each station.

    Returns:
        OutputGaussianState: State of the selected pair of detected fields.
    """
    s1, k1 = _port(cfg, 1, signs[0])
    s2, k2 = _port(cfg, 2, signs[1])
    scale = np.array([s1, np.conj(s1), s2, np.conj(s2)])
    second = state.second * np.outer(scale, scale)
    mean = (s1 * state.mean[0] + k1, s2 * state.mean[1] + k2)
    return OutputGaussianState(mean=mean, second=second)


def detector_intensities(state: OutputGaussianState, cfg: DetectionConfig) -> Tuple[float, float, float, float]:
    """Mean photon numbers at the four detectors, ordered ``(d_1, e_1, d_2, e_2)``."""
    plus = detection_state(state, cfg, "++")
    minus = detection_state(state, cfg, "--")
    return (
        float(ordered_moment(plus, ("a_dag", "a")).real),
        float(ordered_moment(minus, ("a_dag", "a")).real),
        float(ordered_moment(plus, ("c_dag", "c")).real),
        float(ordered_moment(minus, ("c_dag", "c")).real),
    )


def intensity_correlations(state: OutputGaussianState, cfg: DetectionConfig) -> Tuple[float, float, float, float]:
    """Joint detection rates ``(R_pp, R_pm, R_mp, R_mm)`` between the two stations."""
    return tuple(wick_fourth_moment(detection_state(state, cfg, s)) for s in ("++", "+-", "-+", "--"))


def correlation_coefficient(R_pp: float, R_pm: float, R_mp: float, R_mm: float) -> float:
    total = R_pp + R_mm + R_mp + R_pm
    if total == 0:
        raise NoSignalError("correlation coefficient undefined for zero total rate")
    return (R_pp + R_mm - R_mp - R_pm) / total


def bell_cd(corr: CorrelatorSet) -> Tuple[float, float, float, float]:
    """Correlation amplitudes of the CHSH functional.

    Args:
        corr: Output correlators.

    Returns:
        Tuple of ``C``, ``D``, the normalization ``Z`` and the optimal local
        oscillator amplitude.

    Raises:
        NoSignalError: If ``Z`` vanishes.
    """
    fourth = max(corr.fourth, 0.0)
    Z = 2 * math.sqrt(fourth) + corr.n_a + corr.n_c
    if not Z > 0:
        raise NoSignalError("no signal at the detectors (Z=" + repr(Z) + ")")
    return 2 * abs(corr.cross_phase) / Z, 2 * abs(corr.cross_squeeze) / Z, Z, fourth**0.25


def chsh_s_max(C: float, D: float) -> Tuple[float, float]:
    """Maximal CHSH value and its phase offset ``zeta_0``."""
    if C < 0 or D < 0:
        raise ParameterError("C and D must be nonnegative")
    if C == 0 and D == 0:
        raise ParameterError("C and D cannot both vanish")
    return 2 * math.sqrt(2) * math.sqrt(C**2 + D**2), math.atan2(C + D, C - D)


def optimal_barred_angles(zeta_0: float) -> Tuple[float, float, float, float]:
    zeta = zeta_0 - math.pi / 2
    return (0.0, -zeta, -math.pi / 2, zeta)


def _phase_offsets(corr: CorrelatorSet) -> Tuple[float, float]:
    u = cmath.phase(corr.cross_phase)
    v = cmath.phase(corr.cross_squeeze)
    return (u - v + math.pi) / 2, (-u - v + math.pi) / 2


def raw_angles(corr: CorrelatorSet, barred: Sequence[float]) -> Tuple[float, float, float, float]:
    """Convert barred ``(theta_1, phi_1, theta_2, phi_2)`` into local oscillator phases."""
    off_theta, off_phi = _phase_offsets(corr)
    t1, p1, t2, p2 = barred
    return (t1 - off_theta, p1 - off_phi, t2 - off_theta, p2 - off_phi)


def closed_form_correlation(corr: CorrelatorSet, theta: float, phi: float) -> float:
    """``E = C cos(theta_bar - phi_bar) + D cos(theta_bar + phi_bar)`` at raw phases."""
    C, D, _, _ = bell_cd(corr)
    off_theta, off_phi = _phase_offsets(corr)
    tb, pb = theta + off_theta, phi + off_phi
    return C * math.cos(tb - pb) + D * math.cos(tb + pb)


def bell_metrics(corr: CorrelatorSet) -> BellMetrics:
    C, D, Z, beta_opt = bell_cd(corr)
    F = C**2 + D**2
    if C == 0 and D == 0:
        S_max, zeta_0 = 0.0, 0.0
    else:
        S_max, zeta_0 = chsh_s_max(C, D)
    barred = optimal_barred_angles(zeta_0)
    return BellMetrics(
        C=C,
        D=D,
        Z=Z,
        F=F,
        beta_opt=beta_opt,
        S_max=S_max,
        zeta_0=zeta_0,
        barred_angles=barred,
        raw_angles=raw_angles(corr, barred),
        violation=F > 0.5,
    )


def _chain_correlation(state, cfg, theta, phi) -> float:
    return correlation_coefficient(*intensity_correlations(state, cfg.replace(theta=theta, phi=phi)))


def verify_chsh_from_angles(
    state: OutputGaussianState,
    angles: Optional[Sequence[float]] = None,
    cfg: Optional[DetectionConfig] = None,
) -> float:
    """CHSH value assembled through the full detection chain.

    Args:
        state: Output state of the two cavities.
        angles: Raw phases ``(theta_1, phi_1, theta_2, phi_2)``. Defaults to
            the optimal settings of `bell_metrics`.
        cfg: Beam splitters and local oscillator amplitudes. Defaults to
            balanced splitters with both amplitudes at the optimum.

    Returns:
        float: ``E(t1, p1) + E(t2, p2) + E(t1, p2) - E(t2, p1)``.
    """
    corr = correlators(state)
    if angles is None or cfg is None:
        metrics = bell_metrics(corr)
        if angles is None:
            angles = metrics.raw_angles
        if cfg is None:
            cfg = DetectionConfig(beta_1=metrics.beta_opt, beta_2=metrics.beta_opt)

    t1, p1, t2, p2 = angles
    S = (
        _chain_correlation(state, cfg, t1, p1)
        + _chain_correlation(state, cfg, t2, p2)
        + _chain_correlation(state, cfg, t1, p2)
        - _chain_correlation(state, cfg, t2, p1)
    )
    LOGGER.debug("chain CHSH value %.12g", S)
    return S


def evaluate_point(
    params: SystemParams, inputs: InputState, omega: float = 0.0, method: str = "full"
) -> Tuple[CorrelatorSet, BellMetrics]:
    """Run scattering, moment propagation and the CHSH functional at one point."""
    state = propagate_moments(output_scattering(params, omega, method), inputs)
    corr = correlators(state)
    return corr, bell_metrics(corr)
