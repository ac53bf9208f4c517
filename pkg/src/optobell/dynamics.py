import logging
import math
from dataclasses import dataclass, fields
from typing import Dict, Tuple

import numpy as np
from scipy import linalg

from .errors import InstabilityError, ParameterError, SingularSystemError
from .model import SystemParams, check_stability

LOGGER = logging.getLogger(__name__)

OUTPUTS = ("a_o", "a_o_dag", "c_o", "c_o_dag")
INPUTS = ("a_i", "a_i_dag", "c_i", "c_i_dag", "a_I", "a_I_dag", "c_I", "c_I_dag", "b_i", "b_i_dag")

# +1 for mode columns, -1 for conjugate columns.
INPUT_METRIC = np.array([1, -1] * 5, dtype=float)
OUTPUT_METRIC = np.array([1, -1, 1, -1], dtype=float)

# Output pairs produced by the same doubled-system solve.
_SOLVE_GROUP_PAIRS = ((0, 0), (3, 3), (0, 3), (1, 1), (2, 2), (1, 2))

CONDITION_LIMIT = 1e12


@dataclass(frozen=True)
class ScatteringMatrix:
    """Linear map from the ten input operators to the four output operators.

    Attributes:
        omega (float): Analysis frequency, as an offset from the cavity resonances.
        entries (numpy.ndarray): Complex 4x10 matrix. Rows follow `OUTPUTS`,
            columns follow `INPUTS`.
    """

    omega: float
    entries: np.ndarray

    def __post_init__(self):
        entries = np.array(self.entries, dtype=complex)
        if entries.shape != (4, 10):
            raise ParameterError("scattering entries must have shape (4, 10), got " + str(entries.shape))
        entries.flags.writeable = False
        object.__setattr__(self, "entries", entries)

    def entry(self, output: str, input: str) -> complex:
        """Single matrix element, addressed by operator names."""
        return complex(self.entries[OUTPUTS.index(output), INPUTS.index(input)])

    def without_input(self, input: str) -> "ScatteringMatrix":
        """Copy with one input column zeroed, for fault-injection checks."""
        entries = self.entries.copy()
        entries[:, INPUTS.index(input)] = 0
        return ScatteringMatrix(self.omega, entries)


@dataclass(frozen=True)
class CoefficientSet:
    """Named view of the output couplings that survive the rotating-wave approximation.

    ``a_o = A_d a_i + A_x c_i^dag + A_dI a_I + A_xI c_I^dag + A_m b_i^dag`` and
    ``c_o = C_d c_i + C_x a_i^dag + C_dI c_I + C_xI a_I^dag + C_m b_i``.
    """

    A_d: complex
    A_x: complex
    A_dI: complex
    A_xI: complex
    A_m: complex
    C_d: complex
    C_x: complex
    C_dI: complex
    C_xI: complex
    C_m: complex

    def as_dict(self) -> Dict[str, complex]:
        return {f.name: complex(getattr(self, f.name)) for f in fields(self)}


# Column of each coefficient in the a_o and c_o rows.
_A_COLUMNS = {"A_d": 0, "A_x": 3, "A_dI": 4, "A_xI": 7, "A_m": 9}
_C_COLUMNS = {"C_d": 2, "C_x": 1, "C_dI": 6, "C_xI": 5, "C_m": 8}


def adjoint_row(row: np.ndarray) -> np.ndarray:
    """Row of ``x^dag`` given the row of ``x``: conjugate and swap mode/conjugate columns."""
    row = np.asarray(row, dtype=complex)
    return row.reshape(-1, 2)[:, ::-1].conj().ravel()


def drift_matrix(params: SystemParams) -> np.ndarray:
    """Drift matrix of the linearized fluctuations.

    Cavities are written in their drive frames and the resonator in the lab
    frame, so that the matrix is time independent.

    Args:
        params: Device parameters.

    Returns:
        numpy.ndarray: Complex 6x6 matrix acting on ``(a, a^dag, c, c^dag, b, b^dag)``.
    """
    m = np.zeros((6, 6), dtype=complex)
    m[0, 0] = 1j * params.delta_a - params.kappa_a / 2
    m[0, 4] = m[0, 5] = -1j * params.G_plus
    m[2, 2] = 1j * params.delta_c - params.kappa_c / 2
    m[2, 4] = m[2, 5] = -1j * params.G_minus
    m[4, 4] = -1j * params.omega_m - params.gamma / 2
    m[4, 0] = m[4, 1] = -1j * params.G_plus
    m[4, 2] = m[4, 3] = -1j * params.G_minus
    for row in (0, 2, 4):
        m[row + 1] = adjoint_row(m[row])
    return m


def _input_matrix(params: SystemParams) -> np.ndarray:
    ell = np.zeros((6, 10), dtype=complex)
    ext_a, int_a = math.sqrt(params.kappa_e_a), math.sqrt(params.kappa_i_a)
    ext_c, int_c = math.sqrt(params.kappa_e_c), math.sqrt(params.kappa_i_c)
    for conj in (0, 1):
        ell[0 + conj, 0 + conj] = ext_a
        ell[0 + conj, 4 + conj] = int_a
        ell[2 + conj, 2 + conj] = ext_c
        ell[2 + conj, 6 + conj] = int_c
        ell[4 + conj, 8 + conj] = math.sqrt(params.gamma)
    return ell


def _output_matrix(params: SystemParams) -> np.ndarray:
    k = np.zeros((4, 6), dtype=complex)
    k[0, 0] = k[1, 1] = math.sqrt(params.kappa_e_a)
    k[2, 2] = k[3, 3] = math.sqrt(params.kappa_e_c)
    return k


def _drive_frame_solve(params, drift, omega_d, omega, ell, k) -> np.ndarray:
    system = -1j * omega_d * np.eye(6) - drift
    condition = np.linalg.cond(system)
    LOGGER.debug("solve at omega_d=%g, condition number %.3e", omega_d, condition)
    if not np.isfinite(condition) or condition > CONDITION_LIMIT:
        raise SingularSystemError(omega, float(condition))
    lu = linalg.lu_factor(system)
    response = k @ linalg.lu_solve(lu, ell)
    response[:, :4] -= np.eye(4)
    return response


def solve_full_scattering(params: SystemParams, omega: float = 0.0) -> ScatteringMatrix:
    """Exact input-output scattering at one analysis frequency.

    Each output row is taken from the doubled-system solve at the drive-frame
    frequency of its own cavity: ``omega - delta`` for mode rows and
    ``omega + delta`` for conjugate rows.

    Args:
        params: Device parameters.
        omega: Offset from the cavity resonances.

    Returns:
        ScatteringMatrix: The 4x10 scattering matrix.

    Raises:
        SingularSystemError: If a system matrix has condition number above 1e12.
    """
    report = check_stability(params)
    if not report.stable:
        LOGGER.warning("solving an unstable system (max real part %.3e)", report.max_real_part)

    drift = drift_matrix(params)
    ell = _input_matrix(params)
    k = _output_matrix(params)
    cache: Dict[float, np.ndarray] = {}

    def response(omega_d):
        if omega_d not in cache:
            cache[omega_d] = _drive_frame_solve(params, drift, omega_d, omega, ell, k)
        return cache[omega_d]

    entries = np.empty((4, 10), dtype=complex)
    entries[0] = response(omega - params.delta_a)[0]
    entries[1] = response(omega + params.delta_a)[1]
    entries[2] = response(omega - params.delta_c)[2]
    entries[3] = response(omega + params.delta_c)[3]
    return ScatteringMatrix(omega, entries)


def bogolyubov(G_plus: float, G_minus: float) -> Tuple[float, float, float]:
    """Squeezing parameters of the Bogolyubov modes.

    Args:
        G_plus: Blue-sideband coupling.
        G_minus: Red-sideband coupling, strictly larger than ``G_plus``.

    Returns:
        Tuple of ``cosh(xi)``, ``sinh(xi)`` and the effective coupling
        ``sqrt(G_minus^2 - G_plus^2)``.
    """
    if not (0 <= G_plus < G_minus):
        raise InstabilityError(
            "G_plus >= G_minus violated (G_plus=" + repr(G_plus) + ", G_minus=" + repr(G_minus) + ")"
        )
    G_script = math.sqrt((G_minus - G_plus) * (G_minus + G_plus))
    return G_minus / G_script, G_plus / G_script, G_script


def _require_symmetric(params: SystemParams):
    if not params.is_symmetric:
        raise ParameterError("rotating-wave coefficients need identical cavities")


def rwa_coefficients(params: SystemParams, omega: float = 0.0) -> CoefficientSet:
    """Output coefficients in the rotating-wave approximation.

    Args:
        params: Device parameters with identical cavities.
        omega: Offset from the cavity resonances.

    Returns:
        CoefficientSet: The ten coefficients at ``omega``.
    """
    _require_symmetric(params)
    _, _, G_script = bogolyubov(params.G_plus, params.G_minus)
    kappa, kappa_e, kappa_i = params.kappa_a, params.kappa_e_a, params.kappa_i_a
    chi_m = 1 / (params.gamma / 2 - 1j * omega)
    chi_a = 1 / (kappa / 2 - 1j * omega)
    denom = 1 + G_script**2 * chi_a * chi_m

    aa = chi_a * (1 + params.G_minus**2 * chi_a * chi_m) / denom
    cc = chi_a * (1 - params.G_plus**2 * chi_a * chi_m) / denom
    ac = params.G_plus * params.G_minus * chi_a**2 * chi_m / denom
    mech = -1j * math.sqrt(params.gamma * kappa_e) * chi_a * chi_m / denom
    mixed = math.sqrt(kappa_e * kappa_i)

    return CoefficientSet(
        A_d=kappa_e * aa - 1,
        A_x=kappa_e * ac,
        A_dI=mixed * aa,
        A_xI=mixed * ac,
        A_m=mech * params.G_plus,
        C_d=kappa_e * cc - 1,
        C_x=-kappa_e * ac,
        C_dI=mixed * cc,
        C_xI=-mixed * ac,
        C_m=mech * params.G_minus,
    )


def rwa_large_cooperativity(r: float, r_e: float, C_minus: float) -> CoefficientSet:
    """Resonant rotating-wave coefficients to leading order in ``1/C_minus``.

    Args:
        r: Coupling ratio, in [0, 1).
        r_e: External coupling ratio, in (0, 1].
        C_minus: Red-sideband cooperativity.

    Returns:
        CoefficientSet: The ten limiting coefficients.
    """
    if not (0 <= r < 1):
        raise ParameterError("r must lie in [0, 1) (got " + repr(r) + ")")
    if not (0 < r_e <= 1):
        raise ParameterError("r_e must lie in (0, 1] (got " + repr(r_e) + ")")
    if not C_minus > 0:
        raise ParameterError("C_minus must be positive (got " + repr(C_minus) + ")")

    r_i = 1 - r_e
    denom = 1 - r**2
    A_x = 2 * r * r_e / denom
    A_dI = 2 * math.sqrt(r_e * r_i) / denom
    A_xI = r * A_dI
    C_m = -2j * math.sqrt(r_e) / (math.sqrt(C_minus) * denom)
    return CoefficientSet(
        A_d=2 * r_e / denom - 1,
        A_x=A_x,
        A_dI=A_dI,
        A_xI=A_xI,
        A_m=r * C_m,
        C_d=-2 * r_e * r**2 / denom - 1,
        C_x=-A_x,
        C_dI=-(r**2) * A_dI,
        C_xI=-A_xI,
        C_m=C_m,
    )


def coefficients_from_scattering(S: ScatteringMatrix) -> CoefficientSet:
    values = {name: S.entries[0, col] for name, col in _A_COLUMNS.items()}
    values.update({name: S.entries[2, col] for name, col in _C_COLUMNS.items()})
    return CoefficientSet(**{k: complex(v) for k, v in values.items()})


def scattering_from_coefficients(coeffs: CoefficientSet, omega: float = 0.0) -> ScatteringMatrix:
    """Embed rotating-wave coefficients into a full 4x10 scattering matrix.

    Conjugate rows are the adjoints of the mode rows.
    """
    a_row = np.zeros(10, dtype=complex)
    c_row = np.zeros(10, dtype=complex)
    for name, col in _A_COLUMNS.items():
        a_row[col] = getattr(coeffs, name)
    for name, col in _C_COLUMNS.items():
        c_row[col] = getattr(coeffs, name)
    return ScatteringMatrix(omega, np.vstack([a_row, adjoint_row(a_row), c_row, adjoint_row(c_row)]))


def output_scattering(params: SystemParams, omega: float = 0.0, method: str = "full") -> ScatteringMatrix:
    """Scattering matrix from the exact solve (``"full"``) or the RWA closed form (``"rwa"``)."""
    if method == "full":
        return solve_full_scattering(params, omega)
    elif method == "rwa":
        return scattering_from_coefficients(rwa_coefficients(params, omega), omega)
    raise ParameterError("unknown method '" + str(method) + "', expected 'full' or 'rwa'")


def counter_rotating_weight(S: ScatteringMatrix) -> float:
    """Largest magnitude among the a_o and c_o entries that the RWA discards."""
    a_mask = np.ones(10, dtype=bool)
    a_mask[list(_A_COLUMNS.values())] = False
    c_mask = np.ones(10, dtype=bool)
    c_mask[list(_C_COLUMNS.values())] = False
    return float(max(np.max(np.abs(S.entries[0, a_mask])), np.max(np.abs(S.entries[2, c_mask]))))


def commutator_residual(S: ScatteringMatrix) -> float:
    """Deviation of the output commutators from their bosonic values.

    Only pairs of rows that come from the same doubled-system solve are
    compared, since the other pairs refer to disjoint frequency components.

    Args:
        S: Scattering matrix covering all ten inputs.

    Returns:
        float: ``max |[out_i, out_j^dag] - delta_ij sigma_i|`` over those pairs.
    """
    gram = (S.entries * INPUT_METRIC) @ S.entries.conj().T
    residual = 0.0
    for i, j in _SOLVE_GROUP_PAIRS:
        expected = OUTPUT_METRIC[i] if i == j else 0.0
        residual = max(residual, abs(gram[i, j] - expected))
    return float(residual)
