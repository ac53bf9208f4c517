import logging
from dataclasses import dataclass, fields
from typing import Dict, List, Sequence, Union

import numpy as np

from .dynamics import CoefficientSet, ScatteringMatrix, adjoint_row, scattering_from_coefficients
from .model import InputState

LOGGER = logging.getLogger(__name__)

OPERATORS = ("a", "a_dag", "c", "c_dag")


@dataclass(frozen=True)
class CorrelatorSet:
    """Stationary output correlators entering the CHSH functional.

    Attributes:
        n_a (float): ``<a_o^dag a_o>``.
        n_c (float): ``<c_o^dag c_o>``.
        cross_phase (complex): ``<a_o^dag c_o>``.
        cross_squeeze (complex): ``<a_o c_o>``.
        fourth (float): ``<a_o^dag c_o^dag c_o a_o>``.
    """

    n_a: float
    n_c: float
    cross_phase: complex
    cross_squeeze: complex
    fourth: float

    def as_dict(self) -> Dict[str, Union[float, complex]]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def cauchy_schwarz_ok(self, tol: float = 1e-12) -> bool:
        """Whether the two cross correlators respect their Cauchy-Schwarz bounds."""
        return (
            abs(self.cross_phase) ** 2 <= self.n_a * self.n_c + tol
            and abs(self.cross_squeeze) ** 2 <= self.n_a * (self.n_c + 1) + tol
        )


@dataclass(frozen=True)
class OutputGaussianState:
    """Displaced Gaussian state of the two output fields.

    Operators are indexed as ``(a_o, a_o^dag, c_o, c_o^dag)``.

    Attributes:
        mean (numpy.ndarray): ``(<a_o>, <c_o>)``.
        second (numpy.ndarray): 4x4 matrix of ordered fluctuation moments,
            ``second[i, j] = <d_i d_j>`` with ``d = o - <o>``.
    """

    mean: np.ndarray
    second: np.ndarray

    def __post_init__(self):
        mean = np.array(self.mean, dtype=complex).reshape(2)
        second = np.array(self.second, dtype=complex).reshape(4, 4)
        mean.flags.writeable = False
        second.flags.writeable = False
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "second", second)

    @property
    def full_mean(self) -> np.ndarray:
        """Means of all four operators, conjugates included."""
        a, c = self.mean
        return np.array([a, np.conj(a), c, np.conj(c)])

    def gram(self) -> np.ndarray:
        """Hermitian matrix ``<d_i^dag d_j>``, positive semidefinite for physical states."""
        return self.second[[1, 0, 3, 2], :]

    def is_physical(self, tol: float = 1e-10) -> bool:
        g = self.gram()
        g = (g + g.conj().T) / 2
        return bool(np.min(np.linalg.eigvalsh(g)) >= -tol)

    def displaced(self, shift_a: complex, shift_c: complex) -> "OutputGaussianState":
        return OutputGaussianState(self.mean + np.array([shift_a, shift_c]), self.second)


def _input_moments(inputs: InputState) -> np.ndarray:
    q = np.zeros((10, 10), dtype=complex)
    for port, n in enumerate(inputs.occupations()):
        q[2 * port, 2 * port + 1] = n + 1
        q[2 * port + 1, 2 * port] = n
    return q


def propagate_moments(S: ScatteringMatrix, inputs: InputState) -> OutputGaussianState:
    """Output Gaussian state for coherent probes and independent thermal baths.

    The state is assembled from the ``a_o`` row and the ``c_o^dag`` row of
    ``S``, which share one doubled-system solve, plus their adjoints.

    Args:
        S: Scattering matrix at the analysis frequency.
        inputs: Coherent probes and bath occupations.

    Returns:
        OutputGaussianState: Means and ordered second moments of the outputs.
    """
    rows = np.vstack([
        S.entries[0],
        adjoint_row(S.entries[0]),
        adjoint_row(S.entries[3]),
        S.entries[3],
    ])
    drive = np.zeros(10, dtype=complex)
    drive[:4] = [inputs.alpha_i, np.conj(inputs.alpha_i), inputs.chi_i, np.conj(inputs.chi_i)]
    mean = rows @ drive
    second = rows @ _input_moments(inputs) @ rows.T
    return OutputGaussianState(mean=(mean[0], mean[2]), second=second)


def _resolve(op: Union[int, str]) -> int:
    if isinstance(op, str):
        return OPERATORS.index(op)
    return int(op)


def _wick(second: np.ndarray, ops: Sequence[int]) -> complex:
    if not ops:
        return 1.0
    if len(ops) % 2:
        return 0.0
    first, rest = ops[0], ops[1:]
    total = 0j
    for k in range(len(rest)):
        remaining = rest[:k] + rest[k + 1:]
        total += second[first, rest[k]] * _wick(second, remaining)
    return total


def ordered_moment(state: OutputGaussianState, sequence: Sequence[Union[int, str]]) -> complex:
    """Expectation of an ordered product of output operators.

    Each factor is split into its mean and its fluctuation; products of
    fluctuations are reduced to ordered pair contractions.

    Args:
        state: Output Gaussian state.
        sequence: Operators, as indices or names from `OPERATORS`, left to right.

    Returns:
        complex: The expectation value.
    """
    ops = [_resolve(x) for x in sequence]
    means = state.full_mean
    total = 0j
    n = len(ops)
    for mask in range(1 << n):
        prefactor = 1 + 0j
        fluct = []
        for pos, op in enumerate(ops):
            if mask & (1 << pos):
                prefactor *= means[op]
            else:
                fluct.append(op)
        if len(fluct) % 2:
            continue
        total += prefactor * _wick(state.second, fluct)
    return complex(total)


def wick_fourth_moment(state: OutputGaussianState) -> float:
    """``<a_o^dag c_o^dag c_o a_o>`` of a displaced Gaussian state."""
    return float(ordered_moment(state, ("a_dag", "c_dag", "c", "a")).real)


def correlators(state: OutputGaussianState) -> CorrelatorSet:
    return CorrelatorSet(
        n_a=float(ordered_moment(state, ("a_dag", "a")).real),
        n_c=float(ordered_moment(state, ("c_dag", "c")).real),
        cross_phase=ordered_moment(state, ("a_dag", "c")),
        cross_squeeze=ordered_moment(state, ("a", "c")),
        fourth=wick_fourth_moment(state),
    )


def _number_second_moment(n: float) -> float:
    return 2 * n**2 + n


def closed_form_correlators(coeffs: CoefficientSet, inputs: InputState) -> CorrelatorSet:
    """Correlators from the closed-form coefficient expressions, term by term.

    Squared bath occupations in the fourth-order expression are thermal second
    moments ``<n^2> = 2 n^2 + n``. That expression keeps unsquared ``|alpha_i|``
    and ``|chi_i|`` probe factors and drops a ``2 n_i_c`` from the internal C
    bath term, so it departs from the moment engine once probes or that bath
    are on; see `closed_form_errata`.
    """
    Ad, Ax, AdI, AxI, Am = coeffs.A_d, coeffs.A_x, coeffs.A_dI, coeffs.A_xI, coeffs.A_m
    Cd, Cx, CdI, CxI, Cm = coeffs.C_d, coeffs.C_x, coeffs.C_dI, coeffs.C_xI, coeffs.C_m
    al, ch = inputs.alpha_i, inputs.chi_i
    alc, chc = np.conj(al), np.conj(ch)
    a2, c2 = abs(al) ** 2, abs(ch) ** 2
    ea, ec = inputs.n_e_a, inputs.n_e_c
    ia, ic = inputs.n_i_a, inputs.n_i_c
    m = inputs.n_m
    sa, sc = _number_second_moment(ea), _number_second_moment(ec)
    sia, sic = _number_second_moment(ia), _number_second_moment(ic)

    n_a = (
        abs(Ad) ** 2 * (a2 + ea)
        + abs(Ax) ** 2 * (c2 + ec + 1)
        + np.conj(Ad) * Ax * alc * chc
        + np.conj(Ax) * Ad * al * ch
        + abs(AdI) ** 2 * ia
        + abs(AxI) ** 2 * (ic + 1)
        + abs(Am) ** 2 * (m + 1)
    )
    n_c = (
        abs(Cd) ** 2 * (c2 + ec)
        + abs(Cx) ** 2 * (a2 + ea + 1)
        + np.conj(Cd) * Cx * alc * chc
        + np.conj(Cx) * Cd * al * ch
        + abs(CdI) ** 2 * ic
        + abs(CxI) ** 2 * (ia + 1)
        + abs(Cm) ** 2 * m
    )
    cross_phase = (
        np.conj(Ad) * Cx * alc**2
        + (np.conj(Ad) * Cd + np.conj(Ax) * Cx) * alc * ch
        + np.conj(Ax) * Cd * ch**2
    )
    cross_squeeze = (
        Ad * Cx * (a2 + ea + 1)
        + Ax * Cd * (c2 + ec)
        + Ad * Cd * al * ch
        + Ax * Cx * alc * chc
        + AdI * CxI * (ia + 1)
        + AxI * CdI * ic
        + Am * Cm * m
    )

    # Pieces shared by the bracketed groups of the fourth-order expression.
    p_d = abs(Cd) ** 2 * (c2 + ec)
    p_x = abs(Cx) ** 2 * (a2 + ea + 1)
    p_dI = abs(CdI) ** 2 * ic
    p_xI = abs(CxI) ** 2 * (ia + 1)
    p_m = abs(Cm) ** 2 * m
    q_dd = Ad * Cd * al * ch
    q_dx = Ad * Cx * (a2 + ea)
    q_xd = Ax * Cd * (c2 + ec + 1)
    q_xx = Ax * Cx * alc * chc
    q_dI = AdI * CxI * ia
    q_xI = AxI * CdI * (ic + 1)
    q_m = Am * Cm * (m + 1)

    fourth = (
        abs(Ad * Cx) ** 2 * (a2**2 + a2 + 4 * a2 * ea + sa)
        + abs(Ax * Cd) ** 2 * (c2**2 + 3 * c2 + 4 * c2 * ec + sc + 2 * ec + 1)
        + abs(Ad) ** 2 * (abs(al) + ea) * (p_d + p_dI + p_xI + p_m)
        + abs(Ax) ** 2 * (abs(ch) + ec + 1) * (p_x + p_dI + p_xI + p_m)
        + abs(AdI) ** 2 * ia * (p_d + p_x + p_dI + p_m)
        + abs(AxI) ** 2 * (ic + 1) * (p_d + p_x + p_xI + p_m)
        + abs(Am) ** 2 * (m + 1) * (p_d + p_x + p_dI + p_xI)
        + abs(AdI * CxI) ** 2 * sia
        + abs(AxI * CdI) ** 2 * (sic + 1)
        + abs(Am * Cm) ** 2 * (_number_second_moment(m) + 2 * m + 1)
        + np.conj(Ad * Cd) * alc * chc * (q_xx + q_dI + q_xI + q_m)
        + np.conj(Ad * Cx) * (a2 + ea) * (q_xd + q_dI + q_xI + q_m)
        + np.conj(Ax * Cd) * (c2 + ec + 1) * (q_dx + q_dI + q_xI + q_m)
        + np.conj(Ax * Cx) * al * ch * (q_dd + q_dI + q_xI + q_m)
        + np.conj(AdI * CxI) * ia * (q_dd + q_dx + q_xd + q_xx + q_xI + q_m)
        + np.conj(AxI * CdI) * (ic + 1) * (q_dd + q_dx + q_xd + q_xx + q_dI + q_m)
        + np.conj(Am * Cm) * (m + 1) * (q_dd + q_dx + q_xd + q_xx + q_dI + q_xI)
        + abs(Ad) ** 2 * np.conj(Cd) * Cx * chc * (alc * a2 + 2 * alc * ea)
        + abs(Ad) ** 2 * Cd * np.conj(Cx) * ch * (al * a2 + 2 * al * ea)
        + abs(Ax) ** 2 * np.conj(Cd) * Cx * alc * (chc * c2 + 2 * chc * ec + 2 * chc)
        + abs(Ax) ** 2 * Cd * np.conj(Cx) * al * (ch * c2 + 2 * ch * ec + 2 * ch)
        + np.conj(Ad) * Ax * abs(Cd) ** 2 * alc * (chc * c2 + 2 * chc * ec + chc)
        + Ad * np.conj(Ax) * abs(Cd) ** 2 * al * (ch * c2 + 2 * ch * ec + ch)
        + np.conj(Ad) * Ax * abs(Cx) ** 2 * chc * (alc * a2 + 2 * alc * ea + alc)
        + Ad * np.conj(Ax) * abs(Cx) ** 2 * ch * (al * a2 + 2 * al * ea + al)
    )

    return CorrelatorSet(
        n_a=float(np.real(n_a)),
        n_c=float(np.real(n_c)),
        cross_phase=complex(cross_phase),
        cross_squeeze=complex(cross_squeeze),
        fourth=float(np.real(fourth)),
    )


@dataclass(frozen=True)
class Erratum:
    """Disagreement between the closed-form expressions and the moment engine.

    Attributes:
        field (str): Name of the `CorrelatorSet` field.
        closed_form (complex): Value from `closed_form_correlators`.
        engine (complex): Value from `propagate_moments` and `correlators`.
        coefficients (CoefficientSet): Coefficients that reproduce it.
        inputs (InputState): Inputs that reproduce it.
    """

    field: str
    closed_form: complex
    engine: complex
    coefficients: CoefficientSet
    inputs: InputState

    @property
    def relative_error(self) -> float:
        scale = max(abs(self.closed_form), abs(self.engine))
        return abs(self.closed_form - self.engine) / scale if scale else 0.0


def closed_form_errata(coeffs: CoefficientSet, inputs: InputState, rtol: float = 1e-9) -> List[Erratum]:
    """Compare the closed-form correlators with the moment engine, field by field.

    Args:
        coeffs: Rotating-wave coefficients.
        inputs: Coherent probes and bath occupations.
        rtol: Relative tolerance of the comparison.

    Returns:
        list[Erratum]: One entry per disagreeing field, empty if all agree.
    """
    closed = closed_form_correlators(coeffs, inputs)
    engine = correlators(propagate_moments(scattering_from_coefficients(coeffs), inputs))
    found = []
    for f in fields(CorrelatorSet):
        x, y = getattr(closed, f.name), getattr(engine, f.name)
        if abs(x - y) > rtol * max(abs(x), abs(y)) + 1e-15:
            LOGGER.warning("closed-form %s disagrees with the moment engine: %r vs %r", f.name, x, y)
            found.append(Erratum(f.name, complex(x), complex(y), coeffs, inputs))
    return found
