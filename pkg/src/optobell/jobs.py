"""Runs that turn a configuration into result files.

Each job takes resolved settings and an output stem, evaluates through
`optobell.sweep` and writes through `optobell.emit`. The command line and
the figure presets share these jobs.
"""

import logging
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

from .bell import evaluate_point
from .config import build_scenario, resolve
from .dynamics import INPUTS, OUTPUTS, coefficients_from_scattering, commutator_residual, output_scattering
from .emit import FORMATS, emit, write_svg
from .errors import ConfigError
from .model import check_stability
from .sensitivity import optimal_r, sensitivity_coefficients, threshold_r, tolerable_noise
from .sweep import Axis, ContourResult, SweepSpec, compare_rwa, extract_contour, noise_curves, run_sweep

LOGGER = logging.getLogger(__name__)


def scatter_job(settings: Mapping[str, Any]) -> Dict[str, Any]:
    """Scattering matrix and named coefficients at one point."""
    scenario = build_scenario(settings)
    S = output_scattering(scenario.params, scenario.omega, scenario.method)
    return {
        "omega": S.omega,
        "method": scenario.method,
        "entries": {out: {inp: S.entry(out, inp) for inp in INPUTS} for out in OUTPUTS},
        "coefficients": coefficients_from_scattering(S).as_dict(),
        "commutator_residual": commutator_residual(S),
    }


def bell_job(settings: Mapping[str, Any]) -> Dict[str, Any]:
    """Correlators and CHSH metrics at one point."""
    scenario = build_scenario(settings)
    report = check_stability(scenario.params)
    if not report.stable:
        LOGGER.warning("parameters are unstable (max real part %.3g)", report.max_real_part)
    corr, metrics = evaluate_point(scenario.params, scenario.inputs, scenario.omega, scenario.method)
    return {
        "stable": report.stable,
        "correlators": corr.as_dict(),
        "C": metrics.C,
        "D": metrics.D,
        "Z": metrics.Z,
        "F": metrics.F,
        "beta_opt": metrics.beta_opt,
        "S_max": metrics.S_max,
        "zeta_0": metrics.zeta_0,
        "barred_angles": list(metrics.barred_angles),
        "raw_angles": list(metrics.raw_angles),
        "violation": metrics.violation,
    }


def optimal_r_job(r_e: float) -> Dict[str, Any]:
    r = optimal_r(r_e)
    return {
        "r_e": r_e,
        "r_opt": r,
        "n_T": tolerable_noise(r),
        "threshold_r": threshold_r(),
    }


def _svg_path(stem: str, svg: bool) -> Optional[str]:
    return stem + ".svg" if svg else None


def sweep_job(
    settings: Mapping[str, Any],
    axes: Sequence[Axis],
    stem: str,
    outputs: Sequence[str] = ("C", "D", "F", "S_max"),
    workers: int = 1,
    formats: Sequence[str] = FORMATS,
    svg: bool = False,
) -> Dict[str, str]:
    spec = SweepSpec(axes=tuple(axes), settings=settings, outputs=tuple(outputs), workers=workers)
    result = run_sweep(spec)
    written = emit(result.records, stem, formats, config=spec.settings, leading=result.axis_names)
    path = _svg_path(stem, svg)
    if path:
        field = "F" if "F" in spec.outputs else spec.outputs[0]
        if len(spec.axes) == 2:
            written["svg"] = write_svg(
                path,
                grid=result.grid(field),
                x=result.axis_values(0),
                y=result.axis_values(1),
                xlabel=result.axis_names[0],
                ylabel=result.axis_names[1],
                title=field,
            )
        else:
            written["svg"] = write_svg(
                path,
                curves={field: (result.axis_values(0), result.grid(field))},
                xlabel=result.axis_names[0],
                ylabel=field,
            )
    return written


def contour_job(
    settings: Mapping[str, Any],
    axes: Sequence[Axis],
    stem: str,
    family: Optional[Tuple[str, Sequence[Any]]] = None,
    level: float = 0.5,
    workers: int = 1,
    formats: Sequence[str] = FORMATS,
    svg: bool = False,
) -> Tuple[List[Tuple[Any, ContourResult]], Dict[str, str]]:
    """Sweep a two-axis grid and extract the ``F = level`` boundary.

    With ``family=(key, values)`` the sweep is repeated for each value of
    ``key`` and the boundaries are written together, with ``key`` as a column.
    The grid itself is only written for single runs.

    Returns:
        The contour of each family member and the written paths.
    """
    if len(axes) != 2:
        raise ConfigError("a contour needs exactly two axes")
    base = resolve(settings)
    members = [(None, base)] if family is None else [(v, dict(base, **{family[0]: v})) for v in family[1]]

    contours, records, areas = [], [], []
    written: Dict[str, str] = {}
    grid = None
    for value, member in members:
        spec = SweepSpec(axes=tuple(axes), settings=member, outputs=("F",), workers=workers)
        result = run_sweep(spec)
        grid = result.grid("F")
        contour = extract_contour(grid, result.axis_values(0), result.axis_values(1), level)
        contours.append((value, contour))
        LOGGER.info("contour%s: %d polyline(s), area %.6g",
                    "" if family is None else " at " + family[0] + "=" + repr(value),
                    len(contour.polylines), contour.area)

        lead = {} if family is None else {family[0]: value}
        areas.append(dict(lead, area=contour.area, polylines=len(contour.polylines)))
        for k, line in enumerate(contour.polylines):
            for p, (x, y) in enumerate(line):
                records.append(dict(lead, polyline=k, point=p, **{axes[0].name: float(x), axes[1].name: float(y)}))
        if family is None:
            written.update(emit(result.records, stem, formats, config=spec.settings, leading=result.axis_names))

    leading = ([] if family is None else [family[0]]) + ["polyline", "point", axes[0].name, axes[1].name]
    for fmt, path in emit(records, stem + "_contour", formats, config=base, leading=leading).items():
        written["contour_" + fmt] = path
    for fmt, path in emit(areas, stem + "_area", formats, config=base, leading=leading[: 1 if family else 0]).items():
        written["area_" + fmt] = path

    path = _svg_path(stem, svg)
    if path:
        lines = [line for _, c in contours for line in c.polylines]
        written["svg"] = write_svg(
            path,
            grid=grid if family is None else None,
            x=axes[0].values(),
            y=axes[1].values(),
            polylines=lines,
            xlabel=axes[0].name,
            ylabel=axes[1].name,
            title="F = " + repr(level),
        )
    return contours, written


def noise_job(
    settings: Mapping[str, Any],
    stem: str,
    baths: Sequence[str] = ("m", "i", "e"),
    n_values: Optional[Sequence[float]] = None,
    r: Optional[float] = None,
    workers: int = 1,
    formats: Sequence[str] = FORMATS,
    svg: bool = False,
) -> Dict[str, str]:
    records = noise_curves(settings, baths=baths, n_values=n_values, r=r, workers=workers)
    written = emit(records, stem, formats, config=resolve(settings), leading=("bath", "n"))
    path = _svg_path(stem, svg)
    if path:
        curves = {}
        for bath in baths:
            rows = [rec for rec in records if rec["bath"] == bath]
            ns = [rec["n"] for rec in rows]
            curves["n_" + bath] = (ns, [rec["F"] for rec in rows])
            curves["n_" + bath + " linear"] = (ns, [rec["F_linear"] for rec in rows])
        written["svg"] = write_svg(path, curves=curves, xlabel="n", ylabel="F", level=0.5)
    return written


def compare_rwa_job(
    settings: Mapping[str, Any],
    kappas: Sequence[float],
    axes: Sequence[Axis],
    stem: str,
    workers: int = 1,
    formats: Sequence[str] = FORMATS,
) -> Dict[str, str]:
    if len(axes) != 2:
        raise ConfigError("compare-rwa needs exactly two axes")
    table = compare_rwa(kappas, settings, axes[0], axes[1], workers=workers)
    return emit(table, stem, formats, config=resolve(settings), leading=("kappa",))


def hardware_job(
    settings: Mapping[str, Any],
    stem: str,
    r_e_values: Sequence[float],
    formats: Sequence[str] = FORMATS,
) -> Dict[str, str]:
    """``F`` at the optimal coupling ratio for bath occupations of a given platform."""
    records = []
    base = resolve(settings)
    for r_e in r_e_values:
        r = optimal_r(r_e)
        scenario = build_scenario(dict(base, r_e=float(r_e), r=r))
        _, metrics = evaluate_point(scenario.params, scenario.inputs, scenario.omega, scenario.method)
        coeffs = sensitivity_coefficients(r, r_e, scenario.params.C_minus)
        records.append({
            "r_e": float(r_e),
            "r": r,
            "n_e": scenario.inputs.n_e_a,
            "n_i": scenario.inputs.n_i_a,
            "n_m": scenario.inputs.n_m,
            "F": metrics.F,
            "F0": coeffs.F0,
            "S_max": metrics.S_max,
            "violation": metrics.violation,
        })
        LOGGER.info("r_e=%g: r_opt=%.4f, F=%.4f", r_e, r, metrics.F)
    return emit(records, stem, formats, config=base, leading=("r_e",))


def float_list(text: str) -> List[float]:
    """Parse a comma-separated list of numbers."""
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError("malformed number list '" + text + "'") from exc