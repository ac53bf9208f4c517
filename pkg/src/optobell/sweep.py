import logging
import math
from dataclasses import dataclass, field
from multiprocessing import Pool
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .bell import evaluate_point
from .config import SWEEPABLE, build_scenario, resolve
from .errors import (
    ConfigError,
    ConvergenceError,
    InstabilityError,
    NoSignalError,
    ParameterError,
    SingularSystemError,
)
from .model import check_stability
from .sensitivity import linearized_f, optimal_r, sensitivity_coefficients

LOGGER = logging.getLogger(__name__)

OUTPUT_NAMES = ("C", "D", "F", "S_max", "Z", "beta_opt", "fourth", "n_a", "n_c", "violation")
DEFAULT_OUTPUTS = ("C", "D", "F", "S_max")


@dataclass(frozen=True)
class Axis:
    """One swept parameter.

    Attributes:
        name (str): Configuration key, from `config.SWEEPABLE`.
        start (float): First value.
        stop (float): Last value.
        count (int): Number of values, at least 2.
        scale (str): ``"linear"`` or ``"log"``.
    """

    name: str
    start: float
    stop: float
    count: int
    scale: str = "linear"

    def __post_init__(self):
        if self.name not in SWEEPABLE:
            raise ConfigError("cannot sweep '" + self.name + "', expected one of: " + ", ".join(SWEEPABLE))
        if self.count < 2:
            raise ConfigError("axis '" + self.name + "' needs at least 2 points")
        if not self.start < self.stop:
            raise ConfigError("axis '" + self.name + "' needs start < stop")
        if self.scale not in ("linear", "log"):
            raise ConfigError("axis scale must be 'linear' or 'log'")
        if self.scale == "log" and self.start <= 0:
            raise ConfigError("log axis '" + self.name + "' needs a positive start")

    @classmethod
    def parse(cls, text: str) -> "Axis":
        """Parse ``name:start:stop:count[:log]``."""
        parts = text.split(":")
        if len(parts) not in (4, 5):
            raise ConfigError("axis '" + text + "' is not of the form name:start:stop:count[:log]")
        try:
            start, stop, count = float(parts[1]), float(parts[2]), int(parts[3])
        except ValueError as exc:
            raise ConfigError("axis '" + text + "' has a malformed number") from exc
        return cls(parts[0], start, stop, count, parts[4] if len(parts) == 5 else "linear")

    def values(self) -> np.ndarray:
        if self.scale == "log":
            return np.geomspace(self.start, self.stop, self.count)
        return np.linspace(self.start, self.stop, self.count)


@dataclass(frozen=True)
class SweepSpec:
    """Grid of points to evaluate.

    Attributes:
        axes (tuple[Axis, ...]): One or two axes; the first one varies slowest.
        settings (dict): Fixed configuration shared by all points.
        outputs (tuple[str, ...]): Names from `OUTPUT_NAMES`.
        workers (int): Number of worker processes.
    """

    axes: Tuple[Axis, ...]
    settings: Mapping[str, Any] = field(default_factory=dict)
    outputs: Tuple[str, ...] = DEFAULT_OUTPUTS
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "axes", tuple(self.axes))
        object.__setattr__(self, "outputs", tuple(self.outputs))
        if len(self.axes) not in (1, 2):
            raise ConfigError("a sweep needs one or two axes")
        if len({a.name for a in self.axes}) != len(self.axes):
            raise ConfigError("sweep axes must be distinct")
        unknown = [o for o in self.outputs if o not in OUTPUT_NAMES]
        if unknown:
            raise ConfigError("unknown outputs " + ", ".join(unknown) + ", expected: " + ", ".join(OUTPUT_NAMES))
        if self.workers < 1:
            raise ConfigError("workers must be positive")
        object.__setattr__(self, "settings", resolve(self.settings))


@dataclass(frozen=True)
class SweepResult:
    """Records of a sweep in grid order.

    Attributes:
        spec (SweepSpec): The evaluated sweep.
        records (list[dict]): One record per point, with the axis values, the
            requested outputs and a ``stable`` flag.
    """

    spec: SweepSpec
    records: List[Dict[str, Any]]

    @property
    def axis_names(self) -> List[str]:
        return [a.name for a in self.spec.axes]

    def axis_values(self, index: int) -> np.ndarray:
        return self.spec.axes[index].values()

    def grid(self, output: str) -> np.ndarray:
        shape = tuple(a.count for a in self.spec.axes)
        return np.array([rec[output] for rec in self.records], dtype=float).reshape(shape)


def _outputs_from(corr, metrics) -> Dict[str, float]:
    return {
        "C": metrics.C,
        "D": metrics.D,
        "F": metrics.F,
        "S_max": metrics.S_max,
        "Z": metrics.Z,
        "beta_opt": metrics.beta_opt,
        "fourth": corr.fourth,
        "n_a": corr.n_a,
        "n_c": corr.n_c,
        "violation": float(metrics.violation),
    }


def _evaluate_cell(task) -> Dict[str, Any]:
    settings, outputs = task
    values = {name: math.nan for name in outputs}
    try:
        scenario = build_scenario(settings)
    except ParameterError as exc:
        LOGGER.debug("invalid cell at %r: %s", settings, exc)
        values["stable"] = False
        return values
    stable = check_stability(scenario.params).stable
    if stable:
        try:
            corr, metrics = evaluate_point(scenario.params, scenario.inputs, scenario.omega, scenario.method)
        except NoSignalError:
            LOGGER.debug("no signal at %r", settings)
        except (InstabilityError, SingularSystemError, ConvergenceError) as exc:
            LOGGER.debug("cell failed at %r: %s", settings, exc)
            stable = False
        else:
            full = _outputs_from(corr, metrics)
            values = {name: full[name] for name in outputs}
    values["stable"] = stable
    return values


def _grid_tasks(spec: SweepSpec):
    grids = [a.values() for a in spec.axes]
    points = [(x,) for x in grids[0]] if len(grids) == 1 else [(x, y) for x in grids[0] for y in grids[1]]
    for point in points:
        settings = dict(spec.settings)
        for axis, value in zip(spec.axes, point):
            settings[axis.name] = float(value)
        yield point, (settings, spec.outputs)


def _map(func, tasks, workers: int):
    if workers == 1 or len(tasks) < 2:
        return [func(t) for t in tasks]
    chunksize = max(1, len(tasks) // (workers * 4))
    with Pool(processes=workers) as pool:
        return pool.map(func, tasks, chunksize=chunksize)


def run_sweep(spec: SweepSpec) -> SweepResult:
    """Evaluate every grid point of a sweep.

    Unstable or singular cells are kept, with NaN outputs and ``stable``
    set to False. The records are in grid order whatever the worker count.

    Args:
        spec: The sweep to run.

    Returns:
        SweepResult: One record per grid point.
    """
    points, tasks = zip(*_grid_tasks(spec))
    LOGGER.info(
        "sweep: %s grid on %d worker(s)", "x".join(str(a.count) for a in spec.axes), spec.workers
    )
    rows = _map(_evaluate_cell, list(tasks), spec.workers)

    records = []
    for point, row in zip(points, rows):
        rec = {axis.name: float(v) for axis, v in zip(spec.axes, point)}
        rec.update(row)
        records.append(rec)
    unstable = sum(1 for r in records if not r["stable"])
    if unstable:
        LOGGER.warning("%d of %d cells were unstable or singular", unstable, len(records))
    return SweepResult(spec=spec, records=records)


@dataclass(frozen=True)
class ContourResult:
    """Level set of a gridded field.

    Attributes:
        level (float): Contour level.
        polylines (tuple[numpy.ndarray, ...]): Ordered ``(k, 2)`` arrays of
            ``(x, y)`` points on grid cell edges.
        area (float): Area of the region where the field exceeds the level.
    """

    level: float
    polylines: Tuple[np.ndarray, ...]
    area: float

    @property
    def empty(self) -> bool:
        return not self.polylines


# Corners are v0=(i, j), v1=(i+1, j), v2=(i+1, j+1), v3=(i, j+1); bit k is set
# when corner k lies above the level. Edges are e0=v0-v1, e1=v1-v2, e2=v3-v2
# and e3=v0-v3. Saddles are resolved by the cell-centre average.
SEGMENT_LOOKUP = {
    0: (),
    1: ((3, 0),),
    2: ((0, 1),),
    3: ((3, 1),),
    4: ((1, 2),),
    6: ((0, 2),),
    7: ((3, 2),),
    8: ((2, 3),),
    9: ((0, 2),),
    11: ((1, 2),),
    12: ((3, 1),),
    13: ((0, 1),),
    14: ((3, 0),),
    15: (),
}
SADDLE_LOOKUP = {
    (5, True): ((0, 1), (2, 3)),
    (5, False): ((3, 0), (1, 2)),
    (10, True): ((3, 0), (1, 2)),
    (10, False): ((0, 1), (2, 3)),
}


def _edge(i: int, j: int, e: int) -> Tuple[int, int, int]:
    # Key of a cell edge shared with the neighbouring cell: (axis, i, j).
    if e == 0:
        return (0, i, j)
    elif e == 1:
        return (1, i + 1, j)
    elif e == 2:
        return (0, i, j + 1)
    return (1, i, j)


def _edge_point(key, grid, x, y, level) -> Tuple[float, float]:
    axis, i, j = key
    if axis == 0:
        f0, f1 = grid[i, j], grid[i + 1, j]
        t = (level - f0) / (f1 - f0)
        return (x[i] + t * (x[i + 1] - x[i]), y[j])
    f0, f1 = grid[i, j], grid[i, j + 1]
    t = (level - f0) / (f1 - f0)
    return (x[i], y[j] + t * (y[j + 1] - y[j]))


def _join(segments: List[Tuple[tuple, tuple]]) -> List[List[tuple]]:
    neighbours: Dict[tuple, List[int]] = {}
    for idx, (a, b) in enumerate(segments):
        neighbours.setdefault(a, []).append(idx)
        neighbours.setdefault(b, []).append(idx)

    used = [False] * len(segments)

    def walk(start_seg, start_key):
        chain = [start_key]
        seg, key = start_seg, start_key
        while True:
            used[seg] = True
            a, b = segments[seg]
            key = b if key == a else a
            chain.append(key)
            nxt = [s for s in neighbours[key] if not used[s]]
            if not nxt:
                return chain
            seg = nxt[0]

    chains = []
    # Open chains start at keys touched by a single segment.
    for idx, (a, b) in enumerate(segments):
        if used[idx]:
            continue
        for key in (a, b):
            if len(neighbours[key]) == 1:
                chains.append(walk(idx, key))
                break
    for idx, (a, _) in enumerate(segments):
        if not used[idx]:
            chains.append(walk(idx, a))
    return chains


def region_area(grid: np.ndarray, x: Sequence[float], y: Sequence[float], level: float = 0.5) -> float:
    """Cell-counted area of ``grid > level``, each cell weighted by its fraction of corners above."""
    grid = np.asarray(grid, dtype=float)
    above = np.where(np.isnan(grid), 0.0, (grid > level).astype(float))
    frac = (above[:-1, :-1] + above[1:, :-1] + above[1:, 1:] + above[:-1, 1:]) / 4
    cells = np.outer(np.diff(np.asarray(x, dtype=float)), np.diff(np.asarray(y, dtype=float)))
    return float(np.sum(frac * cells))


def extract_contour(
    grid: np.ndarray, x: Sequence[float], y: Sequence[float], level: float = 0.5
) -> ContourResult:
    """Marching-squares level set of a gridded field.

    Args:
        grid: Field values, ``grid[i, j]`` at ``(x[i], y[j])``.
        x: Coordinates along the first grid dimension.
        y: Coordinates along the second grid dimension.
        level: Contour level.

    Returns:
        ContourResult: Polylines with linear interpolation along cell edges.
        Cells with a non-finite corner are skipped.
    """
    grid = np.asarray(grid, dtype=float)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if grid.shape != (len(x), len(y)):
        raise ConfigError("grid shape " + str(grid.shape) + " does not match the axes")

    segments = []
    nx, ny = grid.shape
    for i in range(nx - 1):
        for j in range(ny - 1):
            corners = (grid[i, j], grid[i + 1, j], grid[i + 1, j + 1], grid[i, j + 1])
            if not all(np.isfinite(corners)):
                continue
            case = sum(1 << k for k, v in enumerate(corners) if v > level)
            if case in (5, 10):
                pairs = SADDLE_LOOKUP[(case, sum(corners) / 4 > level)]
            else:
                pairs = SEGMENT_LOOKUP[case]
            for e0, e1 in pairs:
                segments.append((_edge(i, j, e0), _edge(i, j, e1)))

    polylines = []
    for chain in _join(segments):
        polylines.append(np.array([_edge_point(k, grid, x, y, level) for k in chain]))
    return ContourResult(level=level, polylines=tuple(polylines), area=region_area(grid, x, y, level))


def upper_boundary(grid: np.ndarray, y: np.ndarray, level: float = 0.5) -> np.ndarray:
    """For each row, the last position along ``y`` where the field drops through ``level``.

    Rows without such a crossing give NaN.
    """
    out = np.full(grid.shape[0], np.nan)
    for i, row in enumerate(grid):
        for j in range(len(row) - 1, 0, -1):
            f0, f1 = row[j - 1], row[j]
            if np.isfinite(f0) and np.isfinite(f1) and f0 > level >= f1:
                out[i] = y[j - 1] + (level - f0) / (f1 - f0) * (y[j] - y[j - 1])
                break
    return out


def compare_rwa(
    kappas: Sequence[float],
    settings: Mapping[str, Any],
    x_axis: Axis,
    y_axis: Axis,
    level: float = 0.5,
    workers: int = 1,
) -> List[Dict[str, Any]]:
    """Violation regions from the exact solve against the rotating-wave solution.

    Args:
        kappas: Cavity linewidths to compare.
        settings: Fixed configuration.
        x_axis: First sweep axis, usually the probe amplitude.
        y_axis: Second sweep axis, usually the coupling ratio.
        level: Boundary level.
        workers: Number of worker processes.

    Returns:
        list[dict]: Per linewidth, the region areas of both methods and the
        largest displacement of the upper boundary along ``y_axis``, in
        parameter units and in grid cells.
    """
    table = []
    cell = (y_axis.stop - y_axis.start) / (y_axis.count - 1)
    y = y_axis.values()
    x = x_axis.values()
    for kappa in kappas:
        areas, crossings = {}, {}
        for method in ("full", "rwa"):
            spec = SweepSpec(
                axes=(x_axis, y_axis),
                settings=dict(settings, kappa=float(kappa), method=method),
                outputs=("F",),
                workers=workers,
            )
            grid = run_sweep(spec).grid("F")
            areas[method] = region_area(grid, x, y, level)
            crossings[method] = upper_boundary(grid, y, level)
        diff = np.abs(crossings["full"] - crossings["rwa"])
        shift = float(np.nanmax(diff)) if np.any(np.isfinite(diff)) else math.nan
        table.append({
            "kappa": float(kappa),
            "area_full": areas["full"],
            "area_rwa": areas["rwa"],
            "max_displacement": shift,
            "max_displacement_cells": shift / cell,
        })
        LOGGER.info("kappa=%g: full area %.6g, rwa area %.6g", kappa, areas["full"], areas["rwa"])
    return table


def noise_curves(
    settings: Mapping[str, Any],
    baths: Sequence[str] = ("m", "i", "e"),
    n_values: Optional[Sequence[float]] = None,
    r: Optional[float] = None,
    workers: int = 1,
) -> List[Dict[str, Any]]:
    """``F`` against each bath occupation, with the other baths empty.

    Args:
        settings: Fixed configuration. Its bath occupations are ignored.
        baths: Any of ``"m"``, ``"e"``, ``"i"``.
        n_values: Occupations to evaluate. Defaults to 101 points on [0, 0.05].
        r: Coupling ratio; defaults to `optimal_r` at the configured ``r_e``.
        workers: Number of worker processes.

    Returns:
        list[dict]: Records with ``bath``, ``n``, ``r``, the exact ``F`` and
        the first-order estimate ``F_linear``.
    """
    if n_values is None:
        n_values = np.linspace(0.0, 0.05, 101)
    base = resolve(settings)
    if r is None:
        r = optimal_r(base["r_e"])
    base.update(r=float(r), n_e=0.0, n_i=0.0, n_m=0.0, n_e_a=None, n_e_c=None, n_i_a=None, n_i_c=None)
    params = build_scenario(base).params
    coeffs = sensitivity_coefficients(params.r, params.r_e, params.C_minus)
    keys = {"m": "n_m", "e": "n_e", "i": "n_i"}

    tasks, labels = [], []
    for bath in baths:
        if bath not in keys:
            raise ConfigError("unknown bath '" + str(bath) + "', expected one of m, e, i")
        for n in n_values:
            tasks.append((dict(base, **{keys[bath]: float(n)}), ("F",)))
            labels.append((bath, float(n)))

    rows = _map(_evaluate_cell, tasks, workers)
    records = []
    for (bath, n), row in zip(labels, rows):
        linear = linearized_f(coeffs, **{keys[bath]: n})
        records.append({"bath": bath, "n": n, "r": float(r), "F": row["F"], "F_linear": linear, "stable": row["stable"]})
    return records
