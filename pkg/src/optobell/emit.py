import json
import logging
import math
import os
from typing import Any, Dict, List, Mapping, Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

from .errors import ConfigError  # noqa: E402

LOGGER = logging.getLogger(__name__)

FORMATS = ("csv", "json")


def _package_version() -> str:
    from . import __version__

    return __version__


def _column_order(records: Sequence[Mapping[str, Any]], leading: Sequence[str]) -> List[str]:
    names = set()
    for rec in records:
        names.update(rec)
    rest = sorted(n for n in names if n not in leading)
    return list(leading) + rest


def plain_value(value: Any) -> Any:
    """Convert a value into something JSON and CSV writers accept."""
    if isinstance(value, (bool, np.bool_)):
        return int(value)
    if isinstance(value, (np.floating, np.integer)):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    return value


def write_csv(records: Sequence[Mapping[str, Any]], path: str, leading: Sequence[str] = ()) -> str:
    """Write records as CSV, the ``leading`` columns first and the rest sorted.

    Booleans are written as 0 and 1, missing values as ``nan``.
    """
    columns = _column_order(records, leading)
    frame = pd.DataFrame([{k: plain_value(rec.get(k)) for k in columns} for rec in records], columns=columns)
    frame.to_csv(path, index=False, na_rep="nan", lineterminator="\n")
    return path


def write_json(
    records: Sequence[Mapping[str, Any]],
    path: str,
    config: Optional[Mapping[str, Any]] = None,
    leading: Sequence[str] = (),
) -> str:
    """Write records with the resolved configuration. NaN becomes ``null``."""
    columns = _column_order(records, leading)
    doc = {
        "config": {k: plain_value(v) for k, v in sorted((config or {}).items())},
        "records": [{k: plain_value(rec.get(k)) for k in columns} for rec in records],
        "meta": {"version": _package_version(), "columns": columns},
    }
    with open(path, "w") as handle:
        json.dump(doc, handle, indent=2, sort_keys=False)
        handle.write("\n")
    return path


def write_svg(
    path: str,
    grid: Optional[np.ndarray] = None,
    x: Optional[Sequence[float]] = None,
    y: Optional[Sequence[float]] = None,
    polylines: Sequence[np.ndarray] = (),
    curves: Optional[Mapping[str, Sequence[Sequence[float]]]] = None,
    xlabel: str = "",
    ylabel: str = "",
    title: str = "",
    level: Optional[float] = None,
) -> str:
    """Render a heatmap with contour polylines, or a set of line curves, as SVG.

    Args:
        path: Destination file.
        grid: Optional field with ``grid[i, j]`` at ``(x[i], y[j])``.
        x, y: Grid coordinates.
        polylines: Contour polylines as ``(k, 2)`` arrays, each drawn with
            the SVG id ``contour-<k>``.
        curves: Optional mapping of label to ``(xs, ys)`` for line plots.
        xlabel, ylabel, title: Axis text.
        level: Reference level drawn as a horizontal line on curve plots.

    Returns:
        str: ``path``.
    """
    plt.rcParams["svg.hashsalt"] = "optobell"
    fig, ax = plt.subplots(figsize=(6, 4.5))
    try:
        if grid is not None:
            mesh = ax.pcolormesh(np.asarray(x), np.asarray(y), np.asarray(grid, dtype=float).T, shading="nearest")
            fig.colorbar(mesh, ax=ax)
        for k, line in enumerate(polylines):
            line = np.asarray(line)
            ax.plot(line[:, 0], line[:, 1], color="white" if grid is not None else "black", lw=1.2, gid="contour-" + str(k))
        if curves:
            for label, (xs, ys) in curves.items():
                ax.plot(xs, ys, label=label)
            if level is not None:
                ax.axhline(level, color="grey", ls="--", lw=0.8)
            ax.legend()
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title)
        fig.savefig(path, format="svg", metadata={"Date": None})
    finally:
        plt.close(fig)
    return path


def emit(
    records: Sequence[Mapping[str, Any]],
    stem: str,
    formats: Sequence[str] = FORMATS,
    config: Optional[Mapping[str, Any]] = None,
    leading: Sequence[str] = (),
) -> Dict[str, str]:
    """Write records to ``<stem>.csv`` and ``<stem>.json``.

    Returns:
        dict: Format name to written path.
    """
    unknown = [f for f in formats if f not in FORMATS]
    if unknown:
        raise ConfigError("unknown output formats: " + ", ".join(unknown))
    directory = os.path.dirname(stem)
    if directory:
        os.makedirs(directory, exist_ok=True)

    written = {}
    if "csv" in formats:
        written["csv"] = write_csv(records, stem + ".csv", leading=leading)
    if "json" in formats:
        written["json"] = write_json(records, stem + ".json", config=config, leading=leading)
    for path in written.values():
        LOGGER.info("wrote %d records to %s", len(records), path)
    return written
