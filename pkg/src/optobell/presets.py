"""Figure and hardware presets.

Each preset fixes a parameter block, a grid and the job that evaluates it.
Energies are in units of the mechanical frequency. Values chosen here:

- ``G_minus = 0.2`` for the probe sweeps.
- ``r_e`` in {0.7, 0.9, 0.99} for the boundary family.
- External bath occupations {0, 0.005, 0.01, 0.02} for the noisy boundaries.
"""

import logging
import os
from dataclasses import dataclass, field
from typing import Any, Dict, Mapping, Optional, Sequence, Tuple

import numpy as np

from . import jobs
from .emit import FORMATS
from .errors import ConfigError
from .model import mechanical_occupancy, thermal_ratio
from .sweep import Axis

LOGGER = logging.getLogger(__name__)

PROBE_SWEEP = {"kappa": 0.1, "r_e": 0.9, "gamma": 1e-5, "G_minus": 0.2}
NOISE_SWEEP = {"kappa": 0.01, "r_e": 0.9, "gamma": 1e-5, "G_minus": 0.2, "alpha_i": 0.0}

# Cavity baths take the thermal ratio kT/(hf) of the platform.
MICROWAVE_TEMPERATURE = 7e-3
MICROWAVE_CAVITY_HZ = 10e9
OPTICAL_TEMPERATURE = 300.0
OPTICAL_CAVITY_HZ = 500e12
# The 10 MHz resonator sits at the 7 mK base temperature.
MICROWAVE_MECHANICS_HZ = 10e6


@dataclass(frozen=True)
class Preset:
    """A named run.

    Attributes:
        name (str): Preset name.
        description (str): One-line summary.
        kind (str): One of ``"contour"``, ``"noise"``, ``"compare-rwa"`` or
            ``"hardware"``.
        settings (dict): Fixed configuration.
        axes (tuple[Axis, ...]): Grid axes, for contour and comparison runs.
        extra (dict): Job-specific options: ``family``, ``n_stop``,
            ``n_count``, ``kappas`` or ``r_e_values``.
    """

    name: str
    description: str
    kind: str
    settings: Mapping[str, Any]
    axes: Tuple[Axis, ...] = ()
    extra: Mapping[str, Any] = field(default_factory=dict)


def _probe_axes(count: int) -> Tuple[Axis, Axis]:
    return (Axis("alpha_i", 0.0, 0.4, count), Axis("r", 0.001, 0.25, count))


def _microwave_settings() -> Dict[str, Any]:
    n = thermal_ratio(MICROWAVE_TEMPERATURE, MICROWAVE_CAVITY_HZ)
    return dict(NOISE_SWEEP, n_e=n, n_i=n, n_m=mechanical_occupancy(MICROWAVE_TEMPERATURE, MICROWAVE_MECHANICS_HZ))


def _optical_settings() -> Dict[str, Any]:
    n = thermal_ratio(OPTICAL_TEMPERATURE, OPTICAL_CAVITY_HZ)
    return dict(NOISE_SWEEP, n_e=n, n_i=n, n_m=0.0)


def _build() -> Dict[str, Preset]:
    presets = [
        Preset("fig2a", "F over probe amplitude and coupling ratio, with its F = 1/2 boundary",
               "contour", PROBE_SWEEP, _probe_axes(201)),
        Preset("fig2b", "F = 1/2 boundaries for several external coupling ratios",
               "contour", PROBE_SWEEP, _probe_axes(201), {"family": ("r_e", (0.7, 0.9, 0.99))}),
        Preset("fig3a", "F against each bath occupation at the optimal coupling ratio, r_e = 0.9",
               "noise", NOISE_SWEEP, extra={"n_stop": 0.05, "n_count": 101}),
        Preset("fig3b", "F against each bath occupation at the optimal coupling ratio, r_e = 0.99",
               "noise", dict(NOISE_SWEEP, r_e=0.99), extra={"n_stop": 0.05, "n_count": 101}),
        Preset("fig4", "F = 1/2 boundaries for several external bath occupations",
               "contour", PROBE_SWEEP, _probe_axes(201), {"family": ("n_e", (0.0, 0.005, 0.01, 0.02))}),
        Preset("fig5", "violation regions of the exact solution against the rotating-wave one",
               "compare-rwa", PROBE_SWEEP, _probe_axes(101), {"kappas": (0.01, 0.02, 0.1)}),
        Preset("microwave", "F at the optimal coupling ratio for a 7 mK microwave platform",
               "hardware", _microwave_settings(), extra={"r_e_values": (0.9, 0.99)}),
        Preset("optical", "F at the optimal coupling ratio for a room-temperature optical platform",
               "hardware", _optical_settings(), extra={"r_e_values": (0.9, 0.99)}),
    ]
    return {p.name: p for p in presets}


PRESETS = _build()


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigError("unknown preset '" + name + "', expected one of: " + ", ".join(PRESETS)) from None


def _resized(axes: Sequence[Axis], count: Optional[int]) -> Tuple[Axis, ...]:
    if count is None:
        return tuple(axes)
    return tuple(Axis(a.name, a.start, a.stop, count, a.scale) for a in axes)


def run_preset(
    name: str,
    directory: str,
    workers: int = 1,
    resolution: Optional[int] = None,
    overrides: Optional[Mapping[str, Any]] = None,
    formats: Sequence[str] = FORMATS,
    svg: bool = True,
) -> Dict[str, str]:
    """Run a preset and write its results as ``<directory>/<name>.*``.

    Args:
        name: Preset name, see `PRESETS`.
        directory: Output directory, created if needed.
        workers: Number of worker processes.
        resolution: Replaces the number of points per axis or curve.
        overrides: Configuration keys to change on top of the preset.
        formats: Tabular formats to write.
        svg: Whether to render the figure.

    Returns:
        dict: Output kind to written path.
    """
    preset = get_preset(name)
    settings = dict(preset.settings, **(overrides or {}))
    stem = os.path.join(directory, preset.name)
    axes = _resized(preset.axes, resolution)
    LOGGER.info("running preset %s: %s", preset.name, preset.description)

    if preset.kind == "contour":
        _, written = jobs.contour_job(
            settings, axes, stem, family=preset.extra.get("family"), workers=workers, formats=formats, svg=svg
        )
        return written
    elif preset.kind == "noise":
        count = resolution or preset.extra["n_count"]
        return jobs.noise_job(
            settings, stem, n_values=np.linspace(0.0, preset.extra["n_stop"], count),
            workers=workers, formats=formats, svg=svg,
        )
    elif preset.kind == "compare-rwa":
        return jobs.compare_rwa_job(settings, preset.extra["kappas"], axes, stem, workers=workers, formats=formats)
    return jobs.hardware_job(settings, stem, preset.extra["r_e_values"], formats=formats)
