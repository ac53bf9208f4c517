"""Flat ``key = value`` run configuration.

Resolution order is built-in defaults, then a configuration file, then
``--set key=value`` overrides from the command line. Keys follow the field
names of `SystemParams` (in their symmetric form), `InputState` and
`DetectionConfig`, plus the run keys ``omega``, ``method`` and ``workers``.

A per-port key left at ``none`` follows its symmetric counterpart: ``n_e_a``
and ``n_e_c`` follow ``n_e``, ``n_i_a`` and ``n_i_c`` follow ``n_i`` and
``chi_i`` follows ``alpha_i``.
"""

import ast
import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, Iterable, Mapping, Optional

from .bell import DetectionConfig
from .errors import ConfigError
from .model import InputState, SystemParams, symmetric_params

LOGGER = logging.getLogger(__name__)

DEFAULTS: Dict[str, Any] = {
    "kappa": 0.1,
    "r_e": 0.9,
    "gamma": 1e-5,
    "G_minus": 0.2,
    "r": 0.1,
    "omega_m": 1.0,
    "delta_a": None,
    "delta_c": None,
    "alpha_i": 0.0,
    "chi_i": None,
    "n_e": 0.0,
    "n_i": 0.0,
    "n_m": 0.0,
    "n_e_a": None,
    "n_e_c": None,
    "n_i_a": None,
    "n_i_c": None,
    "eta_1": 0.5,
    "eta_2": 0.5,
    "omega": 0.0,
    "method": "full",
    "workers": 1,
}

COMPLEX_KEYS = frozenset({"alpha_i", "chi_i"})
NULLABLE_KEYS = frozenset({"delta_a", "delta_c", "chi_i", "n_e_a", "n_e_c", "n_i_a", "n_i_c"})
METHODS = ("full", "rwa")

# Keys that a sweep axis may vary.
SWEEPABLE = tuple(k for k in DEFAULTS if k not in ("method", "workers", "eta_1", "eta_2"))


def _parse_value(key: str, text: str) -> Any:
    text = text.strip()
    if text.lower() in ("none", "null", ""):
        if key in NULLABLE_KEYS:
            return None
        raise ConfigError("key '" + key + "' cannot be empty")
    if key == "method":
        return text
    try:
        value = ast.literal_eval(text)
    except (ValueError, SyntaxError) as exc:
        raise ConfigError("cannot parse value '" + text + "' for key '" + key + "'") from exc
    return value


def _check(key: str, value: Any) -> Any:
    if key not in DEFAULTS:
        raise ConfigError("unknown key '" + key + "', expected one of: " + ", ".join(sorted(DEFAULTS)))
    if value is None:
        if key not in NULLABLE_KEYS:
            raise ConfigError("key '" + key + "' cannot be empty")
        return None
    if key == "method":
        if value not in METHODS:
            raise ConfigError("method must be one of " + ", ".join(METHODS) + " (got '" + str(value) + "')")
        return value
    if key == "workers":
        if isinstance(value, bool) or not isinstance(value, int) or value < 1:
            raise ConfigError("workers must be a positive integer (got " + repr(value) + ")")
        return value
    if isinstance(value, bool) or not isinstance(value, (int, float, complex)):
        raise ConfigError("key '" + key + "' needs a number (got " + repr(value) + ")")
    if key in COMPLEX_KEYS:
        value = complex(value)
        if value.imag == 0:
            return float(value.real)
        return value
    if isinstance(value, complex):
        raise ConfigError("key '" + key + "' needs a real number (got " + repr(value) + ")")
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError("key '" + key + "' must be finite")
    return value


def parse_config(text: str, source: str = "<string>") -> Dict[str, Any]:
    """Parse a configuration document into a dictionary of checked values."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(source + ":" + str(lineno) + ": expected 'key = value'")
        key, value = stripped.split("=", 1)
        key = key.strip()
        try:
            out[key] = _check(key, _parse_value(key, value))
        except ConfigError as exc:
            raise ConfigError(source + ":" + str(lineno) + ": " + str(exc)) from exc
    return out


def load_config(path: str) -> Dict[str, Any]:
    with open(path, "r") as handle:
        return parse_config(handle.read(), source=path)


def parse_assignments(assignments: Iterable[str]) -> Dict[str, Any]:
    """Parse ``key=value`` overrides from the command line."""
    out = {}
    for item in assignments:
        if "=" not in item:
            raise ConfigError("override '" + item + "' is not of the form key=value")
        key, value = item.split("=", 1)
        key = key.strip()
        out[key] = _check(key, _parse_value(key, value))
    return out


def resolve(*layers: Optional[Mapping[str, Any]]) -> Dict[str, Any]:
    """Merge configuration layers over the defaults, later layers winning."""
    settings = dict(DEFAULTS)
    for layer in layers:
        if not layer:
            continue
        for key, value in layer.items():
            settings[key] = _check(key, value)
    return settings


def _format_value(value: Any) -> str:
    if value is None:
        return "none"
    if isinstance(value, str):
        return value
    return repr(value)


def format_config(settings: Mapping[str, Any]) -> str:
    """Render settings as a configuration document, keys sorted."""
    return "".join(key + " = " + _format_value(settings[key]) + "\n" for key in sorted(settings))


@dataclass(frozen=True)
class Scenario:
    """Everything needed to evaluate one point.

    Attributes:
        params (SystemParams): Device parameters.
        inputs (InputState): Probes and baths.
        detection (DetectionConfig): Beam splitters of the detection stations.
        omega (float): Analysis frequency.
        method (str): ``"full"`` or ``"rwa"``.
    """

    params: SystemParams
    inputs: InputState
    detection: DetectionConfig
    omega: float
    method: str


def _follow(settings: Mapping[str, Any], key: str, fallback: str) -> Any:
    value = settings.get(key)
    return settings[fallback] if value is None else value


def build_scenario(settings: Mapping[str, Any]) -> Scenario:
    s = resolve(settings)
    params = symmetric_params(
        kappa=s["kappa"],
        r_e=s["r_e"],
        gamma=s["gamma"],
        G_minus=s["G_minus"],
        r=s["r"],
        omega_m=s["omega_m"],
        delta_a=s["delta_a"],
        delta_c=s["delta_c"],
    )
    inputs = InputState(
        alpha_i=s["alpha_i"],
        chi_i=_follow(s, "chi_i", "alpha_i"),
        n_e_a=_follow(s, "n_e_a", "n_e"),
        n_e_c=_follow(s, "n_e_c", "n_e"),
        n_i_a=_follow(s, "n_i_a", "n_i"),
        n_i_c=_follow(s, "n_i_c", "n_i"),
        n_m=s["n_m"],
    )
    detection = DetectionConfig(eta_1=s["eta_1"], eta_2=s["eta_2"])
    return Scenario(params=params, inputs=inputs, detection=detection, omega=s["omega"], method=s["method"])
