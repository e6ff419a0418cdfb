"""Run configuration: a single JSON document, validated completely up front.

Example::

    {
      "schema_version": 1,
      "matrix": {"t": 0.5, "r": 0.5, "tau": 0.5, "rho": 0.5, "phi1": 1.5707963, "phi2": 1.5707963},
      "biphoton": {"kind": "spdc", "omega_p": 20.0, "tau_p": 2.0, "L": 1.0,
                   "kappa_i": 6.283185307179586, "kappa_s": -6.283185307179586},
      "grid": {"omega_min": 4.0, "omega_max": 16.0, "n_points": 257},
      "scan": {"delta_t_range": {"start": -12, "stop": 12, "num": 101}, "delta_t_unit": "tauc",
               "alpha": [3.141592653589793, 0.0]},
      "output": {"path": "hom.csv", "format": "csv"}
    }

Every section is optional; each subcommand checks that the sections it
needs are present. Unknown keys are errors, and so is any key ending in
``_deg``: angles are radians only.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

import numpy as np

from .core_matrix import DEFAULT_TOL, ScatteringMatrix
from .counting import MAP_KINDS
from .spectral import BiphotonAmplitude, FrequencyGrid, amplitude_from_dict

SCHEMA_VERSION = 1
FORMATS = ("csv", "json")
DELTA_T_UNITS = ("absolute", "tauc")


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


@dataclass(frozen=True)
class ScanSpec:
    delta_t: tuple[float, ...]
    delta_t_unit: str = "absolute"
    alpha: tuple[float, ...] | None = None


@dataclass(frozen=True)
class MapSpec:
    kind: str | None = None
    resolution: int = 200


@dataclass(frozen=True)
class OracleSpec:
    samples: int = 1000
    seed: int = 0


@dataclass(frozen=True)
class OutputSpec:
    path: str | None = None
    format: str | None = None


@dataclass(frozen=True)
class RunConfig:
    matrix: ScatteringMatrix | None = None
    biphoton: BiphotonAmplitude | None = None
    grid: FrequencyGrid | None = None
    overlap: complex | None = None
    delta_t: float | None = None
    scan: ScanSpec | None = None
    map: MapSpec = field(default_factory=MapSpec)
    oracle: OracleSpec = field(default_factory=OracleSpec)
    output: OutputSpec = field(default_factory=OutputSpec)
    tol: float = DEFAULT_TOL
    workers: int = 1

    def with_overrides(self, **flags) -> "RunConfig":
        """Apply command-line flags; ``None`` means not given."""
        cfg = self
        if flags.get("tol") is not None:
            cfg = replace(cfg, tol=_nonneg_float(flags["tol"], "tol"))
        if flags.get("workers") is not None:
            cfg = replace(cfg, workers=_positive_int(flags["workers"], "workers"))
        if flags.get("seed") is not None:
            cfg = replace(cfg, oracle=replace(cfg.oracle, seed=_seed(flags["seed"], "seed")))
        if flags.get("samples") is not None:
            cfg = replace(cfg, oracle=replace(cfg.oracle, samples=_positive_int(flags["samples"], "samples")))
        if flags.get("resolution") is not None:
            cfg = replace(cfg, map=replace(cfg.map, resolution=_resolution(flags["resolution"], "resolution")))
        if flags.get("kind") is not None:
            cfg = replace(cfg, map=replace(cfg.map, kind=_choice(flags["kind"], MAP_KINDS, "kind")))
        if flags.get("out") is not None:
            cfg = replace(cfg, output=replace(cfg.output, path=str(flags["out"])))
        if flags.get("format") is not None:
            cfg = replace(cfg, output=replace(cfg.output, format=_choice(flags["format"], FORMATS, "format")))
        return cfg


# ---------------------------------------------------------------------------
# field validators
# ---------------------------------------------------------------------------


def _number(value: Any, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"field `{name}` must be a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(f"field `{name}` must be finite, got {value!r}")
    return value


def _nonneg_float(value, name):
    v = _number(value, name)
    if v < 0:
        raise ConfigError(f"field `{name}` must be nonnegative, got {v!r}")
    return v


def _integer(value, name) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        if isinstance(value, float) and value.is_integer():
            return int(value)
        raise ConfigError(f"field `{name}` must be an integer, got {value!r}")
    return value


def _positive_int(value, name):
    v = _integer(value, name)
    if v < 1:
        raise ConfigError(f"field `{name}` must be >= 1, got {v!r}")
    return v


def _resolution(value, name):
    v = _integer(value, name)
    if v < 2:
        raise ConfigError(f"field `{name}` must be >= 2, got {v!r}")
    return v


def _seed(value, name):
    v = _integer(value, name)
    if not 0 <= v < 2**64:
        raise ConfigError(f"field `{name}` must be an unsigned 64-bit integer, got {v!r}")
    return v


def _choice(value, choices, name):
    if value not in choices:
        raise ConfigError(f"field `{name}` must be one of {', '.join(choices)}, got {value!r}")
    return value


def _section(raw: Any, name: str, allowed: tuple[str, ...]) -> dict:
    if not isinstance(raw, dict):
        raise ConfigError(f"field `{name}` must be an object")
    for key in raw:
        if key.endswith("_deg"):
            base = key[: -len("_deg")]
            raise ConfigError(
                f"field `{name}.{key}`: angles are accepted in radians only; "
                f"give `{base}` in radians instead"
            )
        if key not in allowed:
            raise ConfigError(f"unknown field `{name}.{key}` (allowed: {', '.join(allowed)})")
    return raw


def _range_or_list(raw: dict, list_key: str, range_key: str, where: str) -> tuple[float, ...] | None:
    if list_key in raw and range_key in raw:
        raise ConfigError(f"give only one of `{where}.{list_key}` and `{where}.{range_key}`")
    if list_key in raw:
        values = raw[list_key]
        if not isinstance(values, list):
            raise ConfigError(f"field `{where}.{list_key}` must be a list")
        return tuple(_number(v, f"{where}.{list_key}[{k}]") for k, v in enumerate(values))
    if range_key in raw:
        rng = _section(raw[range_key], f"{where}.{range_key}", ("start", "stop", "num"))
        for k in ("start", "stop", "num"):
            if k not in rng:
                raise ConfigError(f"missing field `{where}.{range_key}.{k}`")
        start = _number(rng["start"], f"{where}.{range_key}.start")
        stop = _number(rng["stop"], f"{where}.{range_key}.stop")
        num = _positive_int(rng["num"], f"{where}.{range_key}.num")
        return tuple(np.linspace(start, stop, num).tolist())
    return None


# ---------------------------------------------------------------------------
# sections
# ---------------------------------------------------------------------------

MATRIX_KEYS = ("t", "r", "tau", "rho", "phi1", "phi2")
BIPHOTON_KEYS = {
    "gaussian": ("kind", "center1", "center2", "width1", "width2"),
    "spdc": ("kind", "omega_p", "tau_p", "L", "kappa_i", "kappa_s"),
    "tabulated": ("kind", "path"),
}


def parse_matrix(raw) -> ScatteringMatrix:
    raw = _section(raw, "matrix", MATRIX_KEYS)
    values = {}
    for key in MATRIX_KEYS:
        if key not in raw:
            raise ConfigError(f"missing field `{key}` in `matrix`")
        values[key] = _number(raw[key], key)
    for key in ("t", "r", "tau", "rho"):
        if not 0.0 <= values[key] <= 1.0:
            raise ConfigError(f"field `{key}` must lie in [0, 1], got {values[key]!r}")
    return ScatteringMatrix(**values)


def _parse_biphoton(raw, grid: FrequencyGrid | None, base_dir) -> BiphotonAmplitude:
    if not isinstance(raw, dict):
        raise ConfigError("field `biphoton` must be an object")
    kind = raw.get("kind")
    if kind not in BIPHOTON_KEYS:
        raise ConfigError(f"field `biphoton.kind` must be one of {', '.join(BIPHOTON_KEYS)}, got {kind!r}")
    raw = _section(raw, "biphoton", BIPHOTON_KEYS[kind])
    record = {"kind": kind}
    for key in BIPHOTON_KEYS[kind][1:]:
        if key == "path":
            if not isinstance(raw.get("path"), str):
                raise ConfigError("field `biphoton.path` must be a string")
            record["path"] = raw["path"]
        elif key in raw:
            record[key] = _number(raw[key], f"biphoton.{key}")
        elif not key.startswith("width"):
            raise ConfigError(f"missing field `biphoton.{key}`")
    try:
        return amplitude_from_dict(record, grid, base_dir)
    except (ValueError, OSError, TypeError) as exc:
        raise ConfigError(f"field `biphoton`: {exc}") from exc


def _parse_grid(raw) -> FrequencyGrid:
    raw = _section(raw, "grid", ("omega_min", "omega_max", "n_points"))
    for key in ("omega_min", "omega_max"):
        if key not in raw:
            raise ConfigError(f"missing field `grid.{key}`")
    n = _integer(raw.get("n_points", 257), "grid.n_points")
    try:
        return FrequencyGrid(_number(raw["omega_min"], "grid.omega_min"),
                             _number(raw["omega_max"], "grid.omega_max"), n)
    except ValueError as exc:
        raise ConfigError(f"field `grid`: {exc}") from exc


def _parse_overlap(raw) -> complex:
    if isinstance(raw, dict):
        raw = _section(raw, "overlap", ("re", "im"))
        value = complex(_number(raw.get("re", 0.0), "overlap.re"), _number(raw.get("im", 0.0), "overlap.im"))
    else:
        value = complex(_number(raw, "overlap"))
    if abs(value) > 1.0 + 1e-8:
        raise ConfigError(f"field `overlap` must have modulus <= 1, got {value!r}")
    return value


def _parse_scan(raw) -> ScanSpec:
    raw = _section(raw, "scan", ("delta_t", "delta_t_range", "delta_t_unit", "alpha", "alpha_range"))
    delays = _range_or_list(raw, "delta_t", "delta_t_range", "scan")
    if delays is None:
        raise ConfigError("missing field `scan.delta_t` or `scan.delta_t_range`")
    unit = _choice(raw.get("delta_t_unit", "absolute"), DELTA_T_UNITS, "scan.delta_t_unit")
    alphas = _range_or_list(raw, "alpha", "alpha_range", "scan")
    return ScanSpec(delays, unit, alphas)


def parse_config(doc: dict, base_dir=None) -> RunConfig:
    top = ("schema_version", "matrix", "biphoton", "grid", "overlap", "delta_t", "scan",
           "map", "oracle", "output", "tol", "workers")
    doc = _section(doc, "config", top)
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigError(f"field `schema_version` must be {SCHEMA_VERSION}, got {version!r}")

    kwargs: dict[str, Any] = {}
    if "matrix" in doc:
        kwargs["matrix"] = parse_matrix(doc["matrix"])
    grid = _parse_grid(doc["grid"]) if "grid" in doc else None
    kwargs["grid"] = grid
    if "biphoton" in doc:
        kwargs["biphoton"] = _parse_biphoton(doc["biphoton"], grid, base_dir)
    if "overlap" in doc:
        kwargs["overlap"] = _parse_overlap(doc["overlap"])
    if "delta_t" in doc:
        kwargs["delta_t"] = _number(doc["delta_t"], "delta_t")
    if "scan" in doc:
        kwargs["scan"] = _parse_scan(doc["scan"])
    if "map" in doc:
        raw = _section(doc["map"], "map", ("kind", "resolution"))
        kind = _choice(raw["kind"], MAP_KINDS, "map.kind") if "kind" in raw else None
        kwargs["map"] = MapSpec(kind, _resolution(raw.get("resolution", 200), "map.resolution"))
    if "oracle" in doc:
        raw = _section(doc["oracle"], "oracle", ("samples", "seed"))
        kwargs["oracle"] = OracleSpec(_positive_int(raw.get("samples", 1000), "oracle.samples"),
                                      _seed(raw.get("seed", 0), "oracle.seed"))
    if "output" in doc:
        raw = _section(doc["output"], "output", ("path", "format"))
        path = raw.get("path")
        if path is not None and not isinstance(path, str):
            raise ConfigError("field `output.path` must be a string")
        fmt = _choice(raw["format"], FORMATS, "output.format") if "format" in raw else None
        kwargs["output"] = OutputSpec(path, fmt)
    if "tol" in doc:
        kwargs["tol"] = _nonneg_float(doc["tol"], "tol")
    if "workers" in doc:
        kwargs["workers"] = _positive_int(doc["workers"], "workers")
    return RunConfig(**kwargs)


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc
    return parse_config(doc, base_dir=path.parent)
