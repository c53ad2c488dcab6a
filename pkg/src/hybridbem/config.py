"""Run configuration: YAML text validated against a JSON schema.

A config file has the sections ``kind``, ``wave``, ``sweep``, ``trunc``,
``beta``, ``mesh``, ``geometry``, ``grid``, ``validate`` and ``output``.
Missing entries are filled with defaults, so ``to_dict`` always returns the
full effective configuration.
"""

import copy
import warnings
from dataclasses import dataclass, field
from typing import Optional

import jsonschema
import numpy as np
import yaml

__all__ = [
    "ConfigError",
    "ConfigWarning",
    "RunConfig",
    "KINDS",
    "SCHEMA",
    "DEFAULTS",
    "load_config",
    "parse_config",
    "dump_config",
    "parse_beta",
]

KINDS = ("halfspace", "cavity", "cavity+scatterers", "validate-vs-image")
CAVITY_SHAPES = ("half_disc", "flat", "resonator")
MASKS = (None, "right", "left", "upper", "lower")


class ConfigError(ValueError):
    """Invalid configuration (schema or semantic)."""


class ConfigWarning(UserWarning):
    """Parameter choice known to degrade accuracy."""


_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_POINT = {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}
_RANGE = {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}
_CIRCLE = {
    "type": "object",
    "additionalProperties": False,
    "required": ["center", "radius"],
    "properties": {
        "center": _POINT,
        "radius": _POS,
        "panels": {"type": ["integer", "null"], "minimum": 3},
    },
}
_CIRCLES = {"type": "array", "items": _CIRCLE}
_POINT_OR_NULL = {"anyOf": [_POINT, {"type": "null"}]}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["kind"],
    "properties": {
        "kind": {"enum": list(KINDS)},
        "wave": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"omega": _POS, "c": _POS},
        },
        "sweep": {
            "anyOf": [
                {"type": "null"},
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["param"],
                    "properties": {
                        "param": {"enum": ["k", "omega", "M0N0"]},
                        "start": _POS,
                        "stop": _POS,
                        "step": _POS,
                        "values": {"type": "array", "items": {"type": "array", "items": _POS,
                                                              "minItems": 2, "maxItems": 2}},
                    },
                },
            ]
        },
        "trunc": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"M0": _POS, "N0": _POS, "a": _POS},
        },
        "beta": {"anyOf": [{"enum": ["-i/k", "i/k"]}, _NUM, _POINT]},
        "mesh": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "per_wavelength": _POS,
                "quad_order": {"type": "integer", "minimum": 1, "maximum": 64},
                "points_per_period": _POS,
                "corner_fraction": _POS,
                "ratio": {"type": "number", "exclusiveMinimum": 1},
            },
        },
        "geometry": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "source": _POINT_OR_NULL,
                "circles": _CIRCLES,
                "cavity": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "shape": {"enum": list(CAVITY_SHAPES)},
                        "cavity_radius": _POS,
                        "virtual_radius": _POS,
                        "center_depth": _POS,
                        "opening": _POS,
                    },
                },
                "source1": _POINT_OR_NULL,
                "source2": _POINT_OR_NULL,
                "scatterers1": _CIRCLES,
                "scatterers2": _CIRCLES,
            },
        },
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "x": _RANGE,
                "y": _RANGE,
                "shape": {"type": "array", "items": {"type": "integer", "minimum": 1},
                          "minItems": 2, "maxItems": 2},
                "mask": {"enum": list(MASKS)},
            },
        },
        "validate": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"threshold": _POS, "eps": _POS},
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"prefix": {"type": "string", "pattern": "^[A-Za-z0-9_.-]+$"}},
        },
    },
}

# Defaults follow the benchmark settings: a = 2, M0 = 20, N0 = max(30, 3k),
# 10-point Gauss quadrature and 40 trapezoid nodes per period.
DEFAULTS = {
    "wave": {"omega": 3.0, "c": 1.0},
    "sweep": None,
    "trunc": {"M0": 20.0, "N0": 30.0, "a": 2.0},
    "beta": "-i/k",
    "mesh": {"per_wavelength": 20.0, "quad_order": 10, "points_per_period": 40.0,
             "corner_fraction": 1e-5, "ratio": 1.15},
    "geometry": {
        "source": None,
        "circles": [],
        "cavity": {"shape": "half_disc", "cavity_radius": 1.0, "virtual_radius": 3.0,
                   "center_depth": 1.0, "opening": 0.1},
        "source1": None,
        "source2": None,
        "scatterers1": [],
        "scatterers2": [],
    },
    "grid": {"x": [-4.0, 4.0], "y": [0.1, 8.0], "shape": [101, 101], "mask": None},
    "validate": {"threshold": 1e-2, "eps": 1e-3},
    "output": {"prefix": "run"},
}


def _merge(base, over):
    out = copy.deepcopy(base)
    for key, val in over.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], val)
        else:
            out[key] = copy.deepcopy(val)
    return out


def _floatify(obj):
    """Integers become floats except where the schema wants integers."""
    if isinstance(obj, dict):
        return {k: (v if k in ("quad_order", "shape", "panels") else _floatify(v)) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_floatify(v) for v in obj]
    if isinstance(obj, bool) or not isinstance(obj, int):
        return obj
    return float(obj)


def parse_beta(beta, k) -> complex:
    """Burton-Miller coupling from its config form."""
    if beta == "-i/k":
        return -1j / k
    if beta == "i/k":
        return 1j / k
    if isinstance(beta, (list, tuple)):
        return complex(beta[0], beta[1])
    return complex(beta)


@dataclass
class RunConfig:
    """Validated, fully expanded run configuration."""

    kind: str
    wave: dict = field(default_factory=dict)
    sweep: Optional[dict] = None
    trunc: dict = field(default_factory=dict)
    beta: object = "-i/k"
    mesh: dict = field(default_factory=dict)
    geometry: dict = field(default_factory=dict)
    grid: dict = field(default_factory=dict)
    validate: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "wave": copy.deepcopy(self.wave),
            "sweep": copy.deepcopy(self.sweep),
            "trunc": copy.deepcopy(self.trunc),
            "beta": copy.deepcopy(self.beta),
            "mesh": copy.deepcopy(self.mesh),
            "geometry": copy.deepcopy(self.geometry),
            "grid": copy.deepcopy(self.grid),
            "validate": copy.deepcopy(self.validate),
            "output": copy.deepcopy(self.output),
        }

    @property
    def k(self) -> float:
        return self.wave["omega"] / self.wave["c"]

    @property
    def is_cavity(self) -> bool:
        if self.kind == "validate-vs-image":
            return self.geometry["cavity"]["shape"] == "flat" and self._has_cavity_sources()
        return self.kind in ("cavity", "cavity+scatterers")

    def _has_cavity_sources(self) -> bool:
        g = self.geometry
        return g["source1"] is not None or g["source2"] is not None

    def sweep_values(self):
        """Parameter values of the sweep in deterministic order."""
        sw = self.sweep
        if sw is None:
            return []
        if sw["param"] == "M0N0":
            return [tuple(v) for v in sw["values"]]
        n = int(np.floor((sw["stop"] - sw["start"]) / sw["step"] + 1e-9)) + 1
        return [round(sw["start"] + i * sw["step"], 12) for i in range(n)]

    def max_k(self) -> float:
        """Largest wavenumber of the run (sweeps mesh once at this value)."""
        sw = self.sweep
        if sw is None or sw["param"] == "M0N0":
            return self.k
        top = max(self.sweep_values())
        return top if sw["param"] == "k" else top / self.wave["c"]


def _semantic_checks(cfg: RunConfig):
    g = cfg.geometry
    sw = cfg.sweep
    if sw is not None:
        if sw["param"] == "M0N0":
            if not sw.get("values"):
                raise ConfigError("an M0N0 sweep needs a non-empty 'values' list")
        else:
            for key in ("start", "stop", "step"):
                if key not in sw:
                    raise ConfigError(f"sweep over {sw['param']} needs '{key}'")
            if sw["stop"] < sw["start"]:
                raise ConfigError("sweep stop must not be below start")
    gx, gy = cfg.grid["x"], cfg.grid["y"]
    if gx[1] < gx[0] or gy[1] < gy[0]:
        raise ConfigError("grid ranges must be increasing")
    if cfg.kind in ("halfspace", "validate-vs-image") and not cfg.is_cavity:
        if g["source"] is None:
            raise ConfigError(f"kind '{cfg.kind}' needs geometry.source")
        if g["source"][1] <= 0:
            raise ConfigError("geometry.source must lie above the wall (y > 0)")
        for c in g["circles"]:
            if c["center"][1] - c["radius"] <= 0:
                raise ConfigError("circles must lie strictly above the wall")
    if cfg.kind in ("cavity", "cavity+scatterers"):
        if g["source1"] is None and g["source2"] is None:
            raise ConfigError("cavity runs need geometry.source1 and/or geometry.source2")
        if cfg.kind == "cavity" and (g["scatterers1"] or g["scatterers2"]):
            raise ConfigError("kind 'cavity' takes no scatterers; use 'cavity+scatterers'")
        cav = g["cavity"]
        if cav["shape"] == "half_disc" and not cav["cavity_radius"] < cav["virtual_radius"]:
            raise ConfigError("cavity_radius must be smaller than virtual_radius")
    if cfg.kind == "validate-vs-image" and g["cavity"]["shape"] != "flat" and cfg._has_cavity_sources():
        raise ConfigError("the image oracle only applies to a flat wall; "
                          "a cavity can be validated only in its degenerate (flat) form")
    if cfg.kind == "validate-vs-image" and cfg.is_cavity and g["source1"] is not None and g["source2"] is not None:
        raise ConfigError("degenerate-cavity validation takes exactly one source")


def _guidance_warnings(cfg: RunConfig):
    t = cfg.trunc
    ks = [cfg.k]
    if cfg.sweep is not None and cfg.sweep["param"] != "M0N0":
        ks.append(cfg.max_k())
    if t["N0"] <= max(ks):
        warnings.warn(f"N0 = {t['N0']} does not exceed the wavenumber {max(ks):g}; "
                      "the Fourier truncation will be inaccurate", ConfigWarning, stacklevel=3)
    g = cfg.geometry
    xs = []
    for c in g["circles"] + g["scatterers1"] + g["scatterers2"]:
        xs += [c["center"][0] - c["radius"], c["center"][0] + c["radius"]]
    for key in ("source", "source1", "source2"):
        if g[key] is not None:
            xs.append(g[key][0])
    if cfg.is_cavity:
        r = g["cavity"]["virtual_radius"]
        xs += [-r, r]
    if xs:
        width = max(xs) - min(xs)
        if t["M0"] < width:
            warnings.warn(f"M0 = {t['M0']} is smaller than the bounding-box width {width:g}",
                          ConfigWarning, stacklevel=3)


def parse_config(data) -> RunConfig:
    """Validate a config mapping (or YAML text) and expand defaults."""
    if isinstance(data, str):
        try:
            data = yaml.safe_load(data)
        except yaml.YAMLError as exc:
            raise ConfigError(f"config is not valid YAML: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping")
    try:
        jsonschema.validate(data, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{where}: {exc.message}") from None
    full = _floatify(_merge({"kind": data["kind"], **DEFAULTS}, data))
    if "N0" not in (data.get("trunc") or {}):
        full["trunc"]["N0"] = max(DEFAULTS["trunc"]["N0"], 3.0 * full["wave"]["omega"] / full["wave"]["c"])
    cfg = RunConfig(**full)
    _semantic_checks(cfg)
    _guidance_warnings(cfg)
    return cfg


def load_config(path) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    return parse_config(text)


def dump_config(cfg: RunConfig) -> str:
    """Serialize the full effective config as YAML."""
    return yaml.safe_dump(cfg.to_dict(), sort_keys=True, default_flow_style=None)
