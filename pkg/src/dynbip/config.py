"""JSON configuration parsing with field-level validation, and named presets."""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from typing import Optional

from .anomaly import AnomalyConfig, SideMode
from .distributions import CauchyParams, GammaParams
from .generator import GeneratorConfig


class ConfigError(ValueError):
    """Invalid configuration; ``field`` is a dotted path such as ``generator.gamma_u.scale``."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


def _get(d, key, path, kind, default=...):
    where = f"{path}.{key}" if path else key
    if key not in d or d[key] is None:
        if default is ...:
            raise ConfigError(where, "missing")
        return default
    value = d[key]
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            if isinstance(value, float) and value.is_integer():
                return int(value)
            raise ConfigError(where, f"expected an integer, got {value!r}")
    elif kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(where, f"expected a number, got {value!r}")
        value = float(value)
    elif kind is bool:
        if not isinstance(value, bool):
            raise ConfigError(where, f"expected true/false, got {value!r}")
    elif kind is dict:
        if not isinstance(value, dict):
            raise ConfigError(where, "expected an object")
    elif kind is str:
        if not isinstance(value, str):
            raise ConfigError(where, f"expected a string, got {value!r}")
    return value


def _build(cls, path, **kwargs):
    try:
        return cls(**kwargs)
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from None


def _cauchy(d, path):
    return _build(CauchyParams, path, location=_get(d, "location", path, float),
                  scale=_get(d, "scale", path, float))


def _gamma(d, path):
    return _build(GammaParams, path, shape=_get(d, "shape", path, float),
                  location=_get(d, "location", path, float),
                  scale=_get(d, "scale", path, float))


def _per_series(d, path, names, shared, parse):
    out = {}
    for name in names:
        if name in d:
            out[name] = parse(_get(d, name, path, dict), f"{path}.{name}")
        elif shared in d:
            out[name] = parse(_get(d, shared, path, dict), f"{path}.{shared}")
        else:
            raise ConfigError(f"{path}.{name}", "missing")
    return out


def parse_generator(d, path="generator", pad=True):
    """``GeneratorConfig`` from a dict.

    ``cauchy``/``gamma`` set shared parameters that ``cauchy_u`` etc. override.
    With ``pad`` a horizon that is not a multiple of the cycle is rounded up;
    the requested horizon is returned separately.
    """
    if not isinstance(d, dict):
        raise ConfigError(path, "expected an object")
    T = _get(d, "T", path, int)
    cycle = _get(d, "cycle_length", path, int)
    if T < 1:
        raise ConfigError(f"{path}.T", "must be >= 1")
    if cycle < 1 or cycle > T:
        raise ConfigError(f"{path}.cycle_length", f"must be in [1, T={T}]")
    run_T = GeneratorConfig.padded_T(T, cycle) if pad else T
    kwargs = dict(
        T=run_T, cycle_length=cycle,
        size_u=_get(d, "size_u", path, int), size_v=_get(d, "size_v", path, int),
        total_edges=_get(d, "total_edges", path, int),
        seed=_get(d, "seed", path, int, 0),
        min_nodes_per_snapshot=_get(d, "min_nodes_per_snapshot", path, int, 0),
        **_per_series(d, path, ("cauchy_u", "cauchy_v", "cauchy_e"), "cauchy", _cauchy),
        **_per_series(d, path, ("gamma_u", "gamma_v"), "gamma", _gamma),
    )
    for name in ("size_u", "size_v", "total_edges"):
        if kwargs[name] < 1:
            raise ConfigError(f"{path}.{name}", "must be >= 1")
    return _build(GeneratorConfig, path, **kwargs), T


def parse_anomaly(d, path="anomaly"):
    if not isinstance(d, dict):
        raise ConfigError(path, "expected an object")
    window = d.get("window")
    if window is not None and (not isinstance(window, list) or len(window) != 2):
        raise ConfigError(f"{path}.window", "expected [start, end]")
    mode = _get(d, "side_mode", path, str, "both")
    try:
        mode = SideMode(mode)
    except ValueError:
        raise ConfigError(f"{path}.side_mode", f"expected one of u, v, both; got {mode!r}") from None
    return _build(
        AnomalyConfig, path,
        initial_attackers_u=_get(d, "initial_attackers_u", path, int, 1),
        initial_attackers_v=_get(d, "initial_attackers_v", path, int, 1),
        anomaly_percentage=_get(d, "anomaly_percentage", path, float, 0.01),
        burstiness=_get(d, "burstiness", path, int, 1),
        propagation_ratio=_get(d, "propagation_ratio", path, float, 0.0),
        propagation_enabled=_get(d, "propagation_enabled", path, bool, False),
        window=tuple(window) if window is not None else None,
        side_mode=mode)


def generator_to_dict(c: GeneratorConfig, T=None):
    def cp(p):
        return {"location": p.location, "scale": p.scale}

    def gp(p):
        return {"shape": p.shape, "location": p.location, "scale": p.scale}

    return {"T": c.T if T is None else T, "cycle_length": c.cycle_length,
            "size_u": c.size_u, "size_v": c.size_v, "total_edges": c.total_edges,
            "seed": c.seed, "min_nodes_per_snapshot": c.min_nodes_per_snapshot,
            "cauchy_u": cp(c.cauchy_u), "cauchy_v": cp(c.cauchy_v), "cauchy_e": cp(c.cauchy_e),
            "gamma_u": gp(c.gamma_u), "gamma_v": gp(c.gamma_v)}


def anomaly_to_dict(c: AnomalyConfig):
    return {"initial_attackers_u": c.initial_attackers_u,
            "initial_attackers_v": c.initial_attackers_v,
            "anomaly_percentage": c.anomaly_percentage, "burstiness": c.burstiness,
            "propagation_ratio": c.propagation_ratio,
            "propagation_enabled": c.propagation_enabled,
            "window": list(c.window) if c.window is not None else None,
            "side_mode": c.side_mode.value}


@dataclass
class PipelineConfig:
    generator: GeneratorConfig
    T: int
    anomaly: Optional[AnomalyConfig] = None
    anomaly_seed: int = 0
    reference_dataset_path: Optional[str] = None
    label_column: Optional[str] = None
    attributes_seed: int = 0
    output_directory: str = "out"
    formats: list = field(default_factory=lambda: ["csv"])

    def to_dict(self):
        d = {"generator": generator_to_dict(self.generator, self.T),
             "output": {"directory": self.output_directory, "formats": list(self.formats)}}
        if self.anomaly is not None:
            d["anomaly"] = dict(anomaly_to_dict(self.anomaly), seed=self.anomaly_seed)
        if self.reference_dataset_path is not None:
            d["attributes"] = {"reference_dataset_path": self.reference_dataset_path,
                               "label_column": self.label_column,
                               "seed": self.attributes_seed}
        return d


def parse_pipeline(d) -> PipelineConfig:
    """Parse a full pipeline document; a bare generator object is accepted too."""
    if not isinstance(d, dict):
        raise ConfigError("<root>", "expected an object")
    if "generator" not in d:
        d = {"generator": d}
    gen, T = parse_generator(_get(d, "generator", "", dict))
    pc = PipelineConfig(gen, T)
    if d.get("anomaly") is not None:
        a = _get(d, "anomaly", "", dict)
        pc.anomaly = parse_anomaly(a)
        pc.anomaly_seed = _get(a, "seed", "anomaly", int, gen.seed)
    if d.get("attributes") is not None:
        a = _get(d, "attributes", "", dict)
        pc.reference_dataset_path = _get(a, "reference_dataset_path", "attributes", str)
        pc.label_column = _get(a, "label_column", "attributes", str, None)
        pc.attributes_seed = _get(a, "seed", "attributes", int, gen.seed)
    if d.get("output") is not None:
        o = _get(d, "output", "", dict)
        pc.output_directory = _get(o, "directory", "output", str, "out")
        pc.formats = list(o.get("formats") or ["csv"])
        if pc.formats != ["csv"]:
            raise ConfigError("output.formats", "only 'csv' is supported")
    return pc


def load(path) -> PipelineConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"invalid JSON: {exc}") from None
    return parse_pipeline(doc)


# -- presets ---------------------------------------------------------------
# pcore-desk is ~1/100 of the full shape. The Reddit/Wikipedia desk presets are
# ~1/10 over one week, since 1/100 leaves too few edges per snapshot for any
# anomaly budget to round above zero.

_DAY = {"location": 14.0, "scale": 4.0}
_HEAVY = {"shape": 0.5, "location": 1.0, "scale": 10.0}


def _preset(size_u, size_v, edges, T, ap, propagation, min_nodes=0):
    anomaly = {"initial_attackers_u": 2, "initial_attackers_v": 2,
               "anomaly_percentage": ap, "burstiness": 3, "side_mode": "both",
               "propagation_enabled": propagation,
               "propagation_ratio": 0.2 if propagation else 0.0}
    return {"generator": {"T": T, "cycle_length": 24, "size_u": size_u, "size_v": size_v,
                          "total_edges": edges, "seed": 0, "cauchy": _DAY, "gamma": _HEAVY,
                          "min_nodes_per_snapshot": min_nodes},
            "anomaly": anomaly}


PRESETS = {
    "pcore-desk": _preset(2000, 1200, 50000, 48, 0.01, True),
    "pcore-full": _preset(157225, 96037, 597098, 48, 0.01, True),
    "reddit-desk": _preset(1000, 100, 67245, 168, 0.005, False, min_nodes=1),
    "reddit-full": _preset(10000, 984, 672447, 744, 0.005, False, min_nodes=1),
    "wikipedia-desk": _preset(823, 100, 15747, 168, 0.05, False, min_nodes=1),
    "wikipedia-full": _preset(8227, 1000, 157474, 744, 0.005, False, min_nodes=1),
}


def preset(name):
    try:
        return copy.deepcopy(PRESETS[name])
    except KeyError:
        raise ConfigError("preset", f"unknown preset {name!r}; choose from "
                                    f"{', '.join(sorted(PRESETS))}") from None
