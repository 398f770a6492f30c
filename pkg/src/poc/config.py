"""Experiment configuration: a TOML (or JSON) file with nested blocks.

The exact grammar is documented in the README; the same schema can be
encoded as JSON (auto-detected by extension or a leading ``{``).  Every
validation error names the offending field.  Configurations round-trip
losslessly through their canonical JSON form, whose SHA-256 digest is
embedded in every run report.
"""

from __future__ import annotations

import hashlib
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError
from .hev import HevModel
from .toy import ToyConfig

KNOWN_PREDICTOR_TYPES = ("blind", "truth", "toy", "d1", "d2", "d3", "s1", "s2", "ar")


@dataclass(frozen=True)
class SolverSettings:
    epsilon_mix: float = 1e-6
    max_tree_nodes: int = 1_000_000


@dataclass(frozen=True)
class HevSettings:
    horizon: int = 5
    cycle: str = "bundled"
    x0_soc: float = 0.6
    soc_bounds: tuple = (0.3, 0.9)
    n_soc: int = 201
    n_controls: int = 21
    model: HevModel = field(default_factory=HevModel)
    predictors: tuple = ()  # empty means the default 22-predictor matrix


@dataclass(frozen=True)
class CustomSettings:
    environment: dict = field(default_factory=dict)
    system: dict = field(default_factory=dict)
    predictors: tuple = ()
    dataset_count: int = 0


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    out_dir: str = "poc-results"
    seed: int = 0
    threads: int = 1
    charts: bool = True
    solver: SolverSettings = field(default_factory=SolverSettings)
    toy: ToyConfig = field(default_factory=ToyConfig)
    hev: HevSettings = field(default_factory=HevSettings)
    custom: CustomSettings = field(default_factory=CustomSettings)
    raw: dict = field(default_factory=dict)

    def digest(self) -> str:
        return config_digest(self.raw)


def config_digest(raw: dict) -> str:
    payload = json.dumps(raw, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(payload.encode()).hexdigest()


def _load_raw(path) -> dict:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc}") from exc
    text = data.decode("utf-8", errors="replace").lstrip()
    if path.suffix.lower() == ".json" or text.startswith("{"):
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"invalid JSON: {exc}") from exc
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("config", f"invalid TOML: {exc}") from exc


def _expect(raw, field_name, types, default=None, required=False):
    if field_name.split(".")[-1] not in raw:
        if required:
            raise ConfigError(field_name, "missing required field")
        return default
    value = raw[field_name.split(".")[-1]]
    if types is bool:
        if not isinstance(value, bool):
            raise ConfigError(field_name, f"expected a boolean, got {value!r}")
        return value
    if types is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(field_name, f"expected an integer, got {value!r}")
        return value
    if types is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(field_name, f"expected a number, got {value!r}")
        return float(value)
    if types is str:
        if not isinstance(value, str):
            raise ConfigError(field_name, f"expected a string, got {value!r}")
        return value
    if types is list:
        if not isinstance(value, list):
            raise ConfigError(field_name, f"expected a list, got {value!r}")
        return value
    if types is dict:
        if not isinstance(value, dict):
            raise ConfigError(field_name, f"expected a table, got {value!r}")
        return value
    raise AssertionError(types)


def _float_list(raw, field_name, default):
    value = _expect(raw, field_name, list, default=None)
    if value is None:
        return default
    out = []
    for i, v in enumerate(value):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"{field_name}[{i}]", f"expected a number, got {v!r}")
        out.append(float(v))
    return tuple(out)


def _parse_predictor_entries(entries, field_name, allowed):
    out = []
    for i, entry in enumerate(entries):
        if not isinstance(entry, dict):
            raise ConfigError(f"{field_name}[{i}]", "expected a table")
        ptype = entry.get("type")
        if ptype not in KNOWN_PREDICTOR_TYPES:
            raise ConfigError(
                f"{field_name}[{i}].type",
                f"unknown predictor type {ptype!r}; known: {', '.join(KNOWN_PREDICTOR_TYPES)}",
            )
        if ptype not in allowed:
            raise ConfigError(
                f"{field_name}[{i}].type",
                f"predictor type {ptype!r} is not usable in this experiment "
                f"(allowed: {', '.join(allowed)})",
            )
        out.append(dict(entry))
    return tuple(out)


def parse_config(raw: dict) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config", "top level must be a table")
    exp = _expect(raw, "experiment", dict, default=None, required=True)
    kind = _expect(exp, "experiment.kind", str, required=True)
    if kind not in ("toy", "hev", "custom"):
        raise ConfigError("experiment.kind", f"must be toy, hev, or custom, got {kind!r}")
    out_dir = _expect(exp, "experiment.out_dir", str, default="poc-results")
    seed = _expect(exp, "experiment.seed", int, default=0)
    threads = _expect(exp, "experiment.threads", int, default=1)
    if threads < 1:
        raise ConfigError("experiment.threads", "must be at least 1")
    charts = _expect(exp, "experiment.charts", bool, default=True)

    solver_raw = _expect(raw, "solver", dict, default={})
    solver = SolverSettings(
        epsilon_mix=_expect(solver_raw, "solver.epsilon_mix", float, default=1e-6),
        max_tree_nodes=_expect(solver_raw, "solver.max_tree_nodes", int, default=1_000_000),
    )
    if not 0.0 <= solver.epsilon_mix < 1.0:
        raise ConfigError("solver.epsilon_mix", "must be in [0, 1)")

    toy_raw = _expect(raw, "toy", dict, default={})
    defaults = ToyConfig()
    try:
        toy = ToyConfig(
            p_values=_float_list(toy_raw, "toy.p_values", defaults.p_values),
            p_b_grid=_float_list(toy_raw, "toy.p_b_grid", defaults.p_b_grid),
            control_step=_expect(toy_raw, "toy.control_step", float, default=defaults.control_step),
            epsilon=solver.epsilon_mix,
            use_pipeline=_expect(toy_raw, "toy.use_pipeline", bool, default=True),
            audit_p=_expect(toy_raw, "toy.audit_p", float, default=defaults.audit_p),
            audit_extra_p_b=_float_list(toy_raw, "toy.audit_extra_p_b", defaults.audit_extra_p_b),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError("toy", str(exc)) from exc

    hev_raw = _expect(raw, "hev", dict, default={})
    model_raw = _expect(hev_raw, "hev.model", dict, default={})
    model_fields = {f.name for f in HevModel.__dataclass_fields__.values()}
    overrides = {}
    for key, value in model_raw.items():
        if key not in model_fields:
            raise ConfigError(f"hev.model.{key}", "unknown model constant")
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"hev.model.{key}", f"expected a number, got {value!r}")
        overrides[key] = float(value)
    bounds = _float_list(hev_raw, "hev.soc_bounds", (0.3, 0.9))
    if len(bounds) != 2 or not bounds[0] < bounds[1]:
        raise ConfigError("hev.soc_bounds", "expected [low, high] with low < high")
    hev = HevSettings(
        horizon=_expect(hev_raw, "hev.horizon", int, default=5),
        cycle=_expect(hev_raw, "hev.cycle", str, default="bundled"),
        x0_soc=_expect(hev_raw, "hev.x0_soc", float, default=0.6),
        soc_bounds=bounds,
        n_soc=_expect(hev_raw, "hev.n_soc", int, default=201),
        n_controls=_expect(hev_raw, "hev.n_controls", int, default=21),
        model=HevModel(**overrides),
        predictors=_parse_predictor_entries(
            _expect(hev_raw, "hev.predictors", list, default=[]),
            "hev.predictors", allowed=("d1", "d2", "d3", "s1", "s2", "ar"),
        ),
    )
    if hev.horizon < 1:
        raise ConfigError("hev.horizon", "must be at least 1")

    custom_raw = _expect(raw, "custom", dict, default={})
    custom = CustomSettings(
        environment=_expect(custom_raw, "custom.environment", dict, default={}),
        system=_expect(custom_raw, "custom.system", dict, default={}),
        predictors=_parse_predictor_entries(
            _expect(custom_raw, "custom.predictors", list, default=[]),
            "custom.predictors", allowed=("blind", "truth"),
        ),
        dataset_count=_expect(custom_raw, "custom.dataset_count", int, default=0),
    )
    if kind == "custom":
        if not custom.environment:
            raise ConfigError("custom.environment", "missing required table")
        if not custom.predictors:
            raise ConfigError("custom.predictors", "at least one predictor is required")

    return ExperimentConfig(
        kind=kind, out_dir=out_dir, seed=seed, threads=threads, charts=charts,
        solver=solver, toy=toy, hev=hev, custom=custom, raw=raw,
    )


def load_config(path) -> ExperimentConfig:
    return parse_config(_load_raw(path))
