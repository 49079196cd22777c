"""Run configuration: one INI file with ``[run]``, ``[data]``, ``[agent]`` and
``[transfer]`` sections. Every key has a default, unknown keys are errors, and
the fully resolved configuration can be written back out.
"""

import configparser
from dataclasses import dataclass, field, fields

from .agent import AgentConfig
from .data import (BOTIOT_SCHEMA, KINDS, UNSW_SCHEMA, ColumnSchema, DatasetSchema,
                   synthetic_schema)
from .errors import ConfigError

PROFILES = ("synthetic", "unsw-nb15", "bot-iot")


@dataclass
class DataSection:
    inputs: list = field(default_factory=list)
    schema_file: str = ""
    dataset: str = ""
    split_fraction: float = 0.8
    n_samples: int = 600
    n_features: int = 8
    n_classes: int = 3
    separation: float = 8.0


@dataclass
class TransferSection:
    source_model: str = ""
    hidden: list = field(default_factory=lambda: [5, 5])


@dataclass
class RunConfig:
    profile: str = "synthetic"
    out: str = "runs/default"
    seed: int = 0
    data: DataSection = field(default_factory=DataSection)
    agent: AgentConfig = field(default_factory=AgentConfig)
    transfer: TransferSection = field(default_factory=TransferSection)

    def __post_init__(self):
        if self.profile not in PROFILES:
            raise ConfigError(f"profile must be one of {PROFILES}, got {self.profile!r}")
        if not 0.0 < self.data.split_fraction < 1.0:
            raise ConfigError("split_fraction must lie strictly between 0 and 1")
        self.agent.seed = self.seed

    def schema(self):
        if self.data.schema_file:
            return load_schema(self.data.schema_file, self.profile)
        if self.profile == "unsw-nb15":
            return UNSW_SCHEMA
        if self.profile == "bot-iot":
            return BOTIOT_SCHEMA
        return synthetic_schema(self.data.n_features, self.data.n_classes)


def _coerce(raw, default, key):
    try:
        if isinstance(default, bool):
            return raw.strip().lower() in ("1", "true", "yes", "on")
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        if isinstance(default, list):
            items = [s.strip() for s in raw.split(",") if s.strip()]
            if default and isinstance(default[0], int):
                return [int(s) for s in items]
            return items
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r} as {type(default).__name__}") from None
    return raw.strip()


def _fill(obj, section, name, skip=()):
    known = {f.name: f for f in fields(obj) if f.name not in skip}
    for key, raw in section.items():
        if key not in known:
            raise ConfigError(f"unknown key [{name}] {key}")
        setattr(obj, key, _coerce(raw, getattr(obj, key), f"[{name}] {key}"))


def load_config(path=None, overrides=None):
    """Read ``path`` (optional) and apply ``overrides`` (dotted keys, e.g. ``agent.loss``)."""
    parser = configparser.ConfigParser(interpolation=None)
    if path is not None:
        try:
            with open(path) as fh:
                parser.read_file(fh)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except configparser.Error as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from None
    unknown = set(parser.sections()) - {"run", "data", "agent", "transfer"}
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")

    run = {"profile": "synthetic", "out": "runs/default", "seed": 0}
    if parser.has_section("run"):
        for key, raw in parser["run"].items():
            if key not in run:
                raise ConfigError(f"unknown key [run] {key}")
            run[key] = _coerce(raw, run[key], f"[run] {key}")
    data, transfer = DataSection(), TransferSection()
    # AgentConfig validates in __post_init__, so collect raw values first
    agent_values = AgentConfig().to_dict()
    if parser.has_section("data"):
        _fill(data, parser["data"], "data")
    if parser.has_section("transfer"):
        _fill(transfer, parser["transfer"], "transfer")
    if parser.has_section("agent"):
        for key, raw in parser["agent"].items():
            if key not in agent_values or key == "seed":
                raise ConfigError(f"unknown key [agent] {key}")
            agent_values[key] = _coerce(raw, agent_values[key], f"[agent] {key}")

    for dotted, value in (overrides or {}).items():
        if value is None:
            continue
        section, key = dotted.split(".")
        if section == "run":
            run[key] = value
        elif section == "agent":
            agent_values[key] = value
        elif section == "data":
            setattr(data, key, value)
        elif section == "transfer":
            setattr(transfer, key, value)
    agent_values["seed"] = run["seed"]
    return RunConfig(run["profile"], run["out"], run["seed"], data, AgentConfig(**agent_values), transfer)


def _fmt(value):
    if isinstance(value, list):
        return ",".join(str(v) for v in value)
    return repr(value) if isinstance(value, float) else str(value)


def dump_config(cfg):
    """Resolved configuration as INI text (deterministic)."""
    lines = ["[run]", f"profile = {cfg.profile}", f"out = {cfg.out}", f"seed = {cfg.seed}", ""]
    for name, obj, skip in (("data", cfg.data, ()), ("agent", cfg.agent, ("seed",)),
                            ("transfer", cfg.transfer, ())):
        lines.append(f"[{name}]")
        for f in fields(obj):
            if f.name not in skip:
                lines.append(f"{f.name} = {_fmt(getattr(obj, f.name))}")
        lines.append("")
    return "\n".join(lines)


def load_schema(path, profile="custom"):
    """Column schema from an INI file.

    ``[columns]`` maps name -> kind in file order; ``[missing]`` maps name ->
    ``drop_row`` | ``impute_mean`` | ``map_to_value:VALUE``; ``[labels]`` has
    ``names = a,b,c``; ``[options]`` may set ``has_header``.
    """
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except FileNotFoundError:
        raise ConfigError(f"schema file not found: {path}") from None
    if not parser.has_section("columns") or not parser.has_section("labels"):
        raise ConfigError(f"{path}: schema needs [columns] and [labels] sections")
    missing = dict(parser["missing"]) if parser.has_section("missing") else {}
    cols = []
    for name, kind in parser["columns"].items():
        kind = kind.strip()
        if kind not in KINDS:
            raise ConfigError(f"{path}: column {name}: unknown kind {kind!r}")
        policy, value = missing.pop(name, "drop_row"), None
        if policy.startswith("map_to_value:"):
            policy, value = "map_to_value", policy.split(":", 1)[1]
            if kind == "numeric":
                value = float(value)
        cols.append(ColumnSchema(name, kind, policy, value))
    if missing:
        raise ConfigError(f"{path}: [missing] names unknown columns {sorted(missing)}")
    labels = [s.strip() for s in parser["labels"].get("names", "").split(",") if s.strip()]
    has_header = parser.getboolean("options", "has_header", fallback=False)
    return DatasetSchema(profile, cols, labels, has_header)
