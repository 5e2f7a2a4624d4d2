"""Experiment configuration: a TOML document with ``[scenario]``, ``[learner]``
and ``[run]`` tables. Every key is optional; defaults are the full-scale
setup. Unknown or duplicated keys are rejected.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import tomli

from .errors import (
    DuplicateKey,
    InconsistentConfig,
    MissingFile,
    RangeViolation,
    UnknownKey,
)
from .learner import Hyperparams
from .scenario import ScenarioConfig

METHODS = ("cl", "flat-rl", "non-semantic")


@dataclass(frozen=True)
class RunConfig:
    method: str = "cl"
    episodes: int = 160_000  # training episodes for flat-rl / non-semantic
    eval_episodes: int = 10_000
    seeds: tuple[int, ...] = (0, 1, 2)
    n_max: int = 200
    window: int = 10_000

    def validate(self) -> None:
        if self.method not in METHODS:
            raise RangeViolation("method", f"{self.method!r} not in {METHODS}")
        if self.episodes < 1:
            raise RangeViolation("episodes", "must be >= 1")
        if self.eval_episodes < 0:
            raise RangeViolation("eval_episodes", "must be >= 0")
        if not self.seeds or any(s < 0 for s in self.seeds):
            raise RangeViolation("seeds", "need at least one non-negative seed")
        if len(set(self.seeds)) != len(self.seeds):
            raise RangeViolation("seeds", "seeds must be distinct")
        if self.n_max < 3:
            raise RangeViolation("n_max", "slot cap must be >= 3")
        if self.window < 1:
            raise RangeViolation("window", "must be >= 1")


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    learner: Hyperparams = field(default_factory=Hyperparams)
    run: RunConfig = field(default_factory=RunConfig)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["run"]["seeds"] = list(self.run.seeds)
        return d

    def with_method(self, method: str) -> ExperimentConfig:
        run = replace(self.run, method=method)
        run.validate()
        return replace(self, run=run)


_SECTIONS = {"scenario": ScenarioConfig, "learner": Hyperparams, "run": RunConfig}


def _coerce(section: str, key: str, value, default):
    where = f"{section}.{key}"
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise RangeViolation(key, f"{where} must be true/false")
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise RangeViolation(key, f"{where} must be an integer")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise RangeViolation(key, f"{where} must be a number")
        return float(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise RangeViolation(key, f"{where} must be a string")
        return value
    if isinstance(default, tuple):
        if not isinstance(value, list) or any(isinstance(v, bool) or not isinstance(v, int) for v in value):
            raise RangeViolation(key, f"{where} must be a list of integers")
        return tuple(value)
    raise AssertionError(f"unhandled default type for {where}")


def config_from_dict(doc: dict) -> ExperimentConfig:
    for name in doc:
        if name not in _SECTIONS:
            raise UnknownKey(f"unknown section {name!r}; expected one of {sorted(_SECTIONS)}")
    built = {}
    for name, cls in _SECTIONS.items():
        table = doc.get(name, {})
        if not isinstance(table, dict):
            raise UnknownKey(f"{name!r} must be a table")
        defaults = {f.name: f.default for f in fields(cls)}
        for key in table:
            if key not in defaults:
                raise UnknownKey(f"unknown key {name}.{key}")
        kwargs = {k: _coerce(name, k, v, defaults[k]) for k, v in table.items()}
        try:
            built[name] = cls(**kwargs)
        except RangeViolation:
            raise
        except ValueError as exc:
            raise RangeViolation(name, str(exc)) from exc
    cfg = ExperimentConfig(**built)
    try:
        cfg.scenario.validate()
    except InconsistentConfig as exc:
        raise RangeViolation("scenario", str(exc)) from exc
    cfg.run.validate()
    return cfg


def parse_config(path) -> ExperimentConfig:
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"config file not found: {path}")
    try:
        doc = tomli.loads(path.read_text())
    except tomli.TOMLDecodeError as exc:
        if "duplicate" in str(exc).lower() or "overwrite" in str(exc).lower():
            raise DuplicateKey(f"{path}: {exc}") from exc
        raise UnknownKey(f"{path}: malformed config: {exc}") from exc
    return config_from_dict(doc)


def dump_config(cfg: ExperimentConfig) -> str:
    """Render a config back to TOML (all keys, defaults included)."""
    lines = []
    for name, values in cfg.to_dict().items():
        lines.append(f"[{name}]")
        for k, v in values.items():
            if isinstance(v, bool):
                s = "true" if v else "false"
            elif isinstance(v, str):
                s = f'"{v}"'
            elif isinstance(v, list):
                s = "[" + ", ".join(str(x) for x in v) + "]"
            else:
                s = repr(v)
            lines.append(f"{k} = {s}")
        lines.append("")
    return "\n".join(lines)
