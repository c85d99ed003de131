"""Run configuration: every knob of a run, file parsing, validation.

Config files are flat `key = value` text, one pair per line, `#` comments.
Keys are the field names below; CLI flags override file values.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Optional


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    # input files
    kg1_rel: Optional[str] = None
    kg1_attr: Optional[str] = None
    kg2_rel: Optional[str] = None
    kg2_attr: Optional[str] = None
    truth: Optional[str] = None
    seeds: Optional[str] = None
    range1: Optional[str] = None
    range2: Optional[str] = None
    out_dir: str = "out"

    # embedding files, one per channel per graph
    emb_name_1: Optional[str] = None
    emb_name_2: Optional[str] = None
    emb_translated_1: Optional[str] = None
    emb_translated_2: Optional[str] = None
    emb_description_1: Optional[str] = None
    emb_description_2: Optional[str] = None
    emb_value_1: Optional[str] = None
    emb_value_2: Optional[str] = None

    # feature switches
    use_attr: bool = True
    use_name: bool = False
    use_translated: bool = False
    use_description: bool = False
    use_value: bool = False
    use_range: bool = False
    use_swapping: bool = True

    # hyper-parameters
    iota: float = 0.5
    theta: float = 0.1
    c_absent: float = 0.5
    c_penalty: float = 4.0
    c_name: Optional[float] = None  # calibrated automatically when unset
    k_sim: int = 80
    k_value: int = 1
    theta_filter: float = 0.9
    end_iteration: int = 19
    seed_ratio: float = 0.3
    name_finetuned: bool = True
    bootstrap_steps: int = 2

    # execution
    workers: int = 1
    eval_mode: str = "test"  # "test" scores non-seed links, "all" every link
    write_figures: bool = True
    write_evidence: bool = True

    def validate(self) -> None:
        for key in ("iota", "theta", "c_absent", "theta_filter"):
            v = getattr(self, key)
            if not 0.0 <= v < 1.0:
                raise ConfigError(f"{key} = {v!r} outside [0, 1)")
        if self.c_name is not None and not 0.0 <= self.c_name < 1.0:
            raise ConfigError(f"c_name = {self.c_name!r} outside [0, 1)")
        if self.c_penalty <= 0:
            raise ConfigError("c_penalty must be positive")
        if self.k_sim < 1:
            raise ConfigError("k_sim must be >= 1")
        if self.k_value < 0:
            raise ConfigError("k_value must be >= 0")
        if self.end_iteration < 0:
            raise ConfigError("end_iteration must be >= 0")
        if not 0.0 <= self.seed_ratio <= 1.0:
            raise ConfigError("seed_ratio outside [0, 1]")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.eval_mode not in ("test", "all"):
            raise ConfigError("eval_mode must be 'test' or 'all'")
        if self.kg1_rel is None and self.kg1_attr is None:
            raise ConfigError("no input triples for KG1 (set kg1_rel and/or kg1_attr)")
        if self.kg2_rel is None and self.kg2_attr is None:
            raise ConfigError("no input triples for KG2 (set kg2_rel and/or kg2_attr)")
        for flag, one, two in (
            ("use_name", self.emb_name_1, self.emb_name_2),
            ("use_translated", self.emb_translated_1, self.emb_translated_2),
            ("use_description", self.emb_description_1, self.emb_description_2),
            ("use_value", self.emb_value_1, self.emb_value_2),
        ):
            if getattr(self, flag) and (one is None or two is None):
                raise ConfigError(f"{flag} enabled but its embedding files are not set")

    def enabled_name_channels(self) -> list[str]:
        channels = []
        if self.use_name:
            channels.append("name")
        if self.use_translated:
            channels.append("name_translated")
        if self.use_description:
            channels.append("description")
        return channels


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}
_BOOL_WORDS = {"true": True, "yes": True, "1": True, "on": True,
               "false": False, "no": False, "0": False, "off": False}


def _coerce(name: str, raw: str):
    f = _FIELDS[name]
    raw = raw.strip()
    if raw.lower() in ("", "none"):
        return None
    types = str(f.type)
    if "bool" in types:
        try:
            return _BOOL_WORDS[raw.lower()]
        except KeyError:
            raise ConfigError(f"{name}: {raw!r} is not a boolean") from None
    if "int" in types:
        return int(raw)
    if "float" in types:
        return float(raw)
    return raw


def load_config(path: str, base: Optional[RunConfig] = None) -> RunConfig:
    cfg = base or RunConfig()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, raw = (part.strip() for part in line.split("=", 1))
            if key not in _FIELDS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            try:
                setattr(cfg, key, _coerce(key, raw))
            except (ValueError, ConfigError) as exc:
                raise ConfigError(f"{path}:{lineno}: {exc}") from None
    return cfg


def apply_overrides(cfg: RunConfig, overrides: dict) -> RunConfig:
    for key, value in overrides.items():
        if value is None:
            continue
        if key not in _FIELDS:
            raise ConfigError(f"unknown config key {key!r}")
        setattr(cfg, key, value)
    return cfg
