"""Flat key/value configuration files with [model]/[training]/[loss]/[data] sections.

All keys default to the published hyperparameters and may be overridden
individually. Validation collects every error before reporting.
"""
from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass

from .model.config import GeneratorConfig, LossWeights, TrainingParams


class ConfigError(ValueError):
    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("invalid configuration:\n" + "\n".join(f"  - {e}" for e in self.errors))


@dataclass
class DataConfig:
    window_length: int = 50
    stride: int = 20
    eval_window_length: int = 56
    eval_stride: int = 40
    test_subject: str = "S5"
    contact_threshold: float = 0.2
    t_past: int = 10


@dataclass
class RunConfig:
    model: GeneratorConfig
    training: TrainingParams
    data: DataConfig
    precision: str = "float32"
    critic_hidden: tuple[int, int] = (512, 256)


def _parse_value(raw: str, target_type, key: str, errors: list):
    raw = raw.strip()
    try:
        if target_type is bool:
            low = raw.lower()
            if low in ("true", "1", "yes", "on"):
                return True
            if low in ("false", "0", "no", "off"):
                return False
            raise ValueError(f"expected boolean, got {raw!r}")
        if target_type is int:
            return int(raw)
        if target_type is float:
            return float(raw)
        return raw
    except ValueError as e:
        errors.append(f"{key}: {e}")
        return None


def _fill_dataclass(instance, section: dict, section_name: str, errors: list, skip=()):
    valid = {f.name for f in dataclasses.fields(instance)}
    for key, raw in section.items():
        if key in skip:
            continue
        if key not in valid:
            errors.append(f"[{section_name}] unknown key {key!r}")
            continue
        # scalar field types are inferred from the defaults
        base = type(getattr(instance, key))
        value = _parse_value(raw, base, f"[{section_name}] {key}", errors)
        if value is not None:
            setattr(instance, key, value)


def parse_config(text: str) -> RunConfig:
    """Parse and validate a config file; raises ConfigError listing all problems."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    errors: list[str] = []
    try:
        parser.read_string(text)
    except configparser.Error as e:
        raise ConfigError([str(e)]) from None

    known_sections = {"model", "training", "loss", "data", "run"}
    for s in parser.sections():
        if s not in known_sections:
            errors.append(f"unknown section [{s}]")

    model = GeneratorConfig()
    training = TrainingParams()
    data = DataConfig()
    run_precision = "float32"
    critic_hidden = (512, 256)

    if parser.has_section("model"):
        _fill_dataclass(model, dict(parser.items("model")), "model", errors)
    if parser.has_section("training"):
        _fill_dataclass(training, dict(parser.items("training")), "training", errors,
                        skip=("loss_weights",))
    if parser.has_section("loss"):
        weights = LossWeights()
        _fill_dataclass(weights, dict(parser.items("loss")), "loss", errors)
        try:
            weights.__post_init__()
        except ValueError as e:
            errors.append(f"[loss] {e}")
        training.loss_weights = weights
    if parser.has_section("data"):
        _fill_dataclass(data, dict(parser.items("data")), "data", errors)
    if parser.has_section("run"):
        for key, raw in parser.items("run"):
            if key == "precision":
                if raw.strip() not in ("float32", "float64"):
                    errors.append(f"[run] precision must be float32 or float64, got {raw!r}")
                else:
                    run_precision = raw.strip()
            elif key == "critic_hidden":
                try:
                    parts = tuple(int(v) for v in raw.replace(",", " ").split())
                    if len(parts) != 2:
                        raise ValueError
                    critic_hidden = parts
                except ValueError:
                    errors.append(f"[run] critic_hidden expects two integers, got {raw!r}")
            else:
                errors.append(f"[run] unknown key {key!r}")

    try:
        model.__post_init__()
    except ValueError as e:
        errors.append(f"[model] {e}")
    if training.iterations < 0:
        errors.append("[training] iterations must be >= 0")
    if not 0 <= training.mirror_probability <= 1:
        errors.append("[training] mirror_probability must be in [0, 1]")
    if data.window_length < data.t_past + 2:
        errors.append("[data] window_length too short for seed + transition + target")

    if errors:
        raise ConfigError(errors)
    return RunConfig(model=model, training=training, data=data,
                     precision=run_precision, critic_hidden=critic_hidden)
