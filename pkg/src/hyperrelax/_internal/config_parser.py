"""Parser converting TOML study files to StudyConfig."""

from __future__ import annotations

import sys
from dataclasses import fields
from pathlib import Path
from typing import Any

from hyperrelax._errors import ConfigError, HyperRelaxError
from hyperrelax.types import ReferenceKind, StepMode, StudyConfig, TimeLanding

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

_TABLE_KEYS: dict[str, set[str]] = {
    "model": {"limit", "hyper", "mu", "sigma", "sigma0", "m", "flux", "init_variant"},
    "grid": {"left", "right", "n"},
    "operators": {"order"},
    "time": {"dt", "T", "traversals", "mode", "landing"},
    "study": {
        "tau_list",
        "reference",
        "relaxation",
        "initial_condition",
        "floor_threshold",
        "samples",
        "name",
    },
    "output": {"dir", "formats"},
}


def _number(table: dict[str, Any], key: str, path: str | None) -> float:
    value = table[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key} must be a number, got {value!r}", path)
    return float(value)


def _integer(table: dict[str, Any], key: str, path: str | None) -> int:
    value = table[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{key} must be an integer, got {value!r}", path)
    return value


def _string(table: dict[str, Any], key: str, path: str | None) -> str:
    value = table[key]
    if not isinstance(value, str):
        raise ConfigError(f"{key} must be a string, got {value!r}", path)
    return value


def _choice(enum: Any, table: dict[str, Any], key: str, path: str | None) -> Any:
    value = _string(table, key, path)
    try:
        return enum(value)
    except ValueError as e:
        choices = ", ".join(member.value for member in enum)
        raise ConfigError(f"{key} must be one of {choices}, got {value!r}", path) from e


def _parse_model(table: dict[str, Any], values: dict[str, Any], path: str | None) -> None:
    overrides = dict(values.get("model_overrides", {}))
    for key in table:
        if key == "limit":
            values["limit_model"] = _string(table, key, path)
        elif key == "hyper":
            values["hyper_model"] = _string(table, key, path)
        elif key in ("mu", "sigma"):
            overrides[key] = _number(table, key, path)
        elif key in ("sigma0", "m"):
            overrides[key] = _integer(table, key, path)
        elif key in ("flux", "init_variant"):
            overrides[key] = _string(table, key, path)
    values["model_overrides"] = overrides


def _parse_time(table: dict[str, Any], values: dict[str, Any], path: str | None) -> None:
    if "T" in table and "traversals" in table:
        raise ConfigError("[time] takes T or traversals, not both", path)
    for key in table:
        if key == "dt":
            values["dt"] = _number(table, key, path)
        elif key == "T":
            values["t_final"] = _number(table, key, path)
            values["traversals"] = None
        elif key == "traversals":
            values["traversals"] = _number(table, key, path)
            values["t_final"] = None
        elif key == "mode":
            values["mode"] = _choice(StepMode, table, key, path)
        elif key == "landing":
            values["landing"] = _choice(TimeLanding, table, key, path)


def _parse_study(table: dict[str, Any], values: dict[str, Any], path: str | None) -> None:
    for key in table:
        if key == "tau_list":
            raw = table[key]
            if not isinstance(raw, list) or not raw:
                raise ConfigError(f"tau_list must be a non-empty array, got {raw!r}", path)
            values["tau_list"] = tuple(_number({"tau": v}, "tau", path) for v in raw)
        elif key == "reference":
            values["reference"] = _choice(ReferenceKind, table, key, path)
        elif key == "relaxation":
            if not isinstance(table[key], bool):
                raise ConfigError(f"relaxation must be true or false, got {table[key]!r}", path)
            values["relaxation"] = table[key]
        elif key == "initial_condition":
            values["initial_condition"] = _string(table, key, path)
        elif key == "floor_threshold":
            values["floor_threshold"] = _number(table, key, path)
        elif key == "samples":
            values["samples"] = _integer(table, key, path)
        elif key == "name":
            values["name"] = _string(table, key, path)


def _parse_table(
    name: str, table: Any, values: dict[str, Any], path: str | None
) -> None:
    """Merge one top-level table into ``values``."""
    if name not in _TABLE_KEYS:
        raise ConfigError(f"Unknown table [{name}]; expected one of {sorted(_TABLE_KEYS)}", path)
    if not isinstance(table, dict):
        raise ConfigError(f"[{name}] must be a table", path)
    unknown = set(table) - _TABLE_KEYS[name]
    if unknown:
        raise ConfigError(f"Unknown keys in [{name}]: {sorted(unknown)}", path)

    if name == "model":
        _parse_model(table, values, path)
    elif name == "grid":
        for key in table:
            values[key] = _integer(table, key, path) if key == "n" else _number(table, key, path)
    elif name == "operators":
        values["order"] = _integer(table, "order", path)
    elif name == "time":
        _parse_time(table, values, path)
    elif name == "study":
        _parse_study(table, values, path)
    elif name == "output":
        if "dir" in table:
            values["output_dir"] = Path(_string(table, "dir", path))
        if "formats" in table:
            formats = table["formats"]
            if not isinstance(formats, list) or not all(isinstance(f, str) for f in formats):
                raise ConfigError(f"formats must be an array of strings, got {formats!r}", path)
            values["formats"] = tuple(formats)


def parse_config(
    data: dict[str, Any], path: str | None = None, base: StudyConfig | None = None
) -> StudyConfig:
    """Build a StudyConfig from parsed TOML.

    A top-level ``preset = "name"`` key (or ``base``) supplies defaults that
    the tables then override.

    Raises:
        ConfigError: Unknown table or key, wrong value type, missing model
            names or an inconsistent configuration.
    """
    if "preset" in data:
        from hyperrelax.experiments import preset

        preset_name = data["preset"]
        if not isinstance(preset_name, str):
            raise ConfigError(f"preset must be a string, got {preset_name!r}", path)
        base = preset(preset_name)
    values: dict[str, Any] = {}
    if base is not None:
        values = {f.name: getattr(base, f.name) for f in fields(base)}
        values["model_overrides"] = dict(base.model_overrides)

    for name, table in data.items():
        if name == "preset":
            continue
        _parse_table(name, table, values, path)

    missing = {"limit_model", "hyper_model"} - set(values)
    if missing:
        raise ConfigError("[model] needs both limit and hyper", path)
    if values.get("t_final") is None and values.get("traversals") is None:
        raise ConfigError("[time] needs T or traversals", path)
    try:
        return StudyConfig(**values)
    except HyperRelaxError as e:
        raise ConfigError(str(e), path) from e


def load_config(path: str | Path) -> StudyConfig:
    """Read and parse a TOML study file.

    Raises:
        ConfigError: The file is unreadable, not valid TOML, or invalid.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"Cannot read config file: {e}", str(path)) from e
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"Invalid TOML: {e}", str(path)) from e
    return parse_config(data, str(path))
