"""Runtime configuration: JSON file, environment, then defaults.

Precedence per setting: environment variable (CINEVOICE_*), then the
config file given with --config, then the built-in default. Unknown
keys in a config file are rejected so typos fail loudly.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Mapping, Optional

ENV_PREFIX = "CINEVOICE_"


@dataclass(frozen=True)
class AppConfig:
    data_dir: str = "data/demo"
    host: str = "127.0.0.1"
    port: int = 8765
    page_size: int = 8
    k: int = 20
    min_support: int = 2
    confidence_threshold: float = 0.5
    title_threshold: float = 0.75
    session_timeout_s: float = 120.0
    auth_token: str = "dev-token"


def _coerce(name: str, kind: type, value: Any) -> Any:
    try:
        if kind is int:
            return int(value)
        if kind is float:
            return float(value)
        return str(value)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"config value {name}={value!r} is not {kind.__name__}") from exc


def load_config(
    path: "str | Path | None" = None,
    env: Optional[Mapping[str, str]] = None,
) -> AppConfig:
    if env is None:
        env = os.environ
    known = {f.name: f.type for f in fields(AppConfig)}
    types = {"int": int, "float": float, "str": str}
    values: dict[str, Any] = {}

    if path is not None:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        if not isinstance(raw, dict):
            raise ValueError(f"{path}: config must be a JSON object")
        unknown = sorted(set(raw) - set(known))
        if unknown:
            raise ValueError(f"{path}: unknown config keys: {', '.join(unknown)}")
        for name, value in raw.items():
            values[name] = _coerce(name, types[known[name]], value)

    for name, type_name in known.items():
        env_key = ENV_PREFIX + name.upper()
        if env_key in env:
            values[name] = _coerce(name, types[type_name], env[env_key])

    return AppConfig(**values)
