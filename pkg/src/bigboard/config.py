"""Server configuration: JSON file plus environment overrides.

Precedence, lowest to highest: built-in defaults, the config file, then
``BIGBOARD_*`` environment variables. Unknown file keys are rejected so a
typo cannot silently fall back to a default.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields, replace
from pathlib import Path

from .errors import ConfigError

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


@dataclass(frozen=True)
class ServerConfig:
    listen: str = "127.0.0.1:8642"
    journal: str | None = None  # None keeps the delta log in memory only
    topology: str | None = None  # None serves the built-in exercise network
    manager_token: str = "manager-token"
    member_token: str = "member-token"
    scroll_tick_ms: int = 2000
    window_size: int = 4
    fsync: bool = False


_ENV_KEYS = {
    "BIGBOARD_LISTEN": "listen",
    "BIGBOARD_JOURNAL": "journal",
    "BIGBOARD_TOPOLOGY": "topology",
    "BIGBOARD_MANAGER_TOKEN": "manager_token",
    "BIGBOARD_MEMBER_TOKEN": "member_token",
    "BIGBOARD_SCROLL_TICK_MS": "scroll_tick_ms",
    "BIGBOARD_WINDOW_SIZE": "window_size",
    "BIGBOARD_FSYNC": "fsync",
}

_INT_FIELDS = {"scroll_tick_ms", "window_size"}
_BOOL_FIELDS = {"fsync"}


def _coerce(field_name: str, value: object, origin: str):
    if field_name in _INT_FIELDS:
        if isinstance(value, str):
            try:
                value = int(value)
            except ValueError:
                raise ConfigError(f"{origin}: {field_name} must be an integer") from None
        if not isinstance(value, int) or isinstance(value, bool) or value < 1:
            raise ConfigError(f"{origin}: {field_name} must be a positive integer")
        return value
    if field_name in _BOOL_FIELDS:
        if isinstance(value, bool):
            return value
        if isinstance(value, str):
            low = value.strip().lower()
            if low in _TRUE:
                return True
            if low in _FALSE:
                return False
        raise ConfigError(f"{origin}: {field_name} must be a boolean")
    if value is not None and not isinstance(value, str):
        raise ConfigError(f"{origin}: {field_name} must be a string")
    return value


def load_config(path: str | Path | None = None, env: dict | None = None) -> ServerConfig:
    env = os.environ if env is None else env
    config = ServerConfig()

    if path is not None:
        try:
            doc = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigError("config file must hold a JSON object")
        known = {f.name for f in fields(ServerConfig)}
        for key, value in doc.items():
            if key not in known:
                raise ConfigError(f"unknown config key {key!r}")
            config = replace(config, **{key: _coerce(key, value, str(path))})

    for env_key, field_name in _ENV_KEYS.items():
        if env_key in env:
            config = replace(
                config, **{field_name: _coerce(field_name, env[env_key], env_key)}
            )

    if not config.manager_token or not config.member_token:
        raise ConfigError("manager_token and member_token must be non-empty")
    if config.manager_token == config.member_token:
        raise ConfigError("manager_token and member_token must differ")
    host, _, port = config.listen.partition(":")
    if not host or not port or not port.isdigit():
        raise ConfigError(f"listen address {config.listen!r} must look like host:port")
    return config
