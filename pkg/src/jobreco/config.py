"""Layered runtime configuration: defaults, then a JSON file, then environment, then flags."""

from __future__ import annotations

import copy
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

from .domain import MatchConfig, read_json
from .errors import ConfigError

API_KEY_ENV = "JOBRECO_API_KEY"

DEFAULTS: dict[str, dict[str, Any]] = {
    "backend": {"endpoint": None, "model": "gpt-4", "timeout_s": 60.0, "max_retries": 3, "script": None},
    "match": {"directions": {}, "weights": {}},
    "limits": {"token_budget": 8192, "parallelism": 4},
}

# environment variable -> (section, key, type)
ENV_VARS = {
    "JOBRECO_ENDPOINT": ("backend", "endpoint", str),
    "JOBRECO_MODEL": ("backend", "model", str),
    "JOBRECO_TIMEOUT_S": ("backend", "timeout_s", float),
    "JOBRECO_MAX_RETRIES": ("backend", "max_retries", int),
    "JOBRECO_SCRIPT": ("backend", "script", str),
    "JOBRECO_TOKEN_BUDGET": ("limits", "token_budget", int),
    "JOBRECO_PARALLELISM": ("limits", "parallelism", int),
}

_TYPES = {
    ("backend", "endpoint"): (str, type(None)),
    ("backend", "model"): (str,),
    ("backend", "timeout_s"): (int, float),
    ("backend", "max_retries"): (int,),
    ("backend", "script"): (str, type(None)),
    ("match", "directions"): (dict,),
    ("match", "weights"): (dict,),
    ("limits", "token_budget"): (int,),
    ("limits", "parallelism"): (int,),
}


@dataclass(frozen=True)
class AppConfig:
    endpoint: str | None
    model: str
    timeout_s: float
    max_retries: int
    script: str | None
    match: MatchConfig
    token_budget: int
    parallelism: int
    api_key: str | None = None

    def public_dict(self) -> dict[str, Any]:
        """Resolved settings for display; the API key is reported only as set or unset."""
        return {
            "backend": {
                "endpoint": self.endpoint,
                "model": self.model,
                "timeout_s": self.timeout_s,
                "max_retries": self.max_retries,
                "script": self.script,
                "api_key": "set" if self.api_key else "unset",
            },
            "match": {"directions": dict(self.match.directions), "weights": dict(self.match.weights)},
            "limits": {"token_budget": self.token_budget, "parallelism": self.parallelism},
        }


def _merge_file(resolved: dict, data: Any, where: str) -> None:
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: expected a JSON object with sections {', '.join(DEFAULTS)}")
    for section, values in data.items():
        if section not in DEFAULTS:
            raise ConfigError(f"{where}: unknown section {section!r}")
        if not isinstance(values, dict):
            raise ConfigError(f"{where}: section {section!r} must be an object")
        for key, value in values.items():
            if key not in DEFAULTS[section]:
                raise ConfigError(f"{where}: unknown key {section}.{key}")
            expected = _TYPES[(section, key)]
            if isinstance(value, bool) or not isinstance(value, expected):
                raise ConfigError(f"{where}: {section}.{key} has the wrong type ({type(value).__name__})")
            resolved[section][key] = value


def _merge_env(resolved: dict, env: Mapping[str, str]) -> None:
    for var, (section, key, kind) in ENV_VARS.items():
        raw = env.get(var)
        if raw is None or raw == "":
            continue
        try:
            resolved[section][key] = kind(raw)
        except ValueError:
            raise ConfigError(f"environment {var}={raw!r} is not a valid {kind.__name__}") from None


def load_config(
    path=None,
    env: Mapping[str, str] | None = None,
    overrides: Mapping[str, Any] | None = None,
) -> AppConfig:
    """Resolve configuration.

    ``overrides`` maps ``"section.key"`` to a flag value; ``None`` values are
    ignored so unset flags never mask lower layers.
    """
    env = os.environ if env is None else env
    resolved = copy.deepcopy(DEFAULTS)
    if path is not None:
        path = Path(path)
        text = path.read_text(encoding="utf-8")
        if text.strip():
            _merge_file(resolved, read_json(path), str(path))
    _merge_env(resolved, env)
    for dotted, value in (overrides or {}).items():
        if value is None:
            continue
        section, key = dotted.split(".")
        resolved[section][key] = value

    match = MatchConfig(resolved["match"]["directions"], resolved["match"]["weights"])
    problems = match.violations()
    if problems:
        raise ConfigError("match: " + "; ".join(problems))
    limits = resolved["limits"]
    for key in ("token_budget", "parallelism"):
        if limits[key] < 1:
            raise ConfigError(f"limits.{key} must be >= 1, got {limits[key]}")
    b = resolved["backend"]
    return AppConfig(
        endpoint=b["endpoint"],
        model=b["model"],
        timeout_s=float(b["timeout_s"]),
        max_retries=b["max_retries"],
        script=b["script"],
        match=match,
        token_budget=limits["token_budget"],
        parallelism=limits["parallelism"],
        api_key=env.get(API_KEY_ENV) or None,
    )
