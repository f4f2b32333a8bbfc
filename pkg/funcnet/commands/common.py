"""
Shared helpers for the subcommands: run-configuration loading and flag overrides
"""

import json
import logging
import re
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import ValidationError

from funcnet.core.errors import ConfigError, DatasetIOError
from funcnet.schemas.config import ModelConfig, RunConfig

logger = logging.getLogger(__name__)

MODEL_NAME_PATTERN = re.compile(r"[A-Za-z]+\s*(?:\([^)]*\))?")


def deep_merge(base: Dict[str, Any], overrides: Dict[str, Any]) -> Dict[str, Any]:
    """Key-by-key merge; nested dictionaries are merged, everything else replaced"""
    merged = dict(base)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def read_config_file(path: Optional[str]) -> Dict[str, Any]:
    if path is None:
        return {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise DatasetIOError(path, exc.strerror or str(exc))
    try:
        content = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})")
    if not isinstance(content, dict):
        raise ConfigError(f"{path}: the configuration must be a JSON object")
    return content


def describe_validation_error(exc: ValidationError) -> str:
    lines = []
    for error in exc.errors():
        location = ".".join(str(part) for part in error["loc"]) or "config"
        lines.append(f"{location}: {error['msg']}")
    return "invalid configuration: " + "; ".join(lines)


def load_run_config(path: Optional[str], overrides: Dict[str, Any]) -> RunConfig:
    """Defaults < config file < command-line flags"""
    merged = deep_merge(read_config_file(path), overrides)
    try:
        cfg = RunConfig.model_validate(merged)
    except ValidationError as exc:
        raise ConfigError(describe_validation_error(exc))
    logger.debug(f"Run configuration: {cfg.model_dump_json()}")
    return cfg


def split_model_names(text: str) -> List[str]:
    """'FLM,FBNN(4,4)' -> ['FLM', 'FBNN(4,4)']"""
    names = [name.replace(" ", "") for name in MODEL_NAME_PATTERN.findall(text)]
    if not names:
        raise ConfigError(f"no model names in {text!r}")
    return names


def model_override(label: str) -> Dict[str, Any]:
    """Flag value like 'FBNN(4,4)' as a partial model section"""
    try:
        parsed = ModelConfig.from_label(label)
    except (ValueError, ValidationError) as exc:
        raise ConfigError(str(exc))
    return parsed.model_dump(exclude_unset=True, mode="json")


def scenario_override(name: str) -> Dict[str, Any]:
    if name == "logistic":
        return {"name": "linear", "response": "binary"}
    return {"name": name}


def compact(values: Dict[str, Any]) -> Dict[str, Any]:
    """Drop flags that were not given"""
    return {key: value for key, value in values.items() if value is not None and value != {}}


def require(value: Optional[str], flag: str) -> str:
    if value is None:
        raise ConfigError(f"{flag} is required for this command")
    return value
