# -*- coding: utf-8 -*-
# Part of fluxfem.
# Distributed under the terms of the GNU General Public License (GPL).
import copy
import logging
import os
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

import yaml

from .constants import SEED_ENV_VAR

logger = logging.getLogger(__name__)

DEFAULT_SETTINGS_FILE = Path(__file__).parent / "default_study.yaml"
SUPPORTED_SETTINGS_FILE = Path(__file__).parent / "supported_config_settings.yaml"


class SettingsError(ValueError):
    pass


def _read_yaml(path: Union[str, Path]) -> Dict[str, Any]:
    with open(path, "r", encoding="utf-8") as stream:
        content = yaml.safe_load(stream)
    if content is None:
        return {}
    if not isinstance(content, dict):
        raise SettingsError(f"{path}: top level of a settings file must be a mapping")
    return content


def _merge(base: Dict[str, Any], update: Mapping[str, Any], prefix: str = "") -> None:
    for key, value in update.items():
        dotted = f"{prefix}{key}"
        if key not in base:
            raise SettingsError(f"Unknown setting '{dotted}'")
        if isinstance(base[key], dict):
            if not isinstance(value, Mapping):
                raise SettingsError(f"Setting '{dotted}' must be a mapping")
            _merge(base[key], value, prefix=dotted + ".")
        else:
            base[key] = value


def _check_value(dotted: str, value: Any, rule: Any) -> None:
    if rule == "FLUXFEM_BOOL":
        if not isinstance(value, bool):
            raise SettingsError(f"Setting '{dotted}' must be a boolean, got {value!r}")
        return
    if not isinstance(rule, dict) or len(rule) != 1:
        raise SettingsError(f"Malformed schema entry for '{dotted}'")
    kind, limits = next(iter(rule.items()))
    if kind == "FLUXFEM_LIST":
        if value not in limits["valid_values"]:
            raise SettingsError(
                f"Setting '{dotted}' must be one of {limits['valid_values']}, got {value!r}"
            )
        return
    if kind == "FLUXFEM_INT":
        if isinstance(value, bool) or not isinstance(value, int):
            raise SettingsError(f"Setting '{dotted}' must be an integer, got {value!r}")
    elif kind == "FLUXFEM_FLOAT":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise SettingsError(f"Setting '{dotted}' must be a number, got {value!r}")
    else:
        raise SettingsError(f"Unknown schema type {kind} for '{dotted}'")
    if not limits["min"] <= value <= limits["max"]:
        raise SettingsError(
            f"Setting '{dotted}'={value!r} outside [{limits['min']}, {limits['max']}]"
        )


def validate_settings(settings: Mapping[str, Any], schema: Mapping[str, Any], prefix: str = "") -> None:
    """Check every key of ``settings`` against the supported-settings schema."""
    for key, value in settings.items():
        dotted = f"{prefix}{key}"
        if key not in schema:
            raise SettingsError(f"Unknown setting '{dotted}'")
        rule = schema[key]
        if isinstance(value, dict):
            validate_settings(value, rule, prefix=dotted + ".")
        else:
            _check_value(dotted, value, rule)


def load_settings(
    path: Optional[Union[str, Path]] = None,
    overrides: Optional[Mapping[str, Any]] = None,
) -> Dict[str, Any]:
    """Return the study settings.

    The bundled ``default_study.yaml`` is loaded first; the optional user file
    and then ``overrides`` (nested mapping with the same layout) are merged on
    top. The result is validated against ``supported_config_settings.yaml``.

    :raises SettingsError: for unknown keys or values outside their range.
    """
    settings = _read_yaml(DEFAULT_SETTINGS_FILE)
    if path is not None:
        logger.info("Loading settings from %s", path)
        _merge(settings, _read_yaml(path))
    if overrides:
        _merge(settings, copy.deepcopy(dict(overrides)))
    validate_settings(settings, _read_yaml(SUPPORTED_SETTINGS_FILE))

    if os.environ.get(SEED_ENV_VAR) is not None:
        logger.debug("%s is set but unused: all algorithms are deterministic", SEED_ENV_VAR)
    return settings
