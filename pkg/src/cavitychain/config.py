"""Key-value configuration files.

Format: one `key = value` pair per line, `#` comments, blank lines ignored.
Keys mirror the CLI flags; the full schema is documented in the README.
"""

from __future__ import annotations

from pathlib import Path

from .errors import ConfigError

# key -> coercion
_SCHEMA = {
    "preset": str,
    "N": int,
    "g": float,
    "J": float,
    "Jz": float,
    "Jx": float,
    "Jy": float,
    "omega": float,
    "epsilon": float,
    "boundary": str,
    "backend": str,
    "branch": str,
    "chi": int,
    "sweeps": int,
    "degen_field": float,
    "seed": int,
    "max_outer": int,
    "tol_E": float,
    "tol_O": float,
    "n_max": int,
    "out": str,
    "axis1": str,
    "axis2": str,
    "N_list": str,
    "cells": str,
    "workers": int,
    "grid_g": float,
    "grid_J": float,
}

_BOOLEANS = {"true": True, "false": False, "yes": True, "no": False}


def parse_config_text(text: str) -> dict:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _SCHEMA:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            out[key] = _SCHEMA[key](value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {value!r}") from exc
    return out


def load_config(path: str | Path) -> dict:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {p}")
    return parse_config_text(p.read_text())


def merge_options(defaults: dict, config: dict, flags: dict) -> dict:
    """Precedence: flags override config, config overrides defaults."""
    merged = dict(defaults)
    merged.update(config)
    merged.update({k: v for k, v in flags.items() if v is not None})
    return merged
