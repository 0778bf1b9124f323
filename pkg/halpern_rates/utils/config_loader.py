"""Experiment configuration files.

Two formats are accepted. The flat one holds ``section.key = value`` lines
with ``#`` comments; values are read as JSON when they parse (numbers,
booleans, lists, objects) and as plain strings otherwise. A file whose
first non-blank character is ``{`` is read as a JSON document.
"""
import json
import os

from dotenv import dotenv_values

from halpern_rates.errors import ConfigurationError


def parse_value(raw):
    """JSON scalar/list/object when possible, else the stripped string."""
    if raw is None:
        return None
    text = raw.strip()
    if text.lower() in ("true", "false"):
        return text.lower() == "true"
    try:
        return json.loads(text)
    except ValueError:
        return text


def nest(flat):
    """Turn {'a.b.c': v} into {'a': {'b': {'c': v}}}."""
    out = {}
    for key, value in flat.items():
        parts = [part for part in key.split(".") if part]
        if not parts:
            raise ConfigurationError(f"Empty configuration key '{key}'")
        node = out
        for part in parts[:-1]:
            child = node.setdefault(part, {})
            if not isinstance(child, dict):
                raise ConfigurationError(f"Key '{key}' conflicts with a scalar at '{part}'")
            node = child
        if isinstance(node.get(parts[-1]), dict):
            raise ConfigurationError(f"Key '{key}' conflicts with a section")
        node[parts[-1]] = value
    return out


def load_config_file(path):
    """Read a configuration file into a nested dict.

    Raises:
        ConfigurationError: the file is missing or malformed
    """
    if not os.path.isfile(path):
        raise ConfigurationError(f"Configuration file {path} not found")
    with open(path, encoding="utf-8") as handle:
        text = handle.read()
    if text.lstrip().startswith("{"):
        try:
            data = json.loads(text)
        except ValueError as exc:
            raise ConfigurationError(f"Invalid JSON in {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigurationError(f"{path} must hold a JSON object")
        return data
    values = dotenv_values(path, interpolate=False, encoding="utf-8")
    return nest({key: parse_value(value) for key, value in values.items()})
