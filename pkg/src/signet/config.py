"""Flat ``key = value`` run-configuration files.

Keys match the long CLI flags with dashes or underscores. Precedence when
combined with the command line is flags > file > built-in defaults.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any

from .errors import ConfigError

_BOOL = {"true": True, "yes": True, "1": True, "on": True,
         "false": False, "no": False, "0": False, "off": False}


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.replace(" ", "").split(",") if x)


# key -> (RunConfig field, parser)
KEYS: dict[str, tuple[str, Any]] = {
    "prices": ("prices", Path),
    "index": ("index", Path),
    "window_length": ("window_length", int),
    "step": ("step", int),
    "theta": ("theta", float),
    "k": ("k", int),
    "tail_fraction": ("tail_fraction", float),
    "bins": ("n_bins", int),
    "fit_range": ("fit_range", _floats),
    "return_bins": ("return_bins", _floats),
    "return_bin_count": ("n_return_bins", int),
    "out": ("out_dir", Path),
    "jobs": ("jobs", int),
    "baseline": ("baseline", lambda s: _BOOL[s.lower()]),
    "dump_corr": ("dump_corr", lambda s: _BOOL[s.lower()]),
    "dump_pdf": ("dump_pdf", lambda s: _BOOL[s.lower()]),
    "dump_edges": ("dump_edges", lambda s: _BOOL[s.lower()]),
}


def parse_config_text(text: str, source: str = "<config>") -> dict[str, Any]:
    """Map of RunConfig field -> typed value."""
    out: dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, value = (p.strip() for p in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        name, conv = KEYS[key]
        try:
            out[name] = conv(value)
        except (ValueError, KeyError) as exc:
            raise ConfigError(f"{source}:{lineno}: bad value for {key}: {value!r}") from exc
    if "fit_range" in out and len(out["fit_range"]) != 2:
        raise ConfigError(f"{source}: fit_range needs exactly two numbers")
    return out


def load_config_file(path) -> dict[str, Any]:
    p = Path(path)
    values = parse_config_text(p.read_text(encoding="utf-8"), str(p))
    # relative paths resolve against the config file's directory
    for name in ("prices", "index"):
        if name in values and not values[name].is_absolute():
            values[name] = p.parent / values[name]
    return values
