"""Parsing of unit-suffixed quantities such as ``"532 nm"`` or ``"2344 ps^2/km"``."""

from __future__ import annotations

import re

from .errors import ConfigError

__all__ = ["UNITS", "parse_quantity", "format_quantity"]

_LENGTH = {"pm": 1e-12, "nm": 1e-9, "um": 1e-6, "µm": 1e-6, "mm": 1e-3, "cm": 1e-2, "m": 1.0, "km": 1e3}
_TIME = {"fs": 1e-15, "ps": 1e-12, "ns": 1e-9, "us": 1e-6, "µs": 1e-6, "ms": 1e-3, "s": 1.0}

UNITS: dict[str, dict[str, float]] = {
    "length": _LENGTH,
    "time": _TIME,
    "power": {"uW": 1e-6, "µW": 1e-6, "mW": 1e-3, "W": 1.0, "kW": 1e3, "MW": 1e6},
    "frequency": {"Hz": 1.0, "kHz": 1e3, "MHz": 1e6, "GHz": 1e9, "THz": 1e12},
    "temperature": {"K": 1.0},
    "chi3": {"m^2/V^2": 1.0, "pm^2/V^2": 1e-24},
    "area": {"um^2": 1e-12, "µm^2": 1e-12, "nm^2": 1e-18, "m^2": 1.0},
    "gvd": {"ps^2/km": 1e-27, "fs^2/mm": 1e-27, "fs^2/m": 1e-30, "s^2/m": 1.0},
    "gain": {"m/W": 1.0, "cm/W": 1e-2},
}

_NUMBER = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_PATTERN = re.compile(rf"^\s*({_NUMBER})\s*([^\s\d].*?)?\s*$")


def parse_quantity(value, dimension: str, key: str = "value") -> float:
    """Convert ``value`` (a string with a unit) to SI for the given dimension.

    Bare numbers are rejected so that a missing unit cannot slip through.
    """
    table = UNITS.get(dimension)
    if table is None:
        raise ValueError(f"unknown dimension {dimension!r}")
    if isinstance(value, bool) or isinstance(value, (int, float)):
        raise ConfigError(f"{key}: {value!r} has no unit; expected one of {', '.join(table)}")
    if not isinstance(value, str):
        raise ConfigError(f"{key}: expected a quantity string, got {type(value).__name__}")
    m = _PATTERN.match(value)
    if not m:
        raise ConfigError(f"{key}: cannot parse quantity {value!r}")
    number, unit = m.group(1), m.group(2)
    if not unit:
        raise ConfigError(f"{key}: {value!r} has no unit; expected one of {', '.join(table)}")
    unit = unit.replace(" ", "").replace("²", "^2")
    if unit not in table:
        raise ConfigError(f"{key}: unit {unit!r} is not a {dimension} unit ({', '.join(table)})")
    return float(number) * table[unit]


def format_quantity(value: float, unit: str, dimension: str) -> str:
    """Inverse of ``parse_quantity`` for reporting; uses repr precision."""
    return f"{value / UNITS[dimension][unit]!r} {unit}"
