"""Unit conversions used at configuration boundaries.

Everything inside the package is SI (Hz, W, bit, s, J). Values read from
configuration files may carry a unit suffix, e.g. ``"28 dBm"``,
``"-158 dBm/Hz"``, ``"20 MHz"`` or ``"2.51 MB"``.
"""

from __future__ import annotations

import math
import re

_SCALE = {
    "": 1.0,
    "hz": 1.0,
    "khz": 1e3,
    "mhz": 1e6,
    "ghz": 1e9,
    "w": 1.0,
    "mw": 1e-3,
    "w/hz": 1.0,
    "s": 1.0,
    "ms": 1e-3,
    "m": 1.0,
    "km": 1e3,
    "bit": 1.0,
    "bits": 1.0,
    "b": 8.0,
    "kb": 8e3,
    "mb": 8e6,
    "gb": 8e9,
    "j": 1.0,
}

_QUANTITY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([A-Za-z/]*)\s*$")


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watts_to_dbm(watts: float) -> float:
    return 10.0 * math.log10(watts) + 30.0


def parse_quantity(value, unit: str) -> float:
    """Convert ``value`` to the SI unit named by ``unit``.

    ``unit`` is one of ``"W"``, ``"W/Hz"``, ``"Hz"``, ``"bit"``, ``"s"``,
    ``"m"``. Bare numbers are taken to already be in that unit. dBm is
    accepted for power and dBm/Hz for noise density.
    """
    if isinstance(value, bool):
        raise ValueError(f"expected a number or quantity string, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if not isinstance(value, str):
        raise ValueError(f"expected a number or quantity string, got {value!r}")
    match = _QUANTITY.match(value)
    if match is None:
        raise ValueError(f"malformed quantity {value!r}")
    number, suffix = float(match.group(1)), match.group(2).lower()
    if suffix == "dbm":
        if unit != "W":
            raise ValueError(f"dBm given where {unit} expected: {value!r}")
        return dbm_to_watts(number)
    if suffix == "dbm/hz":
        if unit != "W/Hz":
            raise ValueError(f"dBm/Hz given where {unit} expected: {value!r}")
        return dbm_to_watts(number)
    if suffix not in _SCALE or not _compatible(suffix, unit):
        raise ValueError(f"unit {match.group(2)!r} is not a {unit} unit: {value!r}")
    return number * _SCALE[suffix]


_FAMILIES = {
    "Hz": {"", "hz", "khz", "mhz", "ghz"},
    "W": {"", "w", "mw"},
    "W/Hz": {"", "w/hz"},
    "s": {"", "s", "ms"},
    "m": {"", "m", "km"},
    "bit": {"", "bit", "bits", "b", "kb", "mb", "gb"},
    "J": {"", "j"},
}


def _compatible(suffix: str, unit: str) -> bool:
    return suffix in _FAMILIES.get(unit, {""})
