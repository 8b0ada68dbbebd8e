# Some helper functions
from __future__ import annotations

import hashlib
import math
import os
import pathlib
import tempfile
from fractions import Fraction

import datajoint as dj

_CONFIG_DEFAULTS = {
    "fogran.field_prime": 65537,
    "fogran.seed": 20171029,
    "fogran.sweep_workers": 1,
}


def get_config(name: str) -> int:
    """Typed lookup of a `fogran.*` key in `dj.config["custom"]`."""
    if name not in _CONFIG_DEFAULTS:
        raise KeyError(f"Unknown configuration key: {name}")
    return int(dj.config.get("custom", {}).get(name, _CONFIG_DEFAULTS[name]))


def convert_to_fraction(value) -> Fraction | float:
    """Parse `num/den`, an integer string, `inf` or a number into an exact value.

    Floating point input is refused so that no rounding enters the NDT arithmetic.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError(f"Not a rational value: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if math.isinf(value) and value > 0:
            return math.inf
        raise TypeError(f"Floating point value {value!r} is not accepted, use num/den")
    if isinstance(value, str):
        text = value.strip()
        if text.lower() in ("inf", "+inf"):
            return math.inf
        try:
            num, _, den = text.partition("/")
            return Fraction(int(num), int(den)) if den else Fraction(int(num))
        except (ValueError, ZeroDivisionError):
            raise ValueError(f"Malformed rational {value!r}, expected num/den")
    raise TypeError(f"Not a rational value: {value!r}")


def format_fraction(value) -> str:
    """Render an exact value as `num/den` (`num` for integers, `inf` for +infinity)."""
    if isinstance(value, float) and math.isinf(value):
        return "inf"
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def payload_digest(payload: bytes) -> str:
    """Short content digest used in logs and database rows."""
    return hashlib.sha256(payload).hexdigest()[:16]


def atomic_write_text(path, text: str) -> pathlib.Path:
    """Write UTF-8/LF text next to `path` and rename it into place."""
    path = pathlib.Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        pathlib.Path(tmp_name).unlink(missing_ok=True)
        raise
    return path
