"""Deterministic report emission and flat-file config parsing.

Every artifact the command-line driver writes (CSV tables, JSON reports)
must be byte-identical across runs with the same inputs.  The stock
``json`` module gets in the way of that goal in one subtle spot: its C
encoder calls ``float.__repr__`` directly, bypassing any subclass hook,
and ``repr`` of a float is shortest-round-trip, which is fine — but we
also want a single fixed format shared with the CSV writers so the same
number never appears in two spellings.  So JSON is emitted by a small
recursive serializer here, with every float rendered as ``%.17g`` and
keys sorted.

Config files for the driver are flat ``key = value`` lines with ``#``
comments; values keep their raw string form and are interpreted by the
consuming subcommand.
"""

from __future__ import annotations

import csv
import math

__all__ = [
    "ConfigError",
    "fmt_value",
    "json_text",
    "read_config",
    "write_csv",
    "write_json",
]


class ConfigError(ValueError):
    """Raised when a config file is malformed or missing required keys."""


def fmt_value(value):
    """Render a scalar as the canonical string used in all artifacts.

    Bools map to ``true``/``false``, ints to their decimal form, floats
    to ``%.17g`` (shortest form that is still round-trip exact), and
    non-finite floats to quoted words so CSV consumers never see ``inf``
    bare.  Strings pass through unchanged.
    """
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return format(value, ".17g")
    if isinstance(value, str):
        return value
    raise TypeError(f"cannot format {type(value).__name__} for an artifact")


def write_csv(path, fieldnames, rows):
    """Write ``rows`` (mappings) as a CSV table with a fixed header.

    All values are rendered through :func:`fmt_value`; the line
    terminator is a bare newline on every platform.
    """
    fieldnames = list(fieldnames)
    with open(path, "w", newline="", encoding="ascii") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(fieldnames)
        for row in rows:
            writer.writerow([fmt_value(row[name]) for name in fieldnames])


def _json_escape(text):
    out = ["\""]
    for ch in text:
        if ch == "\"":
            out.append("\\\"")
        elif ch == "\\":
            out.append("\\\\")
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\t":
            out.append("\\t")
        elif ch == "\r":
            out.append("\\r")
        elif ord(ch) < 0x20:
            out.append(f"\\u{ord(ch):04x}")
        else:
            out.append(ch)
    out.append("\"")
    return "".join(out)


def _json_render(value, indent):
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value) or math.isinf(value):
            # JSON has no literal for these; emit the canonical string.
            return _json_escape(fmt_value(value))
        return format(value, ".17g")
    if isinstance(value, str):
        return _json_escape(value)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = []
        for key in value:
            if isinstance(key, bool) or not isinstance(key, (str, int)):
                raise TypeError("JSON object keys must be strings or integers")
            items.append((key if isinstance(key, str) else str(key), value[key]))
        items.sort(key=lambda kv: kv[0])
        parts = [
            f"{inner}{_json_escape(k)}: {_json_render(v, indent + 1)}"
            for k, v in items
        ]
        return "{\n" + ",\n".join(parts) + f"\n{pad}}}"
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        parts = [f"{inner}{_json_render(v, indent + 1)}" for v in value]
        return "[\n" + ",\n".join(parts) + f"\n{pad}]"
    raise TypeError(f"cannot serialize {type(value).__name__} to JSON")


def json_text(obj):
    """Serialize ``obj`` to deterministic JSON text (sorted keys, .17g)."""
    return _json_render(obj, 0) + "\n"


def write_json(path, obj):
    """Write ``obj`` as deterministic JSON."""
    with open(path, "w", newline="", encoding="ascii") as handle:
        handle.write(json_text(obj))


def read_config(path):
    """Parse a flat ``key = value`` config file into a string dict.

    Blank lines and ``#`` comments (full-line or trailing) are ignored.
    Keys may repeat only if that is meaningful to the consumer; here a
    repeat is an error to catch typos early.
    """
    table = {}
    try:
        with open(path, "r", encoding="utf-8") as handle:
            lines = handle.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path!r}: {exc}") from exc
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(
                f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}"
            )
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key:
            raise ConfigError(f"{path}:{lineno}: empty key")
        if key in table:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        table[key] = value
    return table
