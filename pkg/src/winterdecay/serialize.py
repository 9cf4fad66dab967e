"""Table serialization (CSV with a JSON metadata header, or JSON), config files
and time expressions such as "T/8" or "1.2T"."""

from fractions import Fraction
import io
import json
import math
import re

import numpy as np

FLOAT_FORMAT = ".17g"

_TIME_RE = re.compile(
    r"^\s*(?P<coef>[0-9.]+(?:[eE][+-]?[0-9]+)?)?\s*\*?\s*T\s*(?:/\s*(?P<div>[0-9.]+(?:[eE][+-]?[0-9]+)?))?\s*$"
)


class ConfigError(ValueError):
    pass


def parse_number(text):
    """Float from '0.25', '1e-3' or a fraction '1/200'."""
    text = text.strip()
    try:
        return float(Fraction(text)) if "/" in text else float(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"not a number: {text!r}") from exc


def parse_time_value(text, period):
    """Absolute time from '0.3', 'T', '1.2T', '3*T', 'T/8' or '3T/4'."""
    m = _TIME_RE.match(text)
    if m is None:
        return parse_number(text)
    coef = float(m.group("coef")) if m.group("coef") else 1.0
    div = float(m.group("div")) if m.group("div") else 1.0
    if div == 0:
        raise ConfigError(f"division by zero in time {text!r}")
    return coef * period / div


def parse_time_list(text, period):
    return [parse_time_value(item, period) for item in text.split(",") if item.strip()]


def read_config_file(path):
    """key=value lines; '#' starts a comment. Keys use the long flag names."""
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            values[key.lstrip("-").replace("-", "_")] = value
    return values


def read_state_file(path):
    """Two-column CSV (r, phi0); '#' comments and a non-numeric header row are skipped."""
    rows = []
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = [p.strip() for p in line.split(",")]
            if len(parts) != 2:
                raise ConfigError(f"{path}: expected two columns, got {line!r}")
            try:
                rows.append((float(parts[0]), float(parts[1])))
            except ValueError:
                if rows:
                    raise ConfigError(f"{path}: bad row {line!r}") from None
    if len(rows) < 2:
        raise ConfigError(f"{path}: need at least two rows")
    data = np.asarray(rows)
    return data[:, 0], data[:, 1]


def _fmt(x):
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), FLOAT_FORMAT)


def format_table(columns, metadata, fmt="csv"):
    """Serialize named equal-length columns plus metadata to a string."""
    names = list(columns)
    arrays = [np.asarray(columns[n]) for n in names]
    if fmt == "json":
        payload = {
            "metadata": metadata,
            "columns": {n: [int(v) if np.issubdtype(a.dtype, np.integer) else float(v) for v in a]
                        for n, a in zip(names, arrays)},
        }
        return json.dumps(payload, sort_keys=True, indent=1) + "\n"
    if fmt != "csv":
        raise ConfigError(f"unknown format {fmt!r}")
    out = io.StringIO()
    out.write("# " + json.dumps(metadata, sort_keys=True) + "\n")
    out.write(",".join(names) + "\n")
    for row in zip(*arrays):
        out.write(",".join(_fmt(v) for v in row) + "\n")
    return out.getvalue()


def parse_table(text):
    """Inverse of format_table: (metadata, {name: array})."""
    if text.lstrip().startswith("{"):
        payload = json.loads(text)
        return payload["metadata"], {k: np.asarray(v) for k, v in payload["columns"].items()}
    lines = text.splitlines()
    metadata = {}
    body = []
    for line in lines:
        if line.startswith("#"):
            metadata.update(json.loads(line[1:]))
        elif line.strip():
            body.append(line)
    names = body[0].split(",")
    cols = {n: [] for n in names}
    for line in body[1:]:
        for n, v in zip(names, line.split(",")):
            cols[n].append(v)
    return metadata, {n: _column(v) for n, v in cols.items()}


def _column(values):
    try:
        return np.asarray([int(v) for v in values], dtype=np.int64)
    except ValueError:
        return np.asarray([float(v) for v in values])


def read_table(path):
    with open(path) as fh:
        return parse_table(fh.read())


def write_text(text, path=None, stream=None):
    if path is None:
        stream.write(text)
        return
    with open(path, "w", newline="") as fh:
        fh.write(text)


def finite_or_none(x):
    x = float(x)
    return x if math.isfinite(x) else None
