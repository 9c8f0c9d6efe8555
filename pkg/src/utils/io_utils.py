"""CSV and JSON artifacts written by the command line."""

import csv
import io
import json
import os
import sys
from typing import Any, Dict, Iterable, List, Optional, Sequence

import mpmath

from src.core.errors import ConfigError


def format_value(value) -> str:
    """Deterministic text for numbers; mpmath values keep 40 significant digits."""
    if value is None:
        return ""
    if isinstance(value, (mpmath.mpf, mpmath.mpc)):
        return mpmath.nstr(value, 40)
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if hasattr(value, "item"):
        return format_value(value.item())
    return str(value)


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (mpmath.mpf, mpmath.mpc)):
        return mpmath.nstr(value, 40)
    if hasattr(value, "item"):
        return value.item()
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    return str(value)


def config_echo(config: Dict[str, Any]) -> str:
    return "# config: " + json.dumps(_jsonable(config), sort_keys=True)


def write_csv(path: Optional[str], header: Sequence[str], rows: Iterable[Sequence],
              config: Dict[str, Any]) -> int:
    """Write rows under a config-echo comment and a header line.

    path None writes to stdout. Returns the number of data rows.
    """
    buffer = io.StringIO()
    buffer.write(config_echo(config) + "\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    count = 0
    for row in rows:
        writer.writerow([format_value(v) for v in row])
        count += 1
    if path is None:
        sys.stdout.write(buffer.getvalue())
    else:
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(path, "w", newline="") as f:
            f.write(buffer.getvalue())
    return count


def report_entry(check_name: str, passed: bool, value, tolerance) -> Dict[str, Any]:
    return {
        "check_name": check_name,
        "status": "pass" if passed else "fail",
        "value": _jsonable(value),
        "tolerance": _jsonable(tolerance),
    }


def write_report(path: str, entries: List[Dict[str, Any]], config: Dict[str, Any]) -> int:
    """Write the validation report; returns the number of failing checks."""
    document = {"config": _jsonable(config), "checks": entries}
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w") as f:
        json.dump(document, f, indent=2, sort_keys=True)
        f.write("\n")
    return sum(1 for e in entries if e["status"] != "pass")


def load_json_config(path: str) -> Dict[str, Any]:
    try:
        with open(path, "r") as f:
            data = json.load(f)
    except (json.JSONDecodeError, FileNotFoundError) as exc:
        raise ConfigError(f"cannot read config file {path!r}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path!r} must hold a JSON object")
    return {key.replace("-", "_"): value for key, value in data.items()}
