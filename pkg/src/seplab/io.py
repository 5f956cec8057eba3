"""CSV/JSON writers shared by the command line tools.

Floats are written with 17 significant digits so that files round-trip
exactly; every file starts with a comment line (CSV) or a "config" entry
(JSON) holding the resolved run configuration.
"""

from __future__ import annotations

import json
import math
from pathlib import Path


def fmt(x) -> str:
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, float):
        return "%.17g" % x
    return str(x)


def config_line(command: str, config: dict) -> str:
    return f"# seplab {command} " + json.dumps(config, sort_keys=True, default=_json_default)


def write_csv(path, columns, rows, command: str, config: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="\n") as fh:
        fh.write(config_line(command, config) + "\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(fmt(x) for x in row) + "\n")
    return path


def _json_default(o):
    if hasattr(o, "tolist"):
        return o.tolist()
    if hasattr(o, "value"):
        return o.value
    raise TypeError(f"cannot serialise {type(o).__name__}")


def _clean(o):
    # NaN/inf are not valid JSON; write them as null
    if isinstance(o, float) and not math.isfinite(o):
        return None
    if isinstance(o, dict):
        return {k: _clean(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_clean(v) for v in o]
    return o


def write_json(path, payload: dict, command: str, config: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    body = {"config": {"command": command, **config}, **payload}
    path.write_text(json.dumps(_clean(body), indent=2, sort_keys=False, default=_json_default) + "\n")
    return path


def read_csv(path):
    """(columns, rows as lists of strings), skipping comment lines."""
    lines = [l for l in Path(path).read_text().splitlines() if not l.startswith("#")]
    cols = lines[0].split(",")
    return cols, [l.split(",") for l in lines[1:]]
