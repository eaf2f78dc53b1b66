"""Output writers with full round-trip float precision (17 significant digits)."""
from __future__ import annotations

import csv
import json
import math
import os
import time

import numpy as np

from . import __version__

__all__ = ["Manifest", "fmt", "to_json", "write_csv", "write_json"]


def fmt(x) -> str:
    """17-significant-digit rendering; non-finite values become ``nan``/``inf``."""
    return format(float(x), ".17g")


def to_json(obj, indent: int = 1, _level: int = 0) -> str:
    """JSON text with every float written at 17 significant digits.

    Non-finite floats become ``null`` so the output stays strict JSON.
    """
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {to_json(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        items = [pad + to_json(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_json(path, obj):
    with open(path, "w") as fh:
        fh.write(to_json(obj) + "\n")
    return path


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else
                        ("true" if v is True else "false" if v is False else v) for v in row])
    return path


class Manifest:
    """Config echo, version, output list and wall-clock duration of one command."""

    def __init__(self, command: str, config_raw: dict, out_dir: str):
        self.command = command
        self.config = config_raw
        self.out_dir = out_dir
        self.outputs = []
        self._start = time.perf_counter()

    def add(self, path):
        self.outputs.append(os.path.relpath(path, self.out_dir))
        return path

    def write(self, extra: dict | None = None):
        missing = [p for p in self.outputs if os.path.getsize(os.path.join(self.out_dir, p)) == 0]
        if missing:
            raise RuntimeError(f"empty outputs: {missing}")
        body = {
            "command": self.command,
            "version": __version__,
            "config": self.config,
            "outputs": self.outputs,
            "duration_seconds": time.perf_counter() - self._start,
            "finished": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        }
        body.update(extra or {})
        return write_json(os.path.join(self.out_dir, "manifest.json"), body)
