"""INI run configuration with a closed schema.

Unknown sections or keys are errors so that a typo cannot silently fall back
to a default.  See ``configs/`` for annotated examples.
"""
from __future__ import annotations

import configparser
import math
from dataclasses import dataclass

import numpy as np

from .evolution import InitialData, SimConfig
from .operators import ModelSpec
from .spectral import GridSpec

__all__ = ["ConfigError", "RunConfig", "SCHEMA", "load_config", "parse_config"]


class ConfigError(ValueError):
    """Malformed configuration (maps to exit code 2)."""


def _float_or_auto(v: str):
    v = v.strip()
    return "auto" if v.lower() == "auto" else float(v)


def _float_list(v: str) -> tuple:
    v = v.strip()
    return tuple(float(p) for p in v.replace(",", " ").split()) if v else ()


def _opt_float(v: str):
    v = v.strip()
    return None if v.lower() in ("", "none") else float(v)


def _bool(v: str) -> bool:
    b = v.strip().lower()
    if b in ("1", "true", "yes", "on"):
        return True
    if b in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


# section -> key -> (parser, default)
SCHEMA = {
    "model": {
        "kind": (str, "burgers"),
        "alpha": (_opt_float, None),
        "s": (_opt_float, None),
        "tau": (_opt_float, None),
        "sign": (str, "standard"),
        "kernel_file": (str, ""),
    },
    "data": {
        "kind": (str, "gaussian_slope"),
        "amplitude": (float, 1.0),
        "amplitude_mode": (str, "absolute"),  # absolute | critical (multiple of the critical amplitude)
        "width": (float, 1.0),
        "file": (str, ""),
    },
    "grid": {
        "half_width": (float, 40.0),
        "n": (int, 1024),
        "n_max": (int, 4096),
    },
    "criteria": {
        "theta": (_float_or_auto, "auto"),
        "c_gn": (_float_or_auto, "auto"),
    },
    "simulation": {
        "cfl": (float, 0.4),
        "m_cap_factor": (float, 50.0),
        "tail_stop": (float, 1e-4),
        "fit_window": (int, 20),
        "max_time": (float, 10.0),
        "min_growth": (float, 3.0),
    },
    "sweep": {
        # absent: use the single value from the other sections; present but empty: empty grid
        "amplitudes": (_float_list, None),
        "thetas": (_float_list, None),
        "s_values": (_float_list, None),
        "simulate": (_bool, True),
        "workers": (int, 0),
    },
    "kernels": {
        "x_min": (float, 0.01),
        "x_max": (float, 10.0),
        "points": (int, 25),
        "s_values": (_float_list, (0.3, 0.5, 0.9, 1.0, 1.5, 3.0)),
        "gamma_s_min": (float, 0.05),
        "gamma_s_max": (float, 5.0),
        "gamma_points": (int, 100),
    },
}


@dataclass
class RunConfig:
    values: dict  # section -> key -> parsed value
    raw: dict  # section -> key -> string, for the manifest

    def __getitem__(self, section):
        return self.values[section]

    def model(self) -> ModelSpec:
        m = self["model"]
        kind = m["kind"]
        if kind == "burgers":
            return ModelSpec.burgers()
        if kind == "fkdv":
            return ModelSpec.fkdv(m["alpha"])
        if kind == "whitham":
            return ModelSpec.whitham(m["sign"])
        if kind == "fw":
            return ModelSpec.fornberg_whitham(m["s"], m["sign"])
        if kind == "tabulated":
            x, k = _read_table(m["kernel_file"])
            return ModelSpec.tabulated(x, k)
        raise ConfigError(f"[model] kind must be one of burgers, fkdv, whitham, fw, tabulated; got {kind!r}")

    def grid(self) -> GridSpec:
        g = self["grid"]
        return GridSpec(g["half_width"], g["n"])

    def data(self, amplitude: float | None = None) -> InitialData:
        d = self["data"]
        a = d["amplitude"] if amplitude is None else amplitude
        if d["kind"] == "tabulated":
            x, v = _read_table(d["file"])
            return InitialData("tabulated", 1.0, 1.0, tuple(x), tuple(a * np.asarray(v)))
        return InitialData(d["kind"], a, d["width"])

    def sim(self, model: ModelSpec, data: InitialData, grid: GridSpec | None = None) -> SimConfig:
        s = self["simulation"]
        return SimConfig(model, grid or self.grid(), data, cfl_number=s["cfl"],
                         m_cap_factor=s["m_cap_factor"], tail_stop=s["tail_stop"],
                         fit_window=s["fit_window"], max_time=s["max_time"],
                         n_max=self["grid"]["n_max"], min_growth=s["min_growth"])


def _read_table(path: str):
    if not path:
        raise ConfigError("a tabulated model or data set needs a file (two columns: x, value)")
    try:
        arr = np.loadtxt(path, delimiter=",", ndmin=2, comments="#")
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read table {path!r}: {exc}") from exc
    if arr.shape[1] != 2:
        raise ConfigError(f"table {path!r} must have two columns")
    return tuple(arr[:, 0]), tuple(arr[:, 1])


def parse_config(text: str) -> RunConfig:
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    values, raw = {}, {}
    for section in cp.sections():
        if section not in SCHEMA:
            raise ConfigError(f"unknown section [{section}]; known: {', '.join(SCHEMA)}")
        for key in cp[section]:
            if key not in SCHEMA[section]:
                raise ConfigError(f"unknown key '{key}' in [{section}]; known: {', '.join(SCHEMA[section])}")
    for section, keys in SCHEMA.items():
        values[section], raw[section] = {}, {}
        for key, (parse, default) in keys.items():
            if cp.has_option(section, key):
                text_value = cp.get(section, key)
                try:
                    values[section][key] = parse(text_value)
                except ValueError as exc:
                    raise ConfigError(f"[{section}] {key} = {text_value!r}: {exc}") from exc
                raw[section][key] = text_value
            else:
                values[section][key] = default
    for section, key in (("grid", "half_width"), ("data", "width")):
        if not math.isfinite(values[section][key]) or values[section][key] <= 0:
            raise ConfigError(f"[{section}] {key} must be positive")
    if values["data"]["amplitude_mode"] not in ("absolute", "critical"):
        raise ConfigError("[data] amplitude_mode must be 'absolute' or 'critical'")
    return RunConfig(values, raw)


def load_config(path: str | None) -> RunConfig:
    if path is None:
        return parse_config("")
    try:
        with open(path) as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
