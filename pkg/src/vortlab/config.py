"""Run configuration files (TOML).

Sections and defaults::

    [grid]
    n = 32                 # points per side, >= 4
    l = 6.283185307179586  # box side

    [solver]
    dt = 1e-3
    t_end = 0.1
    nu = 1.0
    init = "taylor-green"  # or "abc", "random"
    abc = [1.0, 1.0, 1.0]  # ABC coefficients (init = "abc")
    amplitude = 1.0        # Taylor-Green amplitude
    slope = -1.6666666666666667  # random: shell spectrum exponent
    energy = 0.5           # random: kinetic energy
    seed = 0               # random: RNG seed
    dealias = true
    output_every = 1       # steps between records
    cfl_safety = 0.5

    [diagnostics]
    r_list = [1.25, 1.5, 2.0]
    alpha_eps = [[0.0, 0.0], [0.25, 1e-6]]
    riesz_beta = 0.5
    riesz_images = 1
    holder_every = 0       # records between Hoelder fits, 0 = never
    holder_k_threshold = "auto"   # "auto" = 0.1 max|omega|
    holder_delta_max = "auto"     # "auto" = l/6
    holder_n_pairs = 200000
    holder_quantile = 0.95
    holder_n_bins = 12
    holder_seed = 0

    [output]
    checkpoint_every = 0   # records between checkpoints; the final state is always saved
    csv_name = "timeseries.csv"

Unknown sections or keys are errors.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .diagnostics import DiagnosticsOptions
from .errors import ConfigError, VortlabError
from .fields import GridSpec
from .solver import InitSpec, SimConfig

_SCHEMA = {
    "grid": {"n": 32, "l": 2.0 * math.pi},
    "solver": {
        "dt": 1e-3,
        "t_end": 0.1,
        "nu": 1.0,
        "init": "taylor-green",
        "abc": [1.0, 1.0, 1.0],
        "amplitude": 1.0,
        "slope": -5.0 / 3.0,
        "energy": 0.5,
        "seed": 0,
        "dealias": True,
        "output_every": 1,
        "cfl_safety": 0.5,
    },
    "diagnostics": {
        "r_list": [1.25, 1.5, 2.0],
        "alpha_eps": [[0.0, 0.0], [0.25, 1e-6]],
        "riesz_beta": 0.5,
        "riesz_images": 1,
        "holder_every": 0,
        "holder_k_threshold": "auto",
        "holder_delta_max": "auto",
        "holder_n_pairs": 200_000,
        "holder_quantile": 0.95,
        "holder_n_bins": 12,
        "holder_seed": 0,
    },
    "output": {"checkpoint_every": 0, "csv_name": "timeseries.csv"},
}


@dataclass(frozen=True)
class RunConfig:
    sim: SimConfig
    diagnostics: DiagnosticsOptions = field(default_factory=DiagnosticsOptions)
    checkpoint_every: int = 0
    csv_name: str = "timeseries.csv"


def _typed(section, key, value, default):
    where = f"[{section}] {key}"
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{where} must be true or false")
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{where} must be an integer")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where} must be a number")
        return float(value)
    if default == "auto":
        if value == "auto":
            return None
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f'{where} must be a number or "auto"')
        return float(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(f"{where} must be a string")
        return value
    if isinstance(default, list):
        if not isinstance(value, list):
            raise ConfigError(f"{where} must be an array")
        return value
    raise AssertionError(where)


def _merged(doc: dict) -> dict:
    out = {}
    for section in doc:
        if section not in _SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        if not isinstance(doc[section], dict):
            raise ConfigError(f"[{section}] must be a table")
    for section, defaults in _SCHEMA.items():
        given = doc.get(section, {})
        for key in given:
            if key not in defaults:
                raise ConfigError(f"unknown key {key!r} in [{section}]")
        vals = {}
        for key, default in defaults.items():
            v = given.get(key, default)
            vals[key] = _typed(section, key, v, default) if key in given else (None if v == "auto" else v)
        out[section] = vals
    return out


def parse_config(text: str) -> RunConfig:
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    c = _merged(doc)
    g, s, d, o = c["grid"], c["solver"], c["diagnostics"], c["output"]
    try:
        grid = GridSpec(g["n"], g["l"])
        abc = tuple(float(v) for v in s["abc"])
        if len(abc) != 3:
            raise ConfigError("[solver] abc needs three numbers")
        init = InitSpec(s["init"], abc, s["amplitude"], s["slope"], s["energy"], s["seed"])
        sim = SimConfig(
            grid,
            s["dt"],
            s["t_end"],
            s["nu"],
            init,
            s["dealias"],
            s["output_every"],
            s["seed"],
            s["cfl_safety"],
        )
        pairs = []
        for item in d["alpha_eps"]:
            if not (isinstance(item, list) and len(item) == 2):
                raise ConfigError("[diagnostics] alpha_eps entries must be [alpha, epsilon] pairs")
            pairs.append((float(item[0]), float(item[1])))
        diag = DiagnosticsOptions(
            r_list=tuple(float(r) for r in d["r_list"]),
            alpha_eps=tuple(pairs),
            riesz_beta=d["riesz_beta"],
            riesz_images=d["riesz_images"],
            holder_every=d["holder_every"],
            holder_k_threshold=d["holder_k_threshold"],
            holder_delta_max=d["holder_delta_max"],
            holder_n_pairs=d["holder_n_pairs"],
            holder_quantile=d["holder_quantile"],
            holder_n_bins=d["holder_n_bins"],
            holder_seed=d["holder_seed"],
        )
    except ConfigError:
        raise
    except (VortlabError, TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    if o["checkpoint_every"] < 0:
        raise ConfigError("[output] checkpoint_every must be >= 0")
    if not o["csv_name"] or "/" in o["csv_name"]:
        raise ConfigError("[output] csv_name must be a plain file name")
    return RunConfig(sim, diag, o["checkpoint_every"], o["csv_name"])


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)
