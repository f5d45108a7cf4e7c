"""Run configuration: flat ``key=value`` text with dotted section prefixes.

Example::

    # repulsive loop scan
    trap.U0 = 6.4
    trap.sigma = 0.5
    model.Ng0 = 1
    model.N = 50
    scan.start = -4.5
    scan.stop = -2.9
    scan.step = 0.005

All values are validated before any computation starts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .grid import Grid, PotentialParams
from .sweep import SweepProtocol

_FLOAT, _INT, _LIST, _OPT_FLOAT, _STR = "float", "int", "list", "opt_float", "str"

# key -> (type, default)
SCHEMA: dict[str, tuple[str, object]] = {
    "trap.U0": (_FLOAT, 6.4),
    "trap.sigma": (_FLOAT, 0.5),
    "grid.x_min": (_FLOAT, -12.0),
    "grid.x_max": (_FLOAT, 12.0),
    "grid.n_points": (_INT, 4801),
    "model.Ng0": (_FLOAT, 1.0),
    "model.N": (_INT, 50),
    "modes.overlap_threshold": (_FLOAT, 1e-2),
    "scan.start": (_FLOAT, -4.5),
    "scan.stop": (_FLOAT, -2.9),
    "scan.step": (_FLOAT, 0.005),
    "scan.values": (_LIST, None),
    "gpe.start": (_FLOAT, -3.95),
    "gpe.stop": (_FLOAT, -3.2),
    "gpe.initial_step": (_FLOAT, 0.01),
    "gpe.max_step": (_FLOAT, 0.05),
    "gpe.count_step": (_FLOAT, 0.05),
    "gpe.n_starts": (_INT, 16),
    "sweep.x0_start": (_FLOAT, -5.0),
    "sweep.rate": (_FLOAT, 0.05),
    "sweep.t_end": (_FLOAT, 100.0),
    "sweep.dt": (_FLOAT, 1e-3),
    "sweep.overlap_limit": (_FLOAT, 0.1),
    "sweep.sample_every": (_FLOAT, 1.0),
    "sweep.projection_x0": (_OPT_FLOAT, None),
    "output_dir": (_STR, "out"),
    "seed": (_INT, 0),
}


def _parse_value(key: str, kind: str, raw: str):
    raw = raw.strip()
    try:
        if kind == _FLOAT:
            val = float(raw)
            if not math.isfinite(val):
                raise ValueError("not finite")
            return val
        if kind == _INT:
            val = float(raw)
            if val != int(val):
                raise ValueError("not an integer")
            return int(val)
        if kind == _OPT_FLOAT:
            return None if raw.lower() in ("", "none") else float(raw)
        if kind == _LIST:
            items = [s for s in raw.replace(";", ",").split(",") if s.strip()]
            return [float(s) for s in items]
        return raw
    except ValueError as exc:
        raise ConfigError(f"{key}: cannot parse {raw!r} as {kind} ({exc})") from None


def parse_config_text(text: str) -> dict:
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in SCHEMA:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        values[key] = _parse_value(key, SCHEMA[key][0], raw)
    return values


@dataclass(frozen=True)
class RunConfig:
    trap: PotentialParams
    grid: Grid
    Ng0: float
    N: int
    x0_values: tuple[float, ...]
    sweep: SweepProtocol
    output_dir: str
    seed: int
    overlap_threshold: float
    overlap_limit: float
    sample_every: float
    projection_x0: float | None
    gpe_range: tuple[float, float]
    gpe_initial_step: float
    gpe_max_step: float
    gpe_count_step: float
    gpe_n_starts: int
    raw: tuple[tuple[str, object], ...]

    @property
    def g0(self) -> float:
        return self.Ng0 / self.N

    def header_lines(self) -> list[str]:
        """The fully resolved configuration, one ``key = value`` per line."""
        out = []
        for key, val in self.raw:
            if isinstance(val, list):
                val = ",".join(repr(float(v)) for v in val)
            elif isinstance(val, float):
                val = repr(val)
            out.append(f"{key} = {val}")
        return out

    @classmethod
    def from_mapping(cls, values: dict | None = None) -> "RunConfig":
        merged = {k: d for k, (_, d) in SCHEMA.items()}
        for k, v in (values or {}).items():
            if k not in SCHEMA:
                raise ConfigError(f"unknown key {k!r}")
            merged[k] = v
        try:
            return cls._build(merged)
        except ConfigError:
            raise
        except (ValueError, TypeError) as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def _build(cls, m: dict) -> "RunConfig":
        trap = PotentialParams(m["trap.U0"], m["trap.sigma"], -1.0)
        grid = Grid(m["grid.x_min"], m["grid.x_max"], m["grid.n_points"])
        if m["model.N"] < 1:
            raise ConfigError(f"model.N must be >= 1, got {m['model.N']}")
        if m["scan.values"] is not None:
            xs = tuple(float(v) for v in m["scan.values"])
        else:
            step = m["scan.step"]
            if not step > 0:
                raise ConfigError(f"scan.step must be positive, got {step}")
            n = int(math.floor((m["scan.stop"] - m["scan.start"]) / step + 1e-9))
            xs = tuple(float(v) for v in m["scan.start"] + step * np.arange(n + 1)) if n >= 0 else ()
        if not xs:
            raise ConfigError("the x0 scan is empty")
        sweep = SweepProtocol(m["sweep.x0_start"], m["sweep.rate"], m["sweep.t_end"], m["sweep.dt"])
        lo, hi = m["gpe.start"], m["gpe.stop"]
        if not lo < hi:
            raise ConfigError(f"gpe.start={lo} must be below gpe.stop={hi}")
        for key in ("modes.overlap_threshold", "sweep.overlap_limit", "sweep.sample_every",
                    "gpe.initial_step", "gpe.max_step"):
            if not m[key] > 0:
                raise ConfigError(f"{key} must be positive, got {m[key]}")
        if m["gpe.n_starts"] < 16:
            raise ConfigError("gpe.n_starts must be at least 16")
        raw = tuple((k, m[k]) for k in SCHEMA)
        return cls(
            trap=trap,
            grid=grid,
            Ng0=float(m["model.Ng0"]),
            N=int(m["model.N"]),
            x0_values=xs,
            sweep=sweep,
            output_dir=m["output_dir"],
            seed=int(m["seed"]),
            overlap_threshold=m["modes.overlap_threshold"],
            overlap_limit=m["sweep.overlap_limit"],
            sample_every=m["sweep.sample_every"],
            projection_x0=m["sweep.projection_x0"],
            gpe_range=(lo, hi),
            gpe_initial_step=m["gpe.initial_step"],
            gpe_max_step=m["gpe.max_step"],
            gpe_count_step=m["gpe.count_step"],
            gpe_n_starts=m["gpe.n_starts"],
            raw=raw,
        )


def load_config(path=None, overrides: dict | None = None) -> RunConfig:
    values = {}
    if path is not None:
        try:
            with open(path) as fh:
                values = parse_config_text(fh.read())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
    values.update(overrides or {})
    return RunConfig.from_mapping(values)
