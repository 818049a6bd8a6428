"""Run and sweep configuration files (TOML or JSON)."""

from __future__ import annotations

import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from .metric_paths import DEFAULT_T_SAMPLES, FamilySpec, family_members
from .sphere_metrics import DEFAULT_NODES, AxisymMetricSpec, HorizonSpec, MeanCurvatureSpec, metric_from_dict


class ConfigError(ValueError):
    """Malformed or unreadable configuration."""


def load_mapping(path: Path) -> dict:
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    try:
        if path.suffix.lower() == ".json":
            return json.loads(raw.decode("utf-8"))
        return tomllib.loads(raw.decode("utf-8"))
    except (ValueError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc


def _positive(d: dict, key: str, default=None, required=False) -> Optional[float]:
    if key not in d:
        if required:
            raise ConfigError(f"missing '{key}'")
        return default
    try:
        v = float(d[key])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"'{key}' must be a number") from exc
    if not (math.isfinite(v) and v > 0):
        raise ConfigError(f"'{key}' must be positive, got {v!r}")
    return v


@dataclass(frozen=True)
class RunConfig:
    metric: AxisymMetricSpec
    H: MeanCurvatureSpec
    pipeline: str = "flat"
    kappa: float = 0.0
    horizon: Optional[HorizonSpec] = None
    family: FamilySpec = "linear"
    n_t: int = DEFAULT_T_SAMPLES
    n_x: int = DEFAULT_NODES
    brown_york: bool = False
    m: Optional[float] = None
    m_sequence: Optional[tuple[float, ...]] = None
    A: Optional[float] = None
    A_scale: Optional[float] = None
    slices: int = 11


def parse_run_config(d: dict, base_dir: Path = Path(".")) -> RunConfig:
    if not isinstance(d, dict):
        raise ConfigError("config must be a table")
    m = d.get("metric")
    if isinstance(m, str):
        p = Path(m)
        if not p.is_absolute():
            p = base_dir / p
        m = load_mapping(p)
    if not isinstance(m, dict):
        raise ConfigError("'metric' must be a table or a path to one")
    try:
        metric = metric_from_dict(m)
    except ValueError as exc:
        raise ConfigError(f"bad metric: {exc}") from exc

    if ("H_o" in d) == ("tau" in d):
        raise ConfigError("give exactly one of 'H_o' and 'tau'")
    if "H_o" in d:
        H = MeanCurvatureSpec(_positive(d, "H_o"))
    else:
        H = MeanCurvatureSpec.from_tau(_positive(d, "tau"), metric.r_o)

    pipeline = d.get("pipeline", "flat")
    if pipeline not in ("flat", "hyperbolic"):
        raise ConfigError(f"unknown pipeline {pipeline!r}")
    kappa = 0.0
    if pipeline == "hyperbolic":
        kappa = _positive(d, "kappa", required=True)
    elif "kappa" in d:
        raise ConfigError("'kappa' is only valid with pipeline = 'hyperbolic'")

    r_h = _positive(d, "r_h")
    family = d.get("family", "linear")
    try:
        family_members(family)
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc

    grid = d.get("grid", {})
    n_t = int(grid.get("n_t", DEFAULT_T_SAMPLES))
    n_x = int(grid.get("n_x", DEFAULT_NODES))
    if n_t < 2 or n_x < 3:
        raise ConfigError("grid too small")

    col = d.get("collar", {})
    mval = col.get("m")
    seq = col.get("m_sequence")
    if mval is not None:
        mval = float(mval)
    if seq is not None:
        seq = tuple(float(v) for v in seq)
        if any(not v < 0 for v in seq):
            raise ConfigError("m_sequence must be negative")
    return RunConfig(
        metric=metric,
        H=H,
        pipeline=pipeline,
        kappa=kappa,
        horizon=None if r_h is None else HorizonSpec(r_h),
        family=family,
        n_t=n_t,
        n_x=n_x,
        brown_york=bool(d.get("brown_york", False)),
        m=mval,
        m_sequence=seq,
        A=_positive(col, "A"),
        A_scale=_positive(col, "A_scale"),
        slices=int(col.get("slices", 11)),
    )


def load_run_config(path: str | Path) -> RunConfig:
    path = Path(path)
    return parse_run_config(load_mapping(path), path.parent)


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------

AXES = ("tau", "zeta", "kappa_r_o", "rh_over_r_o")


@dataclass(frozen=True)
class Axis:
    name: str
    values: tuple[float, ...]


@dataclass(frozen=True)
class SweepSpec:
    axes: tuple[Axis, ...]
    base: dict[str, Any] = field(default_factory=dict)
    quantities: Optional[tuple[str, ...]] = None


def _axis_values(a: dict) -> tuple[float, ...]:
    if "values" in a:
        vals = tuple(float(v) for v in a["values"])
    else:
        try:
            start, stop, num = float(a["start"]), float(a["stop"]), int(a["num"])
        except KeyError as exc:
            raise ConfigError(f"axis needs 'values' or start/stop/num (missing {exc})") from exc
        if num < 1:
            raise ConfigError("axis 'num' must be >= 1")
        vals = tuple(start + (stop - start) * i / (num - 1) for i in range(num)) if num > 1 else (start,)
    if not vals:
        raise ConfigError("empty axis")
    if any(not (math.isfinite(v) and v >= 0) for v in vals):
        raise ConfigError("axis values must be finite and nonnegative")
    return vals


def parse_sweep_spec(d: dict) -> SweepSpec:
    raw = d.get("axes")
    if not isinstance(raw, list) or not raw:
        raise ConfigError("sweep needs a nonempty 'axes' list")
    axes = []
    for a in raw:
        name = a.get("name")
        if name not in AXES:
            raise ConfigError(f"axis name must be one of {AXES}, got {name!r}")
        axes.append(Axis(name, _axis_values(a)))
    names = [a.name for a in axes]
    if len(set(names)) != len(names):
        raise ConfigError("duplicate axis")
    base = dict(d.get("base", {}))
    q = d.get("quantities")
    return SweepSpec(tuple(axes), base, None if q is None else tuple(q))


def load_sweep_spec(path: str | Path) -> SweepSpec:
    return parse_sweep_spec(load_mapping(Path(path)))
