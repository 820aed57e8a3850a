"""Scenario data model, config-file ingestion, validation, and axis design.

Scenario files are flat key-value text with sections (INI syntax):

    [scenario]            # optional
    name = case_a

    [vehicle]
    m_dry = 1500.0        # structural mass [kg]
    m_fuel0 = 500.0       # fuel load at descent start [kg]
    v_ex = 2206.575       # effective exhaust velocity [m/s]

    [environment]
    gravity = 0.0 0.0 -3.721   # three components [m/s^2]

    [axes.x]              # likewise axes.y, axes.z
    r0 = 1900.0           # initial position [m]
    v0 = -40.0            # initial velocity [m/s]
    rf = 0.0              # target position [m]
    epsilon = 0.1         # optional settling tolerance [m]

    [options]             # optional, with the defaults shown in SimOptions
    dt = 0.01
    t_max = 990.0
    fuel_model = gravity_compensated
    log_stride = 10
    stop_when_settled = false

Every malformed input raises ParseError or ValidationError (naming the
offending field); loaded scenarios are immutable and serialize back to an
identical file via ``dump_scenario``.
"""

from __future__ import annotations

import configparser
import io
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Union

from .errors import DegenerateAxis, InfeasibleAxis, InvalidBound, ParseError, ValidationError
from .guidance import (
    AxisBoundary,
    AxisDesign,
    DEFAULT_SETTLE_TOLERANCE,
    canonicalize_axis,
    design_axis,
    termination_time,
)

AXIS_LABELS = ("x", "y", "z")
FUEL_MODELS = ("gravity_compensated", "command_only")


@dataclass(frozen=True)
class Vehicle:
    m_dry: float  # structural mass [kg]
    m_fuel0: float  # fuel load at descent start [kg]
    v_ex: float  # effective exhaust velocity [m/s]


@dataclass(frozen=True)
class Environment:
    gravity: tuple[float, float, float]  # [m/s^2]


@dataclass(frozen=True)
class SimOptions:
    dt: float = 0.01  # integrator step [s]
    t_max: float | None = None  # hard cap [s]; None resolves to 2x termination time
    fuel_model: str = "gravity_compensated"
    log_stride: int = 10  # steps between trajectory records
    stop_when_settled: bool = False  # exit as soon as all axes are inside tolerance


@dataclass(frozen=True)
class Scenario:
    name: str
    vehicle: Vehicle
    environment: Environment
    axes: tuple[AxisBoundary, AxisBoundary, AxisBoundary]
    options: SimOptions = SimOptions()


_SECTION_KEYS = {
    "scenario": {"name"},
    "vehicle": {"m_dry", "m_fuel0", "v_ex"},
    "environment": {"gravity"},
    "axes.x": {"r0", "v0", "rf", "epsilon"},
    "axes.y": {"r0", "v0", "rf", "epsilon"},
    "axes.z": {"r0", "v0", "rf", "epsilon"},
    "options": {"dt", "t_max", "fuel_model", "log_stride", "stop_when_settled"},
}


def _float(section: str, key: str, raw: str) -> float:
    try:
        value = float(raw)
    except ValueError as exc:
        raise ParseError(f"{section}.{key}: not a number: {raw!r}") from exc
    if not math.isfinite(value):
        raise ValidationError(f"{section}.{key}", f"must be finite, got {raw!r}")
    return value


def _require(cfg: configparser.ConfigParser, section: str, key: str) -> str:
    if not cfg.has_option(section, key):
        raise ValidationError(f"{section}.{key}", "missing required key")
    return cfg.get(section, key)


def _bool(section: str, key: str, raw: str) -> bool:
    lowered = raw.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ParseError(f"{section}.{key}: not a boolean: {raw!r}")


def load_scenario(source: str) -> Scenario:
    """Parse and validate a scenario from config text.

    Defaults are applied for everything optional (epsilon 0.1 m, dt 0.01 s,
    gravity-compensated fuel accounting, t_max twice the designed termination
    time), and all three axes are checked for feasibility.

    Raises:
        ParseError: the text is not well-formed.
        ValidationError: a required entry is missing or violates an invariant.
        InfeasibleAxis / DegenerateAxis: an axis cannot be flown.
    """
    cfg = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        cfg.read_string(source)
    except configparser.Error as exc:
        raise ParseError(f"malformed scenario text: {exc}") from exc

    for section in cfg.sections():
        if section not in _SECTION_KEYS:
            raise ValidationError(section, "unknown section")
        for key in cfg.options(section):
            if key not in _SECTION_KEYS[section]:
                raise ValidationError(f"{section}.{key}", "unknown key")
    for section in ("vehicle", "environment", "axes.x", "axes.y", "axes.z"):
        if not cfg.has_section(section):
            raise ValidationError(section, "missing required section")

    name = cfg.get("scenario", "name", fallback="scenario").strip()

    m_dry = _float("vehicle", "m_dry", _require(cfg, "vehicle", "m_dry"))
    m_fuel0 = _float("vehicle", "m_fuel0", _require(cfg, "vehicle", "m_fuel0"))
    v_ex = _float("vehicle", "v_ex", _require(cfg, "vehicle", "v_ex"))
    if m_dry <= 0.0:
        raise ValidationError("vehicle.m_dry", f"must be positive, got {m_dry}")
    if m_fuel0 < 0.0:
        raise ValidationError("vehicle.m_fuel0", f"must be non-negative, got {m_fuel0}")
    if v_ex <= 0.0:
        raise ValidationError("vehicle.v_ex", f"must be positive, got {v_ex}")
    vehicle = Vehicle(m_dry, m_fuel0, v_ex)

    parts = _require(cfg, "environment", "gravity").split()
    if len(parts) != 3:
        raise ValidationError("environment.gravity", "expected three components")
    gravity = tuple(_float("environment", "gravity", p) for p in parts)
    environment = Environment(gravity)  # type: ignore[arg-type]

    axes = []
    for label in AXIS_LABELS:
        section = f"axes.{label}"
        r0 = _float(section, "r0", _require(cfg, section, "r0"))
        v0 = _float(section, "v0", _require(cfg, section, "v0"))
        rf = _float(section, "rf", _require(cfg, section, "rf"))
        eps = DEFAULT_SETTLE_TOLERANCE
        if cfg.has_option(section, "epsilon"):
            eps = _float(section, "epsilon", cfg.get(section, "epsilon"))
        if eps <= 0.0:
            raise ValidationError(f"{section}.epsilon", f"must be positive, got {eps}")
        try:
            boundary = AxisBoundary(r0, v0, rf, eps)
            canon, _ = canonicalize_axis(boundary)
        except InvalidBound as exc:
            raise ValidationError(section, str(exc)) from exc
        except (InfeasibleAxis, DegenerateAxis) as exc:
            raise type(exc)(f"{section}: {exc}") from exc
        if canon.v0 != 0.0 and eps >= canon.r0 - canon.rf:
            raise ValidationError(
                f"{section}.epsilon", f"must be smaller than the flown span {canon.r0 - canon.rf}"
            )
        axes.append(boundary)

    dt = 0.01
    t_max: float | None = None
    fuel_model = "gravity_compensated"
    log_stride = 10
    stop_when_settled = False
    if cfg.has_section("options"):
        if cfg.has_option("options", "dt"):
            dt = _float("options", "dt", cfg.get("options", "dt"))
        if cfg.has_option("options", "t_max"):
            t_max = _float("options", "t_max", cfg.get("options", "t_max"))
        if cfg.has_option("options", "fuel_model"):
            fuel_model = cfg.get("options", "fuel_model").strip()
        if cfg.has_option("options", "log_stride"):
            raw = cfg.get("options", "log_stride")
            try:
                log_stride = int(raw)
            except ValueError as exc:
                raise ParseError(f"options.log_stride: not an integer: {raw!r}") from exc
        if cfg.has_option("options", "stop_when_settled"):
            stop_when_settled = _bool(
                "options", "stop_when_settled", cfg.get("options", "stop_when_settled")
            )
    if dt <= 0.0:
        raise ValidationError("options.dt", f"must be positive, got {dt}")
    if t_max is not None and t_max <= 0.0:
        raise ValidationError("options.t_max", f"must be positive, got {t_max}")
    if fuel_model not in FUEL_MODELS:
        raise ValidationError(
            "options.fuel_model", f"must be one of {FUEL_MODELS}, got {fuel_model!r}"
        )
    if log_stride < 1:
        raise ValidationError("options.log_stride", f"must be >= 1, got {log_stride}")

    scenario = Scenario(
        name=name,
        vehicle=vehicle,
        environment=environment,
        axes=tuple(axes),  # type: ignore[arg-type]
        options=SimOptions(dt, t_max, fuel_model, log_stride, stop_when_settled),
    )
    if t_max is None:
        scenario = replace(scenario, options=replace(scenario.options, t_max=_default_t_max(scenario)))
    return scenario


def _default_t_max(scenario: Scenario) -> float:
    # twice the designed termination time guards against integrator drift;
    # floor of 1 s keeps the cap positive for all-degenerate scenarios
    _, t_term = design_scenario(scenario)
    return 2.0 * t_term if t_term > 0.0 else 1.0


def read_scenario(path: Union[str, Path]) -> Scenario:
    """Load a scenario from a file path."""
    return load_scenario(Path(path).read_text(encoding="utf-8"))


def dump_scenario(scenario: Scenario) -> str:
    """Serialize a scenario to config text that reloads field-for-field identical."""
    out = io.StringIO()
    out.write("[scenario]\n")
    out.write(f"name = {scenario.name}\n\n")
    v = scenario.vehicle
    out.write("[vehicle]\n")
    out.write(f"m_dry = {v.m_dry!r}\nm_fuel0 = {v.m_fuel0!r}\nv_ex = {v.v_ex!r}\n\n")
    g = scenario.environment.gravity
    out.write("[environment]\n")
    out.write(f"gravity = {g[0]!r} {g[1]!r} {g[2]!r}\n\n")
    for label, axis in zip(AXIS_LABELS, scenario.axes):
        out.write(f"[axes.{label}]\n")
        out.write(f"r0 = {axis.r0!r}\nv0 = {axis.v0!r}\nrf = {axis.rf!r}\n")
        out.write(f"epsilon = {axis.epsilon!r}\n\n")
    o = scenario.options
    out.write("[options]\n")
    out.write(f"dt = {o.dt!r}\n")
    if o.t_max is not None:
        out.write(f"t_max = {o.t_max!r}\n")
    out.write(f"fuel_model = {o.fuel_model}\n")
    out.write(f"log_stride = {o.log_stride}\n")
    out.write(f"stop_when_settled = {str(o.stop_when_settled).lower()}\n")
    return out.getvalue()


def write_scenario(scenario: Scenario, path: Union[str, Path]) -> None:
    Path(path).write_text(dump_scenario(scenario), encoding="utf-8")


def design_scenario(
    scenario: Scenario,
) -> tuple[tuple[AxisDesign, AxisDesign, AxisDesign], float]:
    """Design all three axes and return them with the common termination time.

    Follows the guidance sequence: per-axis parameters from the boundary
    conditions, then the termination time as the largest settling time.
    Pre-settled axes contribute a settling time of zero, so they never
    extend the termination time.
    """
    designs = tuple(design_axis(boundary) for boundary in scenario.axes)
    return designs, termination_time(designs)  # type: ignore[return-value]


def options_dict(scenario: Scenario) -> dict:
    """Effective configuration echo used in summary documents."""
    o = scenario.options
    return {
        "dt": o.dt,
        "t_max": o.t_max,
        "fuel_model": o.fuel_model,
        "log_stride": o.log_stride,
        "stop_when_settled": o.stop_when_settled,
        "vehicle": {
            "m_dry": scenario.vehicle.m_dry,
            "m_fuel0": scenario.vehicle.m_fuel0,
            "v_ex": scenario.vehicle.v_ex,
        },
        "gravity": list(scenario.environment.gravity),
        "axes": {
            label: {"r0": ax.r0, "v0": ax.v0, "rf": ax.rf, "epsilon": ax.epsilon}
            for label, ax in zip(AXIS_LABELS, scenario.axes)
        },
    }


def design_summary(scenario: Scenario) -> dict:
    """Machine-readable design summary: per-axis parameters plus derived values."""
    designs, t_term = design_scenario(scenario)
    axes = {}
    for label, d in zip(AXIS_LABELS, designs):
        axes[label] = {
            "a": d.params.a,
            "b": d.params.b,
            "c": d.params.c,
            "P": d.P,
            "K": d.K,
            "Q": d.Q,
            "re1": d.equilibria.re1,
            "re2": d.equilibria.re2,
            "t_settle": d.t_settle,
            "r_peak": d.r_peak,
            "a_peak": d.a_peak,
            "sign_flip": d.sign_flip,
            "degenerate": d.degenerate,
        }
    return {
        "scenario": scenario.name,
        "config": options_dict(scenario),
        "axes": axes,
        "termination_time": t_term,
    }
