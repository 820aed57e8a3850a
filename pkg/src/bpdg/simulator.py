"""Fixed-step closed-loop descent simulation.

The guidance command is pure position feedback, so the simulated kinematics
per axis are r'' = A(r); mass depletes through the rocket equation

    m' = -|T|/v_ex,   T = m * a_thrust

where the thrust acceleration is the command minus gravity
(``gravity_compensated``) or the command alone (``command_only``).  A
classical fixed-step 4th-order integrator advances (r, v, m) together; the
closed-form trajectory is never fed back in, so it stays available as an
independent verification oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import ClassVar, Optional, Sequence, Union

import numpy as np

from .errors import FuelDepleted
from .guidance import AxisDesign, termination_time
from .scenario import Scenario, design_scenario

# settle detection tolerance added to epsilon: an axis designed to settle
# exactly at termination approaches the band to within integrator roundoff
SETTLE_ATOL = 1e-6  # [m]

TERMINATED_TS = "ts_reached"
TERMINATED_SETTLED = "all_settled"
TERMINATED_TMAX = "t_max"
TERMINATED_FUEL = "fuel_depleted"


@dataclass
class SimState:
    """Instantaneous simulation state; mass never drops below dry mass."""

    t: float  # [s]
    r: np.ndarray  # position, shape (3,) [m]
    v: np.ndarray  # velocity, shape (3,) [m/s]
    m: float  # total mass [kg]


@dataclass
class TrajectoryLog:
    """Time-ordered trajectory records at dt*log_stride spacing plus the final state."""

    t: np.ndarray  # (N,) [s]
    r: np.ndarray  # (N, 3) [m]
    v: np.ndarray  # (N, 3) [m/s]
    a_cmd: np.ndarray  # commanded acceleration (N, 3) [m/s^2]
    a_thrust: np.ndarray  # thrust acceleration (N, 3) [m/s^2]
    thrust: np.ndarray  # thrust magnitude (N,) [N]
    m: np.ndarray  # total mass (N,) [kg]

    CSV_HEADER: ClassVar[str] = (
        "t,rx,ry,rz,vx,vy,vz,ax_cmd,ay_cmd,az_cmd,ax_thr,ay_thr,az_thr,thrust_N,mass_kg"
    )

    def __len__(self) -> int:
        return len(self.t)

    def to_csv_text(self) -> str:
        """Render the log as CSV; shortest round-trip decimals keep files stable."""
        lines = [self.CSV_HEADER]
        for i in range(len(self.t)):
            row = (
                self.t[i],
                *self.r[i],
                *self.v[i],
                *self.a_cmd[i],
                *self.a_thrust[i],
                self.thrust[i],
                self.m[i],
            )
            lines.append(",".join(repr(float(x)) for x in row))
        return "\n".join(lines) + "\n"

    def write_csv(self, path: Union[str, Path]) -> None:
        Path(path).write_text(self.to_csv_text(), encoding="utf-8")


@dataclass
class SimResult:
    """Outcome summary of one closed-loop run."""

    final_error: tuple[float, float, float]  # |r - rf| per axis [m]
    observed_settle: tuple[Optional[float], ...]  # first tolerance crossing per axis [s]
    fuel_used: float  # [kg]
    observed_peak_cmd: tuple[float, float, float]  # max |a_cmd| per axis [m/s^2]
    terminated_by: str  # ts_reached | all_settled | t_max | fuel_depleted

    def to_dict(self) -> dict:
        return {
            "final_error": list(self.final_error),
            "observed_settle": list(self.observed_settle),
            "fuel_used": self.fuel_used,
            "observed_peak_cmd": list(self.observed_peak_cmd),
            "terminated_by": self.terminated_by,
        }


def _axis_terms(designs: Sequence[AxisDesign]) -> tuple[tuple[float, float, float, float], ...]:
    # (a, b, c, sign) per axis; degenerate axes carry b = c = 0 so the
    # factored command evaluates to zero without special-casing
    return tuple(
        (d.params.a, d.params.b, d.params.c, float(d.sign_flip)) for d in designs
    )


def _command(terms, rx: float, ry: float, rz: float) -> tuple[float, float, float]:
    out = []
    for (a, b, c, s), r in zip(terms, (rx, ry, rz)):
        u = s * r
        out.append(s * (b * (a + 2.0 * u) * ((a * u + u * u) * b + c)))
    return out[0], out[1], out[2]


def _make_derivs(terms, gravity, compensate: bool, v_ex: float):
    gx, gy, gz = gravity

    def derivs(y):
        rx, ry, rz, vx, vy, vz, m = y
        ax, ay, az = _command(terms, rx, ry, rz)
        if compensate:
            tx, ty, tz = ax - gx, ay - gy, az - gz
        else:
            tx, ty, tz = ax, ay, az
        dm = -m * math.sqrt(tx * tx + ty * ty + tz * tz) / v_ex
        return (vx, vy, vz, ax, ay, az, dm)

    return derivs


def _rk4(y, h, derivs, k1=None):
    if k1 is None:
        k1 = derivs(y)
    k2 = derivs(tuple(yi + 0.5 * h * ki for yi, ki in zip(y, k1)))
    k3 = derivs(tuple(yi + 0.5 * h * ki for yi, ki in zip(y, k2)))
    k4 = derivs(tuple(yi + h * ki for yi, ki in zip(y, k3)))
    return tuple(
        yi + h * (a + 2.0 * b + 2.0 * c + d) / 6.0
        for yi, a, b, c, d in zip(y, k1, k2, k3, k4)
    )


def step(state: SimState, designs: Sequence[AxisDesign], scenario: Scenario, dt: float) -> SimState:
    """Advance the state by one integrator step of size dt.

    Raises:
        FuelDepleted: the step would take the mass below the dry mass.
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    terms = _axis_terms(designs)
    derivs = _make_derivs(
        terms,
        scenario.environment.gravity,
        scenario.options.fuel_model == "gravity_compensated",
        scenario.vehicle.v_ex,
    )
    y = (*state.r, *state.v, state.m)
    y_next = _rk4(y, dt, derivs)
    if y_next[6] < scenario.vehicle.m_dry:
        raise FuelDepleted(state.t + dt)
    return SimState(
        t=state.t + dt,
        r=np.array(y_next[0:3]),
        v=np.array(y_next[3:6]),
        m=y_next[6],
    )


def run(
    scenario: Scenario, designs: Optional[Sequence[AxisDesign]] = None
) -> tuple[SimResult, TrajectoryLog]:
    """Fly the scenario from its initial state to termination.

    Integrates until min(termination time, t_max), or earlier when the fuel
    runs out (result flagged ``fuel_depleted``) or, with stop_when_settled,
    when all axes are inside their tolerance bands.  The trajectory is logged
    every log_stride steps plus the final state; settle times are refined by
    linear interpolation between the two bracketing steps.
    """
    if designs is None:
        designs, t_term = design_scenario(scenario)
    else:
        designs = tuple(designs)
        t_term = termination_time(designs)
    opts = scenario.options
    dt = opts.dt
    t_max = opts.t_max
    if t_max is None:
        t_max = 2.0 * t_term if t_term > 0.0 else 1.0
    t_end = min(t_term, t_max)

    vehicle = scenario.vehicle
    terms = _axis_terms(designs)
    compensate = opts.fuel_model == "gravity_compensated"
    derivs = _make_derivs(terms, scenario.environment.gravity, compensate, vehicle.v_ex)
    gx, gy, gz = scenario.environment.gravity

    rf = tuple(axis.rf for axis in scenario.axes)
    eps = tuple(axis.epsilon for axis in scenario.axes)
    m0 = vehicle.m_dry + vehicle.m_fuel0

    y = (
        scenario.axes[0].r0,
        scenario.axes[1].r0,
        scenario.axes[2].r0,
        scenario.axes[0].v0,
        scenario.axes[1].v0,
        scenario.axes[2].v0,
        m0,
    )
    t = 0.0

    rows: list[tuple] = []
    settled: list[Optional[float]] = [None, None, None]
    peak = [0.0, 0.0, 0.0]
    prev_err = [abs(y[i] - rf[i]) for i in range(3)]
    for i in range(3):
        if prev_err[i] <= eps[i] + SETTLE_ATOL:
            settled[i] = 0.0

    def record(y, t, k1):
        ax, ay, az = k1[3], k1[4], k1[5]
        if compensate:
            thr = (ax - gx, ay - gy, az - gz)
        else:
            thr = (ax, ay, az)
        thrust_mag = y[6] * math.sqrt(thr[0] ** 2 + thr[1] ** 2 + thr[2] ** 2)
        rows.append((t, *y[0:3], *y[3:6], ax, ay, az, *thr, thrust_mag, y[6]))

    n_full = int(t_end / dt + 1e-9)
    remainder = t_end - n_full * dt
    if remainder < 1e-9 * max(1.0, dt):
        remainder = 0.0

    terminated = TERMINATED_TS if t_end == t_term else TERMINATED_TMAX
    steps_done = 0
    last_logged = -1
    k1 = derivs(y)
    total_steps = n_full + (1 if remainder > 0.0 else 0)
    while True:
        for i in range(3):
            mag = abs(k1[3 + i])
            if mag > peak[i]:
                peak[i] = mag
        if steps_done % opts.log_stride == 0:
            record(y, t, k1)
            last_logged = steps_done
        if steps_done >= total_steps:
            break
        if opts.stop_when_settled and all(s is not None for s in settled):
            terminated = TERMINATED_SETTLED
            break
        h = dt if steps_done < n_full else remainder
        y_next = _rk4(y, h, derivs, k1=k1)
        if y_next[6] < vehicle.m_dry:
            terminated = TERMINATED_FUEL
            break
        steps_done += 1
        t = steps_done * dt if steps_done <= n_full else t_end
        for i in range(3):
            if settled[i] is None:
                err = abs(y_next[i] - rf[i])
                if err <= eps[i] + SETTLE_ATOL:
                    # linear interpolation to the crossing of the epsilon band
                    frac = 1.0
                    if prev_err[i] > err:
                        frac = (prev_err[i] - eps[i]) / (prev_err[i] - err)
                        frac = min(max(frac, 0.0), 1.0)
                    settled[i] = (t - h) + frac * h
                prev_err[i] = err
            else:
                prev_err[i] = abs(y_next[i] - rf[i])
        y = y_next
        k1 = derivs(y)

    if steps_done != last_logged:
        record(y, t, k1)

    rows_arr = np.array(rows)
    log = TrajectoryLog(
        t=rows_arr[:, 0],
        r=rows_arr[:, 1:4],
        v=rows_arr[:, 4:7],
        a_cmd=rows_arr[:, 7:10],
        a_thrust=rows_arr[:, 10:13],
        thrust=rows_arr[:, 13],
        m=rows_arr[:, 14],
    )
    result = SimResult(
        final_error=tuple(abs(y[i] - rf[i]) for i in range(3)),
        observed_settle=tuple(settled),
        fuel_used=m0 - y[6],
        observed_peak_cmd=tuple(peak),
        terminated_by=terminated,
    )
    return result, log
