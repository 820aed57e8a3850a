"""Closed-form core of the bifurcation-shaped descent guidance law.

Each axis flies the first-order velocity field

    V(r) = (a*r + r**2)*b + c

whose three shape parameters are designed from the boundary conditions so
that V takes its extremum value v0 at the initial position r0 and has its
stable root at the target rf:

    a = -2*r0,    b = -v0/(rf - r0)**2,    c = v0 + a**2*b/4

Everything the law predicts is then explicit: the equilibria of V and their
stability, the flown trajectory r(t) (a tanh relaxation onto the stable
root), the time to come within epsilon of the target, and the commanded
acceleration A(r) = dV/dt = b*(a + 2*r)*V(r) together with its peak value.
This module implements those formulas as pure functions of immutable values;
it owns no state and is safe to call from any number of threads.

Sign convention: the canonical frame descends (v0 < 0, rf < r0).  Axes that
move the other way are mirrored into this frame and carry sign_flip = -1;
``AxisDesign.command_at`` / ``position_at`` map back to physical coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional

from .errors import (
    DegenerateAxis,
    DomainError,
    InfeasibleAxis,
    InvalidBound,
    NoEquilibria,
    NoInteriorExtremum,
)

DEFAULT_SETTLE_TOLERANCE = 0.1  # [m]


@dataclass(frozen=True)
class AxisBoundary:
    """Boundary conditions for a single descent axis."""

    r0: float  # initial position [m]
    v0: float  # initial velocity [m/s]
    rf: float  # target position [m]
    epsilon: float = DEFAULT_SETTLE_TOLERANCE  # settling tolerance [m]

    def __post_init__(self):
        for name in ("r0", "v0", "rf", "epsilon"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidBound(f"{name} must be finite, got {getattr(self, name)}")
        if self.epsilon <= 0.0:
            raise InvalidBound(f"epsilon must be positive, got {self.epsilon}")


@dataclass(frozen=True)
class AxisParams:
    """Shape parameters of the per-axis velocity field V(r) = (a*r + r^2)*b + c."""

    a: float  # [m]
    b: float  # [1/(m s)]
    c: float  # [m/s]


@dataclass(frozen=True)
class EquilibriumPair:
    """Roots of V(r): re1 is unstable, re2 stable, and re1 >= re2 always."""

    re1: float  # [m]
    re2: float  # [m]


@dataclass(frozen=True)
class AxisDesign:
    """A designed axis: parameters plus every derived closed-form quantity.

    ``boundary`` is stored in the canonical descending frame; ``sign_flip``
    records whether the physical axis was mirrored to get there.
    """

    boundary: AxisBoundary
    params: AxisParams
    sign_flip: int  # -1 when the physical axis was mirrored
    P: float  # a^2*b/4 - c; equals -v0 for designed parameters [m/s]
    K: float  # time offset of the closed-form trajectory [s]
    Q: float  # distance from -a/2 to the command extremum [m]
    equilibria: EquilibriumPair
    t_settle: float  # time to come within epsilon of the target [s]
    r_peak: float  # canonical-frame position of the command extremum [m]
    a_peak: float  # command magnitude at r_peak [m/s^2]
    degenerate: bool = False  # pre-settled axis: zero command everywhere

    def command_at(self, r: float) -> float:
        """Commanded acceleration at physical position r [m/s^2]."""
        if self.degenerate:
            return 0.0
        return self.sign_flip * accel_command(self.sign_flip * r, self.params)

    def position_at(self, t: float) -> float:
        """Physical-frame closed-form position at time t [m]."""
        if self.degenerate:
            return self.sign_flip * self.boundary.r0
        return self.sign_flip * position_closed_form(t, self)

    def field_velocity_at(self, r: float) -> float:
        """Velocity-field value at physical position r [m/s]."""
        if self.degenerate:
            return 0.0
        return self.sign_flip * velocity_at(self.sign_flip * r, self.params)


def _mirror(x: float) -> float:
    # avoids -0.0 leaking into serialized output
    return -x if x != 0.0 else 0.0


def canonicalize_axis(boundary: AxisBoundary) -> tuple[AxisBoundary, int]:
    """Map an axis into the canonical descending frame (v0 < 0, rf < r0).

    A stationary on-target axis (v0 = 0, rf = r0) is returned unchanged with
    sign_flip = +1.  Axes ascending toward their target are reflected
    (r -> -r) and flagged with sign_flip = -1.

    Raises:
        InfeasibleAxis: the velocity points away from the target, or the axis
            is moving while already at the target.
        DegenerateAxis: stationary (v0 = 0) but off target.
    """
    r0, v0, rf = boundary.r0, boundary.v0, boundary.rf
    if v0 == 0.0 and rf == r0:
        return boundary, 1
    if v0 == 0.0:
        raise DegenerateAxis(f"axis is stationary at r0={r0} but targets rf={rf}")
    if rf == r0:
        raise InfeasibleAxis(f"axis is already at its target but moving (v0={v0})")
    if v0 * (rf - r0) <= 0.0:
        raise InfeasibleAxis(
            f"initial velocity v0={v0} moves away from the target (r0={r0}, rf={rf})"
        )
    if v0 < 0.0:
        return boundary, 1
    mirrored = AxisBoundary(_mirror(r0), _mirror(v0), _mirror(rf), boundary.epsilon)
    return mirrored, -1


def design_axis(boundary: AxisBoundary) -> AxisDesign:
    """Design the velocity-field parameters of one axis from its boundary.

    Applies the three design constraints (extremum value v0, extremum
    position r0, stable root at rf) after canonicalizing the axis.  A
    stationary on-target axis yields a pre-settled design whose command is
    identically zero and whose settling time is zero.
    """
    canon, sign_flip = canonicalize_axis(boundary)
    if canon.v0 == 0.0:
        return _presettled_design(canon)
    a = -2.0 * canon.r0
    b = -canon.v0 / (canon.rf - canon.r0) ** 2
    c = canon.v0 + a * a * b / 4.0
    return design_from_params(canon, AxisParams(a, b, c), sign_flip=sign_flip)


def design_from_params(
    boundary: AxisBoundary, params: AxisParams, sign_flip: int = 1
) -> AxisDesign:
    """Assemble an AxisDesign for explicitly supplied parameters.

    Intended for parameter studies and fault injection: all derived fields
    are computed from the same closed forms used for designed axes.  The
    settling-time field is only meaningful when the parameters place the
    stable root at the boundary target.

    Raises:
        DomainError: the closed-form trajectory is undefined (b <= 0,
            P <= 0, or r0 outside the basin where the time offset converges).
        InvalidBound: boundary tolerance outside the settling-time formula's
            validity range.
    """
    a, b, c = params.a, params.b, params.c
    P = a * a * b / 4.0 - c
    if b <= 0.0 or P <= 0.0:
        raise DomainError(f"closed-form trajectory requires b > 0 and P > 0 (b={b}, P={P})")
    arg = (math.sqrt(b) * boundary.r0 + a * math.sqrt(b) / 2.0) / math.sqrt(P)
    if abs(arg) >= 1.0:
        raise DomainError(
            f"start position r0={boundary.r0} lies outside the tanh basin (|arg|={abs(arg)})"
        )
    K = -math.atanh(arg) / math.sqrt(P * b) + 0.0
    eq = equilibria(params)  # discriminant = P/b > 0, so both roots exist
    r_peak, a_peak = peak_accel(params)
    return AxisDesign(
        boundary=boundary,
        params=params,
        sign_flip=sign_flip,
        P=P,
        K=K,
        Q=-a / 2.0 - r_peak,
        equilibria=eq,
        t_settle=_settling_time(a, b, boundary.r0, boundary.rf, boundary.epsilon),
        r_peak=r_peak,
        a_peak=a_peak,
    )


def _presettled_design(boundary: AxisBoundary) -> AxisDesign:
    # Stationary on-target axis: zero field, already inside the tolerance band.
    rf = boundary.rf
    return AxisDesign(
        boundary=boundary,
        params=AxisParams(a=-2.0 * boundary.r0, b=0.0, c=0.0),
        sign_flip=1,
        P=0.0,
        K=0.0,
        Q=0.0,
        equilibria=EquilibriumPair(rf, rf),
        t_settle=0.0,
        r_peak=rf,
        a_peak=0.0,
        degenerate=True,
    )


def velocity_at(r: float, params: AxisParams) -> float:
    """Velocity field V(r) = (a*r + r^2)*b + c [m/s]."""
    return (params.a * r + r * r) * params.b + params.c


def equilibria(params: AxisParams) -> Optional[EquilibriumPair]:
    """Both roots of V(r), or None when the discriminant a^2/4 - c/b is negative."""
    if params.b == 0.0:
        raise ValueError("equilibria require b != 0")
    disc = params.a * params.a / 4.0 - params.c / params.b
    if disc < 0.0:
        return None
    root = math.sqrt(disc)
    return EquilibriumPair(re1=-params.a / 2.0 + root, re2=-params.a / 2.0 - root)


def stability_slope(params: AxisParams, which: str) -> float:
    """Slope dV/dr at an equilibrium: +2*sqrt(a^2*b^2/4 - c*b) at re1, negated at re2.

    A positive slope marks re1 unstable; the negative slope marks re2 stable.

    Raises:
        NoEquilibria: the discriminant is negative (no equilibrium points).
    """
    disc = params.a * params.a * params.b * params.b / 4.0 - params.c * params.b
    if disc < 0.0:
        raise NoEquilibria(f"no equilibrium points for a={params.a}, b={params.b}, c={params.c}")
    slope = 2.0 * math.sqrt(disc)
    if which == "re1":
        return slope
    if which == "re2":
        return -slope
    raise ValueError(f"which must be 're1' or 're2', got {which!r}")


def position_closed_form(t: float, design: AxisDesign) -> float:
    """Canonical-frame trajectory r(t) = sqrt(P/b)*tanh(-sqrt(P*b)*(t + K)) - a/2.

    For designed parameters K = 0, so r(0) = r0 exactly and r(t) decreases
    monotonically toward the stable root.
    """
    if design.degenerate:
        return design.boundary.r0
    P, b = design.P, design.params.b
    lam = math.sqrt(P * b)
    return math.sqrt(P / b) * math.tanh(-lam * (t + design.K)) - design.params.a / 2.0


def _settling_time(a: float, b: float, r0: float, rf: float, eps: float) -> float:
    span = r0 - rf
    if span <= 0.0 or eps >= span:
        raise InvalidBound(f"tolerance {eps} must satisfy 0 < eps < r0 - rf = {span}")
    denom = 2.0 * b * (rf + a / 2.0)
    arg = eps * (r0 + rf + a) / ((2.0 * rf + a + eps) * span)
    if denom == 0.0 or arg <= 0.0:
        raise InvalidBound(f"settling-time argument outside validity range (arg={arg})")
    return math.log(arg) / denom


def settling_time(design: AxisDesign) -> float:
    """Time for the closed-form trajectory to come within epsilon of the target [s].

    Inverts the trajectory at the tolerance band:

        t_s = ln[eps*(r0 + rf + a) / ((2*rf + a + eps)*(r0 - rf))] / (2*b*(rf + a/2))

    Pre-settled axes return 0.

    Raises:
        InvalidBound: epsilon is not inside (0, r0 - rf), or the logarithm
            argument is not positive.
    """
    if design.degenerate:
        return 0.0
    bnd = design.boundary
    return _settling_time(design.params.a, design.params.b, bnd.r0, bnd.rf, bnd.epsilon)


def termination_time(designs: Iterable[AxisDesign]) -> float:
    """Descent termination time: the largest per-axis settling time [s]."""
    return max(d.t_settle for d in designs)


def accel_command(r: float, params: AxisParams) -> float:
    """Commanded acceleration A(r) = dV/dt = b*(a + 2*r)*V(r) [m/s^2].

    This factored chain-rule form is the time derivative of the velocity
    field along its own flow; it vanishes at r = -a/2 and at both equilibria.
    """
    a, b, c = params.a, params.b, params.c
    return b * (a + 2.0 * r) * ((a * r + r * r) * b + c)


def accel_command_expanded(r: float, params: AxisParams) -> float:
    """A(r) multiplied out: 2*b^2*r^3 + 3*a*b^2*r^2 + (a^2*b^2 + 2*b*c)*r + a*b*c."""
    a, b, c = params.a, params.b, params.c
    return (
        2.0 * b * b * r ** 3
        + 3.0 * a * b * b * r ** 2
        + (a * a * b * b + 2.0 * b * c) * r
        + a * b * c
    )


def peak_accel(params: AxisParams) -> tuple[float, float]:
    """Position and value of the command extremum inside the flown interval.

    With Q = sqrt(a^2/12 - c/(3*b)), the extremum of A(r) between the stable
    root and the start position sits at r = -a/2 - Q (the companion root
    -a/2 + Q lies outside the flown interval) and its value is

        A* = -2*b^2*Q^3 + a^2*b^2*Q/2 - 2*Q*b*c

    Returns:
        (r_peak, a_peak)

    Raises:
        NoInteriorExtremum: the discriminant a^2/12 - c/(3*b) is negative.
    """
    a, b, c = params.a, params.b, params.c
    disc = a * a / 12.0 - c / (3.0 * b)
    if disc < 0.0:
        raise NoInteriorExtremum(
            f"command has no interior extremum for a={a}, b={b}, c={c}"
        )
    Q = math.sqrt(disc)
    r_peak = -a / 2.0 - Q
    a_peak = -2.0 * b * b * Q ** 3 + a * a * b * b * Q / 2.0 - 2.0 * Q * b * c
    return r_peak, a_peak
