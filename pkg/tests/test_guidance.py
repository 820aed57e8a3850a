"""Unit and property tests for the closed-form guidance math."""

import math

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from bpdg.errors import (
    DegenerateAxis,
    DomainError,
    InfeasibleAxis,
    InvalidBound,
    NoEquilibria,
    NoInteriorExtremum,
)
from bpdg.guidance import (
    AxisBoundary,
    AxisParams,
    accel_command,
    accel_command_expanded,
    canonicalize_axis,
    design_axis,
    design_from_params,
    equilibria,
    peak_accel,
    position_closed_form,
    settling_time,
    stability_slope,
    termination_time,
    velocity_at,
)

# reference design values for the sample landing scenario (4-5 significant digits)
CASE_A_X = AxisBoundary(1900.0, -40.0, 0.0, 0.1)
CASE_A_Y = AxisBoundary(1000.0, -10.0, 0.0, 0.1)
CASE_A_Z = AxisBoundary(3100.0, -50.0, 5.0, 0.1)
TABLE_X = (-3800.0, 1.1080e-5, 0.0, 250.4512)
TABLE_Y = (-2000.0, 1e-5, 0.0, 495.1718)
TABLE_Z = (-6200.0, 0.5219e-5, 0.1616, 341.4793)


# -- canonicalization --------------------------------------------------------

def test_canonicalize_descending_axis_unchanged():
    canon, flip = canonicalize_axis(CASE_A_X)
    assert canon == CASE_A_X
    assert flip == 1


def test_canonicalize_reflects_ascending_axis():
    canon, flip = canonicalize_axis(AxisBoundary(-1900.0, 40.0, 0.0, 0.1))
    assert flip == -1
    assert canon == AxisBoundary(1900.0, -40.0, 0.0, 0.1)


def test_canonicalize_rejects_motion_away_from_target():
    with pytest.raises(InfeasibleAxis):
        canonicalize_axis(AxisBoundary(1900.0, 40.0, 0.0, 0.1))


def test_canonicalize_rejects_moving_on_target():
    with pytest.raises(InfeasibleAxis):
        canonicalize_axis(AxisBoundary(5.0, -1.0, 5.0, 0.1))


def test_canonicalize_rejects_stationary_off_target():
    with pytest.raises(DegenerateAxis):
        canonicalize_axis(AxisBoundary(1900.0, 0.0, 0.0, 0.1))


def test_canonicalize_keeps_presettled_axis():
    boundary = AxisBoundary(5.0, 0.0, 5.0, 0.1)
    canon, flip = canonicalize_axis(boundary)
    assert canon == boundary
    assert flip == 1


def test_boundary_rejects_nonpositive_epsilon():
    with pytest.raises(InvalidBound):
        AxisBoundary(1.0, -1.0, 0.0, 0.0)


# -- parameter design --------------------------------------------------------

@pytest.mark.parametrize(
    "boundary,expected",
    [(CASE_A_X, TABLE_X), (CASE_A_Y, TABLE_Y), (CASE_A_Z, TABLE_Z)],
)
def test_design_matches_reference_values(boundary, expected):
    a, b, c, t_s = expected
    design = design_axis(boundary)
    assert design.params.a == pytest.approx(a, rel=1e-3)
    assert design.params.b == pytest.approx(b, rel=1e-3)
    if c == 0.0:
        assert abs(design.params.c) < 1e-9
    else:
        assert design.params.c == pytest.approx(c, rel=1e-3)
    assert design.t_settle == pytest.approx(t_s, rel=1e-3)


def test_design_tiny_case_by_hand():
    # b = -v0/(rf-r0)^2 = 1, c = v0 + a^2*b/4 = -1 + 1 = 0
    design = design_axis(AxisBoundary(1.0, -1.0, 0.0, 0.01))
    assert design.params == AxisParams(-2.0, 1.0, 0.0)


def test_designed_derived_quantities():
    design = design_axis(CASE_A_X)
    assert design.P == pytest.approx(40.0, rel=1e-12)  # P = -v0
    assert design.K == 0.0
    assert design.equilibria.re2 == pytest.approx(0.0, abs=1e-9)
    assert design.equilibria.re1 == pytest.approx(3800.0, rel=1e-12)
    assert design.boundary.rf <= design.r_peak <= design.boundary.r0


def test_design_of_mirrored_axis_reuses_canonical_parameters():
    direct = design_axis(CASE_A_X)
    mirrored = design_axis(AxisBoundary(-1900.0, 40.0, 0.0, 0.1))
    assert mirrored.params == direct.params
    assert mirrored.sign_flip == -1


def test_design_rejects_excessive_tolerance():
    with pytest.raises(InvalidBound):
        design_axis(AxisBoundary(1900.0, -40.0, 0.0, 2000.0))


def test_presettled_axis_design():
    design = design_axis(AxisBoundary(5.0, 0.0, 5.0, 0.1))
    assert design.degenerate
    assert design.t_settle == 0.0
    assert design.command_at(5.0) == 0.0
    assert design.position_at(123.0) == 5.0


# -- velocity field ----------------------------------------------------------

def test_velocity_extremum_at_start():
    design = design_axis(CASE_A_X)
    assert velocity_at(1900.0, design.params) == pytest.approx(-40.0, rel=1e-12)


def test_velocity_zero_at_target():
    design = design_axis(CASE_A_X)
    assert velocity_at(0.0, design.params) == 0.0


def test_velocity_midpoint_printed_parameters():
    # direct evaluation: (-3800*950 + 950^2) * 1.1080e-5 = -29.9991
    params = AxisParams(-3800.0, 1.1080e-5, 0.0)
    assert velocity_at(950.0, params) == pytest.approx(-29.9991, rel=1e-12)


# -- equilibria and stability ------------------------------------------------

def test_equilibria_of_designed_x_axis():
    design = design_axis(CASE_A_X)
    pair = equilibria(design.params)
    assert pair.re1 == 3800.0
    assert pair.re2 == 0.0


def test_equilibria_simple_roots():
    pair = equilibria(AxisParams(-2.0, 1.0, 0.0))
    assert (pair.re1, pair.re2) == (2.0, 0.0)


def test_equilibria_none_for_negative_discriminant():
    assert equilibria(AxisParams(-2.0, 1.0, 2.0)) is None


def test_stability_slopes_simple_case():
    params = AxisParams(-2.0, 1.0, 0.0)
    assert stability_slope(params, "re1") == pytest.approx(2.0, rel=1e-12)
    assert stability_slope(params, "re2") == pytest.approx(-2.0, rel=1e-12)


def test_stability_slope_zero_at_merged_equilibria():
    params = AxisParams(-2.0, 1.0, 1.0)  # a^2/4 == c/b
    assert stability_slope(params, "re1") == 0.0
    assert stability_slope(params, "re2") == 0.0
    pair = equilibria(params)
    assert pair.re1 == pair.re2


def test_stability_slope_requires_equilibria():
    with pytest.raises(NoEquilibria):
        stability_slope(AxisParams(-2.0, 1.0, 2.0), "re1")


# -- closed-form trajectory ---------------------------------------------------

def test_position_starts_at_r0():
    design = design_axis(CASE_A_X)
    assert position_closed_form(0.0, design) == 1900.0


def test_position_settles_to_target():
    design = design_axis(CASE_A_X)
    assert abs(position_closed_form(2000.0, design) - 0.0) < 0.1


def test_position_at_settling_time_sits_on_tolerance_band():
    for boundary in (CASE_A_X, CASE_A_Y, CASE_A_Z):
        design = design_axis(boundary)
        r_at_ts = position_closed_form(design.t_settle, design)
        assert r_at_ts == pytest.approx(boundary.rf + boundary.epsilon, rel=1e-6)


def test_closed_form_rejects_start_outside_basin():
    with pytest.raises(DomainError):
        design_from_params(AxisBoundary(3.0, -1.0, 0.0, 0.01), AxisParams(-2.0, 1.0, -1.0))


def test_closed_form_rejects_nonpositive_p():
    with pytest.raises(DomainError):
        design_from_params(AxisBoundary(1.0, -1.0, 0.0, 0.01), AxisParams(-2.0, 1.0, 5.0))


# -- settling and termination times -------------------------------------------

def test_settling_time_reference_values():
    assert settling_time(design_axis(CASE_A_X)) == pytest.approx(250.4512, rel=1e-3)
    assert settling_time(design_axis(CASE_A_Y)) == pytest.approx(495.1718, rel=1e-3)
    # frozen full-precision regression values
    assert settling_time(design_axis(CASE_A_X)) == pytest.approx(250.4512341611036, rel=1e-12)
    assert settling_time(design_axis(CASE_A_Z)) == pytest.approx(341.47937544188085, rel=1e-12)


def test_settling_time_multi_start_batch_row():
    # third batch case, y axis: descent from 1500 m at -10 m/s
    design = design_axis(AxisBoundary(1500.0, -10.0, 0.0, 0.1))
    assert design.t_settle == pytest.approx(773.1689, rel=1e-3)


def test_termination_time_is_max():
    designs = [design_axis(b) for b in (CASE_A_X, CASE_A_Y, CASE_A_Z)]
    assert termination_time(designs) == pytest.approx(495.1718, rel=1e-3)
    assert termination_time(designs) == max(d.t_settle for d in designs)


def test_termination_time_equal_axes():
    designs = [design_axis(CASE_A_X) for _ in range(3)]
    assert termination_time(designs) == designs[0].t_settle


# -- acceleration command ------------------------------------------------------

def test_command_zero_at_start_and_target():
    design = design_axis(CASE_A_X)
    assert accel_command(1900.0, design.params) == 0.0
    assert accel_command(0.0, design.params) == 0.0


def test_command_value_near_peak_printed_parameters():
    params = AxisParams(-3800.0, 1.1080e-5, 0.0)
    assert accel_command(803.03, params) == pytest.approx(0.6482, abs=1e-4)


def test_peak_command_reference_values():
    x = design_axis(CASE_A_X)
    z = design_axis(CASE_A_Z)
    assert x.a_peak == pytest.approx(0.6482, abs=1e-4)
    assert z.a_peak == pytest.approx(0.6218, abs=1e-4)
    assert x.r_peak == pytest.approx(803.03, abs=0.01)


def test_peak_command_tiny_case_against_grid_maximum():
    params = AxisParams(-2.0, 1.0, 0.0)
    r_peak, a_peak = peak_accel(params)
    assert r_peak == pytest.approx(1.0 - 1.0 / math.sqrt(3.0), rel=1e-12)
    # independent oracle: dense grid maximum over the flown interval [0, 1]
    grid_max = max(accel_command(i / 200000.0, params) for i in range(200001))
    assert a_peak == pytest.approx(grid_max, rel=1e-9)
    assert a_peak == pytest.approx(0.7698, abs=1e-4)


def test_peak_requires_interior_extremum():
    with pytest.raises(NoInteriorExtremum):
        peak_accel(AxisParams(-2.0, 1.0, 4.0))


def test_peak_equals_command_at_peak_position():
    for boundary in (CASE_A_X, CASE_A_Y, CASE_A_Z):
        design = design_axis(boundary)
        assert accel_command(design.r_peak, design.params) == pytest.approx(
            design.a_peak, rel=1e-12
        )


# -- property tests ------------------------------------------------------------

@st.composite
def feasible_boundaries(draw):
    span = draw(st.floats(0.5, 2e4))
    rf = span * draw(st.floats(-3.0, 3.0))
    v0 = -draw(st.floats(0.1, min(500.0, 5.0 * span)))
    eps = span * draw(st.floats(1e-3, 0.5))
    return AxisBoundary(rf + span, v0, rf, eps)


@given(feasible_boundaries())
def test_property_design_roundtrip(boundary):
    design = design_axis(boundary)
    scale = max(abs(boundary.rf), abs(boundary.r0), 1.0)
    assert abs(design.equilibria.re2 - boundary.rf) / scale < 1e-9


@given(feasible_boundaries())
def test_property_extremum_placement(boundary):
    design = design_axis(boundary)
    assert velocity_at(boundary.r0, design.params) == pytest.approx(boundary.v0, rel=1e-12)
    h = 1e-4 * max(abs(boundary.r0), 1.0)
    slope = (
        velocity_at(boundary.r0 + h, design.params)
        - velocity_at(boundary.r0 - h, design.params)
    ) / (2.0 * h)
    assert abs(slope) < 1e-5


@given(feasible_boundaries())
def test_property_integration_constant_vanishes(boundary):
    assert abs(design_axis(boundary).K) < 1e-12


@settings(max_examples=25, deadline=None)
@given(feasible_boundaries())
def test_property_command_matches_trajectory_derivative(boundary):
    # oracle: central finite difference of V along the closed-form trajectory
    design = design_axis(boundary)
    h = 1e-3
    for frac in (0.01, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99):
        t = frac * design.t_settle
        fd = (
            velocity_at(position_closed_form(t + h, design), design.params)
            - velocity_at(position_closed_form(t - h, design), design.params)
        ) / (2.0 * h)
        a_cmd = accel_command(position_closed_form(t, design), design.params)
        assert abs(a_cmd - fd) / max(abs(a_cmd), 1e-12) < 1e-4


@given(feasible_boundaries(), st.floats(0.01, 0.99))
def test_property_factored_equals_expanded(boundary, frac):
    design = design_axis(boundary)
    r = boundary.rf + frac * (boundary.r0 - boundary.rf)
    f = accel_command(r, design.params)
    e = accel_command_expanded(r, design.params)
    assert abs(f - e) <= 1e-10 * max(abs(f), abs(e))


@settings(max_examples=25, deadline=None)
@given(feasible_boundaries())
def test_property_peak_bounds_command(boundary):
    design = design_axis(boundary)
    grid_max = max(
        abs(accel_command(boundary.rf + k / 9999.0 * (boundary.r0 - boundary.rf), design.params))
        for k in range(10000)
    )
    assert abs(design.a_peak - grid_max) / design.a_peak < 1e-6


@given(feasible_boundaries())
def test_property_settling_inversion(boundary):
    design = design_axis(boundary)
    residual = position_closed_form(design.t_settle, design) - boundary.rf - boundary.epsilon
    assert abs(residual) / boundary.epsilon < 1e-6


@given(feasible_boundaries())
def test_property_stability_signs(boundary):
    design = design_axis(boundary)
    assume(design.equilibria.re1 != design.equilibria.re2)
    assert stability_slope(design.params, "re1") > 0.0
    assert stability_slope(design.params, "re2") < 0.0


@given(feasible_boundaries(), st.floats(0.0, 1.0))
def test_property_reflection_equivariance(boundary, frac):
    mirrored = AxisBoundary(-boundary.r0, -boundary.v0, -boundary.rf, boundary.epsilon)
    direct = design_axis(boundary)
    reflected = design_axis(mirrored)
    r = boundary.rf + frac * (boundary.r0 - boundary.rf)
    assert reflected.command_at(-r) == -direct.command_at(r)
    assert reflected.position_at(0.0) == -direct.position_at(0.0)
