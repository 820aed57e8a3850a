"""Bifurcation-shaped powered descent guidance: closed-form law, simulator, analysis."""

from .errors import (
    BpdgError,
    DegenerateAxis,
    DomainError,
    FuelDepleted,
    InfeasibleAxis,
    InvalidBound,
    NoEquilibria,
    NoInteriorExtremum,
    ParseError,
    ValidationError,
)
from .guidance import (
    AxisBoundary,
    AxisDesign,
    AxisParams,
    EquilibriumPair,
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
from .scenario import (
    Environment,
    Scenario,
    SimOptions,
    Vehicle,
    design_scenario,
    design_summary,
    dump_scenario,
    load_scenario,
    read_scenario,
    write_scenario,
)
from .simulator import SimResult, SimState, TrajectoryLog, run, step
from .analysis import (
    BifurcationBranch,
    BranchSample,
    SweepReport,
    VerifyReport,
    bifurcation_sweep,
    sweep,
    verify_closed_form,
)

__version__ = "0.1.0"

__all__ = [
    "AxisBoundary",
    "AxisDesign",
    "AxisParams",
    "BifurcationBranch",
    "BpdgError",
    "BranchSample",
    "DegenerateAxis",
    "DomainError",
    "Environment",
    "EquilibriumPair",
    "FuelDepleted",
    "InfeasibleAxis",
    "InvalidBound",
    "NoEquilibria",
    "NoInteriorExtremum",
    "ParseError",
    "Scenario",
    "SimOptions",
    "SimResult",
    "SimState",
    "SweepReport",
    "TrajectoryLog",
    "ValidationError",
    "Vehicle",
    "VerifyReport",
    "accel_command",
    "accel_command_expanded",
    "bifurcation_sweep",
    "canonicalize_axis",
    "design_axis",
    "design_from_params",
    "design_scenario",
    "design_summary",
    "dump_scenario",
    "equilibria",
    "load_scenario",
    "peak_accel",
    "position_closed_form",
    "read_scenario",
    "run",
    "settling_time",
    "stability_slope",
    "step",
    "sweep",
    "termination_time",
    "velocity_at",
    "verify_closed_form",
    "write_scenario",
]
