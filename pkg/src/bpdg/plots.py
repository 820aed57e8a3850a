"""Figure rendering for simulation runs, sweeps, and bifurcation diagrams.

Every report path of the CLI drops PNG figures next to its CSV/JSON output.
Rendering is headless (Agg) and timestamp-free so output directories stay
reproducible.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence, Union

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .analysis import BifurcationBranch, SweepReport
from .scenario import AXIS_LABELS, Scenario
from .simulator import TrajectoryLog

AXIS_COLORS = ("tab:blue", "tab:orange", "tab:green")


def _save(fig, path: Path) -> Path:
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_simulation_figures(
    log: TrajectoryLog, scenario: Scenario, outdir: Union[str, Path], prefix: str
) -> list[Path]:
    """Render trajectory, position/velocity/acceleration profiles, and fuel history."""
    outdir = Path(outdir)
    paths = []

    fig = plt.figure(figsize=(6, 5))
    ax3d = fig.add_subplot(111, projection="3d")
    ax3d.plot(log.r[:, 0], log.r[:, 1], log.r[:, 2], color="tab:blue")
    ax3d.scatter(*log.r[0], color="tab:green", label="start")
    ax3d.scatter(*[axis.rf for axis in scenario.axes], color="tab:red", marker="x", label="target")
    ax3d.set_xlabel("x [m]")
    ax3d.set_ylabel("y [m]")
    ax3d.set_zlabel("z [m]")
    ax3d.legend()
    ax3d.set_title(f"{scenario.name}: descent trajectory")
    paths.append(_save(fig, outdir / f"{prefix}_trajectory3d.png"))

    panels = [
        ("positions", log.r, "position [m]"),
        ("velocities", log.v, "velocity [m/s]"),
        ("accelerations", log.a_cmd, "commanded acceleration [m/s$^2$]"),
    ]
    for stem, data, ylabel in panels:
        fig, ax = plt.subplots(figsize=(6, 4))
        for i, label in enumerate(AXIS_LABELS):
            ax.plot(log.t, data[:, i], color=AXIS_COLORS[i], label=label)
        ax.set_xlabel("t [s]")
        ax.set_ylabel(ylabel)
        ax.grid(True, alpha=0.4)
        ax.legend()
        ax.set_title(f"{scenario.name}: {stem}")
        paths.append(_save(fig, outdir / f"{prefix}_{stem}.png"))

    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(log.t, log.m - scenario.vehicle.m_dry, color="tab:purple")
    ax.set_xlabel("t [s]")
    ax.set_ylabel("fuel mass [kg]")
    ax.grid(True, alpha=0.4)
    ax.set_title(f"{scenario.name}: fuel history")
    paths.append(_save(fig, outdir / f"{prefix}_fuel.png"))
    return paths


def _branch_arrays(branch: BifurcationBranch) -> tuple[np.ndarray, np.ndarray]:
    # NaN separators where grid samples were dropped keep plot gaps open
    if not branch.samples:
        return np.array([]), np.array([])
    a = np.array([s.a for s in branch.samples])
    r = np.array([s.r_eq for s in branch.samples])
    if len(a) > 2:
        step = np.median(np.diff(a))
        breaks = np.where(np.diff(a) > 1.5 * step)[0]
        a = np.insert(a, breaks + 1, np.nan)
        r = np.insert(r, breaks + 1, np.nan)
    return a, r


def render_bifurcation_figure(
    stable: BifurcationBranch, unstable: BifurcationBranch, path: Union[str, Path]
) -> Path:
    """Equilibrium position vs parameter a: stable branch blue, unstable red."""
    fig, ax = plt.subplots(figsize=(6, 4))
    a_s, r_s = _branch_arrays(stable)
    a_u, r_u = _branch_arrays(unstable)
    ax.plot(a_s, r_s, color="tab:blue", label="stable")
    ax.plot(a_u, r_u, color="tab:red", linestyle="--", label="unstable")
    ax.set_xlabel("a [m]")
    ax.set_ylabel("equilibrium position [m]")
    ax.grid(True, alpha=0.4)
    ax.legend()
    ax.set_title(f"equilibria for b={stable.b:g}, c={stable.c:g}")
    return _save(fig, Path(path))


def render_sweep_figures(
    report: SweepReport, scenarios: Sequence[Scenario], outdir: Union[str, Path],
    prefix: str = "sweep",
) -> list[Path]:
    """Overlay per-case trajectories, speed, thrust magnitude, and fuel histories."""
    outdir = Path(outdir)
    paths = []
    flown = [case for case in report.cases if case.log is not None]

    fig = plt.figure(figsize=(6, 5))
    ax3d = fig.add_subplot(111, projection="3d")
    for case in flown:
        ax3d.plot(case.log.r[:, 0], case.log.r[:, 1], case.log.r[:, 2], label=case.name)
    ax3d.set_xlabel("x [m]")
    ax3d.set_ylabel("y [m]")
    ax3d.set_zlabel("z [m]")
    if flown:
        ax3d.legend()
    ax3d.set_title("descent trajectories")
    paths.append(_save(fig, outdir / f"{prefix}_trajectories3d.png"))

    series = [
        ("thrust", lambda log: log.thrust, "net thrust magnitude [N]"),
        ("speed", lambda log: np.linalg.norm(log.v, axis=1), "velocity magnitude [m/s]"),
        ("fuel", None, "fuel mass [kg]"),
    ]
    for stem, extract, ylabel in series:
        fig, ax = plt.subplots(figsize=(6, 4))
        for case, scenario in zip(report.cases, scenarios):
            if case.log is None:
                continue
            values = (
                case.log.m - scenario.vehicle.m_dry if extract is None else extract(case.log)
            )
            ax.plot(case.log.t, values, label=case.name)
        ax.set_xlabel("t [s]")
        ax.set_ylabel(ylabel)
        ax.grid(True, alpha=0.4)
        if flown:
            ax.legend()
        paths.append(_save(fig, outdir / f"{prefix}_{stem}.png"))
    return paths
