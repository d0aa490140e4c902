"""Drivers shared by the command line and the acceptance suite."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .config import RunConfig
from .dispersion import (
    ArrivalEstimate,
    DispersionPoint,
    LambComparison,
    compare_to_lamb,
    comparison_window,
    dispersion_point,
    phase_velocity_from_traces,
)
from .fem import assemble
from .lamb import ANTISYMMETRIC, TheoreticalCurve, bulk_velocities, solve_phase_velocity
from .mesh import build_structured_mesh, enumerate_nodes
from .sim import PulseParams, SimulationResult, TimeGrid, run_simulation, table1_pulse
from .solver import factor


def record_length(pulse: PulseParams, x_last: float, c_T: float, grid: TimeGrid) -> TimeGrid:
    """Extend ``grid`` (same step) so the packet can reach ``x_last``.

    The bound is the end of the pulse envelope, ``T0 + 3 T / sqrt(alpha)``,
    plus the travel time to the last probe at half the shear speed. Low
    frequency pulses are long and slow and need more than the default record.
    """
    need = pulse.T0 + 3 * pulse.T / math.sqrt(pulse.alpha) + 2 * x_last / c_T
    if need <= grid.t_final:
        return grid
    N = int(math.ceil(need / grid.dt - 1e-9))
    return TimeGrid(t_final=N * grid.dt, N=N)


def simulate(cfg: RunConfig, snapshot_steps=(), grid: TimeGrid | None = None,
             c_ref: float | None = None) -> SimulationResult:
    mesh = build_structured_mesh(cfg.geometry, cfg.ny)
    nodes = enumerate_nodes(mesh, cfg.degree)
    grid = cfg.grid if grid is None else grid
    system = assemble(mesh, nodes, cfg.material, grid.dt)
    res = run_simulation(
        mesh, nodes, cfg.material, cfg.pulse, grid,
        probes=cfg.probe_points, snapshot_steps=snapshot_steps,
        system=system, factorization=factor(system, cfg.solver), c_ref=c_ref,
    )
    res.info.update(mesh=mesh, nodes=nodes)
    return res


@dataclass(frozen=True, eq=False)
class DispersionRun:
    point: DispersionPoint
    arrivals: list[ArrivalEstimate]
    result: SimulationResult
    intercept: float


def measure_dispersion(cfg: RunConfig, f0: float, curve: TheoreticalCurve | None = None,
                       pulse: PulseParams | None = None) -> DispersionRun:
    """Simulate the tabulated pulse at ``f0`` and fit the phase velocity."""
    pulse = table1_pulse(f0) if pulse is None else pulse
    cfg = replace(cfg, pulse=pulse)
    _, c_T = bulk_velocities(cfg.material)
    grid = record_length(pulse, max(cfg.probes), c_T, cfg.grid)
    c_ref = solve_phase_velocity(ANTISYMMETRIC, cfg.material, cfg.geometry.Ly, f0).c_phase
    res = simulate(cfg, grid=grid, c_ref=c_ref)
    arrivals, C, r2, b = phase_velocity_from_traces(res.traces, c_max=c_T)
    point = dispersion_point(f0, C, cfg.material, cfg.geometry.Ly, curve, r2)
    return DispersionRun(point, arrivals, res, b)


@dataclass(frozen=True, eq=False)
class LambRun:
    comparison: LambComparison
    t: float
    window: tuple[float, float]
    C: float
    arrival: ArrivalEstimate


def compare_lamb_run(cfg: RunConfig, t: float | None = None,
                     window: tuple[float, float] | None = None) -> LambRun:
    """FE field at the first-probe arrival against the A0 mode at ``f0``.

    ``t`` and ``window`` default to the measured arrival and the window it
    implies around the first probe.
    """
    _, c_T = bulk_velocities(cfg.material)
    N = cfg.grid.N
    res = simulate(cfg, snapshot_steps=range(N + 1))
    arrivals, C, _, _ = phase_velocity_from_traces(res.traces, c_max=c_T)
    arr = arrivals[0]
    t = arr.t_arrive if t is None else t
    if window is None:
        window = comparison_window(arr, C, cfg.probes[0])
    mode = solve_phase_velocity(ANTISYMMETRIC, cfg.material, cfg.geometry.Ly, cfg.pulse.f0)
    d = res.field_at(t)
    cmp = compare_to_lamb(res.info["mesh"], res.info["nodes"], d, mode, cfg.material, t,
                          window, cfg.geometry.Ly)
    return LambRun(cmp, float(t), (float(window[0]), float(window[1])), C, arr)
