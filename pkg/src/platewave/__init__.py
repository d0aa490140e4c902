"""Finite element simulation of ultrasonic guided waves in a thin plate.

A rectangular aluminium plate is driven on its left end by a modulated
pulse. The in-plane elastodynamic equations are discretized with P1/P2
Lagrange elements and an implicit two-step scheme. Probe traces give phase
velocities that are compared with the antisymmetric Lamb mode.
"""

from .errors import (
    ConfigError,
    DegenerateElementError,
    InsufficientSignalError,
    InvalidArgumentError,
    NoRootError,
    NotSPDError,
    OutOfDomainError,
    PlatewaveError,
    SingularFitError,
)
from .fem import MaterialParams, assemble, assemble_load, assemble_stiffness
from .lamb import (
    ANTISYMMETRIC,
    SYMMETRIC,
    LambMode,
    bar_velocity,
    bulk_velocities,
    dispersion_residual,
    lamb_field,
    mode_shape,
    solve_phase_velocity,
    theoretical_curve,
)
from .mesh import PlateGeometry, build_structured_mesh, enumerate_nodes
from .sim import PulseParams, TimeGrid, evaluate_field, run_simulation, table1_pulse
from .solver import Factorization, factor, solve

__version__ = "0.1.0"

__all__ = [
    "ANTISYMMETRIC",
    "SYMMETRIC",
    "ConfigError",
    "DegenerateElementError",
    "Factorization",
    "InsufficientSignalError",
    "InvalidArgumentError",
    "LambMode",
    "MaterialParams",
    "NoRootError",
    "NotSPDError",
    "OutOfDomainError",
    "PlateGeometry",
    "PlatewaveError",
    "PulseParams",
    "SingularFitError",
    "TimeGrid",
    "assemble",
    "assemble_load",
    "assemble_stiffness",
    "bar_velocity",
    "build_structured_mesh",
    "bulk_velocities",
    "dispersion_residual",
    "enumerate_nodes",
    "evaluate_field",
    "factor",
    "lamb_field",
    "mode_shape",
    "run_simulation",
    "solve",
    "solve_phase_velocity",
    "table1_pulse",
    "theoretical_curve",
]
