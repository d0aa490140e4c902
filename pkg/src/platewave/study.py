"""Successive-mesh L2 differences and the empirical convergence order."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import RunConfig
from .errors import InvalidArgumentError
from .fem import assemble, triangle_quadrature
from .mesh import Mesh, NodeSet, build_structured_mesh, enumerate_nodes
from .sim import SimulationResult, TimeGrid, evaluate_field, run_simulation, steps_bracketing
from .solver import factor

REFERENCE_T_TILDE = 0.685e-5
REFERENCE_WINDOW = (0.9e-2, 1.08e-2)


@dataclass(frozen=True, eq=False)
class DiscreteField:
    mesh: Mesh
    nodes: NodeSet
    d: np.ndarray

    def __call__(self, pts):
        return evaluate_field(self.mesh, self.nodes, self.d, pts)


@dataclass(frozen=True)
class ConvergenceRow:
    h: float
    dof: int
    e_t: float
    ny: int


@dataclass(frozen=True)
class ConvergenceStudy:
    rows: list[ConvergenceRow]
    order: float
    degree: int
    t_tilde: float
    window: tuple[float, float]


def _clip(poly: list, x0: float, keep_right: bool) -> list:
    # one Sutherland-Hodgman pass against the vertical line x = x0
    inside = (lambda p: p[0] >= x0) if keep_right else (lambda p: p[0] <= x0)
    out = []
    for i, cur in enumerate(poly):
        prev = poly[i - 1]
        if inside(cur):
            if not inside(prev):
                out.append(_cross(prev, cur, x0))
            out.append(cur)
        elif inside(prev):
            out.append(_cross(prev, cur, x0))
    return out


def _cross(a, b, x0):
    s = (x0 - a[0]) / (b[0] - a[0])
    return (x0, a[1] + s * (b[1] - a[1]))


def window_quadrature(mesh: Mesh, window: tuple[float, float], degree: int):
    """Physical points and weights integrating over ``[x0, x1] x [0, Ly]``
    with pieces of the triangles of ``mesh``."""
    x0, x1 = window
    bary, w = triangle_quadrature(degree)
    pts, wts = [], []
    V = mesh.vertices
    for tri in mesh.triangles:
        c = V[tri]
        if c[:, 0].max() <= x0 or c[:, 0].min() >= x1:
            continue
        poly = [tuple(p) for p in c]
        poly = _clip(_clip(poly, x0, True), x1, False)
        for j in range(1, len(poly) - 1):
            t = np.array([poly[0], poly[j], poly[j + 1]])
            area = 0.5 * abs((t[1, 0] - t[0, 0]) * (t[2, 1] - t[0, 1])
                             - (t[2, 0] - t[0, 0]) * (t[1, 1] - t[0, 1]))
            if area <= 0.0:
                continue
            pts.append(bary @ t)
            wts.append(area * w)
    if not pts:
        raise InvalidArgumentError("window does not intersect the mesh")
    return np.vstack(pts), np.concatenate(wts)


def l2_error_between(coarse: DiscreteField, fine: DiscreteField,
                     window: tuple[float, float], Ly: float) -> float:
    """L2 norm of ``coarse - fine`` over ``[x_min, x_max] x [0, Ly]``,
    integrated on the fine mesh."""
    x0, x1 = window
    if not x1 > x0:
        raise InvalidArgumentError("empty window")
    gc, gf = coarse.mesh.geometry, fine.mesh.geometry
    if gc != gf or abs(gf.Ly - Ly) > gf.tolerance:
        raise InvalidArgumentError("coarse and fine fields live on different plates")
    if x0 < 0 or x1 > gf.Lx:
        raise InvalidArgumentError("window leaves the plate")
    deg = 2 * max(coarse.nodes.degree, fine.nodes.degree) + 2
    pts, w = window_quadrature(fine.mesh, window, deg)
    cx, cy = coarse(pts)
    fx, fy = fine(pts)
    return math.sqrt(float(w @ ((cx - fx) ** 2 + (cy - fy) ** 2)))


def fit_order(h, e) -> float:
    """Least-squares slope of ``log e`` against ``log h``."""
    h, e = np.asarray(h, float), np.asarray(e, float)
    if len(h) < 2 or np.any(e <= 0):
        return float("nan")
    return float(np.polyfit(np.log(h), np.log(e), 1)[0])


def field_at_time(cfg: RunConfig, ny: int, degree: int, t: float) -> DiscreteField:
    mesh = build_structured_mesh(cfg.geometry, ny)
    nodes = enumerate_nodes(mesh, degree)
    steps = steps_bracketing(t, cfg.grid.dt)
    if steps[-1] > cfg.grid.N:
        raise InvalidArgumentError("requested time lies beyond the simulated interval")
    grid = TimeGrid(t_final=steps[-1] * cfg.grid.dt, N=steps[-1])
    system = assemble(mesh, nodes, cfg.material, grid.dt)
    res: SimulationResult = run_simulation(
        mesh, nodes, cfg.material, cfg.pulse, grid, snapshot_steps=steps,
        system=system, factorization=factor(system, cfg.solver),
    )
    return DiscreteField(mesh, nodes, res.field_at(t))


def convergence_study(cfg: RunConfig, ny_list, degree: int | None = None,
                      t_tilde: float = REFERENCE_T_TILDE,
                      window: tuple[float, float] = REFERENCE_WINDOW) -> ConvergenceStudy:
    """Errors between consecutive meshes at the fixed time ``t_tilde``.

    Each row compares meshes ``j-1`` and ``j`` and carries ``h`` and ``dof``
    of the finer mesh ``j``, so ``len(ny_list) - 1`` rows are returned.
    """
    ny_list = [int(n) for n in ny_list]
    if len(ny_list) < 3:  # two rows at least for a slope
        raise InvalidArgumentError("need at least three meshes")
    if any(b <= a for a, b in zip(ny_list, ny_list[1:])):
        raise InvalidArgumentError("ny list must be strictly increasing")
    k = cfg.degree if degree is None else degree
    fields = [field_at_time(cfg, ny, k, t_tilde) for ny in ny_list]
    rows = []
    for ny, a, b in zip(ny_list[1:], fields, fields[1:]):
        e = l2_error_between(a, b, window, cfg.geometry.Ly)
        rows.append(ConvergenceRow(h=b.mesh.h, dof=b.nodes.n_dofs, e_t=e, ny=ny))
    order = fit_order([r.h for r in rows], [r.e_t for r in rows])
    return ConvergenceStudy(rows, order, k, t_tilde, tuple(window))
