"""Arrival picking, phase-velocity fits and comparison with the A0 mode."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import InsufficientSignalError, InvalidArgumentError, SingularFitError
from .fem import MaterialParams
from .lamb import LambMode, TheoreticalCurve, bar_velocity, lamb_field
from .mesh import Mesh, NodeSet
from .sim import ProbeTrace, evaluate_field

MAXIMA_THRESHOLD = 0.05


@dataclass(frozen=True)
class ArrivalEstimate:
    t_arrive: float
    t_min: float
    t_max: float
    value: float
    maxima: tuple[float, ...] = ()


@dataclass(frozen=True)
class DispersionPoint:
    f0: float
    C: float
    x_norm: float
    y_norm: float
    fit_r2: float = float("nan")
    distance_to_theory: float = float("nan")

    @property
    def wavelength(self) -> float:
        return self.C / self.f0


def local_maxima(series: np.ndarray, dt: float, threshold: float = MAXIMA_THRESHOLD):
    """Strict discrete maxima above ``threshold * max|series|``, refined
    with a three-point parabola. Returns (sample indices, times, values)."""
    s = np.asarray(series, dtype=float)
    if len(s) < 3:
        return np.array([], dtype=int), np.array([]), np.array([])
    peak = np.max(np.abs(s))
    if peak == 0.0:
        return np.array([], dtype=int), np.array([]), np.array([])
    mid = s[1:-1]
    idx = np.flatnonzero((mid > s[:-2]) & (mid > s[2:]) & (mid >= threshold * peak)) + 1
    a, b, c = s[idx - 1], s[idx], s[idx + 1]
    curv = a - 2 * b + c
    offset = np.where(curv != 0, 0.5 * (a - c) / np.where(curv != 0, curv, 1.0), 0.0)
    times = (idx + offset) * dt
    values = b - 0.25 * (a - c) * offset
    return idx, times, values


def _zero_crossing(s: np.ndarray, j: int, dt: float) -> float:
    # root of the linear interpolant between samples j and j+1
    return (j + s[j] / (s[j] - s[j + 1])) * dt


def extract_arrival(trace: ProbeTrace | np.ndarray, dt: float | None = None,
                    threshold: float = MAXIMA_THRESHOLD, which: int = 2) -> ArrivalEstimate:
    """Time of the ``which``-th local maximum and the zeros around it."""
    if isinstance(trace, ProbeTrace):
        s = np.asarray(trace.series, dtype=float)
        dt = trace.dt if dt is None else dt
    else:
        s = np.asarray(trace, dtype=float)
    if dt is None or not dt > 0:
        raise InvalidArgumentError("dt must be positive")
    idx, times, values = local_maxima(s, dt, threshold)
    if len(idx) < which:
        raise InsufficientSignalError(
            f"found {len(idx)} local maxima above threshold, need {which}"
        )
    j = int(idx[which - 1])
    before = [m for m in range(j - 1, -1, -1) if s[m] <= 0.0 < s[m + 1] or s[m] < 0.0 <= s[m + 1]]
    after = [m for m in range(j, len(s) - 1) if s[m] > 0.0 >= s[m + 1]]
    if not before or not after:
        raise InsufficientSignalError("no zero crossing on both sides of the arrival")
    return ArrivalEstimate(
        t_arrive=float(times[which - 1]),
        t_min=_zero_crossing(s, before[0], dt),
        t_max=_zero_crossing(s, after[0], dt),
        value=float(values[which - 1]),
        maxima=tuple(float(t) for t in times),
    )


def fit_phase_velocity(arrivals) -> tuple[float, float, float]:
    """Least-squares line x = C t + b through (x_i, t_i); returns (C, r2, b)."""
    pts = np.asarray(arrivals, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 2:
        raise InvalidArgumentError("need at least two (x, t) pairs")
    x, t = pts[:, 0], pts[:, 1]
    tc = t - t.mean()
    sxx = float(tc @ tc)
    if sxx <= (1e-12 * max(abs(t).max(), 1e-300)) ** 2:
        raise SingularFitError("all arrival times are equal")
    slope = float(tc @ (x - x.mean())) / sxx
    intercept = float(x.mean() - slope * t.mean())
    resid = x - (slope * t + intercept)
    ss_tot = float(((x - x.mean()) ** 2).sum())
    r2 = 1.0 - float(resid @ resid) / ss_tot if ss_tot > 0 else 1.0
    return slope, r2, intercept


def distance_to_polyline(point, polyline: np.ndarray) -> float:
    p = np.asarray(point, dtype=float)
    a = polyline[:-1]
    b = polyline[1:]
    ab = b - a
    L2 = (ab**2).sum(axis=1)
    s = np.clip(((p - a) * ab).sum(axis=1) / np.where(L2 > 0, L2, 1.0), 0.0, 1.0)
    proj = a + s[:, None] * ab
    return float(np.sqrt(((proj - p) ** 2).sum(axis=1)).min())


def dispersion_point(f0: float, C: float, mat: MaterialParams, Ly: float,
                     curve: TheoreticalCurve | None = None, fit_r2: float = float("nan")
                     ) -> DispersionPoint:
    if not C > 0:
        raise InvalidArgumentError("phase velocity must be positive")
    c0 = bar_velocity(mat)
    x_norm = Ly * f0 / C
    y_norm = C / c0
    dist = float("nan") if curve is None else distance_to_polyline((x_norm, y_norm), curve.samples)
    return DispersionPoint(f0=f0, C=C, x_norm=x_norm, y_norm=y_norm, fit_r2=fit_r2,
                           distance_to_theory=dist)


def comparison_window(arr: ArrivalEstimate, C: float, x_probe: float = 0.0
                      ) -> tuple[float, float]:
    """``(x_probe - C (t~ - t_min), x_probe + C (t_max - t~))``.

    With ``x_probe = 0`` these are the bare half-widths.
    """
    return x_probe - C * (arr.t_arrive - arr.t_min), x_probe + C * (arr.t_max - arr.t_arrive)


@dataclass(frozen=True)
class LambComparison:
    discrepancy_x: float
    discrepancy_y: float
    phase: float
    grid_x: np.ndarray
    grid_y: np.ndarray


def _normalise(a: np.ndarray) -> np.ndarray:
    m = np.max(np.abs(a))
    return a / m if m > 0 else a


def compare_fields(fe_x: np.ndarray, fe_y: np.ndarray, analytic, n_phase: int = 720
                   ) -> tuple[float, float, float]:
    """Per-component relative L2 gap after max-normalisation and the best
    common phase. ``analytic(phase)`` returns the two reference arrays."""
    ux, uy = _normalise(fe_x), _normalise(fe_y)

    def gaps(phase):
        ax, ay = analytic(phase)
        ax, ay = _normalise(ax), _normalise(ay)
        ex = np.linalg.norm(ux - ax) / max(np.linalg.norm(ax), 1e-300)
        ey = np.linalg.norm(uy - ay) / max(np.linalg.norm(ay), 1e-300)
        return ex, ey

    def total(phase):
        ex, ey = gaps(phase)
        return ex * ex + ey * ey

    phases = np.linspace(0.0, 2 * np.pi, n_phase, endpoint=False)
    costs = [total(p) for p in phases]
    best = phases[int(np.argmin(costs))]
    step = 2 * np.pi / n_phase
    res = minimize_scalar(total, bounds=(best - step, best + step), method="bounded",
                          options={"xatol": 1e-10})
    phase = float(res.x) if res.fun <= min(costs) else float(best)
    ex, ey = gaps(phase)
    return float(ex), float(ey), phase % (2 * np.pi)


def compare_to_lamb(mesh: Mesh, nodes: NodeSet, d, mode: LambMode, mat: MaterialParams,
                    t: float, window: tuple[float, float], Ly: float,
                    n_x: int = 41, n_y: int = 21) -> LambComparison:
    """Sample FE and analytic fields on ``[x_min, x_max] x [0, Ly]``."""
    x_min, x_max = window
    if not x_max > x_min:
        raise InvalidArgumentError("empty comparison window")
    if x_min < 0 or x_max > mesh.geometry.Lx:
        raise InvalidArgumentError("comparison window leaves the plate")
    gx = np.linspace(x_min, x_max, n_x)
    gy = np.linspace(0.0, Ly, n_y)
    X, Y = np.meshgrid(gx, gy, indexing="ij")
    pts = np.column_stack([X.ravel(), Y.ravel()])
    fe_x, fe_y = evaluate_field(mesh, nodes, d, pts)

    def analytic(phase):
        return lamb_field(mode, mat, Ly, t, pts[:, 0], pts[:, 1], phase=phase)

    ex, ey, phase = compare_fields(fe_x, fe_y, analytic)
    return LambComparison(ex, ey, phase, gx, gy)


def normalised_velocity(C: float, mat: MaterialParams) -> float:
    return C / bar_velocity(mat)


def track_crest(traces, c_max: float, threshold: float = MAXIMA_THRESHOLD):
    """Arrival times of one crest followed across probes ordered by ``x``.

    The crest is the second maximum at the first probe. At each later probe
    it is the earliest maximum arriving no sooner than a wave travelling at
    ``c_max`` would allow. Counting maxima afresh at every probe is not
    enough: crests of a dispersive packet drift through its envelope, so the
    "second" lobe changes identity between probes.
    """
    if not c_max > 0:
        raise InvalidArgumentError("c_max must be positive")
    traces = list(traces)
    if len(traces) < 2:
        raise InvalidArgumentError("need at least two traces")
    xs = [tr.point[0] for tr in traces]
    if any(b <= a for a, b in zip(xs, xs[1:])):
        raise InvalidArgumentError("probes must be ordered by increasing x")
    first = extract_arrival(traces[0], threshold=threshold)
    arrivals = [first]
    for prev_x, tr in zip(xs, traces[1:]):
        s = np.asarray(tr.series, dtype=float)
        _, times, _ = local_maxima(s, tr.dt, threshold)
        earliest = arrivals[-1].t_arrive + (tr.point[0] - prev_x) / c_max
        later = np.flatnonzero(times >= earliest)
        if len(later) == 0:
            raise InsufficientSignalError(
                f"crest did not reach the probe at x={tr.point[0]:g} within the record"
            )
        which = int(later[0]) + 1
        arrivals.append(extract_arrival(tr, threshold=threshold, which=which))
    return arrivals


def phase_velocity_from_traces(traces, c_max: float, threshold: float = MAXIMA_THRESHOLD):
    """Tracked arrivals and the fitted line through ``(x_i, t~_i)``."""
    arrivals = track_crest(traces, c_max, threshold)
    pairs = [(tr.point[0], a.t_arrive) for tr, a in zip(traces, arrivals)]
    C, r2, b = fit_phase_velocity(pairs)
    if not math.isfinite(C) or C <= 0:
        raise SingularFitError(f"fitted phase velocity {C!r} is not positive")
    return arrivals, C, r2, b
