"""Rayleigh-Lamb modes of a traction-free isotropic plate.

The plate occupies ``0 <= y <= Ly``; formulas use the mid-plane coordinate
``z = y - Ly/2`` and half thickness ``h = Ly/2``. With

    p^2 = w^2/cL^2 - k^2,    q^2 = w^2/cT^2 - k^2,

the antisymmetric frequency equation is written pole-free as

    (k^2 - q^2)^2 [sin(ph)/p] cos(qh) + 4 k^2 cos(ph) [q sin(qh)] = 0

and the symmetric one as

    (k^2 - q^2)^2 cos(ph) [sin(qh)/q] + 4 k^2 [p sin(ph)] cos(qh) = 0.

The bracketed factors are even functions of p and q, so they stay real for
imaginary p, q (sub-shear phase velocities) via sin -> sinh continuation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, NoRootError
from .fem import MaterialParams

ANTISYMMETRIC = "antisymmetric"
SYMMETRIC = "symmetric"
_FAMILIES = (ANTISYMMETRIC, SYMMETRIC)

RESIDUAL_TOL = 1e-8
SCAN_STEPS = 2000


@dataclass(frozen=True)
class LambMode:
    omega: float
    k: float
    family: str = ANTISYMMETRIC
    branch: int = 0

    @property
    def c_phase(self) -> float:
        return self.omega / self.k

    @property
    def f0(self) -> float:
        return self.omega / (2 * math.pi)

    @property
    def wavelength(self) -> float:
        return 2 * math.pi / self.k


@dataclass(frozen=True)
class TheoreticalCurve:
    samples: np.ndarray  # (n, 2): (Ly/wavelength, C/c0)
    c0: float
    f0: np.ndarray
    c_phase: np.ndarray


def bulk_velocities(mat: MaterialParams) -> tuple[float, float]:
    """Longitudinal and transverse bulk wave speeds."""
    return math.sqrt((mat.lam + 2 * mat.mu) / mat.rho), math.sqrt(mat.mu / mat.rho)


def bar_velocity(mat: MaterialParams) -> float:
    return math.sqrt(mat.E / mat.rho)


# even-in-p building blocks, real for either sign of p^2

def _cos(p2: float, h: float) -> float:
    if p2 >= 0:
        return math.cos(math.sqrt(p2) * h)
    return math.cosh(math.sqrt(-p2) * h)


def _sin_over(p2: float, h: float) -> float:
    """sin(p h) / p"""
    if p2 > 0:
        p = math.sqrt(p2)
        return math.sin(p * h) / p
    if p2 < 0:
        p = math.sqrt(-p2)
        return math.sinh(p * h) / p
    return h


def _p_sin(p2: float, h: float) -> float:
    """p sin(p h)"""
    if p2 >= 0:
        p = math.sqrt(p2)
        return p * math.sin(p * h)
    p = math.sqrt(-p2)
    return -p * math.sinh(p * h)


def _terms(family: str, cL: float, cT: float, h: float, omega: float, k: float):
    p2 = (omega / cL) ** 2 - k * k
    q2 = (omega / cT) ** 2 - k * k
    a = (k * k - q2) ** 2
    if family == ANTISYMMETRIC:
        return a * _sin_over(p2, h) * _cos(q2, h), 4 * k * k * _cos(p2, h) * _p_sin(q2, h)
    if family == SYMMETRIC:
        return a * _cos(p2, h) * _sin_over(q2, h), 4 * k * k * _p_sin(p2, h) * _cos(q2, h)
    raise InvalidArgumentError(f"unknown mode family {family!r}")


def dispersion_residual(family: str, mat: MaterialParams, Ly: float,
                        omega: float, c_phase: float) -> float:
    """Normalised frequency-equation residual in [-1, 1].

    The two terms of the pole-free determinant are divided by the sum of
    their magnitudes, so the value is scale-free and a root has residual 0.
    """
    if not (omega > 0 and c_phase > 0):
        raise InvalidArgumentError("omega and c_phase must be positive")
    cL, cT = bulk_velocities(mat)
    with np.errstate(over="raise"):
        try:
            t1, t2 = _terms(family, cL, cT, Ly / 2, omega, omega / c_phase)
        except (OverflowError, FloatingPointError):
            return _residual_log_scaled(family, cL, cT, Ly / 2, omega, omega / c_phase)
    denom = abs(t1) + abs(t2)
    if denom == 0.0 or not math.isfinite(denom):
        return _residual_log_scaled(family, cL, cT, Ly / 2, omega, omega / c_phase)
    return (t1 + t2) / denom


def _residual_log_scaled(family, cL, cT, h, omega, k):
    # very slow phase velocities: both sinh/cosh factors overflow; factor out exp(|p| h + |q| h)
    p2 = (omega / cL) ** 2 - k * k
    q2 = (omega / cT) ** 2 - k * k
    if p2 >= 0 or q2 >= 0:
        raise NoRootError("residual overflow outside the evanescent regime")
    pa, qa = math.sqrt(-p2), math.sqrt(-q2)
    # cosh(x) e^-x and sinh(x) e^-x
    ch = lambda x: 0.5 * (1 + math.exp(-2 * x))
    sh = lambda x: 0.5 * (1 - math.exp(-2 * x))
    a = (k * k - q2) ** 2
    if family == ANTISYMMETRIC:
        t1 = a * sh(pa * h) / pa * ch(qa * h)
        t2 = 4 * k * k * ch(pa * h) * (-qa * sh(qa * h))
    else:
        t1 = a * ch(pa * h) * sh(qa * h) / qa
        t2 = 4 * k * k * (-pa * sh(pa * h)) * ch(qa * h)
    return (t1 + t2) / (abs(t1) + abs(t2))


def _bisect(fun, lo: float, hi: float, f_lo: float, rtol: float = 1e-13) -> float:
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f_mid = fun(mid)
        if f_mid == 0.0:
            return mid
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
        if hi - lo <= rtol * hi:
            break
    return 0.5 * (lo + hi)


def _scan_roots(fun, c_max: float, branch: int) -> float:
    step = c_max / SCAN_STEPS
    c_prev = step
    f_prev = fun(c_prev)
    found = 0
    for i in range(2, SCAN_STEPS + 1):
        c = i * step
        f = fun(c)
        if f == 0.0 or (f > 0) != (f_prev > 0):
            if found == branch:
                return c if f == 0.0 else _bisect(fun, c_prev, c, f_prev)
            found += 1
        c_prev, f_prev = c, f
    raise NoRootError(f"no sign change for branch {branch} below c={c_max:g}")


def solve_phase_velocity(family: str, mat: MaterialParams, Ly: float, f0: float,
                         branch: int = 0) -> LambMode:
    """Phase velocity of the requested branch at frequency ``f0``.

    Scans c over (0, c_long] in ``c_long / 2000`` steps and bisects the
    ``branch``-th sign change.
    """
    if not f0 > 0:
        raise InvalidArgumentError("f0 must be positive")
    if family not in _FAMILIES:
        raise InvalidArgumentError(f"unknown mode family {family!r}")
    omega = 2 * math.pi * f0
    cL, _ = bulk_velocities(mat)
    c = _scan_roots(lambda c: dispersion_residual(family, mat, Ly, omega, c), cL, branch)
    return LambMode(omega=omega, k=omega / c, family=family, branch=branch)


def solve_at_wavenumber(family: str, mat: MaterialParams, Ly: float, k: float,
                        branch: int = 0) -> LambMode:
    """Same scan, but at fixed wavenumber (omega = c k)."""
    if not k > 0:
        raise InvalidArgumentError("k must be positive")
    cL, _ = bulk_velocities(mat)
    c = _scan_roots(lambda c: dispersion_residual(family, mat, Ly, c * k, c), cL, branch)
    return LambMode(omega=c * k, k=k, family=family, branch=branch)


def mode_residual(mode: LambMode, mat: MaterialParams, Ly: float) -> float:
    return dispersion_residual(mode.family, mat, Ly, mode.omega, mode.c_phase)


# ------------------------------------------------------------- mode shapes

def _pq(mode: LambMode, mat: MaterialParams):
    cL, cT = bulk_velocities(mat)
    k, w = mode.k, mode.omega
    p = np.sqrt(complex((w / cL) ** 2 - k * k))
    q = np.sqrt(complex((w / cT) ** 2 - k * k))
    return p, q


def _amplitudes(mode: LambMode, mat: MaterialParams, Ly: float):
    """Potential amplitudes (A, B) solving the traction-free condition."""
    if mode.family != ANTISYMMETRIC:
        raise InvalidArgumentError("mode shapes are implemented for the antisymmetric family")
    if abs(mode_residual(mode, mat, Ly)) > 10 * RESIDUAL_TOL:
        raise InvalidArgumentError("mode does not satisfy the dispersion relation")
    p, q = _pq(mode, mat)
    h = Ly / 2
    k = mode.k
    # phi = A sin(p z), psi = B cos(q z)
    A = (k * k - q * q) * np.cos(q * h)
    B = 2j * k * p * np.cos(p * h)
    return p, q, A, B


def _raw_shape(mode, mat, Ly, y):
    p, q, A, B = _amplitudes(mode, mat, Ly)
    k = mode.k
    z = np.asarray(y, dtype=float) - Ly / 2
    gx = -1j * k * A * np.sin(p * z) - q * B * np.sin(q * z)
    gy = p * A * np.cos(p * z) + 1j * k * B * np.cos(q * z)
    return gx, gy


def _top_scale(mode, mat, Ly):
    _, gy_top = _raw_shape(mode, mat, Ly, Ly)
    return complex(gy_top)


def mode_shape(mode: LambMode, mat: MaterialParams, Ly: float, y):
    """Complex through-thickness amplitudes ``(g_x(y), g_y(y))``.

    Displacements are ``Re(g(y) exp(i(omega t - k x)))``; the shape is scaled
    so that ``g_y(Ly) = 1``.
    """
    y_arr = np.asarray(y, dtype=float)
    if np.any(y_arr < -1e-12 * Ly) or np.any(y_arr > Ly * (1 + 1e-12)):
        raise InvalidArgumentError("y must lie in [0, Ly]")
    gx, gy = _raw_shape(mode, mat, Ly, y_arr)
    s = _top_scale(mode, mat, Ly)
    return gx / s, gy / s


def mode_stress(mode: LambMode, mat: MaterialParams, Ly: float, y):
    """Complex amplitudes ``(sigma_yy, sigma_xy)`` on planes y = const."""
    p, q, A, B = _amplitudes(mode, mat, Ly)
    k = mode.k
    z = np.asarray(y, dtype=float) - Ly / 2
    s_yy = mat.mu * ((k * k - q * q) * A * np.sin(p * z) - 2j * k * q * B * np.sin(q * z))
    s_xy = mat.mu * (-2j * k * p * A * np.cos(p * z) + (k * k - q * q) * B * np.cos(q * z))
    s = _top_scale(mode, mat, Ly)
    return s_yy / s, s_xy / s


def lamb_field(mode: LambMode, mat: MaterialParams, Ly: float, t, x, y, phase: float = 0.0):
    """Real displacements of the travelling mode at ``(t, x, y)``."""
    gx, gy = mode_shape(mode, mat, Ly, y)
    e = np.exp(1j * (mode.omega * np.asarray(t) - mode.k * np.asarray(x) + phase))
    return np.real(gx * e), np.real(gy * e)


def theoretical_curve(mat: MaterialParams, Ly: float, n_samples: int,
                      lo: float = 0.01, hi: float = 0.5) -> TheoreticalCurve:
    """Fundamental antisymmetric branch sampled uniformly in Ly/wavelength."""
    if n_samples < 2:
        raise InvalidArgumentError("need at least two samples")
    c0 = bar_velocity(mat)
    xs = np.linspace(lo, hi, n_samples)
    cs = np.empty(n_samples)
    fs = np.empty(n_samples)
    for i, xn in enumerate(xs):
        k = 2 * math.pi * xn / Ly
        mode = solve_at_wavenumber(ANTISYMMETRIC, mat, Ly, k)
        cs[i] = mode.c_phase
        fs[i] = mode.f0
    return TheoreticalCurve(samples=np.column_stack([xs, cs / c0]), c0=c0, f0=fs, c_phase=cs)
