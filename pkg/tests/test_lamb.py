import math

import numpy as np
import pytest
from scipy.optimize import brentq

from platewave.errors import InvalidArgumentError, NoRootError
from platewave.lamb import (
    ANTISYMMETRIC,
    RESIDUAL_TOL,
    SYMMETRIC,
    LambMode,
    bar_velocity,
    bulk_velocities,
    dispersion_residual,
    lamb_field,
    mode_residual,
    mode_shape,
    mode_stress,
    solve_at_wavenumber,
    solve_phase_velocity,
    theoretical_curve,
)

LY = 1e-3


def classical_a0(mat, f0, Ly=LY):
    """A0 root of tan(qh)/tan(ph) = -(k^2-q^2)^2 / (4 k^2 p q), scanned densely
    below the shear speed where neither tangent has poles."""
    cL, cT = bulk_velocities(mat)
    w, h = 2 * math.pi * f0, Ly / 2

    def g(c):
        k = w / c
        p = np.sqrt(complex((w / cL) ** 2 - k * k))
        q = np.sqrt(complex((w / cT) ** 2 - k * k))
        val = 4 * k * k * q * np.tan(q * h) + (k * k - q * q) ** 2 * np.tan(p * h) / p
        return val.real

    cs = np.linspace(cT * 1e-3, cT * 0.999, 20000)
    vals = np.array([g(c) for c in cs])
    i = np.flatnonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))[0]
    return brentq(g, cs[i], cs[i + 1], xtol=1e-12, rtol=1e-14)


def test_bulk_and_bar_velocities(mat):
    cL, cT = bulk_velocities(mat)
    assert round(cT) == 3117
    assert round(cL) == 6244
    assert round(bar_velocity(mat)) == 5092


@pytest.mark.parametrize("f0", [100e3, 300e3, 600e3, 900e3, 1100e3])
def test_a0_matches_classical_form(mat, f0):
    mode = solve_phase_velocity(ANTISYMMETRIC, mat, LY, f0)
    assert mode.c_phase == pytest.approx(classical_a0(mat, f0), rel=1e-9)
    assert abs(mode_residual(mode, mat, LY)) < RESIDUAL_TOL


def test_a0_low_frequency_flexural_limit(mat):
    # thin plate (plane strain) flexural waves: c^4 = omega^2 D / (rho t)
    f0 = 5e3
    D = mat.E * LY**3 / (12 * (1 - mat.nu**2))
    c_plate = (((2 * math.pi * f0) ** 2) * D / (mat.rho * LY)) ** 0.25
    mode = solve_phase_velocity(ANTISYMMETRIC, mat, LY, f0)
    assert mode.c_phase == pytest.approx(c_plate, rel=5e-3)


def test_a0_high_frequency_rayleigh_limit(mat):
    _, cT = bulk_velocities(mat)
    c_r = cT * (0.87 + 1.12 * mat.nu) / (1 + mat.nu)  # Viktorov's approximation
    mode = solve_at_wavenumber(ANTISYMMETRIC, mat, LY, 2 * math.pi * 8 / LY)
    assert mode.c_phase == pytest.approx(c_r, rel=5e-3)


def test_s0_low_frequency_plate_velocity(mat):
    c_plate = math.sqrt(mat.E / (mat.rho * (1 - mat.nu**2)))
    mode = solve_phase_velocity(SYMMETRIC, mat, LY, 10e3)
    assert mode.c_phase == pytest.approx(c_plate, rel=2e-3)


def test_residual_is_bounded_and_scale_free(mat):
    for c in np.linspace(100, 6000, 37):
        r = dispersion_residual(ANTISYMMETRIC, mat, LY, 2 * math.pi * 600e3, c)
        assert -1.0 <= r <= 1.0
    # extremely slow waves overflow the hyperbolic terms without breaking
    r = dispersion_residual(ANTISYMMETRIC, mat, LY, 2 * math.pi * 1e8, 10.0)
    assert math.isfinite(r)


def test_errors(mat):
    with pytest.raises(InvalidArgumentError):
        solve_phase_velocity(ANTISYMMETRIC, mat, LY, -1.0)
    with pytest.raises(InvalidArgumentError):
        solve_phase_velocity("flexural", mat, LY, 1e5)
    with pytest.raises(NoRootError):
        solve_phase_velocity(ANTISYMMETRIC, mat, LY, 600e3, branch=50)
    with pytest.raises(InvalidArgumentError):
        mode_shape(LambMode(omega=1e6, k=1e3), mat, LY, 0.5e-3)  # not on the curve


def test_mode_shape_normalised_and_parity(mat):
    mode = solve_phase_velocity(ANTISYMMETRIC, mat, LY, 600e3)
    gx_top, gy_top = mode_shape(mode, mat, LY, LY)
    assert gy_top == pytest.approx(1.0, abs=1e-14)
    y = np.linspace(0, LY, 50)
    gx, gy = mode_shape(mode, mat, LY, y)
    gxr, gyr = mode_shape(mode, mat, LY, LY - y)
    assert np.allclose(gx, -gxr, rtol=0, atol=1e-12 * np.abs(gx).max())
    assert np.allclose(gy, gyr, rtol=0, atol=1e-12 * np.abs(gy).max())


@pytest.mark.parametrize("f0", [200e3, 600e3, 1100e3])
def test_faces_are_traction_free(mat, f0):
    mode = solve_phase_velocity(ANTISYMMETRIC, mat, LY, f0)
    y = np.linspace(0, LY, 101)
    syy, sxy = mode_stress(mode, mat, LY, y)
    scale = max(np.abs(syy).max(), np.abs(sxy).max())
    for face in (0, -1):
        assert abs(syy[face]) / scale < 1e-6
        assert abs(sxy[face]) / scale < 1e-6


def test_stress_consistent_with_displacement(mat):
    # sigma_yy = lam du_x/dx + (lam + 2 mu) du_y/dy for u = g(y) e^{-ikx}
    mode = solve_phase_velocity(ANTISYMMETRIC, mat, LY, 600e3)
    y = np.linspace(0.1e-3, 0.9e-3, 7)
    eps = 1e-9
    gx, gy = mode_shape(mode, mat, LY, y)
    _, gy_p = mode_shape(mode, mat, LY, y + eps)
    _, gy_m = mode_shape(mode, mat, LY, y - eps)
    dgy = (gy_p - gy_m) / (2 * eps)
    syy, _ = mode_stress(mode, mat, LY, y)
    expect = mat.lam * (-1j * mode.k) * gx + (mat.lam + 2 * mat.mu) * dgy
    assert np.allclose(syy, expect, rtol=1e-5)


def test_lamb_field_travels_at_phase_velocity(mat):
    mode = solve_phase_velocity(ANTISYMMETRIC, mat, LY, 600e3)
    dt = 1e-7
    a = lamb_field(mode, mat, LY, 0.0, 0.01, 0.3e-3)
    b = lamb_field(mode, mat, LY, dt, 0.01 + mode.c_phase * dt, 0.3e-3)
    assert np.allclose(a, b, atol=1e-12)


def test_theoretical_curve(mat):
    curve = theoretical_curve(mat, LY, 60)
    xs, ys = curve.samples.T
    assert np.all(np.diff(ys) > 0)
    for f, c in zip(curve.f0, curve.c_phase):
        mode = LambMode(omega=2 * math.pi * f, k=2 * math.pi * f / c)
        assert abs(mode_residual(mode, mat, LY)) < RESIDUAL_TOL
    fine = theoretical_curve(mat, LY, 119)
    mid_x = fine.samples[1::2, 0]
    interp = np.interp(mid_x, xs, ys)
    assert np.all(np.abs(interp - fine.samples[1::2, 1]) < 0.01 * fine.samples[1::2, 1])
    with pytest.raises(InvalidArgumentError):
        theoretical_curve(mat, LY, 1)
