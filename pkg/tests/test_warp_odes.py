import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from qlm.errors import AdmissibilityError
from qlm.warp_odes import (
    WarpFunction,
    implicit_flat_inverse,
    implicit_flat_solution,
    integrate_warp,
    u_star,
    warp_upper_bounds_hyperbolic,
)


def arc_length_oracle(m, r_o, u):
    """``int_{r_o}^{u} dr / sqrt(1 - 2m/r)`` by 40-digit quadrature."""
    with mpmath.workdps(40):
        m, r_o, u = mpmath.mpf(m), mpmath.mpf(r_o), mpmath.mpf(u)
        return float(mpmath.quad(lambda r: 1 / mpmath.sqrt(1 - 2 * m / r), [r_o, u]))


def test_flat_massless_is_linear():
    w = WarpFunction(0.0, 0.0, 1.5)
    s = np.linspace(0, 3, 7)
    assert np.array_equal(w.u(s), 1.5 + s)
    t = integrate_warp(w, 3.0)
    assert np.allclose(t.u, 1.5 + t.s, atol=1e-12)


def test_hyperbolic_massless_closed_form():
    kappa, r_o = 0.7, 1.2
    w = WarpFunction(0.0, kappa, r_o, s_max=2.0)
    s = np.linspace(0, 2, 21)
    exact = r_o * np.cosh(kappa * s) + math.sqrt(1 + kappa**2 * r_o**2) / kappa * np.sinh(kappa * s)
    assert np.allclose(w.u(s), exact, rtol=1e-10, atol=0)


@pytest.mark.parametrize("m,u", [(-1.0, 2.0), (-0.01, 5.0), (-1e3, 1.3), (-1e8, 1.01), (-1e8, 4.0)])
def test_implicit_against_quadrature(m, u):
    assert implicit_flat_solution(m, 1.0, u) == pytest.approx(arc_length_oracle(m, 1.0, u), rel=1e-12)


def test_implicit_large_mass_series():
    m, r_o, u = -1e8, 1.0, 1.5
    y = lambda r: (-r / (2 * m)) ** 1.5
    leading = -2 * m * (2.0 / 3.0) * (y(u) - y(r_o))
    assert implicit_flat_solution(m, r_o, u) == pytest.approx(leading, rel=1e-7)


def test_implicit_endpoint_and_errors():
    assert implicit_flat_solution(-1.0, 1.0, 1.0) == 0.0
    with pytest.raises(ValueError):
        implicit_flat_solution(-1.0, 1.0, 0.5)
    with pytest.raises(ValueError):
        implicit_flat_solution(1.0, 3.0, 4.0)


def test_round_trip_integrator_m_minus_one():
    s = implicit_flat_solution(-1.0, 1.0, 2.0)
    w = WarpFunction(-1.0, 0.0, 1.0, s_max=s, method="integrate")
    assert w.u(s) == pytest.approx(2.0, abs=1e-9)


@pytest.mark.parametrize("m", [-1e-2, -1.0, -1e2, -1e4, -1e6, -1e8])
def test_round_trip_over_mass_range(m):
    s_max = 0.5 / math.sqrt(1 - 2 * m)
    closed = WarpFunction(m, 0.0, 1.0)
    num = WarpFunction(m, 0.0, 1.0, s_max=s_max, method="integrate")
    s = np.linspace(0, s_max, 11)
    assert np.max(np.abs(closed.u(s) - num.u(s))) < 1e-9


def test_inverse_is_consistent():
    for s in (0.0, 1e-6, 0.3, 10.0):
        u = implicit_flat_inverse(-2.0, 1.0, s)
        assert implicit_flat_solution(-2.0, 1.0, u) == pytest.approx(s, abs=1e-12 * max(1, s))
    w = WarpFunction(-2.0, 0.0, 1.0)
    assert w.s_of_u(float(w.u(0.7))) == pytest.approx(0.7, rel=1e-12)


@given(m=st.floats(-10, 0.2), kappa=st.floats(0, 2))
def test_energy_and_monotonicity(m, kappa):
    w = WarpFunction(m, kappa, 1.0, s_max=2.0)
    t = integrate_warp(w, 2.0, 101)
    assert np.all(np.diff(t.u) > 0)
    assert np.all(t.u >= 1.0 - 1e-15)
    assert np.max(t.energy_residual) < 1e-10


def test_invalid_radicand():
    with pytest.raises(AdmissibilityError):
        WarpFunction(0.6, 0.0, 1.0)
    with pytest.raises(ValueError):
        WarpFunction(-1.0, 0.5, 1.0, method="closed_form")
    with pytest.raises(ValueError):
        WarpFunction(-1.0, 0.5, 1.0, s_max=1.0).u(2.0)


def test_u_star_two_forms():
    m, kappa, r_o, s = -3.0, 0.4, 1.3, 0.8
    F = 1 - 2 * m / r_o + kappa**2 * r_o**2
    other = r_o * (math.cosh(kappa * s) + math.sinh(kappa * s) * math.sqrt(F) / (kappa * r_o))
    assert u_star(m, kappa, r_o, s) == pytest.approx(other, rel=1e-13)


def test_sandwich_zero_length():
    w = WarpFunction(-1.0, 0.5, 1.0, s_max=1.0)
    sw = warp_upper_bounds_hyperbolic(w, 0.0, 0.3)
    assert sw.lower == sw.upper == 1.0
    assert sw.value == pytest.approx(1.0)


def test_sandwich_example():
    w = WarpFunction(-10.0, 0.5, 1.0, s_max=0.2)
    sw = warp_upper_bounds_hyperbolic(w, 0.2, 1.0)
    assert sw.contains


def test_sandwich_needs_negative_mass():
    with pytest.raises(ValueError):
        warp_upper_bounds_hyperbolic(WarpFunction(0.1, 0.5, 1.0), 1.0, 0.1)


def test_sandwich_large_mass_limit():
    # A k ~ c |2m|^-1/2: both bounds tend to r_o^1.5 + 1.5 c
    c = 0.4
    gaps = []
    for m in (-1e2, -1e4, -1e6):
        s = c / math.sqrt(-2 * m)
        sw = warp_upper_bounds_hyperbolic(WarpFunction(m, 0.5, 1.0, s_max=s), s, 1.0)
        assert sw.contains
        gaps.append(sw.upper - sw.lower)
        assert sw.lower == pytest.approx(1 + 1.5 * c, rel=1e-12)
    assert gaps[0] > gaps[1] > gaps[2]
