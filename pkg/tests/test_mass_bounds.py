import json
import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from qlm.errors import AdmissibilityError
from qlm.mass_bounds import (
    C_POSITIVITY,
    build_report,
    ccmm_comparison,
    hyperbolic_increment,
    hyperbolic_xi,
    positivity_thm12,
    positivity_thm14,
    theorem13_bounds,
    theorem15_bounds,
    thm14_thresholds,
)
from qlm.roots import phi, theta_root
from qlm.sphere_metrics import AxisymMetricSpec, HorizonSpec, MeanCurvatureSpec

from conftest import bump


def test_round_bound_equals_hawking():
    g = AxisymMetricSpec.round(2.0)
    H = MeanCurvatureSpec.from_tau(0.6, 2.0)
    b = theorem13_bounds(g, H, 0.0)
    assert b.theta == 1.0
    assert b.bartnik_upper == b.hawking == pytest.approx(1.0 * (1 - 0.36), abs=1e-15)
    assert b.tau_le_theta


def test_schwarzschild_saturation():
    r_o, M, r_h = 4.0, 1.0, 2.0
    H = MeanCurvatureSpec(2 / r_o * math.sqrt(1 - 2 * M / r_o))
    b = theorem13_bounds(AxisymMetricSpec.round(r_o), H, 0.0, HorizonSpec(r_h))
    assert b.tau**2 + r_h / r_o == pytest.approx(b.theta**2, abs=1e-14)
    assert b.hawking == pytest.approx(M, abs=1e-14)
    assert b.hawking_lower == pytest.approx(M, abs=1e-14)


def test_supergolden_bound():
    tau = 0.9
    b = theorem13_bounds(AxisymMetricSpec.round(1.0), MeanCurvatureSpec.from_tau(tau, 1.0), (2 / 3) / tau)
    assert b.theta == pytest.approx(1.4655712318767680, rel=1e-14)
    assert b.bartnik_upper == pytest.approx(0.5 * (b.theta**2 - 0.81), rel=1e-14)


@given(tau=st.floats(0.01, 3.0), zeta=st.floats(0.0, 2.0), r_o=st.floats(0.1, 10.0))
def test_flat_bound_properties(tau, zeta, r_o):
    assume(abs(tau - 1) > 1e-6)
    b = theorem13_bounds(AxisymMetricSpec.round(r_o), MeanCurvatureSpec.from_tau(tau, r_o), zeta)
    assert b.bartnik_upper - b.hawking == pytest.approx(0.5 * r_o * (b.theta**2 - 1), abs=1e-12 * r_o * b.theta**2)
    assert b.bartnik_upper >= b.hawking - 1e-14 * r_o
    assert b.bartnik_upper - b.hawking <= (b.bartnik_upper_weak - b.hawking) * (1 + 1e-12) + 1e-15 * r_o
    assert b.bartnik_upper_ratio_form == pytest.approx(b.bartnik_upper, rel=1e-9, abs=1e-12)
    # monotone in zeta
    b2 = theorem13_bounds(AxisymMetricSpec.round(r_o), MeanCurvatureSpec.from_tau(tau, r_o), zeta * 1.1 + 1e-3)
    assert b2.bartnik_upper >= b.bartnik_upper


def test_horizon_positivity_examples():
    assert positivity_thm12(0.0, 0.3, 1.0).verdict
    v = positivity_thm12(0.4, 0.5, 1.0)
    assert v.threshold == pytest.approx(math.sqrt(2) / 6)
    assert not v.verdict
    with pytest.raises(AdmissibilityError):
        positivity_thm12(0.1, 2.0, 1.0)


@given(zeta=st.floats(0, 0.5), lam=st.floats(1e-3, 1.0), tau=st.floats(0.0, 5.0))
def test_horizon_positivity_forces_positive_hawking_mass(zeta, lam, tau):
    v = positivity_thm12(zeta, lam, 1.0)
    assume(v.verdict)
    assert v.lemma_criterion
    # the horizon inequality tau^2 + lam <= theta^2 is phi <= 0
    if phi(tau, 1.5 * zeta, lam) <= 0:
        assert tau < 1


def test_bartnik_positivity_thresholds_lambda_one():
    strict, loose = thm14_thresholds(1.0)
    assert strict == pytest.approx(math.sqrt(2) / 6)
    assert loose == pytest.approx(1 / 3)


@given(zeta=st.floats(0, 1), mb=st.floats(1e-3, 10))
def test_bartnik_positivity_strict_implies_loose(zeta, mb):
    v = positivity_thm14(zeta, mb, 1.0)
    if v.verdict:
        assert v.alternative_verdict
    assert positivity_thm14(0.0, mb, 1.0).verdict


def test_bartnik_positivity_errors():
    with pytest.raises(AdmissibilityError):
        positivity_thm14(0.1, 0.0, 1.0)


@given(z1=st.floats(0, 1), z2=st.floats(0, 1), lam=st.floats(1e-3, 1.0))
def test_verdicts_monotone_in_zeta(z1, z2, lam):
    lo, hi = sorted((z1, z2))
    if positivity_thm12(hi, lam, 1.0).verdict:
        assert positivity_thm12(lo, lam, 1.0).verdict
    if positivity_thm14(hi, lam, 1.0).verdict:
        assert positivity_thm14(lo, lam, 1.0).verdict


def test_hyperbolic_bound_round():
    g = AxisymMetricSpec.round(1.0)
    H = MeanCurvatureSpec.from_tau(0.5, 1.0)
    b = theorem15_bounds(g, H, 0.7, 0.0)
    assert b.bartnik_upper == b.hawking == pytest.approx(0.5 * (1 + 0.49 - 0.25))


@given(kr=st.floats(1e-3, 3), tau=st.floats(0, 3), xi=st.floats(0, 3))
def test_hyperbolic_bound_ordering(kr, tau, xi):
    exact, weak = hyperbolic_increment(1.0, kr, tau, xi)
    assert exact <= weak * (1 + 1e-12) + 1e-15
    assert exact >= -1e-15


def test_hyperbolic_bound_kappa_to_zero():
    alpha, beta, tau = 0.02, 0.5, 0.5
    g = AxisymMetricSpec.round(1.0)
    H = MeanCurvatureSpec.from_tau(tau, 1.0)
    flat = theorem13_bounds(g, H, math.sqrt(alpha / (2 * beta))).bartnik_upper
    from qlm.roots import xi_root

    devs = [abs(theorem15_bounds(g, H, k, xi_root(alpha, beta, tau, k, 1.0)).bartnik_upper - flat)
            for k in (1e-1, 1e-2, 1e-3)]
    assert devs[0] > devs[1] > devs[2] and devs[2] < 1e-4


def test_hyperbolic_penrose_test():
    b = theorem15_bounds(AxisymMetricSpec.round(1.0), MeanCurvatureSpec.from_tau(0.5, 1.0), 0.5, 0.1, HorizonSpec(0.5))
    assert b.penrose_test is True
    assert b.nonnegativity >= 0


def test_hyperbolic_xi_cases():
    e1 = hyperbolic_xi(bump(0.1), 0.5, 0.5)
    assert e1.case == "curvature_positive"
    e2 = hyperbolic_xi(bump(0.3), 0.5, 0.5)
    assert e2.case == "curvature_nonpositive"
    # linear path: alpha = eps^2/2, beta = 1 - 4 eps
    assert e2.value == pytest.approx(math.sqrt(0.045 / (2 * -0.2 + 1.5)), rel=1e-10)


def test_ccmm():
    assert ccmm_comparison(0.01, 0.5, 0.0, 0.5).value == pytest.approx(0.5)
    assert ccmm_comparison(0.01, 0.5, 0.9, 0.1).value is None
    alpha, beta, tau, r_o = 0.02, 0.6, 1e-3, 1.0
    m_H = 0.5 * r_o * (1 - tau * tau)
    th = theta_root(tau, math.sqrt(alpha / (2 * beta))).theta
    ours = 0.5 * r_o * (th * th - tau * tau)
    c = ccmm_comparison(alpha, beta, tau, m_H, ours)
    assert c.smaller == "theorem13"
    assert (ours - m_H) / m_H / tau == pytest.approx(math.sqrt(alpha / (2 * beta)), rel=1e-2)
    assert (c.value - m_H) / m_H / tau == pytest.approx(math.sqrt(alpha / beta), rel=1e-2)


def test_report_serialization_has_units():
    rep = build_report(bump(0.1), MeanCurvatureSpec.from_tau(0.8, 1.0), horizon=HorizonSpec(0.5), with_brown_york=True)
    d = rep.to_dict()
    assert d["schema_version"]
    assert d["flat"]["bartnik_upper_bound"]["units"] == "length"
    assert d["zeta_estimate"]["certified"] == "upper_bound"
    json.dumps(d, allow_nan=False)
    hyp = build_report(bump(0.1), MeanCurvatureSpec.from_tau(0.8, 1.0), "hyperbolic", 0.5).to_dict()
    assert hyp["hyperbolic"]["bounds_ordered"]
    assert hyp["hyperbolic"]["nonnegativity_holds"]


def test_report_rejects_bad_pipeline():
    with pytest.raises(ValueError):
        build_report(bump(0.1), MeanCurvatureSpec(1.0), "spherical")
    with pytest.raises(ValueError):
        build_report(bump(0.1), MeanCurvatureSpec(1.0), "hyperbolic", 0.0)
