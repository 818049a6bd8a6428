"""Quasi-local mass bounds and positivity criteria.

Every zeta (or xi) fed in here is an upper bound of the true infimum over
paths.  All bounds below increase with zeta and all positivity criteria are
of the form ``zeta < threshold``, so using an upper bound keeps every
"bound holds" and every positive verdict valid.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Union

from .errors import AdmissibilityError
from .metric_paths import (
    DEFAULT_T_SAMPLES,
    FamilySpec,
    ZetaEstimate,
    evaluate_family,
    zeta_kappa_upper_bound,
    zeta_upper_bound,
)
from .roots import XiResult, phi_criterion, theta_root, xi_root
from .sphere_metrics import (
    DEFAULT_NODES,
    AxisymMetricSpec,
    HorizonSpec,
    MeanCurvatureSpec,
    brown_york_mass,
    hawking_mass,
    hyperbolic_hawking_mass,
    surface_data,
)

SCHEMA_VERSION = "1.0"
C_POSITIVITY = math.sqrt(2.0) / 3.0

ZetaLike = Union[ZetaEstimate, float]


def _zeta_value(z: ZetaLike) -> float:
    v = z.value if isinstance(z, ZetaEstimate) else float(z)
    if not (math.isfinite(v) and v >= 0):
        raise ValueError(f"zeta must be finite and nonnegative, got {v!r}")
    return v


# ---------------------------------------------------------------------------
# Flat bounds
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FlatBounds:
    tau: float
    zeta: float
    theta: float
    theta_residual: float
    hawking: float
    bartnik_upper: float  # (r_o/2)(theta^2 - tau^2)
    bartnik_upper_weak: float  # 1.5 r_o (1 + 0.75 tau zeta) tau zeta + m_H
    bartnik_upper_ratio_form: float  # same bound written through m_H
    hawking_lower: float  # lower bound for m_H from theta (with horizon if given)
    tau_le_theta: bool
    horizon_inequality: Optional[bool] = None  # tau^2 + r_h/r_o <= theta^2
    r_h: Optional[float] = None


def theorem13_bounds(
    g: AxisymMetricSpec,
    H: MeanCurvatureSpec,
    zeta: ZetaLike,
    horizon: Optional[HorizonSpec] = None,
) -> FlatBounds:
    """Bartnik upper bounds and Hawking lower bounds from ``theta(tau, zeta)``."""
    z = _zeta_value(zeta)
    r_o = g.r_o
    tau = H.tau(r_o)
    th = theta_root(tau, z)
    theta = th.theta
    m_H = hawking_mass(g, H)
    bound = 0.5 * r_o * (theta * theta - tau * tau)
    weak = 1.5 * r_o * (1.0 + 0.75 * tau * z) * tau * z + m_H
    if m_H == 0.0:
        ratio_form = 0.5 * r_o * (theta * theta - 1.0)
    else:
        ratio_form = (theta * theta - tau * tau) / (1.0 - tau * tau) * m_H
    if horizon is None:
        lower = 0.5 * r_o * (1.0 - theta * theta)
        hz = None
        r_h = None
    else:
        r_h = horizon.r_h
        lower = 0.5 * r_o * (1.0 + r_h / r_o - theta * theta)
        hz = tau * tau + r_h / r_o <= theta * theta
    return FlatBounds(
        tau, z, theta, th.residual, m_H, bound, weak, ratio_form, lower, tau <= theta, hz, r_h
    )


# ---------------------------------------------------------------------------
# Positivity criteria
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PositivityVerdict:
    verdict: bool
    threshold: float
    zeta: float
    alternative_threshold: Optional[float] = None
    alternative_verdict: Optional[bool] = None
    lemma_criterion: Optional[bool] = None  # phi > 0 on [1, inf) with b = 3 zeta/2


def positivity_thm12(zeta: ZetaLike, r_h: float, r_o: float) -> PositivityVerdict:
    """``zeta < (sqrt 2 / 3) r_h / r_o`` forces a positive Hawking mass when a horizon is present."""
    z = _zeta_value(zeta)
    if not (r_h > 0 and r_o > 0):
        raise ValueError("r_h and r_o must be positive")
    if r_h > r_o:
        raise AdmissibilityError("horizon_larger_than_surface", "need r_h <= r_o")
    lam = r_h / r_o
    thr = C_POSITIVITY * lam
    lemma = phi_criterion(1.5 * z, lam) if z > 0 else True
    return PositivityVerdict(z < thr, thr, z, lemma_criterion=lemma)


def thm14_thresholds(lam: float) -> tuple[float, float]:
    """Thresholds ``C (1+lam)^-1 min(lam,1)`` and ``C (1+lam)^-1/2 min(lam,1)``."""
    base = C_POSITIVITY * min(lam, 1.0)
    return base / (1.0 + lam), base / math.sqrt(1.0 + lam)


def positivity_thm14(zeta: ZetaLike, bartnik_bound: float, r_o: float) -> PositivityVerdict:
    """Positivity from a Bartnik mass value, with ``lam = 2 m_B / r_o``.

    The default verdict uses the stricter ``(1+lam)^-1`` threshold; the
    ``(1+lam)^-1/2`` one is reported as the alternative.
    """
    z = _zeta_value(zeta)
    if not bartnik_bound > 0:
        raise AdmissibilityError("bartnik_nonpositive", "Bartnik mass input must be positive")
    if not r_o > 0:
        raise ValueError("r_o must be positive")
    lam = 2.0 * bartnik_bound / r_o
    strict, loose = thm14_thresholds(lam)
    return PositivityVerdict(z < strict, strict, z, loose, z < loose)


# ---------------------------------------------------------------------------
# Hyperbolic bounds
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HyperbolicBounds:
    kappa: float
    tau: float
    xi: float
    theta_kappa: Optional[float]
    hawking: float  # hyperbolic Hawking mass
    bartnik_upper: float
    bartnik_upper_weak: float
    nonnegativity: float  # hawking + exact increment, expected >= 0
    penrose_test: Optional[bool] = None  # nonnegativity >= r_h / 2
    r_h: Optional[float] = None

    @property
    def ordered(self) -> bool:
        return self.bartnik_upper <= self.bartnik_upper_weak * (1 + 1e-14) + 1e-300


def hyperbolic_increment(r_o: float, kappa: float, tau: float, xi: float) -> tuple[float, float]:
    """Exact and weakened upper bounds for ``m_B^H - m_H^H``."""
    q = kappa**2 * r_o**2
    g = 1.0 + 1.5 * tau * xi
    exact = 0.5 * r_o * (q * g * g + g ** (2.0 / 3.0) - q - 1.0)
    weak = 0.5 * r_o * (3.0 * q + 1.0) * (1.0 + 0.75 * tau * xi) * tau * xi
    return exact, weak


def theorem15_bounds(
    g: AxisymMetricSpec,
    H: MeanCurvatureSpec,
    kappa: float,
    xi: Union[XiResult, float],
    horizon: Optional[HorizonSpec] = None,
) -> HyperbolicBounds:
    r_o = g.r_o
    tau = H.tau(r_o)
    if isinstance(xi, XiResult):
        xv, tk = xi.xi, xi.theta_kappa
    else:
        xv, tk = float(xi), None
    if not xv >= 0:
        raise ValueError("xi must be nonnegative")
    m_HH = hyperbolic_hawking_mass(g, H, kappa)
    exact, weak = hyperbolic_increment(r_o, kappa, tau, xv)
    total = m_HH + exact
    test = None if horizon is None else total >= 0.5 * horizon.r_h
    return HyperbolicBounds(
        kappa, tau, xv, tk, m_HH, total, weak + m_HH, total, test,
        None if horizon is None else horizon.r_h,
    )


@dataclass(frozen=True)
class XiEstimate:
    value: float
    case: str  # "curvature_nonpositive" | "curvature_positive"
    result: XiResult
    certified: str = "upper_bound"


def hyperbolic_xi(
    g: AxisymMetricSpec,
    tau: float,
    kappa: float,
    family: FamilySpec = "linear",
    n_t: int = DEFAULT_T_SAMPLES,
    n_x: int = DEFAULT_NODES,
    threads: int = 1,
) -> XiEstimate:
    """Smallest ``xi`` over the family.

    With ``inf K <= 0`` this is ``zeta_{g,kappa}``; otherwise the root of the
    scalar equation for each member, minimized.
    """
    if surface_data(g, n_x).K_min <= 0.0:
        z = zeta_kappa_upper_bound(g, kappa, family, n_t, n_x, threads)
        res = XiResult(z.value, 0.0, "zeta_kappa", lower_bound=z.value)
        return XiEstimate(z.value, "curvature_nonpositive", res)
    cands = evaluate_family(g, family, n_t, n_x, threads)
    floor = -3.0 * kappa**2 * g.r_o**2
    results = [
        xi_root(c.constants.alpha, c.constants.beta, tau, kappa, g.r_o)
        for c in cands
        if c.constants.beta > floor
    ]
    if not results:
        raise AdmissibilityError("curvature_floor", "no path in the family keeps K > -3 kappa^2")
    best = min(results, key=lambda r: r.xi)
    return XiEstimate(best.xi, "curvature_positive", best)


# ---------------------------------------------------------------------------
# Comparison with the earlier bound
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CCMMComparison:
    value: Optional[float]
    theorem13: Optional[float] = None

    @property
    def defined(self) -> bool:
        return self.value is not None

    @property
    def smaller(self) -> Optional[str]:
        if self.value is None or self.theorem13 is None:
            return None
        return "theorem13" if self.theorem13 <= self.value else "ccmm"


def ccmm_comparison(
    alpha: float, beta: float, tau: float, m_H: float, theorem13: Optional[float] = None
) -> CCMMComparison:
    """``sqrt(alpha / (beta - (1+alpha) tau^2)) tau m_H + m_H`` when ``tau^2 < beta/(1+alpha)``."""
    if not (beta > 0 and tau * tau < beta / (1.0 + alpha)):
        return CCMMComparison(None, theorem13)
    val = math.sqrt(alpha / (beta - (1.0 + alpha) * tau * tau)) * tau * m_H + m_H
    return CCMMComparison(val, theorem13)


# ---------------------------------------------------------------------------
# Full report
# ---------------------------------------------------------------------------

@dataclass
class MassReport:
    r_o: float
    H_o: float
    tau: float
    pipeline: str
    zeta: dict
    flat: Optional[FlatBounds] = None
    thm12: Optional[PositivityVerdict] = None
    thm14: Optional[PositivityVerdict] = None
    ccmm: Optional[CCMMComparison] = None
    hyperbolic: Optional[HyperbolicBounds] = None
    xi: Optional[dict] = None
    brown_york: Optional[dict] = None
    settings: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        L = "length"
        inv = "length^-1"

        def q(v, units):
            return {"value": v, "units": units}

        out: dict = {
            "schema_version": SCHEMA_VERSION,
            "pipeline": self.pipeline,
            "r_o": q(self.r_o, L),
            "H_o": q(self.H_o, inv),
            "tau": self.tau,
            "zeta_estimate": self.zeta,
        }
        if self.flat is not None:
            f = self.flat
            out["flat"] = {
                "theta": f.theta,
                "theta_residual": f.theta_residual,
                "hawking_mass": q(f.hawking, L),
                "bartnik_upper_bound": q(f.bartnik_upper, L),
                "bartnik_upper_bound_weak": q(f.bartnik_upper_weak, L),
                "bartnik_upper_bound_ratio_form": q(f.bartnik_upper_ratio_form, L),
                "hawking_lower_bound": q(f.hawking_lower, L),
                "tau_le_theta": f.tau_le_theta,
                "horizon_inequality": f.horizon_inequality,
                "r_h": None if f.r_h is None else q(f.r_h, L),
            }
        for name, v in (("positivity_horizon", self.thm12), ("positivity_bartnik", self.thm14)):
            if v is not None:
                out[name] = asdict(v)
        if self.ccmm is not None:
            out["ccmm"] = {
                "defined": self.ccmm.defined,
                "value": None if self.ccmm.value is None else q(self.ccmm.value, L),
                "smaller": self.ccmm.smaller,
            }
        if self.hyperbolic is not None:
            h = self.hyperbolic
            out["hyperbolic"] = {
                "kappa": q(h.kappa, inv),
                "xi": h.xi,
                "theta_kappa": h.theta_kappa,
                "xi_estimate": self.xi,
                "hyperbolic_hawking_mass": q(h.hawking, L),
                "bartnik_upper_bound": q(h.bartnik_upper, L),
                "bartnik_upper_bound_weak": q(h.bartnik_upper_weak, L),
                "bounds_ordered": h.ordered,
                "nonnegativity_check": q(h.nonnegativity, L),
                "nonnegativity_holds": h.nonnegativity >= 0.0,
                "penrose_test": h.penrose_test,
            }
        if self.brown_york is not None:
            out["brown_york"] = self.brown_york
        out["settings"] = self.settings
        return out


def _zeta_dict(z: ZetaEstimate) -> dict:
    c = z.best.constants
    return {
        "value": z.value,
        "kind": z.kind,
        "certified": z.certified,
        "family": z.family,
        "alpha": c.alpha,
        "beta": c.beta,
        "reparam_c": z.best.path.c,
    }


def build_report(
    g: AxisymMetricSpec,
    H: MeanCurvatureSpec,
    pipeline: str = "flat",
    kappa: float = 0.0,
    horizon: Optional[HorizonSpec] = None,
    family: FamilySpec = "linear",
    n_t: int = DEFAULT_T_SAMPLES,
    n_x: int = DEFAULT_NODES,
    threads: int = 1,
    with_brown_york: bool = False,
) -> MassReport:
    """Run the path, root and bound stages for one surface.

    Raises :class:`AdmissibilityError` when the pipeline's curvature
    hypothesis fails for every path in the family.
    """
    r_o = g.r_o
    tau = H.tau(r_o)
    settings = {"family": family, "n_t": n_t, "n_x": n_x}
    if pipeline == "flat":
        z = zeta_upper_bound(g, family, n_t, n_x, threads)
        flat = theorem13_bounds(g, H, z, horizon)
        thm12 = None
        if horizon is not None and horizon.r_h <= r_o:
            thm12 = positivity_thm12(z, horizon.r_h, r_o)
        thm14 = positivity_thm14(z, flat.bartnik_upper, r_o) if flat.bartnik_upper > 0 else None
        c = z.best.constants
        ccmm = ccmm_comparison(c.alpha, c.beta, tau, flat.hawking, flat.bartnik_upper)
        rep = MassReport(r_o, H.H_o, tau, pipeline, _zeta_dict(z), flat, thm12, thm14, ccmm, settings=settings)
    elif pipeline == "hyperbolic":
        if not kappa > 0:
            raise ValueError("hyperbolic pipeline needs kappa > 0")
        est = hyperbolic_xi(g, tau, kappa, family, n_t, n_x, threads)
        hb = theorem15_bounds(g, H, kappa, est.result, horizon)
        zk = zeta_kappa_upper_bound(g, kappa, family, n_t, n_x, threads)
        xi_info = {
            "value": est.value,
            "case": est.case,
            "branch": est.result.branch,
            "residual": est.result.residual,
            "certified": est.certified,
        }
        rep = MassReport(r_o, H.H_o, tau, pipeline, _zeta_dict(zk), hyperbolic=hb, xi=xi_info, settings=settings)
    else:
        raise ValueError(f"unknown pipeline {pipeline!r}")
    if with_brown_york:
        by = brown_york_mass(g, H, n_x)
        rep.brown_york = {
            "mass": {"value": by.mass, "units": "length"},
            "minkowski_term": {"value": by.minkowski_term, "units": "length"},
            "tau_term": {"value": by.tau_term, "units": "length"},
            "identity_residual": by.residual,
        }
    return rep
