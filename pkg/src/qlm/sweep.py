"""Parameter sweeps over the scalar bound formulas, written as CSV."""

from __future__ import annotations

import csv
import io
import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Optional

from .config import ConfigError, SweepSpec
from .errors import AdmissibilityError
from .mass_bounds import ccmm_comparison, hyperbolic_increment, positivity_thm12, positivity_thm14
from .roots import theta_root, xi_root

QUANTITIES = (
    "alpha",
    "beta",
    "theta",
    "hawking_mass",
    "bartnik_upper",
    "bartnik_upper_weak",
    "hawking_lower",
    "horizon_inequality",
    "positivity_horizon",
    "positivity_bartnik",
    "ccmm",
    "xi",
    "hyperbolic_bartnik_upper",
)


def evaluate_cell(point: dict, base: dict) -> dict:
    """All sweep quantities at one parameter point; raises on inadmissible input.

    Sweeping ``zeta`` fixes ``beta`` from the base and sets ``alpha = 2 beta zeta^2``.
    """
    r_o = float(base.get("r_o", 1.0))
    tau = float(point.get("tau", base.get("tau", 0.0)))
    beta = float(base.get("beta", 1.0))
    if "zeta" in point or "zeta" in base:
        zeta = float(point.get("zeta", base.get("zeta")))
        if not beta > 0:
            raise AdmissibilityError("beta_nonpositive")
        alpha = 2.0 * beta * zeta * zeta
    else:
        alpha = float(base.get("alpha", 0.0))
        if not beta > 0:
            raise AdmissibilityError("beta_nonpositive")
        zeta = math.sqrt(alpha / (2.0 * beta))
    kr = float(point.get("kappa_r_o", base.get("kappa_r_o", 0.0)))
    rh = point.get("rh_over_r_o", base.get("rh_over_r_o"))
    rh = None if rh is None else float(rh)

    theta = theta_root(tau, zeta).theta
    m_H = 0.5 * r_o * (1.0 - tau * tau)
    bound = 0.5 * r_o * (theta * theta - tau * tau)
    out: dict = {q: None for q in QUANTITIES}
    out.update(
        alpha=alpha,
        beta=beta,
        theta=theta,
        hawking_mass=m_H,
        bartnik_upper=bound,
        bartnik_upper_weak=1.5 * r_o * (1.0 + 0.75 * tau * zeta) * tau * zeta + m_H,
    )
    if rh is None:
        out["hawking_lower"] = 0.5 * r_o * (1.0 - theta * theta)
    else:
        out["hawking_lower"] = 0.5 * r_o * (1.0 + rh - theta * theta)
        out["horizon_inequality"] = tau * tau + rh <= theta * theta
        if 0 < rh <= 1:
            out["positivity_horizon"] = positivity_thm12(zeta, rh * r_o, r_o).verdict
    if bound > 0:
        out["positivity_bartnik"] = positivity_thm14(zeta, bound, r_o).verdict
    out["ccmm"] = ccmm_comparison(alpha, beta, tau, m_H).value
    if kr > 0:
        kappa = kr / r_o
        xi = xi_root(alpha, beta, tau, kappa, r_o).xi
        exact, _ = hyperbolic_increment(r_o, kappa, tau, xi)
        out["xi"] = xi
        out["hyperbolic_bartnik_upper"] = exact + 0.5 * r_o * (1.0 + kr * kr - tau * tau)
    return out


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    return format(float(v), ".17g")


def run_sweep(spec: SweepSpec, threads: int = 1) -> str:
    """CSV text; rows in lexicographic order of axis indices."""
    quantities = spec.quantities or QUANTITIES
    bad = [q for q in quantities if q not in QUANTITIES]
    if bad:
        raise ConfigError(f"unknown quantities {bad}")
    names = [a.name for a in spec.axes]
    points = [dict(zip(names, combo)) for combo in itertools.product(*(a.values for a in spec.axes))]

    def cell(p):
        try:
            return evaluate_cell(p, spec.base), ""
        except AdmissibilityError as exc:
            return None, exc.reason
        except ValueError as exc:
            return None, f"invalid: {exc}"

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(cell, points))
    else:
        results = [cell(p) for p in points]

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(names + list(quantities) + ["reason"])
    for p, (vals, reason) in zip(points, results):
        row = [_fmt(p[n]) for n in names]
        row += [_fmt(None if vals is None else vals[q]) for q in quantities]
        w.writerow(row + [reason])
    return buf.getvalue()
