"""Trace-free paths from a metric to the round metric, and the constants they carry.

In the fixed-area-form chart a path ``w(t, x)`` between the input profile and
``w = 1`` keeps the area form constant, so ``tr_{g(t)} g'(t) = 0`` holds
automatically.  Paths here are

    w(t, x) = 1 + (1 - sigma(t)) (w(x) - 1),
    sigma_c(t) = expm1(c t) / expm1(c)     (sigma_0(t) = t),

i.e. the linear profile path under a monotone time change.  In the chart
``|g'|^2_{g(t)} = 2 (dw/dt / w)^2`` and ``r_o^2 K_{g(t)} = 1 + (1 - sigma)(r_o^2 K_g - 1)``.

Every zeta value returned here comes from a concrete path, so it bounds
the infimum over all paths from above.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from scipy.optimize import minimize

from .errors import AdmissibilityError
from .sphere_metrics import DEFAULT_NODES, AxisymMetricSpec, lobatto_nodes

DEFAULT_T_SAMPLES = 101
REPARAM_C_MAX = 1.0


@dataclass(frozen=True)
class TraceFreePath:
    """Path ``g(t)``, ``t in [0, 1]``, from ``metric`` to the round metric."""

    metric: AxisymMetricSpec
    c: float = 0.0
    n_t: int = DEFAULT_T_SAMPLES
    n_x: int = DEFAULT_NODES

    @property
    def t_grid(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n_t)

    @property
    def x_grid(self) -> np.ndarray:
        return lobatto_nodes(self.n_x)

    def sigma(self, t):
        t = np.asarray(t, dtype=float)
        if self.c == 0.0:
            return t
        return np.expm1(self.c * t) / math.expm1(self.c)

    def dsigma(self, t):
        t = np.asarray(t, dtype=float)
        if self.c == 0.0:
            return np.ones_like(t)
        return self.c * np.exp(self.c * t) / math.expm1(self.c)

    def w(self, t, x):
        t, x = np.asarray(t, float), np.asarray(x, float)
        return 1.0 + (1.0 - self.sigma(t)) * (1.0 - x * x) * self.metric.bulk(x)

    def dw_dt(self, t, x):
        t, x = np.asarray(t, float), np.asarray(x, float)
        return -self.dsigma(t) * (1.0 - x * x) * self.metric.bulk(x)

    def curvature_scaled(self, t, x):
        """``r_o^2 K_{g(t)}(x)``."""
        t, x = np.asarray(t, float), np.asarray(x, float)
        return 1.0 + (1.0 - self.sigma(t)) * (self.metric.curvature_scaled(x) - 1.0)

    def velocity_norm_sq(self, t, x):
        """``|g'(t)|^2_{g(t)} = 2 (Pdot/P)^2``, evaluated through ``w`` (finite at poles)."""
        r = self.dw_dt(t, x) / self.w(t, x)
        return 2.0 * r * r

    def trace(self, t, x):
        """``g^{ab} g'_{ab}`` in the chart.

        Evaluated from the chart components ``g_xx = r_o^2/P``,
        ``g_phiphi = r_o^2 P`` and their t-derivatives; at the poles the chart
        degenerates and the (equal) limiting value in terms of ``w`` is used.
        """
        t, x = np.broadcast_arrays(np.asarray(t, float), np.asarray(x, float))
        r2 = self.metric.r_o**2
        s = 1.0 - x * x
        P = s * self.w(t, x)
        Pdot = s * self.dw_dt(t, x)
        out = np.zeros(P.shape)
        inner = s > 0
        gxx, gpp = r2 / P[inner], r2 * P[inner]
        dgxx, dgpp = -r2 * Pdot[inner] / P[inner] ** 2, r2 * Pdot[inner]
        out[inner] = dgxx / gxx + dgpp / gpp
        pole = ~inner
        if np.any(pole):
            q = self.dw_dt(t[pole], x[pole]) / self.w(t[pole], x[pole])
            out[pole] = -q + q  # limits of the x- and phi-terms
        return out

    def is_constant(self) -> bool:
        return self.metric.is_round


@dataclass(frozen=True)
class PathConstants:
    """``alpha = max |g'|^2 / 4`` and ``beta = r_o^2 min K`` over the path."""

    alpha: float
    beta: float

    @property
    def zeta(self) -> float:
        """``sqrt(alpha / 2 beta)``; needs ``beta > 0``."""
        if not self.beta > 0:
            raise AdmissibilityError("beta_nonpositive", "zeta needs beta > 0")
        return math.sqrt(self.alpha / (2.0 * self.beta))

    def zeta_kappa(self, kappa: float, r_o: float) -> float:
        den = 2.0 * self.beta + 6.0 * kappa**2 * r_o**2
        if not den > 0:
            raise AdmissibilityError("curvature_floor", "need beta > -3 kappa^2 r_o^2")
        return math.sqrt(self.alpha / den)


def _refine(fun, t0, x0):
    res = minimize(
        lambda p: float(fun(p[0], p[1])),
        x0=[t0, x0],
        method="L-BFGS-B",
        bounds=[(0.0, 1.0), (-1.0, 1.0)],
        options={"ftol": 1e-15, "gtol": 1e-12},
    )
    return float(res.fun)


def path_constants(path: TraceFreePath, refine: bool = True) -> PathConstants:
    """Dense-grid extrema of ``|g'|^2/4`` and ``r_o^2 K`` followed by local refinement."""
    if path.is_constant():
        return PathConstants(0.0, 1.0)
    T, X = np.meshgrid(path.t_grid, path.x_grid, indexing="ij")
    half_sq = 0.25 * path.velocity_norm_sq(T, X)
    K = path.curvature_scaled(T, X)
    ia = np.unravel_index(np.argmax(half_sq), half_sq.shape)
    ib = np.unravel_index(np.argmin(K), K.shape)
    alpha = float(half_sq[ia])
    beta = float(K[ib])
    if refine:
        alpha = max(alpha, -_refine(lambda t, x: -0.25 * path.velocity_norm_sq(t, x), T[ia], X[ia]))
        beta = min(beta, _refine(path.curvature_scaled, T[ib], X[ib]))
    return PathConstants(alpha, beta)


# ---------------------------------------------------------------------------
# Families and zeta estimates
# ---------------------------------------------------------------------------

FamilySpec = Union[str, dict]


def family_members(family: FamilySpec = "linear") -> list[float]:
    """Reparametrization constants ``c`` of a family descriptor.

    ``"linear"`` is ``[0]``; ``{"reparam_grid": N}`` is ``c_max * j / N`` for
    ``j = -N..N``, so grids nest when one N divides the other.
    """
    if family == "linear":
        return [0.0]
    if isinstance(family, dict) and "reparam_grid" in family:
        N = int(family["reparam_grid"])
        if N < 1:
            raise ValueError("reparam_grid must be >= 1")
        return [REPARAM_C_MAX * j / N for j in range(-N, N + 1)]
    raise ValueError(f"unknown path family {family!r}")


@dataclass(frozen=True)
class PathCandidate:
    path: TraceFreePath
    constants: PathConstants


def evaluate_family(
    g: AxisymMetricSpec,
    family: FamilySpec = "linear",
    n_t: int = DEFAULT_T_SAMPLES,
    n_x: int = DEFAULT_NODES,
    threads: int = 1,
) -> list[PathCandidate]:
    paths = [TraceFreePath(g, c, n_t, n_x) for c in family_members(family)]
    if threads > 1 and len(paths) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            consts = list(pool.map(path_constants, paths))
    else:
        consts = [path_constants(p) for p in paths]
    return [PathCandidate(p, k) for p, k in zip(paths, consts)]


@dataclass(frozen=True)
class ZetaEstimate:
    """Upper bound for the zeta infimum, realized by ``best``."""

    value: float
    kind: str
    family: FamilySpec
    best: PathCandidate
    kappa: Optional[float] = None
    certified: str = "upper_bound"
    candidates: tuple = field(default=(), repr=False)


def zeta_upper_bound(
    g: AxisymMetricSpec,
    family: FamilySpec = "linear",
    n_t: int = DEFAULT_T_SAMPLES,
    n_x: int = DEFAULT_NODES,
    threads: int = 1,
) -> ZetaEstimate:
    """Smallest ``sqrt(alpha / 2 beta)`` over admissible (``beta > 0``) members."""
    cands = evaluate_family(g, family, n_t, n_x, threads)
    ok = [c for c in cands if c.constants.beta > 0]
    if not ok:
        raise AdmissibilityError(
            "beta_nonpositive", "no path in the family keeps the Gauss curvature positive"
        )
    best = min(ok, key=lambda c: c.constants.zeta)
    return ZetaEstimate(best.constants.zeta, "flat", family, best, candidates=tuple(ok))


def zeta_kappa_upper_bound(
    g: AxisymMetricSpec,
    kappa: float,
    family: FamilySpec = "linear",
    n_t: int = DEFAULT_T_SAMPLES,
    n_x: int = DEFAULT_NODES,
    threads: int = 1,
) -> ZetaEstimate:
    """Smallest ``sqrt(alpha / (2 beta + 6 kappa^2 r_o^2))`` over admissible members."""
    if not kappa >= 0:
        raise ValueError("kappa must be nonnegative")
    cands = evaluate_family(g, family, n_t, n_x, threads)
    floor = -3.0 * kappa**2 * g.r_o**2
    ok = [c for c in cands if c.constants.beta > floor]
    if not ok:
        raise AdmissibilityError(
            "curvature_floor", "no path in the family keeps K > -3 kappa^2"
        )
    best = min(ok, key=lambda c: c.constants.zeta_kappa(kappa, g.r_o))
    return ZetaEstimate(
        best.constants.zeta_kappa(kappa, g.r_o), "hyperbolic", family, best, kappa, candidates=tuple(ok)
    )
