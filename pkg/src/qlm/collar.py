"""Collar extensions ``A^2 dt^2 + r_o^-2 u_m(A k t)^2 g(t)`` and their checks.

The scalar curvature of the collar, in terms of chart quantities along the
path, is

    R = 2 u^-2 (r_o^2 K_{g(t)} - k^2 (1 + 3 kappa^2 u^2)) - |g'|^2 / (4 A^2),

with ``u`` evaluated at ``s = A k t``.  ``kappa = 0`` is the Schwarzschild
(flat) pipeline, whose floor is ``R >= 0``; ``kappa > 0`` uses
AdS-Schwarzschild warps and the floor ``R >= -6 kappa^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import AdmissibilityError
from .metric_paths import DEFAULT_T_SAMPLES, PathConstants, TraceFreePath, path_constants
from .roots import solve_bracketed, theta_root, xi_root
from .sphere_metrics import DEFAULT_NODES, AxisymMetricSpec, MeanCurvatureSpec
from .warp_odes import WarpFunction, implicit_flat_solution, radicand

R_TOL = 1e-10
DEFAULT_M_SEQUENCE = tuple(-(10.0**j) for j in range(2, 9))


def warp_constant(tau: float, m: float, kappa: float, r_o: float) -> float:
    """``k = tau / sqrt(1 - 2m/r_o + kappa^2 r_o^2)``, fixing ``H_0 = H_o``."""
    F = float(radicand(r_o, m, kappa))
    if not F > 0:
        raise AdmissibilityError("radicand", "1 - 2m/r_o + kappa^2 r_o^2 must be positive")
    return tau / math.sqrt(F)


# ---------------------------------------------------------------------------
# Choice of A
# ---------------------------------------------------------------------------

FLAT = "flat"
HYP_BETA_POSITIVE = "hyperbolic_beta_positive"
HYP_BETA_NONPOSITIVE = "hyperbolic_beta_nonpositive"
DEGENERATE = "round_path"


@dataclass(frozen=True)
class AChoice:
    """Optimal ``A_o`` with the residual of its defining equation and bracket."""

    A: float
    residual: float
    lower: float
    upper: float
    branch: str
    warp: WarpFunction

    @property
    def in_bracket(self) -> bool:
        return self.lower * (1 - 1e-12) <= self.A <= self.upper * (1 + 1e-12)


def _flat_defect(c: PathConstants, k: float, A: float, u: float) -> tuple[float, float]:
    """Value and scale of ``beta - k^2 - (alpha/2) A^-2 u^2``."""
    a = c.beta - k * k
    b = 0.5 * c.alpha * u * u / (A * A)
    return a - b, abs(a) + b


def choose_A_flat(consts: PathConstants, warp: WarpFunction, k: float) -> AChoice:
    """Smallest ``A`` with ``beta - k^2 - (alpha/2) A^-2 u_m(A k)^2 = 0``.

    With ``s = A k`` this is ``u_m(s)/s = k^-1 sqrt(2 (beta - k^2)/alpha)``;
    for ``m < 0`` the left side decreases strictly from infinity to 1, so the
    root is unique.  A round path (``alpha = 0``) has no root: every ``A``
    works and ``A_o = 0`` is returned with branch ``"round_path"``.
    """
    if warp.kappa != 0.0:
        raise ValueError("flat choice needs a Schwarzschild warp")
    if not warp.m < 0:
        raise AdmissibilityError("eq-bak", "flat collar needs m < 0")
    if not k > 0:
        raise ValueError("k must be positive")
    alpha, beta, r_o = consts.alpha, consts.beta, warp.r_o
    if not beta > (1.0 + 0.5 * alpha) * k * k:
        raise AdmissibilityError(
            "eq-bak", f"need beta > (1 + alpha/2) k^2; beta={beta!r}, k^2={k * k!r}"
        )
    if alpha == 0.0:
        return AChoice(0.0, 0.0, 0.0, math.inf, DEGENERATE, warp)

    target = math.sqrt(2.0 * (beta - k * k) / alpha) / k
    slope0 = math.sqrt(1.0 - 2.0 * warp.m / r_o)
    # 1 <= u' <= slope0 gives r_o/s + 1 <= u/s <= r_o/s + slope0
    s_lo = r_o / (target - 1.0)
    if warp.uses_closed_form:
        # parametrize by u: S(u) is explicit, so no nested inversion
        ratio = lambda u: u / implicit_flat_solution(warp.m, r_o, u) - target
        u_lo = r_o + s_lo
        u_hi = r_o + slope0 * (r_o / (target - slope0)) if target > slope0 else 2.0 * u_lo
        if target <= slope0:
            while ratio(u_hi) > 0:
                u_hi = r_o + 2.0 * (u_hi - r_o)
        u = solve_bracketed(ratio, u_lo, u_hi)
        s = implicit_flat_solution(warp.m, r_o, u)
    else:
        ratio = lambda s: warp.u(s) / s - target
        s_hi = r_o / (target - slope0) if target > slope0 else warp.s_max
        s = solve_bracketed(ratio, s_lo, min(s_hi, warp.s_max))
        u = float(warp.u(s))
    A = s / k
    val, scale = _flat_defect(consts, k, A, u)
    lower = r_o * math.sqrt(0.5 * alpha / (beta - k * k))
    return AChoice(A, abs(val) / scale, lower, math.inf, FLAT, warp)


def _hyp_defect(c: PathConstants, k: float, kappa: float, A: float, u: float):
    a = c.beta - k * k
    b = 3.0 * kappa**2 * (1.0 - k * k) * u * u
    d = 0.5 * c.alpha * u * u / (A * A)
    return a + b - d, abs(a) + b + d


def choose_A_hyperbolic(consts: PathConstants, m: float, k: float, kappa: float, r_o: float) -> AChoice:
    """``A_o`` for the AdS-Schwarzschild collar with floor ``R >= -6 kappa^2``.

    ``beta > 0``: unique root of the increasing function
    ``(beta - k^2) + [3 kappa^2 (1 - k^2) - alpha/(2 A^2)] u_m(A k)^2``.
    ``beta <= 0``: closed form obtained from ``u_m >= r_o``.
    """
    if not kappa > 0:
        raise ValueError("kappa must be positive")
    alpha, beta = consts.alpha, consts.beta
    q = 3.0 * kappa**2 * r_o**2
    if beta <= 0.0:
        D = beta + q - (1.0 + q) * k * k
        if not D > 0:
            raise AdmissibilityError(
                "beta_nonpositive_branch", "need beta + 3 kappa^2 r_o^2 - (1 + 3 kappa^2 r_o^2) k^2 > 0"
            )
        A = r_o * math.sqrt(0.5 * alpha / D)
        warp = WarpFunction(m, kappa, r_o, s_max=max(A * k, 1e-300))
        return AChoice(A, 0.0, A, A, HYP_BETA_NONPOSITIVE, warp)

    if not beta > k * k:
        raise AdmissibilityError("beta_positive_branch", "need beta > k^2")
    if not k < 1:
        raise AdmissibilityError("beta_positive_branch", "need k < 1")
    if alpha == 0.0:
        warp = WarpFunction(m, kappa, r_o, s_max=1.0)
        return AChoice(0.0, 0.0, 0.0, math.inf, DEGENERATE, warp)
    lower = r_o * math.sqrt(alpha / (2.0 * (beta - k * k) + 2.0 * q * (1.0 - k * k)))
    upper = math.sqrt(alpha / (6.0 * kappa**2 * (1.0 - k * k)))
    warp = WarpFunction(m, kappa, r_o, s_max=upper * k)
    f = lambda A: _hyp_defect(consts, k, kappa, A, float(warp.u(A * k)))[0]
    A = solve_bracketed(f, lower, upper)
    val, scale = _hyp_defect(consts, k, kappa, A, float(warp.u(A * k)))
    return AChoice(A, abs(val) / scale, lower, upper, HYP_BETA_POSITIVE, warp)


# ---------------------------------------------------------------------------
# Collar metric
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CollarMetric:
    path: TraceFreePath
    warp: WarpFunction
    A: float
    k: float
    n_t: int = DEFAULT_T_SAMPLES
    n_x: int = DEFAULT_NODES

    def __post_init__(self):
        if not (self.A > 0 and self.k > 0):
            raise ValueError("A and k must be positive")
        if not self.warp.uses_closed_form and self.A * self.k > self.warp.s_max * (1 + 1e-12):
            raise ValueError("warp not integrated far enough for this A")

    @property
    def kappa(self) -> float:
        return self.warp.kappa

    @property
    def r_o(self) -> float:
        return self.path.metric.r_o

    @property
    def pipeline(self) -> str:
        return "flat" if self.kappa == 0.0 else "hyperbolic"

    @property
    def floor(self) -> float:
        return -6.0 * self.kappa**2 if self.kappa else 0.0

    @property
    def tau(self) -> float:
        return self.k * math.sqrt(float(radicand(self.r_o, self.warp.m, self.kappa)))

    def u_at(self, t):
        return self.warp.u(self.A * self.k * np.asarray(t, dtype=float))

    def scalar_curvature(self, t, x):
        """Pointwise ``R`` at broadcastable ``(t, x)``."""
        t, x = np.broadcast_arrays(np.asarray(t, float), np.asarray(x, float))
        u = self.u_at(t)
        K = self.path.curvature_scaled(t, x)
        v2 = self.path.velocity_norm_sq(t, x)
        k2 = self.k**2
        return 2.0 * (K - k2 * (1.0 + 3.0 * self.kappa**2 * u * u)) / (u * u) - 0.25 * v2 / self.A**2

    def refined(self, factor: int = 2) -> "CollarMetric":
        """Same collar on a grid with ``factor`` times the spacing refinement (nested)."""
        return CollarMetric(
            self.path, self.warp, self.A, self.k,
            factor * (self.n_t - 1) + 1, factor * (self.n_x - 1) + 1,
        )


@dataclass(frozen=True)
class CurvatureField:
    t: np.ndarray
    x: np.ndarray
    values: Optional[np.ndarray]
    minimum: float
    argmin: tuple[float, float]
    floor: float
    interior_minimum: float

    @property
    def certified(self) -> bool:
        return self.minimum >= self.floor - R_TOL


def scalar_curvature_field(c: CollarMetric, keep_field: bool = False) -> CurvatureField:
    """``R`` on the ``n_t x n_x`` grid (Chebyshev-Lobatto in x)."""
    from .sphere_metrics import lobatto_nodes

    t = np.linspace(0.0, 1.0, c.n_t)
    x = lobatto_nodes(c.n_x)
    u = np.asarray(c.u_at(t), dtype=float)
    T, X = np.meshgrid(t, x, indexing="ij")
    K = c.path.curvature_scaled(T, X)
    v2 = c.path.velocity_norm_sq(T, X)
    U = u[:, None]
    R = 2.0 * (K - c.k**2 * (1.0 + 3.0 * c.kappa**2 * U * U)) / (U * U) - 0.25 * v2 / c.A**2
    i = np.unravel_index(np.argmin(R), R.shape)
    inner = R[1:-1, 1:-1] if R.shape[0] > 2 and R.shape[1] > 2 else R
    return CurvatureField(
        t, x, R if keep_field else None, float(R[i]), (float(t[i[0]]), float(x[i[1]])),
        c.floor, float(inner.min()),
    )


# ---------------------------------------------------------------------------
# Slices
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SliceReport:
    t: float
    u: float
    area: float
    mean_curvature: float
    hawking_mass: float  # from area and mean curvature
    hawking_mass_formula: float  # closed form in u
    min_R: float

    @property
    def mass_discrepancy(self) -> float:
        return abs(self.hawking_mass - self.hawking_mass_formula)


def slice_report(c: CollarMetric, t: float) -> SliceReport:
    """Area, mean curvature, Hawking mass (two ways) and ``min R`` on ``Sigma_t``."""
    from .sphere_metrics import lobatto_nodes

    if not 0.0 <= t <= 1.0:
        raise ValueError("t must lie in [0, 1]")
    kappa, r_o, k = c.kappa, c.r_o, c.k
    u = float(c.u_at(t))
    du = float(c.warp.du(c.A * k * t))
    area = 4.0 * math.pi * u * u
    H = 2.0 * k * du / u
    radius = math.sqrt(area / (4.0 * math.pi))
    # (|S|/16 pi)^(1/2) (1 - |S| H^2 / 16 pi + kappa^2 |S| / 4 pi)
    direct = 0.5 * radius * (1.0 - area * H * H / (16.0 * math.pi) + kappa**2 * area / (4.0 * math.pi))
    tau = c.tau
    m_H0 = 0.5 * r_o * (1.0 + kappa**2 * r_o**2 - tau * tau)
    formula = 0.5 * (u - r_o) * (1.0 - k * k) + 0.5 * kappa**2 * (1.0 - k * k) * (u**3 - r_o**3) + m_H0
    x = lobatto_nodes(c.n_x)
    R = c.scalar_curvature(np.full_like(x, t), x)
    return SliceReport(t, u, area, H, direct, formula, float(np.min(R)))


# ---------------------------------------------------------------------------
# Assembly
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CollarBuild:
    collar: CollarMetric
    choice: AChoice
    constants: PathConstants


def assemble_collar(
    g: AxisymMetricSpec,
    H: MeanCurvatureSpec,
    m: float,
    kappa: float = 0.0,
    path: Optional[TraceFreePath] = None,
    A: Optional[float] = None,
    n_t: int = DEFAULT_T_SAMPLES,
    n_x: int = DEFAULT_NODES,
) -> CollarBuild:
    """Build the collar with ``A = A_o`` unless ``A`` is given.

    A round path leaves ``A`` free; ``r_o`` is used then.
    """
    path = path or TraceFreePath(g, n_t=n_t, n_x=n_x)
    consts = path_constants(path)
    r_o, tau = g.r_o, H.tau(g.r_o)
    k = warp_constant(tau, m, kappa, r_o)
    if kappa == 0.0:
        choice = choose_A_flat(consts, WarpFunction(m, 0.0, r_o), k)
    else:
        choice = choose_A_hyperbolic(consts, m, k, kappa, r_o)
    A_use = A if A is not None else (choice.A if choice.A > 0 else r_o)
    warp = choice.warp
    if not warp.uses_closed_form and A_use * k > warp.s_max:
        warp = WarpFunction(m, kappa, r_o, s_max=A_use * k)
    return CollarBuild(CollarMetric(path, warp, A_use, k, n_t, n_x), choice, consts)


# ---------------------------------------------------------------------------
# m -> -infinity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LimitRow:
    m: float
    k: float
    A_o: float
    u_end: float  # u_m(A_o k)
    mass_end: float  # Hawking mass of Sigma_1
    dev_u: float
    dev_A: float
    dev_mass: float


@dataclass(frozen=True)
class LimitStudy:
    pipeline: str
    u_limit: float
    A_limit: float
    mass_limit: float
    rows: tuple[LimitRow, ...] = field(default_factory=tuple)

    def monotone(self, attr: str = "dev_u", slack: float = 0.0) -> bool:
        d = [getattr(r, attr) for r in self.rows]
        return all(b <= a + slack for a, b in zip(d, d[1:]))


def _rel(value: float, ref: float) -> float:
    return abs(value - ref) / abs(ref) if ref != 0.0 else abs(value)


def limit_study(
    consts: PathConstants,
    tau: float,
    r_o: float,
    kappa: float = 0.0,
    ms: Sequence[float] = DEFAULT_M_SEQUENCE,
) -> LimitStudy:
    """Collar quantities along ``m -> -infinity`` against their predicted limits."""
    alpha, beta = consts.alpha, consts.beta
    if kappa == 0.0:
        theta = theta_root(tau, consts.zeta).theta
        u_lim = r_o * theta**2
        A_lim = u_lim * math.sqrt(alpha / (2.0 * beta))
        mass_lim = 0.5 * r_o * (theta**2 - tau**2)
        pipeline = "flat"
    else:
        xi = xi_root(alpha, beta, tau, kappa, r_o).xi
        g = 1.0 + 1.5 * tau * xi
        u_lim = r_o * g ** (2.0 / 3.0)
        A_lim = r_o * xi
        q = kappa**2 * r_o**2
        mass_lim = 0.5 * r_o * (q * g * g + g ** (2.0 / 3.0) - q - 1.0) + 0.5 * r_o * (1.0 + q - tau * tau)
        pipeline = "hyperbolic"

    rows = []
    for m in ms:
        if not m < 0:
            raise ValueError("m-sequence must be negative")
        k = warp_constant(tau, m, kappa, r_o)
        if kappa == 0.0:
            choice = choose_A_flat(consts, WarpFunction(m, 0.0, r_o), k)
        else:
            choice = choose_A_hyperbolic(consts, m, k, kappa, r_o)
        A = choice.A
        u = float(choice.warp.u(A * k)) if A > 0 else r_o
        mass = 0.5 * (u - r_o) * (1.0 - k * k) + 0.5 * kappa**2 * (1.0 - k * k) * (u**3 - r_o**3)
        mass += 0.5 * r_o * (1.0 + kappa**2 * r_o**2 - tau * tau)
        rows.append(LimitRow(m, k, A, u, mass, _rel(u, u_lim), _rel(A, A_lim), _rel(mass, mass_lim)))
    return LimitStudy(pipeline, u_lim, A_lim, mass_lim, tuple(rows))
