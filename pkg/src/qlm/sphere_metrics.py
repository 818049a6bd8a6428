"""Axisymmetric metrics on the 2-sphere in the fixed-area-form chart.

A metric is written ``g = r_o^2 [ dx^2 / P(x) + P(x) dphi^2 ]`` with
``P(x) = (1 - x^2) w(x)`` on ``x in [-1, 1]``.  The area form is
``r_o^2 dx dphi`` for every profile ``w``, so the total area is ``4 pi r_o^2``
and ``K = -P''/(2 r_o^2)``.

Internally the profile is carried as ``v = (w - 1)/(1 - x^2)`` (a Chebyshev
series).  Pole regularity ``w(+-1) = 1`` is then built in, and ``P``, ``P'``
and the embedding radicand can be evaluated near the poles without
cancellation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.polynomial import Chebyshev
from numpy.polynomial import polynomial as P_

from .errors import EmbeddingError, QLMError

DEFAULT_NODES = 257
POLE_TOL = 1e-12

_ONE_MINUS_X2 = Chebyshev([0.5, 0.0, -0.5])  # 1 - x^2 = 1/2 - T_2/2
_X = Chebyshev([0.0, 1.0])


# ---------------------------------------------------------------------------
# Nodes and quadrature
# ---------------------------------------------------------------------------

def lobatto_nodes(n: int = DEFAULT_NODES) -> np.ndarray:
    """``n`` Chebyshev-Lobatto nodes on ``[-1, 1]`` in ascending order."""
    if n < 2:
        raise ValueError("need at least two nodes")
    return -np.cos(np.pi * np.arange(n) / (n - 1))


def one_minus_x2(n: int = DEFAULT_NODES) -> np.ndarray:
    # sin^2 avoids cancellation next to the poles
    return np.sin(np.pi * np.arange(n) / (n - 1)) ** 2


def clenshaw_curtis_weights(n: int = DEFAULT_NODES) -> np.ndarray:
    """Clenshaw-Curtis weights matching :func:`lobatto_nodes` (n points)."""
    N = n - 1
    theta = np.pi * np.arange(n) / N
    w = np.zeros(n)
    v = np.ones(N - 1)
    interior = theta[1:-1]
    if N % 2 == 0:
        w[0] = w[N] = 1.0 / (N * N - 1)
        for k in range(1, N // 2):
            v -= 2.0 * np.cos(2 * k * interior) / (4 * k * k - 1)
        v -= np.cos(N * interior) / (N * N - 1)
    else:
        w[0] = w[N] = 1.0 / (N * N)
        for k in range(1, (N - 1) // 2 + 1):
            v -= 2.0 * np.cos(2 * k * interior) / (4 * k * k - 1)
    w[1:-1] = 2.0 * v / N
    return w


def integrate(values: np.ndarray) -> float:
    """Clenshaw-Curtis integral over ``[-1, 1]`` of samples on Lobatto nodes."""
    return float(clenshaw_curtis_weights(len(values)) @ values)


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AxisymMetricSpec:
    """Axisymmetric metric ``r_o^2 [P^-1 dx^2 + P dphi^2]`` with ``P = (1-x^2) w``.

    Build with :meth:`round`, :meth:`from_poly`, :meth:`from_samples` or
    :meth:`from_function`; ``bulk`` is the Chebyshev series of
    ``(w - 1)/(1 - x^2)``.
    """

    r_o: float
    bulk: Chebyshev

    def __post_init__(self):
        if not (math.isfinite(self.r_o) and self.r_o > 0):
            raise ValueError(f"r_o must be positive, got {self.r_o!r}")
        x = lobatto_nodes(max(DEFAULT_NODES, 4 * self.bulk.degree() + 8))
        w = self.w(x)
        if not np.all(np.isfinite(w)):
            raise QLMError("profile w is not finite")
        if np.min(w) <= 0:
            raise ValueError("profile w must be positive on [-1, 1]")

    # -- constructors -------------------------------------------------------

    @classmethod
    def round(cls, r_o: float = 1.0) -> "AxisymMetricSpec":
        return cls(r_o, Chebyshev([0.0]))

    @classmethod
    def from_poly(cls, r_o: float, coeffs: Sequence[float]) -> "AxisymMetricSpec":
        """``w(x) = sum coeffs[i] x^i``."""
        c = np.asarray(coeffs, dtype=float)
        if c.size == 0:
            raise ValueError("empty coefficient list")
        _check_poles(P_.polyval(-1.0, c), P_.polyval(1.0, c))
        c = c.copy()
        c[0] -= 1.0
        # exact polynomial division of (w - 1) by (1 - x^2)
        q, _ = P_.polydiv(c, [1.0, 0.0, -1.0])
        bulk = Chebyshev(np.polynomial.chebyshev.poly2cheb(np.atleast_1d(q))) if c.size > 2 else Chebyshev([0.0])
        return cls(float(r_o), bulk)

    @classmethod
    def from_samples(cls, r_o: float, values: Sequence[float]) -> "AxisymMetricSpec":
        """``w`` sampled on ascending Chebyshev-Lobatto nodes ``-cos(pi j/N)``."""
        w = np.asarray(values, dtype=float)
        if w.size < 3:
            raise ValueError("need at least three samples")
        _check_poles(w[0], w[-1])
        n = w.size
        if n == 3:
            v = np.array([w[1] - 1.0])
            return cls(float(r_o), Chebyshev(v))
        x = lobatto_nodes(n)[1:-1]
        v = (w[1:-1] - 1.0) / one_minus_x2(n)[1:-1]
        return cls(float(r_o), Chebyshev.fit(x, v, n - 3, domain=[-1, 1]))

    @classmethod
    def from_function(
        cls, r_o: float, fn: Callable[[np.ndarray], np.ndarray], n: int = DEFAULT_NODES
    ) -> "AxisymMetricSpec":
        """Sample a smooth profile ``w = fn(x)`` on ``n`` Lobatto nodes."""
        return cls.from_samples(r_o, fn(lobatto_nodes(n)))

    # -- profile evaluation -------------------------------------------------

    @property
    def is_round(self) -> bool:
        return bool(np.all(self.bulk.coef == 0.0))

    def w(self, x):
        x = np.asarray(x, dtype=float)
        return 1.0 + (1.0 - x * x) * self.bulk(x)

    @cached_property
    def P(self) -> Chebyshev:
        return _ONE_MINUS_X2 + _ONE_MINUS_X2 * _ONE_MINUS_X2 * self.bulk

    @cached_property
    def P2(self) -> Chebyshev:
        return self.P.deriv(2)

    def curvature_scaled(self, x):
        """``r_o^2 K`` at ``x`` (dimensionless)."""
        return -0.5 * self.P2(np.asarray(x, dtype=float))

    def scaled(self, c: float) -> "AxisymMetricSpec":
        return AxisymMetricSpec(c * self.r_o, self.bulk)


def _check_poles(w_minus, w_plus):
    if abs(w_minus - 1.0) > POLE_TOL or abs(w_plus - 1.0) > POLE_TOL:
        raise ValueError(
            f"pole regularity violated: w(-1)={w_minus!r}, w(1)={w_plus!r} (need 1)"
        )


@dataclass(frozen=True)
class MeanCurvatureSpec:
    """Constant mean curvature ``H_o > 0`` of the surface."""

    H_o: float

    def __post_init__(self):
        if not (math.isfinite(self.H_o) and self.H_o > 0):
            raise ValueError(f"H_o must be positive, got {self.H_o!r}")

    @classmethod
    def from_tau(cls, tau: float, r_o: float) -> "MeanCurvatureSpec":
        return cls(2.0 * tau / r_o)

    def tau(self, r_o: float) -> float:
        return 0.5 * r_o * self.H_o


@dataclass(frozen=True)
class HorizonSpec:
    r_h: float

    def __post_init__(self):
        if not self.r_h > 0:
            raise ValueError("r_h must be positive")

    @property
    def area(self) -> float:
        return 4.0 * math.pi * self.r_h**2


@dataclass(frozen=True)
class SurfaceData:
    area: float
    r_o: float
    K_min: float
    K_max: float
    gauss_bonnet_residual: float


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def gauss_curvature(g: AxisymMetricSpec, x):
    """``K = -P''(x) / (2 r_o^2)``."""
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1.0):
        raise ValueError("x must lie in [-1, 1]")
    K = g.curvature_scaled(x) / g.r_o**2
    if not np.all(np.isfinite(K)):
        raise QLMError("non-finite curvature")
    return K


def surface_data(g: AxisymMetricSpec, n: int = DEFAULT_NODES) -> SurfaceData:
    x = lobatto_nodes(n)
    K = gauss_curvature(g, x)
    wq = clenshaw_curtis_weights(n)
    # area form r_o^2 dx dphi
    area = 2.0 * math.pi * g.r_o**2 * float(wq.sum())
    total_K = 2.0 * math.pi * g.r_o**2 * float(wq @ K)
    return SurfaceData(
        area=area,
        r_o=g.r_o,
        K_min=float(K.min()),
        K_max=float(K.max()),
        gauss_bonnet_residual=abs(total_K - 4.0 * math.pi),
    )


def hawking_mass(g: AxisymMetricSpec, H: MeanCurvatureSpec) -> float:
    """``(r_o/2)(1 - tau^2)``: the Hawking mass of a CMC sphere."""
    tau = H.tau(g.r_o)
    return 0.5 * g.r_o * (1.0 - tau * tau)


def hyperbolic_hawking_mass(g: AxisymMetricSpec, H: MeanCurvatureSpec, kappa: float) -> float:
    if not kappa > 0:
        raise ValueError("kappa must be positive")
    tau = H.tau(g.r_o)
    return 0.5 * g.r_o * (1.0 + kappa**2 * g.r_o**2 - tau * tau)


# -- embedding as a surface of revolution -----------------------------------

@dataclass(frozen=True)
class RevolutionProfile:
    """Meridian ``(rho(x), z(x))`` of the embedded surface, sampled on ``x``."""

    x: np.ndarray
    rho: np.ndarray
    z: np.ndarray
    dz: np.ndarray
    z_series: Chebyshev


def _embedding_radicand(g: AxisymMetricSpec) -> Chebyshev:
    """``Q = (4 - P'^2)/(1 - x^2)``, expanded so that no division occurs."""
    v = g.bulk
    S = -4.0 * _X * v + _ONE_MINUS_X2 * v.deriv()
    return 4.0 + 4.0 * _X * S - _ONE_MINUS_X2 * S * S


def embed_revolution(g: AxisymMetricSpec, n: int = DEFAULT_NODES) -> RevolutionProfile:
    """Isometric embedding of a positively curved metric as a surface of revolution.

    ``rho = r_o sqrt(P)`` and ``z' = r_o sqrt(Q / (4 w))``; the meridian angle
    satisfies ``cos(psi) = P'/2``.
    """
    x = lobatto_nodes(n)
    if np.min(g.curvature_scaled(x)) <= 0:
        raise EmbeddingError("Gauss curvature is not positive")
    Q = _embedding_radicand(g)(x)
    if np.min(Q) < 0:
        raise EmbeddingError("z'^2 < 0: metric is not embeddable in this chart")
    w = g.w(x)
    dz = g.r_o * np.sqrt(Q / (4.0 * w))
    dz_series = Chebyshev.fit(x, dz, n - 1, domain=[-1, 1])
    z_series = dz_series.integ(lbnd=-1.0, k=[-g.r_o])
    rho = g.r_o * np.sqrt(np.clip(one_minus_x2(n) * w, 0.0, None))
    return RevolutionProfile(x, rho, z_series(x), dz, z_series)


def first_fundamental_form(prof: RevolutionProfile, n_check: Optional[int] = None):
    """Recompute ``(E, G)`` of the surface of revolution from ``(rho, z)``.

    Returns ``E * rho^2`` (which equals ``r_o^4`` for an isometric embedding,
    since ``E = r_o^2/P`` and ``rho^2 = r_o^2 P``) and ``G = rho^2`` on the
    interior nodes.  ``rho'`` is taken from a spectral derivative of
    ``rho^2`` and ``z'`` from the derivative of the stored ``z`` series.
    """
    x = prof.x
    n = len(x)
    rho2 = Chebyshev.fit(x, prof.rho**2, n - 1, domain=[-1, 1])
    inner = slice(1, -1)
    d_rho2 = rho2.deriv()(x[inner])
    dz = prof.z_series.deriv()(x[inner])
    r2 = prof.rho[inner] ** 2
    # E rho^2 = rho'^2 rho^2 + z'^2 rho^2 with rho' rho = (rho^2)'/2
    E_rho2 = 0.25 * d_rho2**2 + dz**2 * r2
    return x[inner], E_rho2, r2


def mean_curvature_embedded(g: AxisymMetricSpec, x) -> np.ndarray:
    """Mean curvature ``H_E`` (sum of principal curvatures) of the embedding."""
    x = np.asarray(x, dtype=float)
    Q = _embedding_radicand(g)(x)
    w = g.w(x)
    return ((-g.P2(x)) * np.sqrt(w / Q) + 0.5 * np.sqrt(Q / w)) / g.r_o


@dataclass(frozen=True)
class BrownYork:
    mass: float
    hawking: float
    minkowski_term: float
    tau_term: float

    @property
    def residual(self) -> float:
        return abs(self.mass - (self.hawking + self.minkowski_term + self.tau_term))


def brown_york_mass(
    g: AxisymMetricSpec, H: MeanCurvatureSpec, n: int = DEFAULT_NODES
) -> BrownYork:
    """Brown-York mass and its split into Hawking mass, Minkowski term, tau term."""
    prof = embed_revolution(g, n)  # raises when not embeddable
    x = prof.x
    H_E = mean_curvature_embedded(g, x)
    tau = H.tau(g.r_o)
    # dsigma = r_o^2 dx dphi
    area_factor = 2.0 * math.pi * g.r_o**2
    m_by = area_factor * integrate(H_E - H.H_o) / (8.0 * math.pi)
    int_HE = area_factor * integrate(H_E)
    return BrownYork(
        mass=m_by,
        hawking=hawking_mass(g, H),
        minkowski_term=int_HE / (8.0 * math.pi) - g.r_o,
        tau_term=0.5 * g.r_o * (1.0 - tau) ** 2,
    )


# ---------------------------------------------------------------------------
# File format
# ---------------------------------------------------------------------------

def metric_from_dict(d: dict) -> AxisymMetricSpec:
    """Parse ``{"type": "round"|"axisym", "r_o": .., "w": {"basis", "data"}}``."""
    kind = d.get("type")
    if "r_o" not in d:
        raise ValueError("metric spec needs r_o")
    r_o = float(d["r_o"])
    if kind == "round":
        return AxisymMetricSpec.round(r_o)
    if kind != "axisym":
        raise ValueError(f"unknown metric type {kind!r}")
    w = d.get("w")
    if not isinstance(w, dict):
        raise ValueError("axisym metric needs a 'w' table")
    basis, data = w.get("basis"), w.get("data")
    if not isinstance(data, list):
        raise ValueError("w.data must be a list of numbers")
    data = [float(c) for c in data]
    if basis == "poly":
        return AxisymMetricSpec.from_poly(r_o, data)
    if basis == "samples":
        return AxisymMetricSpec.from_samples(r_o, data)
    raise ValueError(f"unknown w basis {basis!r}")


def metric_to_dict(g: AxisymMetricSpec) -> dict:
    if g.is_round:
        return {"type": "round", "r_o": g.r_o}
    deg = g.bulk.degree() + 2
    if deg <= 12:
        w = np.polynomial.chebyshev.cheb2poly((1.0 + _ONE_MINUS_X2 * g.bulk).coef)
        return {"type": "axisym", "r_o": g.r_o, "w": {"basis": "poly", "data": [float(c) for c in w]}}
    # power basis is ill-conditioned at high degree
    w = g.w(lobatto_nodes(deg + 1))
    return {"type": "axisym", "r_o": g.r_o, "w": {"basis": "samples", "data": [float(c) for c in w]}}
