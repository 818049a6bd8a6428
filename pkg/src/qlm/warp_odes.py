"""Warping functions of spatial Schwarzschild and AdS-Schwarzschild metrics.

Writing ``dr^2/F(r) + r^2 g_*`` as ``ds^2 + u(s)^2 g_*`` gives

    u(0) = r_o,   u'(s) = sqrt(F(u)),   F(u) = 1 - 2m/u + kappa^2 u^2.

For ``kappa = 0, m < 0`` the inverse ``s(u)`` has a closed form, which is the
primary evaluator (it stays exact for ``|m| ~ 1e8``).  Otherwise ``u`` is
integrated numerically as the second-order system ``u'' = m/u^2 + kappa^2 u``
so that ``u'^2 = F(u)`` is an independent check on the solution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp

from .errors import AdmissibilityError
from .roots import solve_bracketed

RTOL = 1e-12
ATOL = 1e-12


def radicand(u, m: float, kappa: float):
    u = np.asarray(u, dtype=float)
    return 1.0 - 2.0 * m / u + kappa**2 * u * u


# ---------------------------------------------------------------------------
# Closed form for kappa = 0, m < 0
# ---------------------------------------------------------------------------

def _G(y: float) -> float:
    """``int_0^y t^2 / sqrt(1 + t^2) dt = (y sqrt(1+y^2) - asinh y) / 2``."""
    if y < 0.25:
        # binomial series; the closed form cancels catastrophically for small y
        y2 = y * y
        term = y**3  # binom(-1/2, n) * y^(2n+3)
        total = term / 3.0
        n = 0
        while True:
            term *= -y2 * (2 * n + 1) / (2 * n + 2)
            n += 1
            inc = term / (2 * n + 3)
            total += inc
            if abs(inc) < 1e-18 * abs(total):
                return total
    return 0.5 * (y * math.sqrt(1.0 + y * y) - math.asinh(y))


def implicit_flat_solution(m: float, r_o: float, u: float) -> float:
    """Arc length ``s`` at which the Schwarzschild warp with ``m < 0`` reaches ``u``.

    Closed form of ``int_{r_o}^{u} dr / sqrt(1 - 2m/r)`` through the
    substitution ``-2m/u = sinh^-2(v)``.
    """
    if not m < 0:
        raise ValueError("implicit solution needs m < 0")
    if not r_o > 0:
        raise ValueError("r_o must be positive")
    if u < r_o:
        raise ValueError(f"u must be >= r_o, got u={u!r} < r_o={r_o!r}")
    two_abs_m = -2.0 * m
    y_u = math.sqrt(u / two_abs_m)
    y_r = math.sqrt(r_o / two_abs_m)
    return 2.0 * two_abs_m * (_G(y_u) - _G(y_r))


def implicit_flat_inverse(m: float, r_o: float, s: float) -> float:
    """Solve ``implicit_flat_solution(m, r_o, u) = s`` for ``u``."""
    if s < 0:
        raise ValueError("s must be nonnegative")
    if s == 0.0:
        return r_o
    slope0 = math.sqrt(1.0 - 2.0 * m / r_o)  # u' decreases from here to 1
    f = lambda u: implicit_flat_solution(m, r_o, u) - s
    df = lambda u: 1.0 / math.sqrt(1.0 - 2.0 * m / u)
    return solve_bracketed(f, r_o + s, r_o + slope0 * s, df)


# ---------------------------------------------------------------------------
# Warp function
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WarpTable:
    s: np.ndarray
    u: np.ndarray
    du: np.ndarray
    energy_residual: np.ndarray  # |u'^2 - F(u)| / F(u)


@dataclass(frozen=True)
class WarpFunction:
    """Radial profile ``u_m(s)`` on ``[0, s_max]``.

    ``s_max`` bounds the integrated range; it is ignored when the closed form
    is used (``kappa = 0, m <= 0``).
    """

    m: float
    kappa: float
    r_o: float
    s_max: float = 10.0
    method: Optional[str] = None  # "closed_form" | "integrate"; None picks

    def __post_init__(self):
        if not self.r_o > 0:
            raise ValueError("r_o must be positive")
        if self.kappa < 0:
            raise ValueError("kappa must be nonnegative")
        if not radicand(self.r_o, self.m, self.kappa) > 0:
            raise AdmissibilityError("radicand", "1 - 2m/r_o + kappa^2 r_o^2 must be positive")
        if self.method not in (None, "closed_form", "integrate"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.method == "closed_form" and not (self.kappa == 0 and self.m <= 0):
            raise ValueError("closed form exists only for kappa = 0, m <= 0")

    @property
    def uses_closed_form(self) -> bool:
        if self.method is not None:
            return self.method == "closed_form"
        return self.kappa == 0.0 and self.m <= 0.0

    @cached_property
    def _solution(self):
        return _integrate(self.m, self.kappa, self.r_o, self.s_max)

    def u(self, s):
        s = np.asarray(s, dtype=float)
        if np.any(s < 0):
            raise ValueError("s must be nonnegative")
        if self.uses_closed_form:
            if self.m == 0.0:
                return self.r_o + s
            flat = np.array([implicit_flat_inverse(self.m, self.r_o, float(si)) for si in s.ravel()])
            return flat.reshape(s.shape) if s.ndim else float(flat[0])
        if np.any(s > self.s_max * (1 + 1e-12)):
            raise ValueError(f"s beyond integrated range s_max={self.s_max!r}")
        out = self._solution.sol(np.minimum(s, self.s_max))[0]
        return out if s.ndim else float(out)

    def du(self, s):
        """``u'(s) = sqrt(F(u(s)))``."""
        return np.sqrt(radicand(self.u(s), self.m, self.kappa))

    def s_of_u(self, u: float) -> float:
        """Inverse of :meth:`u`."""
        if u < self.r_o:
            raise ValueError("u must be >= r_o")
        if self.uses_closed_form and self.m < 0:
            return implicit_flat_solution(self.m, self.r_o, u)
        if self.uses_closed_form:
            return u - self.r_o
        f = lambda s: self.u(s) - u
        return solve_bracketed(f, 0.0, self.s_max)


def _integrate(m, kappa, r_o, s_max):
    if not s_max > 0:
        raise ValueError("s_max must be positive")
    p0 = math.sqrt(radicand(r_o, m, kappa))

    def rhs(_s, y):
        u, p = y
        return [p, m / (u * u) + kappa**2 * u]

    sol = solve_ivp(
        rhs, (0.0, s_max), [r_o, p0], method="DOP853", rtol=RTOL, atol=ATOL, dense_output=True
    )
    if not sol.success:
        raise RuntimeError(f"warp integration failed: {sol.message}")
    return sol


def integrate_warp(w: WarpFunction, s_max: float, n_out: int = 201) -> WarpTable:
    """Tabulate ``u``, ``u'`` and the energy residual on ``[0, s_max]`` by integration."""
    sol = _integrate(w.m, w.kappa, w.r_o, s_max)
    s = np.linspace(0.0, s_max, n_out)
    u, p = sol.sol(s)
    F = radicand(u, w.m, w.kappa)
    return WarpTable(s, u, p, np.abs(p * p - F) / F)


# ---------------------------------------------------------------------------
# A priori bounds for the AdS-Schwarzschild warp
# ---------------------------------------------------------------------------

def u_star(m: float, kappa: float, r_o: float, s: float) -> float:
    """Upper bound for ``u(s)`` from ``u' <= sqrt(1 - 2m/r_o + kappa^2 u^2)``."""
    root = math.sqrt(radicand(r_o, m, kappa))
    a = kappa * r_o + root
    return (math.exp(kappa * s) * a * a - math.exp(-kappa * s) * (1.0 - 2.0 * m / r_o)) / (2.0 * kappa * a)


@dataclass(frozen=True)
class WarpSandwich:
    u_star: float
    lower: float  # bound on u^(3/2)(A k)
    upper: float
    value: Optional[float] = None  # integrated u^(3/2)(A k)

    @property
    def contains(self) -> bool:
        return self.value is not None and self.lower <= self.value <= self.upper


def warp_upper_bounds_hyperbolic(w: WarpFunction, A: float, k: float, evaluate: bool = True) -> WarpSandwich:
    """Bounds ``r_o^1.5 + 1.5 s sqrt(-2m) <= u^1.5(s) <= r_o^1.5 + 1.5 s sqrt(u* - 2m + kappa^2 u*^3)``.

    ``s = A k``; needs ``m < 0`` and ``kappa > 0``.
    """
    if not (w.m < 0 and w.kappa > 0):
        raise ValueError("sandwich bounds need m < 0 and kappa > 0")
    s = A * k
    us = u_star(w.m, w.kappa, w.r_o, s)
    base = w.r_o**1.5
    lower = base + 1.5 * s * math.sqrt(-2.0 * w.m)
    upper = base + 1.5 * s * math.sqrt(us - 2.0 * w.m + w.kappa**2 * us**3)
    value = float(w.u(s)) ** 1.5 if evaluate else None
    return WarpSandwich(us, lower, upper, value)
