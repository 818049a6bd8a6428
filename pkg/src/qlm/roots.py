"""Scalar equations of the collar construction and a bracketed solver.

Every equation solved here has a unique root on a known bracket, so a single
robust method is used throughout: bisection with Newton steps accepted only
when they stay inside the current bracket.

Residuals are reported relative to the magnitude of the terms of the
equation (backward error); an absolute residual is meaningless once the
root is large, e.g. the cubic with ``tau*zeta = 50``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

from .errors import BracketError

XTOL = 1e-13


def solve_bracketed(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    fprime: Optional[Callable[[float], float]] = None,
    *,
    xtol: float = XTOL,
    maxiter: int = 2000,
) -> float:
    """Find the root of ``f`` in ``[lo, hi]``.

    ``f(lo)`` and ``f(hi)`` must have opposite signs (or one of them vanish).
    With ``fprime`` the iteration is safeguarded Newton; without it, plain
    bisection. Stops when the bracket (or the last Newton step) is below
    ``xtol * |x|`` or cannot be split further in floating point.
    """
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ValueError("bracket endpoints must be finite")
    if lo > hi:
        lo, hi = hi, lo
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if math.isnan(flo) or math.isnan(fhi) or (flo > 0) == (fhi > 0):
        raise BracketError(f"no sign change on [{lo!r}, {hi!r}]: f={flo!r}, {fhi!r}")
    # orient so that f(neg) < 0 < f(pos)
    neg, pos = (lo, hi) if flo < 0 else (hi, lo)

    x = 0.5 * (lo + hi)
    step_old = abs(hi - lo)
    step = step_old
    for _ in range(maxiter):
        fx = f(x)
        if fx == 0.0:
            return x
        if fx < 0:
            neg = x
        else:
            pos = x
        a, b = min(neg, pos), max(neg, pos)
        tol = xtol * abs(x) + 1e-300
        mid = 0.5 * (a + b)
        if b - a <= tol or mid in (a, b):
            return mid

        x_new = None
        if fprime is not None:
            d = fprime(x)
            if d != 0.0 and math.isfinite(d):
                cand = x - fx / d
                # reject Newton if it leaves the bracket or is not contracting fast
                if a < cand < b and abs(cand - x) < 0.5 * step_old:
                    x_new = cand
        newton = x_new is not None
        if not newton:
            x_new = mid
        step_old, step = step, abs(x_new - x)
        if newton and step <= tol:
            return x_new
        x = x_new
    raise BracketError("root solver did not converge")


def expand_upper(f, lo: float, hi: float, *, factor: float = 2.0, limit: float = 1e6):
    """Grow ``hi`` geometrically until ``f`` changes sign relative to ``f(lo)``.

    Fails once ``hi`` exceeds ``limit * lo`` (or ``limit`` if ``lo`` is 0).
    """
    flo = f(lo)
    cap = limit * lo if lo > 0 else limit
    while (f(hi) > 0) == (flo > 0):
        hi *= factor
        if hi > cap:
            raise BracketError(f"bracket expansion exceeded {cap!r}")
    return hi


def _check_finite_nonneg(**kw):
    for name, val in kw.items():
        if not math.isfinite(val):
            raise ValueError(f"{name} must be finite, got {val!r}")
        if val < 0:
            raise ValueError(f"{name} must be nonnegative, got {val!r}")


# ---------------------------------------------------------------------------
# The cubic for theta
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ThetaResult:
    theta: float
    residual: float
    tau: float
    zeta: float

    @property
    def upper_bracket(self) -> float:
        return 1.0 + 1.5 * self.tau * self.zeta


def cubic(x: float, tau: float, zeta: float) -> float:
    """``x^3 - (3 zeta tau / 2) x^2 - 1``."""
    return x * x * (x - 1.5 * zeta * tau) - 1.0


def theta_root(tau: float, zeta: float) -> ThetaResult:
    """Unique positive root of ``theta^3 - (3 zeta tau/2) theta^2 - 1 = 0``.

    The root lies in ``[1, 1 + 3 tau zeta / 2]``.
    """
    _check_finite_nonneg(tau=tau, zeta=zeta)
    c = 1.5 * tau * zeta
    if c == 0.0:
        return ThetaResult(1.0, 0.0, tau, zeta)
    f = lambda x: x * x * (x - c) - 1.0
    df = lambda x: x * (3.0 * x - 2.0 * c)
    theta = solve_bracketed(f, 1.0, 1.0 + c, df)
    resid = abs(f(theta)) / (theta**3 + c * theta**2 + 1.0)
    return ThetaResult(theta, resid, tau, zeta)


def theta_sign_equivalence(x: float, tau: float, zeta: float) -> bool:
    """Return ``cubic(x) <= 0``, which holds exactly when ``x <= theta``."""
    if not x > 0:
        raise ValueError("x must be positive")
    return cubic(x, tau, zeta) <= 0.0


# ---------------------------------------------------------------------------
# Positivity criterion for phi
# ---------------------------------------------------------------------------

def phi(tau: float, b: float, lam: float) -> float:
    s = tau * tau + lam
    return s**1.5 - b * tau * s - 1.0


def phi_threshold(lam: float) -> float:
    return min(lam, 1.0) / math.sqrt(1.0 + lam)


def phi_criterion(b: float, lam: float) -> bool:
    """True when ``b < min(lam, 1)/sqrt(1 + lam)``; then ``phi > 0`` on ``[1, inf)``."""
    if not (b > 0 and lam > 0):
        raise ValueError("phi_criterion needs b > 0 and lam > 0")
    return b < phi_threshold(lam)


# ---------------------------------------------------------------------------
# Hyperbolic root xi
# ---------------------------------------------------------------------------

BETA_NONPOSITIVE = "beta_nonpositive_closed_form"
BETA_POSITIVE = "beta_positive_psi_root"


@dataclass(frozen=True)
class XiResult:
    xi: float
    residual: float
    branch: str
    theta_kappa: Optional[float] = None
    theta: Optional[float] = None
    lower_bound: float = 0.0


def psi(x, alpha, beta, tau, kappa, r_o):
    q = 3.0 * kappa**2 * r_o**2
    return beta + (q - 0.5 * alpha / x**2) * (1.0 + 1.5 * tau * x) ** (4.0 / 3.0)


def psi_prime(x, alpha, beta, tau, kappa, r_o):
    q = 3.0 * kappa**2 * r_o**2
    return (2.0 * q * tau + alpha / x**3 + 0.5 * alpha * tau / x**2) * (
        1.0 + 1.5 * tau * x
    ) ** (1.0 / 3.0)


def xi_root(alpha: float, beta: float, tau: float, kappa: float, r_o: float) -> XiResult:
    """Limit of ``A_o / r_o`` for the AdS-Schwarzschild collar.

    ``beta <= 0`` uses the closed form; ``beta > 0`` solves ``psi(x) = 0``,
    bracketed below by ``sqrt(alpha / (2 beta + 6 kappa^2 r_o^2))``.
    """
    _check_finite_nonneg(alpha=alpha, tau=tau)
    if not kappa > 0:
        raise ValueError("kappa must be positive")
    if not r_o > 0:
        raise ValueError("r_o must be positive")
    q = 3.0 * kappa**2 * r_o**2
    if not beta + q > 0:
        raise ValueError("need beta + 3 kappa^2 r_o^2 > 0")
    lower = math.sqrt(0.5 * alpha / (beta + q))
    if beta <= 0.0:
        return XiResult(lower, 0.0, BETA_NONPOSITIVE, lower_bound=lower)

    theta = theta_root(tau, math.sqrt(alpha / (2.0 * beta))).theta
    if alpha == 0.0:
        return XiResult(0.0, 0.0, BETA_POSITIVE, 0.0, theta, 0.0)

    f = lambda x: psi(x, alpha, beta, tau, kappa, r_o)
    df = lambda x: psi_prime(x, alpha, beta, tau, kappa, r_o)
    # psi(lower) = beta (1 - (1 + 1.5 tau lower)^(4/3)) <= 0, zero iff tau = 0
    if tau == 0.0 or f(lower) >= 0.0:
        xi = lower
    else:
        xi = solve_bracketed(f, lower, expand_upper(f, lower, 2.0 * lower), df)
    g = (1.0 + 1.5 * tau * xi) ** (4.0 / 3.0)
    resid = abs(f(xi)) / (abs(beta) + (q + 0.5 * alpha / xi**2) * g)
    theta_kappa = math.sqrt(xi * math.sqrt(2.0 * beta / alpha))
    return XiResult(xi, resid, BETA_POSITIVE, theta_kappa, theta, lower)


def theta_kappa_equation(x, alpha, beta, tau, kappa, r_o):
    """Left side of the cubic-like equation whose root is ``theta_kappa``.

    Its unique positive root reproduces ``xi_root`` through
    ``xi = sqrt(alpha / 2 beta) * theta_kappa**2``; at ``kappa = 0`` it is the
    ordinary cubic.
    """
    z = math.sqrt(alpha / (2.0 * beta))
    inner = 1.0 + 3.0 * kappa**2 * r_o**2 / beta * (1.0 + 1.5 * z * tau * x * x) ** (4.0 / 3.0)
    return inner**0.75 * x**3 - 1.5 * z * tau * x * x - 1.0
