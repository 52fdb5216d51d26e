"""Kepler equation solver and ephemeris of the two primaries.

The primaries are two equal masses on coplanar Keplerian ellipses of
eccentricity ``epsilon`` about their common barycenter, which sits at
``(0, R, 0)`` with ``R = 1``.  Time ``t`` is the mean anomaly; the radius of
either primary is ``r * rho(t)`` with ``rho = 1 - epsilon*cos(u)`` and ``u``
the eccentric anomaly.  The angular position of the primaries is prescribed
to be ``t`` itself (no true-anomaly correction is applied).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi

# Residual tolerance and iteration cap of the eccentric-anomaly solver.
KEPLER_TOL = 1e-13
KEPLER_MAX_ITER = 64

# Above this eccentricity the classical low-order series for rho diverges;
# the exact solver used here is unaffected, so the flag is informational.
HIGH_ECCENTRICITY = 0.6627


class KeplerConvergenceError(RuntimeError):
    """The eccentric-anomaly iteration failed to reach its tolerance."""


@dataclass(frozen=True)
class ModelParams:
    """Problem parameters: binary semi-major axis ``r`` and eccentricity.

    The particle circle has radius ``R = 1`` by convention.  Validity
    requires ``0 < r < 2/(1+epsilon)``: at the upper end the near primary's
    apocenter touches the circle and collisions become possible.
    """

    r: float
    epsilon: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.epsilon < 1.0:
            raise ValueError(f"epsilon={self.epsilon} outside [0, 1)")
        if not 0.0 < self.r < self.collision_ceiling:
            raise ValueError(
                f"r={self.r} outside (0, {self.collision_ceiling}) "
                f"for epsilon={self.epsilon}"
            )

    @property
    def collision_ceiling(self) -> float:
        """Largest admissible ``r``: apocenter of the near primary at y=-1."""
        return 2.0 / (1.0 + self.epsilon)

    @property
    def collision_margin(self) -> float:
        """Distance from the collision ceiling, ``2/(1+eps) - r``."""
        return self.collision_ceiling - self.r

    @property
    def high_eccentricity(self) -> bool:
        """True when epsilon exceeds the classical series-convergence bound."""
        return self.epsilon >= HIGH_ECCENTRICITY


@dataclass(frozen=True)
class PrimaryEphemeris:
    """Positions of the two primaries at one epoch.

    Attributes:
        t: mean anomaly (radians).
        u: eccentric anomaly solving ``u - eps*sin(u) = t``.
        rho: normalized radius ``1 - eps*cos(u)``, in ``[1-eps, 1+eps]``.
        x1, x2: 3-vectors of the two primaries; ``x1 + x2 = (0, 2, 0)``.
    """

    t: float
    u: float
    rho: float
    x1: np.ndarray
    x2: np.ndarray


def solve_kepler(mean_anomaly: float, epsilon: float,
                 tol: float = KEPLER_TOL,
                 max_iter: int = KEPLER_MAX_ITER) -> float:
    """Solve ``u - epsilon*sin(u) = M`` for the eccentric anomaly ``u``.

    Safeguarded Newton iteration started from ``u0 = M + eps*sin(M)``; any
    Newton step that leaves the current bracket is replaced by a bisection
    step.  The input is reduced mod 2*pi and the branch restored afterward,
    so ``u`` is continuous and monotone in ``M`` on the whole real line.

    Args:
        mean_anomaly: mean anomaly ``M``, any real number.
        epsilon: eccentricity in ``[0, 1)``.
        tol: residual tolerance on ``|u - eps*sin(u) - M|``.
        max_iter: iteration cap; exceeding it raises.

    Returns:
        Eccentric anomaly with ``|u - eps*sin(u) - M| < tol``.
    """
    if not 0.0 <= epsilon < 1.0:
        raise ValueError(f"epsilon={epsilon} outside [0, 1)")
    if epsilon == 0.0:
        return mean_anomaly

    m = math.fmod(mean_anomaly, TWO_PI)
    if m < 0.0:
        m += TWO_PI
    offset = mean_anomaly - m

    # Fold onto [0, pi] using u(2pi - m) = 2pi - u(m); Newton then never
    # starts on the slow side of the sine inflection.
    if m > math.pi:
        return offset + TWO_PI - _solve_core(TWO_PI - m, epsilon, tol, max_iter)
    return offset + _solve_core(m, epsilon, tol, max_iter)


def _solve_core(m: float, epsilon: float, tol: float, max_iter: int) -> float:
    # g(u) = u - eps*sin(u) - m is strictly increasing, so [0, pi] brackets.
    lo, hi = 0.0, math.pi
    u = m + epsilon * math.sin(m)
    for _ in range(max_iter):
        g = u - epsilon * math.sin(u) - m
        if abs(g) < tol:
            return u
        if g > 0.0:
            hi = u
        else:
            lo = u
        step = g / (1.0 - epsilon * math.cos(u))
        u_new = u - step
        if not lo < u_new < hi:
            u_new = 0.5 * (lo + hi)
        u = u_new
    g = u - epsilon * math.sin(u) - m
    if abs(g) < tol:
        return u
    raise KeplerConvergenceError(
        f"no convergence after {max_iter} iterations "
        f"(M={m}, eps={epsilon}, residual={g:.3e})"
    )


def radial_factor(t: float, epsilon: float) -> float:
    """Normalized orbital radius ``rho(t) = 1 - epsilon*cos(u(t))``."""
    u = solve_kepler(t, epsilon)
    return 1.0 - epsilon * math.cos(u)


def radial_factor_derivatives(t: float, epsilon: float) -> tuple[float, float, float]:
    """Return ``(rho, drho/dt, d2rho/dt2)`` at mean anomaly ``t``.

    Uses ``du/dt = 1/rho`` from differentiating the Kepler equation.
    """
    u = solve_kepler(t, epsilon)
    s, c = math.sin(u), math.cos(u)
    rho = 1.0 - epsilon * c
    rho_d = epsilon * s / rho
    rho_dd = epsilon * c / rho**2 - (epsilon * s) ** 2 / rho**3
    return rho, rho_d, rho_dd


def primary_positions(t: float, params: ModelParams) -> tuple[np.ndarray, np.ndarray]:
    """Positions of the two primaries at mean anomaly ``t``.

    The barycenter is ``(0, 1, 0)`` and the primaries are antipodal on a
    common ellipse of instantaneous radius ``r*rho(t)`` at polar angle ``t``:

        x1 = ( r*rho*sin t, 1 + r*rho*cos t, 0)
        x2 = (-r*rho*sin t, 1 - r*rho*cos t, 0)
    """
    rho = radial_factor(t, params.epsilon)
    a = params.r * rho
    sx, cx = a * math.sin(t), a * math.cos(t)
    x1 = np.array([sx, 1.0 + cx, 0.0])
    x2 = np.array([-sx, 1.0 - cx, 0.0])
    return x1, x2


def ephemeris(t: float, params: ModelParams) -> PrimaryEphemeris:
    """Full ephemeris record (anomalies, radius, positions) at time ``t``."""
    u = solve_kepler(t, params.epsilon)
    rho = 1.0 - params.epsilon * math.cos(u)
    x1, x2 = primary_positions(t, params)
    return PrimaryEphemeris(t=t, u=u, rho=rho, x1=x1, x2=x2)
