"""Force law, potential, linearization and symmetries of the constrained particle.

The massless particle lives on the unit circle in the yz-plane through the
barycenter ``(0,1,0)`` of the binary; ``q`` is its polar angle on that
circle, so ``q = 0`` is the barycenter point and ``q = pi`` the antipode.
Only the tangential component of the binary's pull acts:

    q'' = f(q, t) = -(1+c) sin(q)/d1^3 - (1-c) sin(q)/d2^3,
    c = r*rho(t)*cos(t),
    d_i^2 = (r*rho)^2 + 2 (1-cos q)(1 ± c),

with ``d1, d2`` the distances to the two primaries.  ``q = 0`` and
``q = pi`` are equilibria for every parameter value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .kepler import ModelParams, radial_factor

TWO_PI = 2.0 * math.pi

# Distances below this are treated as collisions rather than evaluated.
D_MIN = 1e-9

Q_STARS = (0.0, math.pi)


class CollisionError(ValueError):
    """Evaluation requested too close to one of the primaries."""

    def __init__(self, primary: int, distance: float):
        self.primary = primary
        self.distance = distance
        super().__init__(
            f"distance {distance:.3e} to primary {primary} is below the "
            f"collision guard"
        )


@dataclass
class ExtendedState:
    """Phase point ``(q, p, s)`` of the autonomized flow.

    ``q`` is stored unwrapped (on the real line) so winding counts survive;
    ``s`` is the phase of the periodic forcing, identified mod 2*pi.
    """

    q: float
    p: float
    s: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.q, self.p, self.s])

    @property
    def q_wrapped(self) -> float:
        return reduce_angle(self.q)


def reduce_angle(q: float) -> float:
    """Map an unwrapped angle to ``[0, 2*pi)``."""
    out = math.fmod(q, TWO_PI)
    return out + TWO_PI if out < 0.0 else out


def _distances(q: float, t: float, params: ModelParams,
               d_min: float) -> tuple[float, float, float]:
    rho = radial_factor(t, params.epsilon)
    a = params.r * rho
    c = a * math.cos(t)
    gap = 2.0 * (1.0 - math.cos(q))
    d1 = math.sqrt(a * a + gap * (1.0 + c))
    d2 = math.sqrt(a * a + gap * (1.0 - c))
    if d1 <= d_min:
        raise CollisionError(1, d1)
    if d2 <= d_min:
        raise CollisionError(2, d2)
    return d1, d2, c


def tangential_force(q: float, t: float, params: ModelParams,
                     d_min: float = D_MIN) -> float:
    """Tangential gravitational acceleration ``f(q, t)`` on the particle."""
    d1, d2, c = _distances(q, t, params, d_min)
    sq = math.sin(q)
    return -(1.0 + c) * sq / d1**3 - (1.0 - c) * sq / d2**3


def potential(q: float, t: float, params: ModelParams,
              d_min: float = D_MIN) -> float:
    """Gravitational potential ``V = -(1/d1 + 1/d2)``; ``f = -dV/dq``."""
    d1, d2, _ = _distances(q, t, params, d_min)
    return -(1.0 / d1 + 1.0 / d2)


def dforce_dq(q_star: float, t: float, params: ModelParams) -> float:
    """Derivative ``df/dq`` at an equilibrium angle ``q_star in {0, pi}``.

    At ``q_star = 0`` the closed form is ``-2/(r*rho)^3``; at ``q_star = pi``

        F(t) = (1+c)/[(r*rho)^2+4+4c]^{3/2} + (1-c)/[(r*rho)^2+4-4c]^{3/2}

    with ``c = r*rho(t)*cos(t)``.
    """
    rho = radial_factor(t, params.epsilon)
    a = params.r * rho
    if q_star == 0.0:
        return -2.0 / a**3
    if q_star == math.pi:
        c = a * math.cos(t)
        return ((1.0 + c) / (a * a + 4.0 + 4.0 * c) ** 1.5
                + (1.0 - c) / (a * a + 4.0 - 4.0 * c) ** 1.5)
    raise ValueError(f"q_star={q_star} is not an equilibrium (use 0 or pi)")


@dataclass(frozen=True)
class HillCoefficient:
    """Periodic coefficient ``a(t)`` of the linearization ``S'' + a(t) S = 0``.

    ``a(t) = -df/dq(q_star, t)``; period 2*pi in general, pi when the
    primaries are circular (epsilon = 0).
    """

    q_star: float
    params: ModelParams
    period: float

    def __call__(self, t: float) -> float:
        return -dforce_dq(self.q_star, t, self.params)


def hill_coefficient(q_star: float, params: ModelParams) -> HillCoefficient:
    """Hill coefficient of the linearization at ``q_star in {0, pi}``."""
    if q_star not in Q_STARS:
        raise ValueError(f"q_star={q_star} is not an equilibrium (use 0 or pi)")
    period = math.pi if params.epsilon == 0.0 else TWO_PI
    return HillCoefficient(q_star=q_star, params=params, period=period)


def cubic_coefficient(t: float, params: ModelParams) -> float:
    """Cubic-term coefficient of the force expansion at ``q = 0``.

    Valid for circular primaries only; the expansion is
    ``f(q, t) = -(2/r^3) q + c(t) q^3 + O(q^5)`` with

        c(t) = (9 + r^2 + 9 r^2 cos^2(t)) / (3 r^5),

    which is positive for every ``r in (0, 2)``.
    """
    if params.epsilon != 0.0:
        raise ValueError("cubic coefficient is only defined for epsilon = 0")
    r = params.r
    return (9.0 + r * r + 9.0 * r * r * math.cos(t) ** 2) / (3.0 * r**5)


def vector_field(state: ExtendedState | np.ndarray,
                 params: ModelParams) -> np.ndarray:
    """Autonomized field ``(q', p', s') = (p, f(q, s), 1)``."""
    q, p, s = (state.q, state.p, state.s) if isinstance(state, ExtendedState) \
        else (state[0], state[1], state[2])
    return np.array([p, tangential_force(q, s, params), 1.0])


def symmetry_defect(state: ExtendedState, params: ModelParams,
                    force: Callable[[float, float], float] | None = None,
                    ) -> tuple[float, float, float, float]:
    """Residuals of the four flow symmetries at one phase point.

    The identities, with ``X`` the autonomized field, are

        S1 (reflection):    S1 . X(q,p,s)  = X(-q, -p, s)
        S2 (t-periodicity): X(q, p, s+2pi) = X(q, p, s)
        S3 (q-periodicity): X(q+2pi, p, s) = X(q, p, s)
        S4 (reversibility): S4 . X(q,p,s)  = -X(q, -p, -s)

    Returns the sup-norm residual of each, all of which vanish identically
    for the model force.  ``force`` may substitute a test field.
    """
    if force is None:
        def force(q, t):
            return tangential_force(q, t, params)
    q, p, s = state.q, state.p, state.s
    fqs = force(q, s)

    def field(q_, p_, s_):
        return np.array([p_, force(q_, s_), 1.0])

    x = np.array([p, fqs, 1.0])
    r1 = np.max(np.abs(x * np.array([-1.0, -1.0, 1.0]) - field(-q, -p, s)))
    r2 = np.max(np.abs(field(q, p, s + TWO_PI) - x))
    r3 = np.max(np.abs(field(q + TWO_PI, p, s) - x))
    r4 = np.max(np.abs(x * np.array([1.0, -1.0, -1.0]) + field(q, -p, -s)))
    return float(r1), float(r2), float(r3), float(r4)


def limit_force_classical(w: float, t: float, R: float, r: float,
                          epsilon: float = 0.0) -> float:
    """Arc-length force on a circle of radius ``R``; straight-line limit.

    ``w = R*q`` is arc length from the barycenter point.  As ``R`` grows
    this approaches ``-2 w / (r_eps(t)^2 + w^2)^{3/2}``, the force of the
    flat (uncurved) problem.
    """
    if R < 1.0:
        raise ValueError(f"R={R} must be >= 1")
    rho = radial_factor(t, epsilon)
    a = r * rho
    c = a * math.cos(t)
    sw = math.sin(w / R)
    gap = 2.0 * R * (1.0 - math.cos(w / R))
    return (-(R + c) * sw / (a * a + gap * (R + c)) ** 1.5
            - (R - c) * sw / (a * a + gap * (R - c)) ** 1.5)


def classical_force(w: float, t: float, r: float, epsilon: float = 0.0) -> float:
    """Closed-form straight-line force ``-2w/(r_eps^2 + w^2)^{3/2}``."""
    a = r * radial_factor(t, epsilon)
    return -2.0 * w / (a * a + w * w) ** 1.5

def limit_force_circle(q: float, R: float) -> float:
    """Force after fusing the primaries into one mass at the barycenter.

    ``-sin(q) / (sqrt(2) R^2 (1 - cos q)^{3/2})`` for ``q in (0, 2*pi)``;
    the fused mass sits at ``q = 0``, which is a collision singularity.
    """
    gap = 1.0 - math.cos(q)
    if not 0.0 < q < TWO_PI or gap <= D_MIN:
        raise CollisionError(1, math.sqrt(2.0 * max(gap, 0.0)) * R)
    return -math.sin(q) / (math.sqrt(2.0) * R * R * gap**1.5)


def comparison_force_circle(q: float, R: float) -> float:
    """Arc-length variant of the fused-mass force, ``-1/(Rq^2) + 1/(R(2pi-q)^2)``."""
    if not 0.0 < q < TWO_PI:
        raise CollisionError(1, min(abs(q), abs(TWO_PI - q)) * R)
    return -1.0 / (R * q * q) + 1.0 / (R * (TWO_PI - q) ** 2)
