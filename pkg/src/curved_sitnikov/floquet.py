"""Monodromy-based linear stability classification and winding diagnostics.

For the trace-free linearization ``S'' + a(t) S = 0`` the multipliers are
``lam = h ± sqrt(h^2 - 1)`` with ``h`` the half-trace of the monodromy
matrix; their product is 1.  Position of ``h`` relative to ±1 decides the
class: elliptic (``|h| < 1``, multipliers non-real on the unit circle,
strongly stable), parabolic (``|h| = 1``), hyperbolic (``|h| > 1``).
Because exact parabolicity is a measure-zero condition, a small band
``delta_par`` around ``|h| = 1`` is reported as parabolic.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .kepler import ModelParams
from .model import cubic_coefficient
from .integrate import (DEFAULT_MONODROMY_TOL, FundamentalMatrix,
                        integrate_variational)

TWO_PI = 2.0 * math.pi

DEFAULT_DELTA_PAR = 1e-9
DET_CORRUPT_TOL = 1e-6

ELLIPTIC = "elliptic"
PARABOLIC = "parabolic"
HYPERBOLIC = "hyperbolic"


class MonodromyError(ValueError):
    """The fundamental matrix is not a valid monodromy (Wronskian off 1)."""


@dataclass
class Monodromy:
    """Fundamental matrix after one forcing period at an equilibrium."""

    matrix: FundamentalMatrix
    period: float
    params: ModelParams
    q_star: float
    tol: float

    @property
    def half_trace(self) -> float:
        return self.matrix.half_trace

    @property
    def y2(self) -> float:
        """Lower-right entry; equals the half-trace for an even coefficient."""
        return self.matrix.y2

    @property
    def det(self) -> float:
        return self.matrix.det

    def squared(self) -> "Monodromy":
        """Monodromy over the doubled period, ``X(2T) = X(T)^2``."""
        return Monodromy(matrix=self.matrix.matmul(self.matrix),
                         period=2.0 * self.period, params=self.params,
                         q_star=self.q_star, tol=self.tol)


@dataclass
class StabilityVerdict:
    """Linear stability class with multipliers and exponents.

    ``exponents`` are principal values ``mu = log(lam)/T`` (branch
    ambiguity left unresolved).  ``strongly_stable`` means elliptic:
    multipliers on the unit circle and non-real, robust under small
    periodic perturbations.  For parabolic cases ``parabolic_subtype``
    distinguishes a diagonal monodromy (two eigenvectors, stable) from a
    shear (one eigenvector, unstable) via the off-diagonal entries.
    """

    classification: str
    multipliers: tuple[complex, complex]
    exponents: tuple[complex, complex]
    strongly_stable: bool
    half_trace: float
    q_star: float
    r: float
    epsilon: float
    period: float
    parabolic_subtype: str | None = None

    def to_json_dict(self) -> dict:
        return {
            "q_star": self.q_star,
            "r": self.r,
            "epsilon": self.epsilon,
            "period": self.period,
            "half_trace": self.half_trace,
            "class": self.classification,
            "strongly_stable": self.strongly_stable,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())


def monodromy(q_star: float, params: ModelParams, period: float | None = None,
              tol: float = DEFAULT_MONODROMY_TOL,
              method: str = "adaptive") -> Monodromy:
    """Monodromy matrix of the linearization at ``q_star``.

    ``period`` defaults to the coefficient's period: pi for circular
    primaries, 2*pi otherwise.  The half period pi is admitted only when
    ``epsilon = 0``.
    """
    if period is None:
        period = math.pi if params.epsilon == 0.0 else TWO_PI
    if not (math.isclose(period, math.pi) or math.isclose(period, TWO_PI)):
        raise ValueError(f"period={period} must be pi or 2*pi")
    if math.isclose(period, math.pi) and params.epsilon != 0.0:
        raise ValueError("period pi requires epsilon = 0")
    mat = integrate_variational(q_star, params, period, tol=tol, method=method)
    return Monodromy(matrix=mat, period=period, params=params,
                     q_star=q_star, tol=tol)


def multipliers(m: Monodromy) -> tuple[complex, complex]:
    """Floquet multipliers ``h ± sqrt(h^2 - 1)`` of a unit-Wronskian monodromy."""
    if abs(m.det - 1.0) > DET_CORRUPT_TOL:
        raise MonodromyError(f"det={m.det!r} deviates from 1 beyond "
                             f"{DET_CORRUPT_TOL}")
    h = m.half_trace
    root = cmath.sqrt(complex(h * h - 1.0, 0.0))
    return h + root, h - root


def classify(m: Monodromy,
             delta_par: float = DEFAULT_DELTA_PAR) -> StabilityVerdict:
    """Stability verdict from the half-trace, with parabolic band ``delta_par``."""
    if not 0.0 < delta_par <= 1e-3:
        raise ValueError(f"delta_par={delta_par} outside (0, 1e-3]")
    h = m.half_trace
    if abs(abs(h) - 1.0) <= delta_par:
        cls = PARABOLIC
    elif abs(h) < 1.0:
        cls = ELLIPTIC
    else:
        cls = HYPERBOLIC
    lam = multipliers(m)
    t = m.period
    exps = tuple(cmath.log(l) / t if l != 0 else complex("nan") for l in lam)
    subtype = None
    if cls == PARABOLIC:
        off = max(abs(m.matrix.x2), abs(m.matrix.y1))
        kind = "diagonal" if off <= delta_par else "shear"
        sign = "T-periodic" if h > 0 else "2T-periodic"
        subtype = f"{kind}, {sign}"
    return StabilityVerdict(
        classification=cls,
        multipliers=lam,
        exponents=exps,
        strongly_stable=(cls == ELLIPTIC),
        half_trace=h,
        q_star=m.q_star,
        r=m.params.r,
        epsilon=m.params.epsilon,
        period=m.period,
        parabolic_subtype=subtype,
    )


def winding_angle(a, t0: float, t1: float, z0: complex,
                  tol: float = 1e-10, method: str = "theta") -> float:
    """Signed increment of ``arg(x + i x')`` along a Hill-equation solution.

    ``z(t) = x + i x'`` with ``z(t0) = z0 != 0``.  Two independent routes:

    * ``"theta"``: integrate ``theta' = -(a cos^2 theta + sin^2 theta)``,
      which tracks the continuous argument exactly (no unwrapping).
    * ``"arg"``: integrate ``(x, x')`` and unwrap the argument of the dense
      output, refining samples until increments stay below pi/2.

    Both must agree; they are kept separate so either can check the other.
    """
    if z0 == 0:
        raise ValueError("z0 must be nonzero")
    coeff = a if callable(a) else (lambda t: float(a))

    if method == "theta":
        th0 = math.atan2(z0.imag, z0.real)

        def rhs(t, y):
            c, s = math.cos(y[0]), math.sin(y[0])
            return [-(coeff(t) * c * c + s * s)]

        sol = solve_ivp(rhs, (t0, t1), [th0], method="DOP853",
                        rtol=tol, atol=tol)
        if sol.status != 0:
            raise RuntimeError(sol.message)
        return float(sol.y[0, -1] - th0)

    if method == "arg":
        def rhs(t, y):
            return [y[1], -coeff(t) * y[0]]

        sol = solve_ivp(rhs, (t0, t1), [z0.real, z0.imag], method="DOP853",
                        rtol=tol, atol=tol, dense_output=True)
        if sol.status != 0:
            raise RuntimeError(sol.message)
        ts = list(sol.t)
        for _ in range(40):
            xs = sol.sol(np.array(ts))
            norms = np.hypot(xs[0], xs[1])
            if np.any(norms == 0.0):
                raise RuntimeError("phase vector hit zero: invalid solution")
            args = np.unwrap(np.arctan2(xs[1], xs[0]))
            jumps = np.abs(np.diff(args))
            if np.all(jumps < 0.5 * math.pi):
                return float(args[-1] - args[0])
            refined = []
            for ta, tb, j in zip(ts[:-1], ts[1:], jumps):
                refined.append(ta)
                if j >= 0.5 * math.pi:
                    refined.append(0.5 * (ta + tb))
            refined.append(ts[-1])
            ts = refined
        raise RuntimeError("argument unwrapping did not stabilize")

    raise ValueError(f"unknown method {method!r}")


def winding_bound(a_min: float, t0: float, t1: float) -> float:
    """Upper bound ``-sqrt(a_min) (t1 - t0) + pi`` on the winding increment.

    Valid whenever the coefficient stays >= ``a_min`` > 0 on the interval;
    fast rotation of the phase vector forces the bound downward.
    """
    return -math.sqrt(a_min) * (t1 - t0) + math.pi


def ortega_hypotheses(params: ModelParams,
                      delta_par: float = DEFAULT_DELTA_PAR,
                      tol: float = DEFAULT_MONODROMY_TOL,
                      n_cubic_samples: int = 64) -> dict:
    """Hypothesis check for nonlinear stability of the origin equilibrium.

    The origin is nonlinearly stable when the linear part is stable
    (elliptic, or parabolic with a diagonal monodromy) and the cubic
    coefficient of the force expansion is sign-definite.  Returns the
    individual findings plus the combined flag; circular primaries only.
    """
    m = monodromy(0.0, params, tol=tol)
    verdict = classify(m, delta_par=delta_par)
    linear_ok = verdict.classification == ELLIPTIC or (
        verdict.classification == PARABOLIC
        and verdict.parabolic_subtype is not None
        and verdict.parabolic_subtype.startswith("diagonal"))
    ts = np.linspace(0.0, TWO_PI, n_cubic_samples, endpoint=False)
    cubic_min = min(cubic_coefficient(float(t), params) for t in ts)
    return {
        "r": params.r,
        "epsilon": params.epsilon,
        "classification": verdict.classification,
        "linear_ok": linear_ok,
        "cubic_min": cubic_min,
        "cubic_positive": cubic_min > 0.0,
        "passed": linear_ok and cubic_min > 0.0,
    }
