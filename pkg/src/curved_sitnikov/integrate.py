"""Time stepping for the nonlinear flow and the 2x2 variational flow.

Two engines are provided: an adaptive embedded Runge-Kutta pair (DOP853,
order 8(5,3)) for accuracy-controlled work, and a fixed-step classical RK4
for bit-reproducible regression baselines.  Both are reentrant and hold no
state between calls; the flow is smooth away from collisions, so no
symplectic or stiff machinery is needed at these horizons.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .kepler import ModelParams, radial_factor
from .model import (D_MIN, ExtendedState, HillCoefficient, hill_coefficient,
                    tangential_force)

TOL_MIN, TOL_MAX = 1e-13, 1e-6
DEFAULT_ORBIT_TOL = 1e-8
DEFAULT_MONODROMY_TOL = 1e-10


class StiffnessError(RuntimeError):
    """Adaptive step size underflowed; the problem left the smooth regime."""


@dataclass
class Trajectory:
    """Solution samples of the extended flow.

    ``t`` is strictly increasing with the requested endpoints first/last
    (unless collision-truncated); ``states`` has columns ``(q, p, s)``.
    """

    t: np.ndarray
    states: np.ndarray
    tol: float
    method: str
    n_rhs: int
    n_samples: int
    truncated: bool = False

    @property
    def samples(self) -> list[tuple[float, ExtendedState]]:
        return [(float(tk), ExtendedState(*row))
                for tk, row in zip(self.t, self.states)]

    @property
    def final_state(self) -> ExtendedState:
        return ExtendedState(*self.states[-1])

    def to_csv(self, path_or_file, header_comment: str | None = None) -> None:
        """Write ``t,q,p,s`` rows at 17 significant digits."""
        def emit(fh):
            if header_comment:
                fh.write(f"# {header_comment}\n")
            fh.write("t,q,p,s\n")
            for tk, (q, p, s) in zip(self.t, self.states):
                fh.write(f"{tk:.17g},{q:.17g},{p:.17g},{s:.17g}\n")

        if hasattr(path_or_file, "write"):
            emit(path_or_file)
        else:
            with open(path_or_file, "w", encoding="utf-8", newline="\n") as fh:
                emit(fh)


@dataclass
class FundamentalMatrix:
    """Value at time ``t`` of the fundamental solution with ``X(0) = I``.

    Columns are the solutions with initial conditions ``(1,0)`` and
    ``(0,1)``; since the linear system is trace-free the determinant
    (Wronskian) stays 1 up to integration error.
    """

    x1: float
    x2: float
    y1: float
    y2: float
    t: float
    n_rhs: int = 0

    def as_array(self) -> np.ndarray:
        return np.array([[self.x1, self.x2], [self.y1, self.y2]])

    @property
    def det(self) -> float:
        return self.x1 * self.y2 - self.x2 * self.y1

    @property
    def trace(self) -> float:
        return self.x1 + self.y2

    @property
    def half_trace(self) -> float:
        return 0.5 * (self.x1 + self.y2)

    def matmul(self, other: "FundamentalMatrix") -> "FundamentalMatrix":
        a = self.as_array() @ other.as_array()
        return FundamentalMatrix(x1=a[0, 0], x2=a[0, 1], y1=a[1, 0],
                                 y2=a[1, 1], t=self.t + other.t,
                                 n_rhs=self.n_rhs + other.n_rhs)


def _validate_tol(tol: float) -> None:
    if not TOL_MIN <= tol <= TOL_MAX:
        raise ValueError(f"tol={tol} outside [{TOL_MIN}, {TOL_MAX}]")


def rk4_fixed(rhs: Callable[[float, np.ndarray], np.ndarray], t0: float,
              y0: np.ndarray, t1: float, n_steps: int) -> tuple[np.ndarray, np.ndarray]:
    """Classical fixed-step RK4; returns the full (t, y) sample arrays.

    Deterministic to the bit for identical inputs, which the adaptive
    engine does not guarantee across library versions.
    """
    ts = np.linspace(t0, t1, n_steps + 1)
    h = (t1 - t0) / n_steps
    ys = np.empty((n_steps + 1, len(y0)))
    y = np.asarray(y0, dtype=float).copy()
    ys[0] = y
    t = t0
    for i in range(n_steps):
        k1 = rhs(t, y)
        k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1)
        k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2)
        k4 = rhs(t + h, y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t = ts[i + 1]
        ys[i + 1] = y
    return ts, ys


def integrate_orbit(initial: ExtendedState | Sequence[float], t_final: float,
                    params: ModelParams, tol: float = DEFAULT_ORBIT_TOL,
                    t_eval: np.ndarray | None = None,
                    method: str = "adaptive",
                    fixed_steps: int | None = None,
                    d_min: float = D_MIN) -> Trajectory:
    """Integrate the extended flow from ``initial`` over ``[0, t_final]``.

    The phase variable is exact: ``s(t) = s0 + t``; only ``(q, p)`` are
    stepped.  A terminal collision event truncates the trajectory (the
    partial result is returned with ``truncated=True``); step-size
    underflow raises :class:`StiffnessError`.

    Args:
        initial: ``ExtendedState`` or ``(q0, p0, s0)``.
        t_final: integration horizon (> 0).
        params: model parameters.
        tol: local error tolerance per step, within ``[1e-13, 1e-6]``.
        t_eval: optional sample times (dense output by interpolation).
        method: ``"adaptive"`` (DOP853) or ``"fixed"`` (RK4, reproducible).
        fixed_steps: step count for ``method="fixed"`` (default: 200 per
            forcing period).
    """
    _validate_tol(tol)
    if isinstance(initial, ExtendedState):
        q0, p0, s0 = initial.q, initial.p, initial.s
    else:
        q0, p0, s0 = (float(v) for v in initial)

    # the terminal event stops cleanly at d_min; the in-flight force guard
    # sits well below it so RK stages near the crossing stay evaluable
    hard_floor = 1e-3 * d_min

    def rhs(t, y):
        return np.array([y[1],
                         tangential_force(y[0], s0 + t, params, hard_floor)])

    if method == "fixed":
        n = fixed_steps if fixed_steps is not None else max(
            1, int(round(200 * t_final / (2.0 * math.pi))))
        ts, ys = rk4_fixed(rhs, 0.0, np.array([q0, p0]), t_final, n)
        states = np.column_stack([ys[:, 0], ys[:, 1], s0 + ts])
        return Trajectory(t=ts, states=states, tol=tol, method="fixed",
                          n_rhs=4 * n, n_samples=len(ts))
    if method != "adaptive":
        raise ValueError(f"unknown method {method!r}")

    def collision_event(t, y):
        rho = radial_factor(s0 + t, params.epsilon)
        a = params.r * rho
        c = a * math.cos(s0 + t)
        gap = 2.0 * (1.0 - math.cos(y[0]))
        d1 = math.sqrt(a * a + gap * (1.0 + c))
        d2 = math.sqrt(a * a + gap * (1.0 - c))
        return min(d1, d2) - d_min

    collision_event.terminal = True

    sol = solve_ivp(rhs, (0.0, t_final), [q0, p0], method="DOP853",
                    rtol=tol, atol=tol, t_eval=t_eval,
                    events=collision_event, dense_output=False)
    if sol.status == -1:
        raise StiffnessError(sol.message)
    ts = sol.t
    states = np.column_stack([sol.y[0], sol.y[1], s0 + ts])
    return Trajectory(t=ts, states=states, tol=tol, method="adaptive",
                      n_rhs=int(sol.nfev), n_samples=len(ts),
                      truncated=(sol.status == 1))


def integrate_variational(q_star: float, params: ModelParams, period: float,
                          tol: float = DEFAULT_MONODROMY_TOL,
                          method: str = "adaptive",
                          fixed_steps: int | None = None,
                          coefficient: HillCoefficient | Callable[[float], float] | None = None,
                          ) -> FundamentalMatrix:
    """Fundamental matrix at ``t = period`` of ``v' = [[0,1],[-a(t),0]] v``.

    ``a`` is the Hill coefficient of the linearization at ``q_star``
    (overridable via ``coefficient`` for synthetic systems).  Both columns
    are integrated together as a 4-dimensional linear system.
    """
    _validate_tol(tol)
    a = coefficient if coefficient is not None else hill_coefficient(q_star, params)

    def rhs(t, y):
        at = a(t)
        return np.array([y[1], -at * y[0], y[3], -at * y[2]])

    y0 = np.array([1.0, 0.0, 0.0, 1.0])
    if method == "fixed":
        n = fixed_steps if fixed_steps is not None else max(
            1, int(round(2000 * period / (2.0 * math.pi))))
        _, ys = rk4_fixed(rhs, 0.0, y0, period, n)
        x1, y1v, x2, y2v = (float(v) for v in ys[-1])
        return FundamentalMatrix(x1=x1, x2=x2, y1=y1v, y2=y2v, t=period,
                                 n_rhs=4 * n)
    if method != "adaptive":
        raise ValueError(f"unknown method {method!r}")

    sol = solve_ivp(rhs, (0.0, period), y0, method="DOP853",
                    rtol=tol, atol=tol)
    if sol.status != 0:
        raise StiffnessError(sol.message)
    x1, y1v, x2, y2v = (float(v) for v in sol.y[:, -1])
    return FundamentalMatrix(x1=x1, x2=x2, y1=y1v, y2=y2v, t=period,
                             n_rhs=int(sol.nfev))
