"""Stroboscopic Poincaré sections of the extended flow.

The section variable is the forcing phase itself, so orbits are sampled
once per period 2*pi with no crossing detection.  Initial conditions come
from declarative deterministic grids, never random draws, so clouds are
reproducible byte for byte under the fixed-step integrator.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .kepler import ModelParams
from .integrate import integrate_orbit
from .model import CollisionError

TWO_PI = 2.0 * math.pi


@dataclass
class SectionCloud:
    """Section hits ``(q, p)`` for a family of orbits.

    ``orbits[i]`` is an ``(n_i, 2)`` array of per-iterate hits with ``q``
    wrapped to ``(-pi, pi]``; ``truncated[i]`` marks collision-shortened
    orbits (their partial history is kept).
    """

    params: ModelParams
    initial_grid: list[tuple[float, float]]
    n_iterates: int
    tol: float
    method: str
    orbits: list[np.ndarray] = field(default_factory=list)
    truncated: list[bool] = field(default_factory=list)

    def to_csv(self, path_or_file, header_comment: str | None = None) -> None:
        def emit(fh):
            if header_comment:
                fh.write(f"# {header_comment}\n")
            fh.write("orbit_id,iter,q,p\n")
            for oid, orbit in enumerate(self.orbits):
                for it, (q, p) in enumerate(orbit):
                    fh.write(f"{oid},{it},{q:.17g},{p:.17g}\n")

        if hasattr(path_or_file, "write"):
            emit(path_or_file)
        else:
            with open(path_or_file, "w", encoding="utf-8", newline="\n") as fh:
                emit(fh)

    def manifest(self) -> dict:
        return {
            "r": self.params.r,
            "epsilon": self.params.epsilon,
            "n_iterates": self.n_iterates,
            "tol": self.tol,
            "method": self.method,
            "initial_grid": [list(ic) for ic in self.initial_grid],
            "truncated": self.truncated,
        }

    def write_manifest(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(self.manifest(), fh, indent=2)
            fh.write("\n")


def wrap_angle(q: float) -> float:
    """Wrap an angle to ``(-pi, pi]``."""
    w = math.remainder(q, TWO_PI)
    return math.pi if w == -math.pi else w


def section(params: ModelParams, initial_grid, n_iterates: int,
            tol: float = 1e-8, method: str = "adaptive",
            fixed_steps_per_period: int = 200) -> SectionCloud:
    """Strobe each initial condition once per forcing period.

    Args:
        params: model parameters.
        initial_grid: iterable of ``(q0, p0)`` pairs (phase starts at 0).
        n_iterates: number of section returns to record per orbit.
        tol: integrator tolerance (adaptive path).
        method: ``"adaptive"`` or ``"fixed"`` (reproducible RK4).
        fixed_steps_per_period: RK4 steps per period for ``method="fixed"``.

    Collisions truncate the affected orbit only; the cloud keeps going.
    """
    cloud = SectionCloud(params=params,
                         initial_grid=[(float(q), float(p))
                                       for q, p in initial_grid],
                         n_iterates=n_iterates, tol=tol, method=method)
    for q0, p0 in cloud.initial_grid:
        hits: list[tuple[float, float]] = []
        truncated = False
        if method == "adaptive":
            t_eval = TWO_PI * np.arange(1, n_iterates + 1)
            try:
                traj = integrate_orbit((q0, p0, 0.0), TWO_PI * n_iterates,
                                       params, tol=tol, t_eval=t_eval,
                                       method="adaptive")
                truncated = traj.truncated
                for q, p, _ in traj.states:
                    hits.append((wrap_angle(float(q)), float(p)))
            except CollisionError:
                truncated = True
        elif method == "fixed":
            q, p, s = q0, p0, 0.0
            for _ in range(n_iterates):
                try:
                    traj = integrate_orbit((q, p, s), TWO_PI, params, tol=tol,
                                           method="fixed",
                                           fixed_steps=fixed_steps_per_period)
                except CollisionError:
                    truncated = True
                    break
                q, p, s = traj.states[-1]
                hits.append((wrap_angle(float(q)), float(p)))
        else:
            raise ValueError(f"unknown method {method!r}")
        cloud.orbits.append(np.array(hits))
        cloud.truncated.append(truncated)
    return cloud
