"""Semi-discrete finite-volume scheme and explicit time stepping for

    dv/dt + d/dx (v^2 / 2) = -v * P[v] + epsilon * v * d2v/dx2,

with P[v] the signed prefix integral anchored at x = 0. The convective flux
f(v) = v^2 / 2 is convex with its sonic point at v = 0, which is what the
Godunov formula below encodes. Boundaries are Dirichlet-zero ghost cells.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np

from .errors import BlowUpError, ShapeError, StateError
from .grid_field import FieldV, GridSpec, _readonly
from .nonlocal_op import NonlocalP, _prefix_arrays, p_sup

FLUXES = ("godunov", "rusanov")
INTEGRATORS = ("forward-euler", "ssp-rk2")

ForcingFn = Callable[[float, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class SchemeConfig:
    """Discretization knobs.

    ``source_enabled`` switches the nonlocal source off, giving the plain
    conservation law (used by the Riemann sanity checks); ``forcing`` is an
    optional g(t, x) added to the right-hand side for manufactured solutions.
    """

    flux: str = "godunov"
    epsilon: float = 0.0
    cfl: float = 0.4
    v_floor: float = 1e-12
    integrator: str = "ssp-rk2"
    boundary: str = "dirichlet-zero"
    source_enabled: bool = True
    forcing: ForcingFn | None = None

    def __post_init__(self):
        if self.flux not in FLUXES:
            raise ValueError(f"flux must be one of {FLUXES}, got {self.flux!r}")
        if self.integrator not in INTEGRATORS:
            raise ValueError(
                f"integrator must be one of {INTEGRATORS}, got {self.integrator!r}"
            )
        if self.boundary != "dirichlet-zero":
            raise ValueError(f"unsupported boundary {self.boundary!r}")
        if not (math.isfinite(self.epsilon) and self.epsilon >= 0.0):
            raise ValueError(f"epsilon must be nonnegative, got {self.epsilon}")
        if not (0.0 < self.cfl <= 1.0):
            raise ValueError(f"cfl must lie in (0, 1], got {self.cfl}")
        if not (math.isfinite(self.v_floor) and self.v_floor > 0.0):
            raise ValueError(f"v_floor must be positive, got {self.v_floor}")


def _f(v):
    return 0.5 * v * v


def godunov_flux(a, b):
    """Exact Riemann flux for f(v) = v^2/2: max(f(max(a,0)), f(min(b,0)))."""
    return np.maximum(_f(np.maximum(a, 0.0)), _f(np.minimum(b, 0.0)))


def rusanov_flux(a, b):
    """Local Lax-Friedrichs flux 0.5 (f(a) + f(b)) - 0.5 max(|a|,|b|) (b - a)."""
    return 0.5 * (_f(a) + _f(b)) - 0.5 * np.maximum(np.abs(a), np.abs(b)) * (b - a)


_FLUX_FN = {"godunov": godunov_flux, "rusanov": rusanov_flux}


@dataclass(frozen=True)
class RhsBreakdown:
    """Right-hand side split by mechanism; ``total`` is what the integrator uses."""

    flux_divergence: np.ndarray
    source: np.ndarray
    viscous: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "flux_divergence", _readonly(self.flux_divergence))
        object.__setattr__(self, "source", _readonly(self.source))
        object.__setattr__(self, "viscous", _readonly(self.viscous))

    @cached_property
    def total(self) -> np.ndarray:
        return _readonly(self.flux_divergence + self.source + self.viscous)


def interface_fluxes(v: np.ndarray, flux: str) -> np.ndarray:
    """Numerical fluxes on the n+1 interfaces with zero ghost states."""
    fn = _FLUX_FN[flux]
    left = np.concatenate(([0.0], v))
    right = np.concatenate((v, [0.0]))
    return fn(left, right)


def _rhs_parts(
    grid: GridSpec,
    v: np.ndarray,
    t: float,
    p_cells: np.ndarray | None,
    cfg: SchemeConfig,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    dx = grid.dx
    flux = interface_fluxes(v, cfg.flux)
    flux_div = -(flux[1:] - flux[:-1]) / dx

    if cfg.source_enabled:
        if p_cells is None:
            _, p_cells = _prefix_arrays(grid, v)
        source = -v * p_cells
    else:
        source = np.zeros_like(v)
    if cfg.forcing is not None:
        source = source + cfg.forcing(t, grid.centers)

    if cfg.epsilon > 0.0:
        lap = np.empty_like(v)
        lap[1:-1] = v[2:] - 2.0 * v[1:-1] + v[:-2]
        lap[0] = v[1] - 2.0 * v[0]           # zero ghost on the left
        lap[-1] = v[-2] - 2.0 * v[-1]        # zero ghost on the right
        viscous = cfg.epsilon * v * lap / (dx * dx)
    else:
        viscous = np.zeros_like(v)
    return flux_div, source, viscous


def semi_discrete_rhs(
    grid: GridSpec, fv: FieldV, p: NonlocalP, cfg: SchemeConfig
) -> RhsBreakdown:
    """Spatial operator split into flux divergence, source, and viscous parts."""
    if fv.values.shape != (grid.n_cells,):
        raise ShapeError(
            f"field has {fv.values.shape[0]} cells, grid has {grid.n_cells}"
        )
    if p.cell_values.shape != (grid.n_cells,):
        raise ShapeError("nonlocal operator was built on a different grid")
    parts = _rhs_parts(grid, fv.values, fv.time, p.cell_values, cfg)
    return RhsBreakdown(*parts)


def cfl_dt(grid: GridSpec, fv: FieldV, p: NonlocalP, cfg: SchemeConfig) -> float:
    """Stable step size: cfl times the tightest of the convective, viscous,
    and source restrictions."""
    v = fv.values
    if not np.all(np.isfinite(v)):
        raise StateError("field is non-finite; cannot size a time step")
    vmax = float(np.max(v))
    if vmax <= 0.0:
        raise StateError("max v must be positive to size a time step")
    dx = grid.dx
    limit = min(dx / vmax, 1.0 / (p_sup(p) + 1e-30))
    if cfg.epsilon > 0.0:
        limit = min(limit, dx * dx / (2.0 * cfg.epsilon * vmax))
    return cfg.cfl * limit


def _advance(
    v: np.ndarray,
    t: float,
    dt: float,
    rate: Callable[[np.ndarray, float], np.ndarray],
    integrator: str,
) -> np.ndarray:
    """One explicit step of the chosen integrator on raw arrays."""
    r1 = rate(v, t)
    v1 = v + dt * r1
    if integrator == "forward-euler":
        return v1
    r2 = rate(v1, t + dt)
    return 0.5 * v + 0.5 * (v1 + dt * r2)


def step(grid: GridSpec, fv: FieldV, cfg: SchemeConfig, dt: float) -> FieldV:
    """Advance one step of size dt; the nonlocal operator is rebuilt per stage.

    The result is clipped below at ``cfg.v_floor`` and the number of clipped
    entries is recorded on the returned field. Non-finite output raises
    BlowUpError naming the first offending cell.
    """
    if not (math.isfinite(dt) and dt > 0.0):
        raise ValueError(f"dt must be positive and finite, got {dt}")

    def rate(v: np.ndarray, t: float) -> np.ndarray:
        parts = _rhs_parts(grid, v, t, None, cfg)
        return parts[0] + parts[1] + parts[2]

    out = _advance(fv.values, fv.time, dt, rate, cfg.integrator)
    bad = ~np.isfinite(out)
    if bad.any():
        raise BlowUpError(int(np.argmax(bad)), fv.time + dt)
    clip_count = int(np.count_nonzero(out < cfg.v_floor))
    if clip_count:
        out = np.maximum(out, cfg.v_floor)
    return FieldV(out, fv.time + dt, clip_count)
