"""Time integration driver: snapshots at exact requested times plus a
per-step diagnostics series recording the quantities the verifiers consume.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import BoundaryFluxWarning, DataGapError, StateError
from .grid_field import FieldU, FieldV, GridSpec, InitialDataSpec, init_field, u_from_v
from .nonlocal_op import NonlocalP, prefix_integral
from .scheme import SchemeConfig, cfl_dt, interface_fluxes, step

BOUNDARY_LEAK_THRESHOLD = 1e-8
DEFAULT_ALPHAS = (0.0, 1.0, 2.0)


@dataclass(frozen=True)
class RunConfig:
    """A complete run description: grid, initial data, scheme, and outputs."""

    grid: GridSpec
    init: InitialDataSpec
    scheme: SchemeConfig = field(default_factory=SchemeConfig)
    final_time: float = 1.0
    snapshot_times: tuple = ()
    diagnostic_alphas: tuple = DEFAULT_ALPHAS
    seed: int = 0

    def __post_init__(self):
        if not (math.isfinite(self.final_time) and self.final_time >= 0.0):
            raise ValueError(f"final_time must be finite and >= 0, got {self.final_time}")
        times = tuple(sorted({float(t) for t in self.snapshot_times}))
        for t in times:
            if not (0.0 <= t <= self.final_time):
                raise ValueError(
                    f"snapshot time {t} outside [0, {self.final_time}]"
                )
        object.__setattr__(self, "snapshot_times", times)
        alphas = tuple(sorted({float(a) for a in self.diagnostic_alphas}))
        if not alphas:
            raise ValueError("diagnostic_alphas must be non-empty")
        for a in alphas:
            if not (math.isfinite(a) and a >= 0.0):
                raise ValueError(f"diagnostic alpha must be nonnegative, got {a}")
        object.__setattr__(self, "diagnostic_alphas", alphas)
        object.__setattr__(self, "seed", int(self.seed))


@dataclass(frozen=True)
class Snapshot:
    """State at one instant: cell centers, v, the floored u, and the prefix
    integral, self-contained for serialization."""

    time: float
    x: np.ndarray
    field_v: FieldV
    field_u: FieldU
    p: NonlocalP


@dataclass(frozen=True)
class DiagnosticsRow:
    time: float
    dt: float
    sup_u: float
    sup_u_x: float
    mass: float
    boundary_flux: float
    p_left: float
    p_right: float
    clip_count: int
    lp_norms: tuple
    dissipation: tuple
    source_integral: tuple


@dataclass(frozen=True)
class DiagnosticsSeries:
    """Per-step time series; the per-alpha columns are keyed by alpha value.

    lp_norms[a][m]        =  sum_i v_i^(a+1) dx                  at time m
    dissipation[a][m]     =  eps (a+1)^2 sum v^a (Dv/dx)^2 dx    (forward diffs,
                             zero-extended across both boundaries)
    source_integral[a][m] =  (a+1) sum v^(a+1) P dx  (zero when the source
                             term is disabled, so the budget matches the
                             dynamics actually run)
    """

    alphas: tuple
    times: np.ndarray
    dts: np.ndarray
    sup_u: np.ndarray
    sup_u_x: np.ndarray
    mass: np.ndarray
    boundary_flux: np.ndarray
    p_left: np.ndarray
    p_right: np.ndarray
    clip_counts: np.ndarray
    lp_norms: dict
    dissipation: dict
    source_integral: dict

    def __post_init__(self):
        t = np.asarray(self.times)
        if t.size == 0:
            raise DataGapError("diagnostics series is empty")
        if t.size > 1 and not np.all(np.diff(t) > 0.0):
            raise StateError("diagnostic times must be strictly increasing")
        cols = [self.dts, self.sup_u, self.sup_u_x, self.mass, self.boundary_flux,
                self.p_left, self.p_right]
        cols += [self.lp_norms[a] for a in self.alphas]
        cols += [self.dissipation[a] for a in self.alphas]
        cols += [self.source_integral[a] for a in self.alphas]
        for col in cols:
            if not np.all(np.isfinite(col)):
                raise StateError("non-finite diagnostic entry")

    @classmethod
    def from_rows(cls, rows: list, alphas: tuple) -> "DiagnosticsSeries":
        take = lambda name: np.array([getattr(r, name) for r in rows], dtype=np.float64)
        per_alpha = lambda name: {
            a: np.array([getattr(r, name)[j] for r in rows], dtype=np.float64)
            for j, a in enumerate(alphas)
        }
        return cls(
            alphas=tuple(alphas),
            times=take("time"),
            dts=take("dt"),
            sup_u=take("sup_u"),
            sup_u_x=take("sup_u_x"),
            mass=take("mass"),
            boundary_flux=take("boundary_flux"),
            p_left=take("p_left"),
            p_right=take("p_right"),
            clip_counts=np.array([r.clip_count for r in rows], dtype=np.int64),
            lp_norms=per_alpha("lp_norms"),
            dissipation=per_alpha("dissipation"),
            source_integral=per_alpha("source_integral"),
        )


def record_diagnostics(
    grid: GridSpec,
    fv: FieldV,
    p: NonlocalP,
    cfg: SchemeConfig,
    dt: float,
    alphas: tuple = DEFAULT_ALPHAS,
) -> DiagnosticsRow:
    """Compute one diagnostics row for the current state."""
    v = fv.values
    dx = grid.dx
    vmax = float(np.max(v))
    sup_u = math.log(max(vmax, cfg.v_floor))
    sup_u_x = float(grid.centers[int(np.argmax(v))])
    mass = float(np.sum(v) * dx)

    flux = interface_fluxes(v, cfg.flux)
    boundary = float(abs(flux[0]) + abs(flux[-1]))

    vpad = np.concatenate(([0.0], v, [0.0]))
    diffs = (vpad[1:] - vpad[:-1]) / dx

    lp, diss, src = [], [], []
    for a in alphas:
        power = v ** (a + 1.0)
        lp.append(float(np.sum(power) * dx))
        weights = vpad[:-1] ** a  # left-indexed; 0^0 = 1 covers a = 0 exactly
        diss.append(
            float(cfg.epsilon * (a + 1.0) ** 2 * np.sum(weights * diffs * diffs) * dx)
        )
        if cfg.source_enabled:
            src.append(float((a + 1.0) * np.sum(power * p.cell_values) * dx))
        else:
            src.append(0.0)

    row = DiagnosticsRow(
        time=fv.time,
        dt=float(dt),
        sup_u=sup_u,
        sup_u_x=sup_u_x,
        mass=mass,
        boundary_flux=boundary,
        p_left=float(p.interface_values[0]),
        p_right=float(p.interface_values[-1]),
        clip_count=fv.clip_count,
        lp_norms=tuple(lp),
        dissipation=tuple(diss),
        source_integral=tuple(src),
    )
    for val in (row.sup_u, row.mass, row.boundary_flux):
        if not math.isfinite(val):
            raise StateError(f"non-finite diagnostic at t = {fv.time:.6g}")
    return row


@dataclass(frozen=True)
class RunResult:
    """Everything a verifier needs: the grid, the scheme that produced the
    data, snapshots at the requested times, and the per-step diagnostics."""

    grid: GridSpec
    scheme: SchemeConfig
    alphas: tuple
    snapshots: tuple
    diagnostics: DiagnosticsSeries
    config: RunConfig | None = None

    def snapshot_at(self, t: float, rtol: float = 1e-12) -> Snapshot:
        for snap in self.snapshots:
            if snap.time == t or abs(snap.time - t) <= rtol * max(1.0, abs(t)):
                return snap
        raise DataGapError(f"no snapshot at t = {t}")

    @property
    def final_state(self) -> FieldV:
        return self.snapshots[-1].field_v


def _make_snapshot(grid: GridSpec, fv: FieldV, p: NonlocalP, cfg: SchemeConfig) -> Snapshot:
    return Snapshot(
        time=fv.time,
        x=grid.centers,
        field_v=fv,
        field_u=u_from_v(fv, cfg.v_floor),
        p=p,
    )


def evolve(
    grid: GridSpec,
    v0: FieldV,
    cfg: SchemeConfig,
    final_time: float,
    snapshot_times: tuple = (),
    alphas: tuple = DEFAULT_ALPHAS,
) -> RunResult:
    """March v0 to final_time, landing exactly on every requested snapshot time.

    The CFL-stable step is shortened (never stretched) to hit snapshot times
    and the final time, so snapshot timestamps equal the requests bitwise.
    A diagnostics row is recorded for the initial state and after every step.
    """
    if not (math.isfinite(final_time) and final_time >= 0.0):
        raise ValueError(f"final_time must be finite and >= 0, got {final_time}")
    if v0.time != 0.0:
        raise ValueError("initial field must carry time = 0")
    events = sorted({float(t) for t in snapshot_times} | {float(final_time)})
    for t in events:
        if not (0.0 <= t <= final_time):
            raise ValueError(f"snapshot time {t} outside [0, {final_time}]")

    fv = v0
    p = prefix_integral(grid, fv)
    rows = [record_diagnostics(grid, fv, p, cfg, 0.0, alphas)]
    snaps = []
    if events[0] == 0.0:
        snaps.append(_make_snapshot(grid, fv, p, cfg))
        events.pop(0)

    max_boundary = rows[0].boundary_flux
    while events:
        target = events[0]
        dt_stable = cfl_dt(grid, fv, p, cfg)
        if fv.time + dt_stable >= target:
            dt = target - fv.time
            landing = True
        else:
            dt = dt_stable
            landing = False
        fv = step(grid, fv, cfg, dt)
        if landing:
            fv = replace(fv, time=target)
        p = prefix_integral(grid, fv)
        row = record_diagnostics(grid, fv, p, cfg, dt, alphas)
        rows.append(row)
        max_boundary = max(max_boundary, row.boundary_flux)
        if landing:
            snaps.append(_make_snapshot(grid, fv, p, cfg))
            events.pop(0)

    if max_boundary > BOUNDARY_LEAK_THRESHOLD:
        warnings.warn(
            f"boundary flux reached {max_boundary:.3e} "
            f"(threshold {BOUNDARY_LEAK_THRESHOLD:g}); the domain may be too small",
            BoundaryFluxWarning,
            stacklevel=2,
        )
    return RunResult(
        grid=grid,
        scheme=cfg,
        alphas=tuple(alphas),
        snapshots=tuple(snaps),
        diagnostics=DiagnosticsSeries.from_rows(rows, tuple(alphas)),
    )


def run_simulation(cfg: RunConfig) -> RunResult:
    """Build the grid and initial data from a RunConfig and evolve it."""
    v0 = init_field(cfg.grid, cfg.init)
    result = evolve(
        cfg.grid,
        v0,
        cfg.scheme,
        cfg.final_time,
        cfg.snapshot_times,
        cfg.diagnostic_alphas,
    )
    return replace(result, config=cfg)
