"""Uniform grids, positive state fields, and the preset initial-data catalog.

The state variable everywhere is v = e^u > 0; u is carried only as a derived,
floored logarithm so that sup bounds and L1 comparisons can be phrased in u.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.integrate import quad
from scipy.special import expit

from .errors import (
    AmplitudeError,
    DomainTooSmallError,
    GridAlignmentError,
    GridSizeError,
    ShapeError,
)

ALIGNMENT_RTOL = 1e-12
TAIL_FRACTION_LIMIT = 1e-10
DEFAULT_V_FLOOR = 1e-12
EXP_OVERFLOW_LIMIT = 700.0

_PRESET_PARAMS = {
    "gaussian": ("amplitude", "center", "sigma"),
    "two-bump": ("amplitude1", "center1", "sigma1", "amplitude2", "center2", "sigma2"),
    "plateau": ("height", "width", "steepness"),
}

PRESET_DEFAULTS = {
    "gaussian": {"amplitude": 0.0, "center": 0.0, "sigma": 1.0},
    "two-bump": {
        "amplitude1": 0.0,
        "center1": -2.0,
        "sigma1": 1.0,
        "amplitude2": 0.0,
        "center2": 2.0,
        "sigma2": 1.0,
    },
    "plateau": {"height": 0.0, "width": 4.0, "steepness": 4.0},
}


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class GridSpec:
    """Uniform cell grid on [x_min, x_max] with x = 0 pinned to an interface.

    Coordinates are generated anchored at zero, so the interface at
    ``anchor_index`` is exactly 0.0 regardless of rounding in dx.
    """

    x_min: float
    x_max: float
    n_cells: int

    def __post_init__(self):
        if not (math.isfinite(self.x_min) and math.isfinite(self.x_max)):
            raise GridAlignmentError("grid endpoints must be finite")
        if self.n_cells < 4:
            raise GridSizeError(f"n_cells must be at least 4, got {self.n_cells}")
        if not (self.x_min < 0.0 < self.x_max):
            raise GridAlignmentError(
                f"x = 0 must lie strictly inside the domain, got "
                f"[{self.x_min}, {self.x_max}]"
            )
        dx = (self.x_max - self.x_min) / self.n_cells
        ratio = -self.x_min / dx
        nearest = round(ratio)
        if abs(ratio - nearest) > ALIGNMENT_RTOL * max(1.0, abs(ratio)):
            k = min(max(nearest, 1), self.n_cells - 1)
            sx_min = -k * dx
            sx_max = sx_min + self.n_cells * dx
            raise GridAlignmentError(
                f"x = 0 does not fall on a cell interface for "
                f"[{self.x_min}, {self.x_max}] with {self.n_cells} cells; "
                f"nearest admissible endpoints are x_min = {sx_min:.17g}, "
                f"x_max = {sx_max:.17g}"
            )

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_cells

    @property
    def anchor_index(self) -> int:
        # interface index whose coordinate is exactly 0
        return round(-self.x_min / self.dx)

    @cached_property
    def interfaces(self) -> np.ndarray:
        j = np.arange(self.n_cells + 1, dtype=np.float64)
        return _readonly((j - self.anchor_index) * self.dx)

    @cached_property
    def centers(self) -> np.ndarray:
        i = np.arange(self.n_cells, dtype=np.float64)
        return _readonly((i - self.anchor_index + 0.5) * self.dx)


def build_grid(x_min: float, x_max: float, n_cells: int) -> GridSpec:
    """Construct a GridSpec, validating alignment of x = 0 with an interface."""
    return GridSpec(float(x_min), float(x_max), int(n_cells))


@dataclass(frozen=True)
class FieldV:
    """Cell values of v = e^u at a fixed time; entries are finite and >= 0.

    ``clip_count`` records how many entries the producing step raised to the
    positivity floor (0 for fields built directly from data).
    """

    values: np.ndarray
    time: float = 0.0
    clip_count: int = 0

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 1 or vals.size == 0:
            raise ShapeError("FieldV values must be a non-empty 1-D array")
        if not np.all(np.isfinite(vals)):
            raise ShapeError("FieldV values must be finite")
        if np.any(vals < 0.0):
            raise ShapeError("FieldV values must be nonnegative")
        object.__setattr__(self, "values", _readonly(vals))
        object.__setattr__(self, "time", float(self.time))


@dataclass(frozen=True)
class FieldU:
    """Cell values of u = ln v at a fixed time.

    ``floor_count`` is the number of v entries that sat below the floor when
    the logarithm was taken.
    """

    values: np.ndarray
    time: float = 0.0
    floor_count: int = 0

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 1 or vals.size == 0:
            raise ShapeError("FieldU values must be a non-empty 1-D array")
        if not np.all(np.isfinite(vals)):
            raise ShapeError("FieldU values must be finite")
        object.__setattr__(self, "values", _readonly(vals))
        object.__setattr__(self, "time", float(self.time))


def u_from_v(fv: FieldV, v_floor: float = DEFAULT_V_FLOOR) -> FieldU:
    """Floored logarithm: u_i = ln(max(v_i, v_floor))."""
    if v_floor <= 0.0:
        raise ValueError(f"v_floor must be positive, got {v_floor}")
    floored = int(np.count_nonzero(fv.values < v_floor))
    u = np.log(np.maximum(fv.values, v_floor))
    return FieldU(u, fv.time, floored)


def v_from_u(fu: FieldU) -> FieldV:
    """Exponential map back to v; refuses amplitudes that would overflow."""
    umax = float(np.max(fu.values))
    if umax > EXP_OVERFLOW_LIMIT:
        raise AmplitudeError(
            f"max u = {umax:.6g} exceeds {EXP_OVERFLOW_LIMIT:g}; exp would overflow"
        )
    return FieldV(np.exp(fu.values), fu.time)


@dataclass(frozen=True)
class InitialDataSpec:
    """A named initial-data preset with its shape parameters.

    Presets describe v directly:

    * ``gaussian``: v(x) = exp(A - ((x - c) / sigma)^2)
    * ``two-bump``: sum of two such bumps
    * ``plateau``: exp(height) * expit(s (x + w/2)) * expit(s (w/2 - x))

    All presets decay fast enough that the mass outside a generous domain is
    negligible; ``init_field`` enforces that quantitatively.
    """

    preset: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.preset not in _PRESET_PARAMS:
            raise ValueError(
                f"unknown preset {self.preset!r}; expected one of "
                f"{sorted(_PRESET_PARAMS)}"
            )
        allowed = _PRESET_PARAMS[self.preset]
        merged = dict(PRESET_DEFAULTS[self.preset])
        for name, value in self.params.items():
            if name not in allowed:
                raise ValueError(
                    f"parameter {name!r} is not valid for preset {self.preset!r}"
                )
            merged[name] = float(value)
        for name, value in merged.items():
            if not math.isfinite(value):
                raise ValueError(f"parameter {name!r} must be finite, got {value}")
        for name in ("sigma", "sigma1", "sigma2", "width", "steepness"):
            if name in merged and merged[name] <= 0.0:
                raise ValueError(f"parameter {name!r} must be positive")
        object.__setattr__(self, "params", merged)

    @classmethod
    def gaussian(cls, amplitude: float = 0.0, center: float = 0.0, sigma: float = 1.0):
        return cls("gaussian", {"amplitude": amplitude, "center": center, "sigma": sigma})

    @classmethod
    def two_bump(
        cls,
        amplitude1: float = 0.0,
        center1: float = -2.0,
        sigma1: float = 1.0,
        amplitude2: float = 0.0,
        center2: float = 2.0,
        sigma2: float = 1.0,
    ):
        return cls(
            "two-bump",
            {
                "amplitude1": amplitude1,
                "center1": center1,
                "sigma1": sigma1,
                "amplitude2": amplitude2,
                "center2": center2,
                "sigma2": sigma2,
            },
        )

    @classmethod
    def plateau(cls, height: float = 0.0, width: float = 4.0, steepness: float = 4.0):
        return cls("plateau", {"height": height, "width": width, "steepness": steepness})

    def profile(self, x: np.ndarray) -> np.ndarray:
        """Evaluate v(0, x) pointwise."""
        x = np.asarray(x, dtype=np.float64)
        p = self.params
        if self.preset == "gaussian":
            z = (x - p["center"]) / p["sigma"]
            return np.exp(p["amplitude"] - z * z)
        if self.preset == "two-bump":
            z1 = (x - p["center1"]) / p["sigma1"]
            z2 = (x - p["center2"]) / p["sigma2"]
            return np.exp(p["amplitude1"] - z1 * z1) + np.exp(p["amplitude2"] - z2 * z2)
        # plateau
        half = 0.5 * p["width"]
        s = p["steepness"]
        return np.exp(p["height"]) * expit(s * (x + half)) * expit(s * (half - x))

    def _feature_points(self) -> list[float]:
        p = self.params
        if self.preset == "gaussian":
            return [p["center"]]
        if self.preset == "two-bump":
            return [p["center1"], p["center2"]]
        return [-0.5 * p["width"], 0.5 * p["width"]]

    def tail_fraction(self, x_min: float, x_max: float) -> float:
        """Fraction of the total integral of v(0, .) lying outside [x_min, x_max]."""
        f = lambda x: float(self.profile(np.array([x]))[0])
        pts = [c for c in self._feature_points() if x_min < c < x_max]
        left, _ = quad(f, -np.inf, x_min)
        mid, _ = quad(f, x_min, x_max, points=pts or None, limit=200)
        right, _ = quad(f, x_max, np.inf)
        total = left + mid + right
        if total <= 0.0:
            raise ValueError("initial profile integrates to zero")
        return (left + right) / total


def init_field(grid: GridSpec, spec: InitialDataSpec) -> FieldV:
    """Sample a preset at cell midpoints, checking tail admissibility.

    Raises DomainTooSmallError when at least 1e-10 of the profile's mass lies
    outside the domain, with a suggestion for endpoints that would suffice.
    """
    frac = spec.tail_fraction(grid.x_min, grid.x_max)
    if frac >= TAIL_FRACTION_LIMIT:
        lo, hi = grid.x_min, grid.x_max
        for _ in range(10):
            lo, hi = 2.0 * lo, 2.0 * hi
            if spec.tail_fraction(lo, hi) < TAIL_FRACTION_LIMIT:
                break
        raise DomainTooSmallError(
            f"{frac:.3e} of the initial mass lies outside "
            f"[{grid.x_min}, {grid.x_max}] (limit {TAIL_FRACTION_LIMIT:g}); "
            f"try x_min <= {lo:g}, x_max >= {hi:g}"
        )
    v = spec.profile(grid.centers)
    return FieldV(v, 0.0)
