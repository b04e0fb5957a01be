"""The nonlocal prefix integral P(t, x) = integral of v from 0 to x.

The integral is signed: it is accumulated outward from the interface pinned
at x = 0, so it is negative for x < 0 whenever v > 0. Interface values are
exact prefix sums of cell masses; cell values average the two bounding
interfaces, which collocates P at cell midpoints to second order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError
from .grid_field import FieldV, GridSpec, _readonly


@dataclass(frozen=True)
class NonlocalP:
    """Prefix integral sampled on interfaces (n+1) and cell midpoints (n)."""

    interface_values: np.ndarray
    cell_values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "interface_values", _readonly(self.interface_values))
        object.__setattr__(self, "cell_values", _readonly(self.cell_values))


def _prefix_arrays(grid: GridSpec, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    interface = np.empty(grid.n_cells + 1, dtype=np.float64)
    interface[0] = 0.0
    np.cumsum(v * grid.dx, out=interface[1:])
    interface -= interface[grid.anchor_index]
    interface[grid.anchor_index] = 0.0  # anchored exactly, independent of rounding
    cells = 0.5 * (interface[:-1] + interface[1:])
    return interface, cells


def prefix_integral(grid: GridSpec, fv: FieldV) -> NonlocalP:
    """Signed prefix integral of a v field, anchored at the x = 0 interface."""
    if fv.values.shape != (grid.n_cells,):
        raise ShapeError(
            f"field has {fv.values.shape[0]} cells, grid has {grid.n_cells}"
        )
    interface, cells = _prefix_arrays(grid, fv.values)
    return NonlocalP(interface, cells)


def p_sup(p: NonlocalP) -> float:
    """Max |P| over cell midpoints; feeds the source branch of the CFL bound."""
    return float(np.max(np.abs(p.cell_values)))
