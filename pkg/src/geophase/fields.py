"""Sampled phase-space fields and uniform grids shared by both state engines."""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np


def _frozen(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.flags.writeable = False
    return arr


def uniform_grid(half_width: float, n: int) -> np.ndarray:
    """Symmetric grid of ``n`` points on ``[-half_width, half_width]``."""
    if n < 2:
        raise ValueError(f"grid needs at least 2 points, got {n}")
    if not half_width > 0:
        raise ValueError(f"grid half-width must be positive, got {half_width}")
    return np.linspace(-half_width, half_width, n)


def grid_spacing(grid: np.ndarray) -> float:
    return float(grid[1] - grid[0])


@dataclass(frozen=True)
class WignerField:
    """Wigner function sampled on a rectangular ``x`` by ``p`` grid.

    ``values[i, j]`` is W(x[i], p[j]).
    """

    x: np.ndarray
    p: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        x = _frozen(self.x)
        p = _frozen(self.p)
        values = _frozen(self.values)
        if values.shape != (x.size, p.size):
            raise ValueError(f"values shape {values.shape} does not match grids ({x.size}, {p.size})")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "values", values)

    @property
    def dx(self) -> float:
        return grid_spacing(self.x)

    @property
    def dp(self) -> float:
        return grid_spacing(self.p)

    def total(self) -> float:
        """Riemann sum of W over the grid."""
        return float(self.values.sum() * self.dx * self.dp)

    def marginal_x(self) -> np.ndarray:
        return self.values.sum(axis=1) * self.dp

    def conditional_momentum(self) -> np.ndarray:
        """Mean momentum at each position, ``int p W dp / int W dp``."""
        weight = self.values.sum(axis=1)
        return (self.values @ self.p) / weight

    def to_csv(self) -> str:
        """CSV text with header ``x,p,w``, row-major in ``x``, 17 significant digits."""
        xx, pp = np.meshgrid(self.x, self.p, indexing="ij")
        table = np.column_stack([xx.ravel(), pp.ravel(), self.values.ravel()])
        buf = io.StringIO()
        buf.write("x,p,w\n")
        np.savetxt(buf, table, fmt="%.17g", delimiter=",")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> WignerField:
        lines = text.strip().splitlines()
        if lines[0].strip() != "x,p,w":
            raise ValueError(f"unexpected Wigner CSV header {lines[0]!r}")
        table = np.loadtxt(lines[1:], delimiter=",", ndmin=2)
        x = np.unique(table[:, 0])
        p = np.unique(table[:, 1])
        return cls(x=x, p=p, values=table[:, 2].reshape(x.size, p.size))
