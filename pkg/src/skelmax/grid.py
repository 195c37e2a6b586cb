"""Uniform delta-grids, piecewise-constant grid functions and box-union indicators.

Cells and grid-function values are stored in lexicographic cell order with the
first coordinate varying fastest, i.e. ``values == array.ravel(order="F")``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .errors import ConfigurationError, DomainError, PreconditionError
from .geometry import Box, box_intersection_volume

GRID_TOL = 1e-9
_CHUNK = 1 << 15


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Grid:
    """Half-open cells of side ``delta`` partitioning ``domain``."""

    domain: Box
    delta: float

    def __post_init__(self):
        if not self.delta > 0:
            raise ConfigurationError(f"grid spacing must be positive, got {self.delta}")
        counts = []
        for side in self.domain.sides:
            c = side / self.delta
            if abs(c - round(c)) > GRID_TOL * max(1.0, c) or round(c) < 1:
                raise ConfigurationError(
                    f"domain side {side} is not a positive integer multiple of delta={self.delta}"
                )
            counts.append(int(round(c)))
        object.__setattr__(self, "_shape", tuple(counts))

    @classmethod
    def unit(cls, n: int, delta: float) -> "Grid":
        """The grid of ``Q0 = [0, 1)^n``; requires ``1/delta`` to be an integer."""
        return cls(Box.unit(n), delta)

    @property
    def n(self) -> int:
        return self.domain.n

    @property
    def shape(self) -> tuple[int, ...]:
        return self._shape

    @property
    def size(self) -> int:
        return math.prod(self._shape)

    @property
    def cell_volume(self) -> float:
        return self.delta**self.n

    def axis_edges(self, d: int) -> np.ndarray:
        return self.domain.lo[d] + self.delta * np.arange(self._shape[d] + 1)

    def axis_centers(self, d: int) -> np.ndarray:
        return self.domain.lo[d] + self.delta * (np.arange(self._shape[d]) + 0.5)

    def centers(self) -> np.ndarray:
        """Cell centers, shape ``(size, n)``, first coordinate varying fastest."""
        mesh = np.meshgrid(*(self.axis_centers(d) for d in range(self.n)), indexing="ij")
        return np.stack([m.ravel(order="F") for m in mesh], axis=1)

    def cell_index(self, x: Sequence[float]) -> tuple[int, ...]:
        x = np.asarray(x, dtype=float)
        lo = np.asarray(self.domain.lo)
        hi = np.asarray(self.domain.hi)
        if x.shape != (self.n,) or np.any(x < lo) or np.any(x >= hi):
            raise DomainError(f"point {x.tolist()} is outside the half-open domain {self.domain}")
        idx = np.floor((x - lo) / self.delta).astype(int)
        return tuple(int(min(i, s - 1)) for i, s in zip(idx, self._shape))

    def flat_index(self, multi: Sequence[int]) -> int:
        return int(np.ravel_multi_index(tuple(multi), self._shape, order="F"))

    def cell_box(self, multi: Sequence[int]) -> Box:
        lo = tuple(self.domain.lo[d] + self.delta * i for d, i in enumerate(multi))
        return Box(lo, tuple(v + self.delta for v in lo))


def psi(grid: Grid, x: Sequence[float]) -> np.ndarray:
    """Center of the unique half-open cell of ``grid`` containing ``x``."""
    idx = grid.cell_index(x)
    return np.array([grid.axis_centers(d)[i] for d, i in enumerate(idx)])


def centers(grid: Grid) -> np.ndarray:
    return grid.centers()


def _interval_overlaps(lo, hi, edges) -> np.ndarray:
    """``out[q, c]`` = length of ``[lo[q], hi[q]] & [edges[c], edges[c+1]]``."""
    lo = np.asarray(lo, dtype=float)[:, None]
    hi = np.asarray(hi, dtype=float)[:, None]
    return np.clip(np.minimum(hi, edges[None, 1:]) - np.maximum(lo, edges[None, :-1]), 0.0, None)


def _letters(n: int) -> str:
    return "abcdefghijklmnop"[:n]


@dataclass(frozen=True)
class GridFunction:
    """A non-negative function constant on each cell of ``grid``, zero elsewhere."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = _frozen(np.ravel(self.values))
        if values.shape != (self.grid.size,):
            raise ConfigurationError(
                f"expected {self.grid.size} values for grid of shape {self.grid.shape}, got {values.size}"
            )
        if np.any(values < 0) or not np.all(np.isfinite(values)):
            raise DomainError("grid function values must be finite and non-negative")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_array(cls, grid: Grid, array) -> "GridFunction":
        array = np.asarray(array, dtype=float)
        if array.shape != grid.shape:
            raise ConfigurationError(f"array shape {array.shape} does not match grid {grid.shape}")
        return cls(grid, array.ravel(order="F"))

    @classmethod
    def constant(cls, grid: Grid, c: float) -> "GridFunction":
        return cls(grid, np.full(grid.size, float(c)))

    @property
    def n(self) -> int:
        return self.grid.n

    def as_array(self) -> np.ndarray:
        return self.values.reshape(self.grid.shape, order="F")

    def scaled(self, c: float) -> "GridFunction":
        return type(self)(self.grid, self.values * c)

    def integral(self, box: Box) -> float:
        lo = np.array([box.lo])
        hi = np.array([box.hi])
        return float(self.integrate_boxes(lo, hi)[0])

    def integrate_boxes(self, lo, hi) -> np.ndarray:
        """Integrals over boxes given as ``(Q, n)`` arrays of corners."""
        lo = np.atleast_2d(np.asarray(lo, dtype=float))
        hi = np.atleast_2d(np.asarray(hi, dtype=float))
        arr = self.as_array()
        n = self.n
        letters = _letters(n)
        subscripts = ",".join("q" + c for c in letters) + "," + letters + "->q"
        out = np.empty(lo.shape[0])
        step = max(1, (1 << 22) // max(self.grid.shape))
        for s in range(0, lo.shape[0], step):
            mats = [
                _interval_overlaps(lo[s : s + step, d], hi[s : s + step, d], self.grid.axis_edges(d))
                for d in range(n)
            ]
            out[s : s + step] = np.einsum(subscripts, *mats, arr, optimize=True)
        return out

    def integrate_product(self, los: Sequence[np.ndarray], his: Sequence[np.ndarray]) -> np.ndarray:
        """Integrals over every product box ``prod_d [los[d][i_d], his[d][i_d]]``."""
        n = self.n
        letters = _letters(n)
        upper = letters.upper()
        mats = [_interval_overlaps(los[d], his[d], self.grid.axis_edges(d)) for d in range(n)]
        subscripts = ",".join(U + c for U, c in zip(upper, letters)) + "," + letters + "->" + upper
        return np.einsum(subscripts, *mats, self.as_array(), optimize=True)


def lp_norm(f: GridFunction, p: float) -> float:
    """Exact ``L^p`` norm of a piecewise-constant function (``p = inf`` allowed)."""
    if not p >= 1:
        raise DomainError(f"L^p norms need p >= 1, got {p}")
    v = np.abs(f.values)
    if math.isinf(p):
        return float(v.max(initial=0.0))
    return float((f.grid.cell_volume * np.sum(v**p)) ** (1.0 / p))


@dataclass(frozen=True)
class BoxUnionIndicator:
    """Indicator of a finite union of pairwise-disjoint boxes."""

    boxes: tuple[Box, ...] = ()
    n: int | None = field(default=None)

    def __post_init__(self):
        boxes = tuple(self.boxes)
        n = self.n if self.n is not None else (boxes[0].n if boxes else None)
        if n is None:
            raise ConfigurationError("an empty box union needs an explicit dimension n")
        if any(b.n != n for b in boxes):
            raise ConfigurationError("all boxes must share the dimension n")
        for i, a in enumerate(boxes):
            for b in boxes[i + 1 :]:
                if box_intersection_volume(a, b) > 1e-12 * max(min(a.volume, b.volume), 1e-300):
                    raise PreconditionError(f"boxes {a} and {b} overlap")
        object.__setattr__(self, "boxes", boxes)
        object.__setattr__(self, "n", n)

    @property
    def measure(self) -> float:
        return indicator_measure(self)

    def bounding_box(self) -> Box | None:
        if not self.boxes:
            return None
        lo = tuple(min(b.lo[d] for b in self.boxes) for d in range(self.n))
        hi = tuple(max(b.hi[d] for b in self.boxes) for d in range(self.n))
        return Box(lo, hi)

    def translate(self, shift: Sequence[float]) -> "BoxUnionIndicator":
        return BoxUnionIndicator(tuple(b.translate(shift) for b in self.boxes), self.n)

    def contains(self, points) -> np.ndarray:
        """Membership of ``(Q, n)`` points in the closed union."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        inside = np.zeros(pts.shape[0], dtype=bool)
        for b in self.boxes:
            inside |= np.all((pts >= b.lo) & (pts <= b.hi), axis=1)
        return inside

    def integral(self, box: Box) -> float:
        return sum(box_intersection_volume(box, b) for b in self.boxes)

    def _corners(self):
        lo = np.array([b.lo for b in self.boxes], dtype=float).reshape(-1, self.n)
        hi = np.array([b.hi for b in self.boxes], dtype=float).reshape(-1, self.n)
        return lo, hi

    def integrate_boxes(self, lo, hi) -> np.ndarray:
        lo = np.atleast_2d(np.asarray(lo, dtype=float))
        hi = np.atleast_2d(np.asarray(hi, dtype=float))
        out = np.zeros(lo.shape[0])
        if not self.boxes:
            return out
        blo, bhi = self._corners()
        for s in range(0, lo.shape[0], _CHUNK):
            qlo = lo[s : s + _CHUNK, None, :]
            qhi = hi[s : s + _CHUNK, None, :]
            sides = np.clip(np.minimum(qhi, bhi[None]) - np.maximum(qlo, blo[None]), 0.0, None)
            out[s : s + _CHUNK] = sides.prod(axis=2).sum(axis=1)
        return out

    def integrate_product(self, los: Sequence[np.ndarray], his: Sequence[np.ndarray]) -> np.ndarray:
        shape = tuple(len(v) for v in los)
        if not self.boxes:
            return np.zeros(shape)
        blo, bhi = self._corners()
        n = self.n
        mats = []
        for d in range(n):
            qlo = np.asarray(los[d], dtype=float)[None, :]
            qhi = np.asarray(his[d], dtype=float)[None, :]
            mats.append(
                np.clip(np.minimum(qhi, bhi[:, d, None]) - np.maximum(qlo, blo[:, d, None]), 0.0, None)
            )
        letters = _letters(n)
        subscripts = ",".join("z" + c for c in letters) + "->" + letters
        return np.einsum(subscripts, *mats, optimize=True)


def indicator_measure(E: BoxUnionIndicator) -> float:
    return float(sum(b.volume for b in E.boxes))


TestFunction = Union[BoxUnionIndicator, GridFunction]


def lp_norm_of(f: TestFunction, p: float) -> float:
    """``L^p`` norm of either kind of test function."""
    if isinstance(f, GridFunction):
        return lp_norm(f, p)
    if not p >= 1:
        raise DomainError(f"L^p norms need p >= 1, got {p}")
    m = indicator_measure(f)
    if math.isinf(p):
        return 1.0 if m > 0 else 0.0
    return m ** (1.0 / p)


def support_window(domain: Box, reach: float = 3.0) -> Box:
    """Region seen by the operator from ``domain`` (``7Q0`` for ``domain = Q0``)."""
    return domain.expand(reach)


def clip_to_window(f: TestFunction, window: Box) -> TestFunction:
    """Restrict ``f`` to ``window``, warning when mass is discarded."""
    if isinstance(f, BoxUnionIndicator):
        kept = []
        lost = 0.0
        for b in f.boxes:
            c = b.intersection(window)
            kept_vol = c.volume if c is not None else 0.0
            lost += b.volume - kept_vol
            if c is not None and kept_vol > 0:
                kept.append(c)
        if lost > 0:
            warnings.warn(f"test function clipped to {window}; discarded measure {lost:.6g}", stacklevel=2)
        return BoxUnionIndicator(tuple(kept), f.n)
    pts = f.grid.centers()
    outside = ~np.all((pts >= window.lo) & (pts <= window.hi), axis=1)
    if np.any(f.values[outside] > 0):
        warnings.warn(f"grid function clipped to {window}", stacklevel=2)
        values = f.values.copy()
        values[outside] = 0.0
        return type(f)(f.grid, values)
    return f


def rasterize(f: BoxUnionIndicator, window: Box, h: float) -> GridFunction:
    """Midpoint-rule samples of an indicator on the ``h``-grid of ``window``."""
    g = Grid(window, h)
    return GridFunction(g, f.contains(g.centers()).astype(float))
