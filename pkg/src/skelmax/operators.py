"""The k-skeleton maximal operator and its linearized (rho, k) variant.

The field evaluators exploit that, for a fixed radius and face orientation,
the face neighborhoods of all grid centers form a product family of boxes:
the interval on axis ``d`` only depends on the center's ``d``-th coordinate.
Integrals over all of them reduce to one tensor contraction per
``(radius, orientation)`` pair.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConfigurationError, DomainError
from .geometry import (
    Box,
    KFace,
    enumerate_faces,
    face_neighborhood,
    face_orientations,
    neighborhood_volume,
)
from .grid import (
    BoxUnionIndicator,
    Grid,
    GridFunction,
    TestFunction,
    clip_to_window,
    rasterize,
    support_window,
)

RADIUS_TOL = 1e-9


@dataclass(frozen=True)
class Backend:
    """``exact`` integrates box unions in closed form; ``quadrature`` first
    samples them at the midpoints of an ``h``-grid."""

    kind: str = "exact"
    h: float | None = None

    def __post_init__(self):
        if self.kind not in ("exact", "quadrature"):
            raise ConfigurationError(f"unknown backend {self.kind!r}")
        if self.kind == "quadrature" and not (self.h is not None and self.h > 0):
            raise ConfigurationError("quadrature backend needs a positive cell size h")

    @classmethod
    def parse(cls, text: str) -> "Backend":
        """Accepts ``exact``, ``quadrature:H`` and ``quadrature(H)``."""
        text = text.strip()
        if text == "exact":
            return cls()
        m = re.fullmatch(r"quadrature[:(]\s*([0-9.eE+\-/]+)\s*\)?", text)
        if not m:
            raise ConfigurationError(f"cannot parse backend {text!r}")
        raw = m.group(1)
        if "/" in raw:
            num, den = raw.split("/")
            h = float(num) / float(den)
        else:
            h = float(raw)
        return cls("quadrature", h)

    def __str__(self) -> str:
        return "exact" if self.kind == "exact" else f"quadrature:{self.h!r}"


def dyadic_radii(delta: float) -> np.ndarray:
    """``[1, 2] & delta*Z``."""
    lo = math.ceil(1.0 / delta - RADIUS_TOL)
    hi = math.floor(2.0 / delta + RADIUS_TOL)
    return delta * np.arange(lo, hi + 1)


@dataclass(frozen=True)
class OperatorConfig:
    n: int
    k: int
    delta: float
    radius_set: tuple[float, ...] | None = None
    backend: Backend = field(default_factory=Backend)
    # neighborhood width in units of delta (3 gives the widened comparison operator)
    width_factor: float = 1.0

    def __post_init__(self):
        if self.n < 1 or not 0 <= self.k < self.n:
            raise DomainError(f"need 0 <= k < n, got n={self.n}, k={self.k}")
        if not 0 < self.delta < 1:
            raise DomainError(f"delta must lie in (0, 1), got {self.delta}")
        if not self.width_factor > 0:
            raise ConfigurationError("width_factor must be positive")
        radii = dyadic_radii(self.delta) if self.radius_set is None else np.asarray(self.radius_set, float)
        radii = tuple(sorted(float(r) for r in np.ravel(radii)))
        if not radii:
            raise ConfigurationError("radius set is empty")
        if radii[0] < 1 - RADIUS_TOL or radii[-1] > 2 + RADIUS_TOL:
            raise ConfigurationError(f"radii must lie in [1, 2], got {radii[0]}..{radii[-1]}")
        object.__setattr__(self, "radius_set", radii)

    @property
    def width(self) -> float:
        return self.width_factor * self.delta

    def grid(self) -> Grid:
        return Grid.unit(self.n, self.delta)


@dataclass(frozen=True)
class RadiusFunction:
    """A choice of radius ``rho(x_i) in [1, 2] & delta*Z`` for every grid center."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.array(np.ravel(self.values), dtype=float)
        if values.shape != (self.grid.size,):
            raise ConfigurationError(f"need {self.grid.size} radii, got {values.size}")
        if np.any(values < 1 - RADIUS_TOL) or np.any(values > 2 + RADIUS_TOL):
            raise DomainError("radii must lie in [1, 2]")
        steps = values / self.grid.delta
        if np.any(np.abs(steps - np.round(steps)) > RADIUS_TOL * np.maximum(1.0, steps)):
            raise DomainError("radii must be integer multiples of delta")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def constant(cls, grid: Grid, r: float) -> "RadiusFunction":
        return cls(grid, np.full(grid.size, float(r)))

    @classmethod
    def random(cls, grid: Grid, rng: np.random.Generator) -> "RadiusFunction":
        radii = dyadic_radii(grid.delta)
        return cls(grid, rng.choice(radii, size=grid.size))


class MaximalField(GridFunction):
    """Output of an operator on a grid: one value per cell (constant on cells)."""


def _quadrature_window(box: Box, h: float) -> Box:
    lo = tuple(math.floor(v / h + 1e-9) * h for v in box.lo)
    hi = tuple(math.ceil(v / h - 1e-9) * h for v in box.hi)
    return Box(lo, hi)


def _prepare(f: TestFunction, backend: Backend, window: Box) -> TestFunction:
    if backend.kind == "quadrature" and isinstance(f, BoxUnionIndicator):
        return rasterize(f, _quadrature_window(window, backend.h), backend.h)
    return f


def face_average(face: KFace, delta: float, f: TestFunction, backend: Backend | None = None) -> float:
    """Average of ``f`` over the sup-norm ``delta``-neighborhood of ``face``.

    ``f`` is treated as zero outside its domain.
    """
    box = face_neighborhood(face, delta)
    f = _prepare(f, backend or Backend(), box)
    return f.integral(box) / box.volume


def min_face_average(x: Sequence[float], r: float, config: OperatorConfig, f: TestFunction) -> float:
    if not 1 - RADIUS_TOL <= r <= 2 + RADIUS_TOL:
        raise DomainError(f"radius {r} outside [1, 2]")
    return min(
        face_average(face, config.width, f, config.backend)
        for face in enumerate_faces(config.n, config.k, x, r)
    )


def skeleton_maximal_at(x: Sequence[float], config: OperatorConfig, f: TestFunction) -> float:
    """Discretized operator at one point: max over radii of the min over faces."""
    if config.backend.kind == "quadrature" and isinstance(f, BoxUnionIndicator):
        window = Box.cube(x, 2 * (2 + config.width + config.backend.h))
        f = _prepare(f, config.backend, window)
    return max(min_face_average(x, r, config, f) for r in config.radius_set)


def _face_intervals(axis_centers, free, signs, r, width):
    """Per-axis neighborhood intervals of one face orientation at every center."""
    fixed_sign = dict(zip((d for d in range(len(axis_centers)) if d not in free), signs))
    los, his = [], []
    for d, c in enumerate(axis_centers):
        if d in fixed_sign:
            mid = c + fixed_sign[d] * r
            los.append(mid - width)
            his.append(mid + width)
        else:
            los.append(c - r - width)
            his.append(c + r + width)
    return los, his


def _face_average_tensors(config: OperatorConfig, f: TestFunction, grid: Grid, r: float):
    axis_centers = [grid.axis_centers(d) for d in range(grid.n)]
    vol = neighborhood_volume(config.n, config.k, r, config.width)
    for free, signs in face_orientations(config.n, config.k):
        los, his = _face_intervals(axis_centers, free, signs, r, config.width)
        yield f.integrate_product(los, his) / vol


def _field_input(config: OperatorConfig, f: TestFunction, grid: Grid) -> TestFunction:
    if f.n != config.n:
        raise ConfigurationError(f"function has dimension {f.n}, operator expects {config.n}")
    window = support_window(grid.domain)
    return _prepare(clip_to_window(f, window), config.backend, window)


def skeleton_maximal_field(config: OperatorConfig, f: TestFunction, grid: Grid | None = None) -> MaximalField:
    """Evaluate the operator at every cell center of ``grid`` (default ``Q0``).

    ``f`` is clipped to the cube three units around the grid domain, which
    contains every face neighborhood the operator can reach.
    """
    grid = grid or config.grid()
    f = _field_input(config, f, grid)
    best = np.zeros(grid.shape)
    for r in config.radius_set:
        smallest = None
        for avg in _face_average_tensors(config, f, grid, r):
            smallest = avg if smallest is None else np.minimum(smallest, avg, out=smallest)
        np.maximum(best, smallest, out=best)
    np.clip(best, 0.0, None, out=best)
    return MaximalField.from_array(grid, best)


def min_over_faces_field(config: OperatorConfig, f: TestFunction, radii: np.ndarray, grid: Grid | None = None) -> MaximalField:
    """Per-cell min over faces at the prescribed radius ``radii[i]`` of cell ``i``."""
    grid = grid or config.grid()
    f = _field_input(config, f, grid)
    radii = np.asarray(radii, dtype=float)
    centers = grid.centers()
    out = np.full(grid.size, np.inf)
    for free, signs in face_orientations(config.n, config.k):
        lo, hi = _boxes_for_cells(centers, radii, free, signs, config.width)
        vols = neighborhood_volume(config.n, config.k, radii, config.width)
        out = np.minimum(out, f.integrate_boxes(lo, hi) / vols)
    return MaximalField(grid, np.clip(out, 0.0, None))


def _boxes_for_cells(centers, radii, free, signs, width):
    n = centers.shape[1]
    lo = np.empty_like(centers)
    hi = np.empty_like(centers)
    fixed = [d for d in range(n) if d not in free]
    for d in free:
        lo[:, d] = centers[:, d] - radii - width
        hi[:, d] = centers[:, d] + radii + width
    for d, s in zip(fixed, signs):
        mid = centers[:, d] + s * radii
        lo[:, d] = mid - width
        hi[:, d] = mid + width
    return lo, hi


def linearized_field(rho: RadiusFunction, selection, delta: float, f: TestFunction,
                     backend: Backend | None = None) -> MaximalField:
    """Average of ``f`` over the chosen face of ``S_k(x_i, rho(x_i))`` on each cell ``i``.

    ``selection`` is a :class:`~skelmax.selection.FaceSelection` whose family
    consists of the grid centers with radii ``rho`` in grid order.
    """
    grid = rho.grid
    family = selection.family
    if family.m != grid.size or family.n != grid.n:
        raise ConfigurationError("selection family does not match the radius function's grid")
    if not np.allclose(family.centers, grid.centers(), atol=1e-9) or not np.allclose(
        family.radii, rho.values, atol=1e-9
    ):
        raise ConfigurationError("selection family centers/radii differ from the grid and rho")
    if f.n != grid.n:
        raise ConfigurationError(f"function has dimension {f.n}, grid has {grid.n}")
    window = support_window(grid.domain)
    f = _prepare(clip_to_window(f, window), backend or Backend(), window)
    orientations = face_orientations(family.n, family.k)
    centers = grid.centers()
    lo = np.empty_like(centers)
    hi = np.empty_like(centers)
    chosen = np.asarray(selection.chosen)
    for j, (free, signs) in enumerate(orientations):
        rows = chosen == j
        if np.any(rows):
            lo[rows], hi[rows] = _boxes_for_cells(centers[rows], rho.values[rows], free, signs, delta)
    vols = neighborhood_volume(family.n, family.k, rho.values, delta)
    return MaximalField(grid, np.clip(f.integrate_boxes(lo, hi) / vols, 0.0, None))
