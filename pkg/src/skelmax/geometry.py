"""Axis-aligned geometry: boxes, k-faces of cubes, skeletons and their neighborhoods.

All neighborhoods are taken in the sup-norm, so the neighborhood of a face is
again an axis-aligned box and every average reduces to box intersections.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError

COPLANAR_TOL = 1e-9
_COPLANAR_DIGITS = 9


@dataclass(frozen=True)
class Box:
    """Closed axis-aligned box ``[lo[0], hi[0]] x ... x [lo[n-1], hi[n-1]]``."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lo)
        hi = tuple(float(v) for v in self.hi)
        if len(lo) != len(hi):
            raise DomainError(f"lo has {len(lo)} coordinates but hi has {len(hi)}")
        if any(a > b for a, b in zip(lo, hi)):
            raise DomainError(f"inverted box: lo={lo}, hi={hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def cube(cls, center: Sequence[float], side: float) -> "Box":
        half = side / 2.0
        return cls(tuple(c - half for c in center), tuple(c + half for c in center))

    @classmethod
    def unit(cls, n: int) -> "Box":
        return cls((0.0,) * n, (1.0,) * n)

    @property
    def n(self) -> int:
        return len(self.lo)

    @property
    def sides(self) -> tuple[float, ...]:
        return tuple(b - a for a, b in zip(self.lo, self.hi))

    @property
    def volume(self) -> float:
        return math.prod(self.sides)

    @property
    def center(self) -> tuple[float, ...]:
        return tuple((a + b) / 2.0 for a, b in zip(self.lo, self.hi))

    def expand(self, width: float) -> "Box":
        return Box(tuple(a - width for a in self.lo), tuple(b + width for b in self.hi))

    def translate(self, shift: Sequence[float]) -> "Box":
        return Box(
            tuple(a + s for a, s in zip(self.lo, shift)),
            tuple(b + s for b, s in zip(self.hi, shift)),
        )

    def contains_point(self, x: Sequence[float], tol: float = 0.0) -> bool:
        return all(a - tol <= v <= b + tol for a, v, b in zip(self.lo, x, self.hi))

    def contains_box(self, other: "Box", tol: float = 0.0) -> bool:
        return all(
            a - tol <= c and d <= b + tol
            for a, b, c, d in zip(self.lo, self.hi, other.lo, other.hi)
        )

    def intersection(self, other: "Box") -> "Box | None":
        lo = tuple(max(a, c) for a, c in zip(self.lo, other.lo))
        hi = tuple(min(b, d) for b, d in zip(self.hi, other.hi))
        if any(a > b for a, b in zip(lo, hi)):
            return None
        return Box(lo, hi)


def box_intersection_volume(a: Box, b: Box) -> float:
    """Lebesgue measure of ``a & b`` (zero for disjoint or touching boxes)."""
    vol = 1.0
    for alo, ahi, blo, bhi in zip(a.lo, a.hi, b.lo, b.hi):
        side = min(ahi, bhi) - max(alo, blo)
        if side <= 0.0:
            return 0.0
        vol *= side
    return vol


def disjoint_union(boxes: Iterable[Box]) -> list[Box]:
    """Split a union of possibly overlapping boxes into pairwise-disjoint boxes.

    Sweeps the arrangement induced by all box coordinates and returns the
    covered elementary cells, in lexicographic order of their lower corners.
    """
    boxes = [b for b in boxes if b.volume > 0.0]
    if not boxes:
        return []
    n = boxes[0].n
    coords = [np.unique([v for b in boxes for v in (b.lo[d], b.hi[d])]) for d in range(n)]
    covered = np.zeros(tuple(len(c) - 1 for c in coords), dtype=bool)
    for b in boxes:
        index = tuple(
            slice(np.searchsorted(coords[d], b.lo[d]), np.searchsorted(coords[d], b.hi[d]))
            for d in range(n)
        )
        covered[index] = True
    out = []
    for idx in zip(*np.nonzero(covered)):
        out.append(
            Box(
                tuple(coords[d][i] for d, i in enumerate(idx)),
                tuple(coords[d][i + 1] for d, i in enumerate(idx)),
            )
        )
    return out


@dataclass(frozen=True, order=True)
class PlaneKey:
    """Identifies the affine translate of a coordinate k-plane holding a face.

    ``free`` lists the axes spanning the plane, ``offsets`` the values of the
    remaining coordinates (rounded to ``COPLANAR_TOL``).
    """

    free: tuple[int, ...]
    offsets: tuple[float, ...]


@dataclass(frozen=True)
class KFace:
    """A k-dimensional face of the cube ``center + [-r, r]^n``.

    Coordinates on ``free`` axes range over ``[center - r, center + r]``; on
    each remaining axis (in increasing order) the coordinate is pinned to
    ``center + sign * r``.
    """

    n: int
    k: int
    free: tuple[int, ...]
    signs: tuple[int, ...]
    center: tuple[float, ...]
    r: float

    def __post_init__(self):
        if len(self.free) != self.k or len(set(self.free)) != self.k:
            raise DomainError(f"a {self.k}-face needs {self.k} distinct free axes, got {self.free}")
        if len(self.signs) != self.n - self.k or any(s not in (-1, 1) for s in self.signs):
            raise DomainError(f"need {self.n - self.k} signs in {{-1, +1}}, got {self.signs}")
        if len(self.center) != self.n:
            raise DomainError("center has the wrong dimension")

    @property
    def fixed(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.n) if i not in self.free)

    @property
    def sign_map(self) -> dict[int, int]:
        return dict(zip(self.fixed, self.signs))

    @property
    def measure(self) -> float:
        """k-dimensional measure of the face."""
        return (2.0 * self.r) ** self.k

    def as_box(self) -> Box:
        """The face as a degenerate box (zero extent on the fixed axes)."""
        signs = self.sign_map
        lo, hi = [], []
        for i, c in enumerate(self.center):
            if i in signs:
                v = c + signs[i] * self.r
                lo.append(v)
                hi.append(v)
            else:
                lo.append(c - self.r)
                hi.append(c + self.r)
        return Box(tuple(lo), tuple(hi))


def _check_nk(n: int, k: int) -> None:
    if n < 1 or not 0 <= k < n:
        raise DomainError(f"need 0 <= k < n, got n={n}, k={k}")


def face_count(n: int, k: int) -> int:
    _check_nk(n, k)
    return 2 ** (n - k) * math.comb(n, k)


def face_orientations(n: int, k: int) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """All ``(free axes, signs)`` pairs in the canonical enumeration order."""
    _check_nk(n, k)
    return [
        (free, signs)
        for free in itertools.combinations(range(n), k)
        for signs in itertools.product((-1, 1), repeat=n - k)
    ]


def enumerate_faces(n: int, k: int, center: Sequence[float], r: float) -> list[KFace]:
    """The ``2^(n-k) * C(n, k)`` k-faces of the cube of half side ``r`` at ``center``."""
    _check_nk(n, k)
    if not r > 0:
        raise DomainError(f"half side must be positive, got {r}")
    center = tuple(float(c) for c in center)
    if len(center) != n:
        raise DomainError(f"center has {len(center)} coordinates, expected {n}")
    return [
        KFace(n, k, free, signs, center, float(r))
        for free, signs in face_orientations(n, k)
    ]


def face_neighborhood(face: KFace, delta: float) -> Box:
    """Sup-norm ``delta``-neighborhood of a face; volume ``(2r+2delta)^k (2delta)^(n-k)``."""
    if not delta > 0:
        raise DomainError(f"delta must be positive, got {delta}")
    return face.as_box().expand(delta)


def neighborhood_volume(n: int, k: int, r: float, delta: float) -> float:
    return (2.0 * r + 2.0 * delta) ** k * (2.0 * delta) ** (n - k)


def _canonical(v: float) -> float:
    return round(v, _COPLANAR_DIGITS) + 0.0


def plane_key(face: KFace) -> PlaneKey:
    signs = face.sign_map
    offsets = tuple(_canonical(face.center[j] + signs[j] * face.r) for j in face.fixed)
    return PlaneKey(tuple(sorted(face.free)), offsets)


def skeleton_neighborhood(n: int, k: int, center: Sequence[float], r: float, width: float) -> list[Box]:
    """Disjoint boxes covering the sup-norm ``width``-neighborhood of a k-skeleton."""
    faces = enumerate_faces(n, k, center, r)
    return disjoint_union(face_neighborhood(f, width) for f in faces)
