"""Choosing one face per skeleton with controlled coplanar overlap, and the
multiplicity threshold of the restricted weak-type argument."""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError, InstanceTooLargeError, PreconditionError
from .geometry import Box, PlaneKey, enumerate_faces, face_count, plane_key
from .grid import BoxUnionIndicator, indicator_measure
from .operators import dyadic_radii

BRUTE_FORCE_LIMIT = 10**7


def overlap_exponent(n: int, k: int) -> float:
    """Growth exponent ``1 - (n-k)(2n-1)/(2n^2)`` of the coplanar count."""
    return 1.0 - (n - k) * (2 * n - 1) / (2 * n * n)


@dataclass(frozen=True)
class SkeletonFamily:
    n: int
    k: int
    centers: np.ndarray
    radii: np.ndarray

    def __post_init__(self):
        centers = np.array(self.centers, dtype=float).reshape(-1, self.n)
        radii = np.array(self.radii, dtype=float).ravel()
        if centers.shape[0] < 1 or centers.shape[0] != radii.size:
            raise DomainError("a family needs m >= 1 centers and one radius per center")
        if np.any(radii < 1 - 1e-9) or np.any(radii > 2 + 1e-9):
            raise DomainError("skeleton radii must lie in [1, 2]")
        face_count(self.n, self.k)
        centers.setflags(write=False)
        radii.setflags(write=False)
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "radii", radii)

    @property
    def m(self) -> int:
        return self.radii.size

    def faces(self, i: int):
        return enumerate_faces(self.n, self.k, self.centers[i], self.radii[i])

    def key_table(self) -> list[list[PlaneKey]]:
        return [[plane_key(f) for f in self.faces(i)] for i in range(self.m)]


@dataclass(frozen=True)
class FaceSelection:
    family: SkeletonFamily
    chosen: tuple[int, ...]

    def __post_init__(self):
        chosen = tuple(int(c) for c in self.chosen)
        N = face_count(self.family.n, self.family.k)
        if len(chosen) != self.family.m or any(not 0 <= c < N for c in chosen):
            raise DomainError("need exactly one valid face index per skeleton")
        object.__setattr__(self, "chosen", chosen)

    def faces(self):
        return [self.family.faces(i)[c] for i, c in enumerate(self.chosen)]


@dataclass(frozen=True)
class OverlapReport:
    max_coplanar: int
    m: int
    bound_exponent: float
    groups: int


def overlap_report(sel: FaceSelection) -> OverlapReport:
    counts = Counter(plane_key(f) for f in sel.faces())
    return OverlapReport(
        max_coplanar=max(counts.values()),
        m=sel.family.m,
        bound_exponent=overlap_exponent(sel.family.n, sel.family.k),
        groups=len(counts),
    )


def greedy_select(family: SkeletonFamily) -> FaceSelection:
    """Least-loaded-plane greedy choice, one skeleton at a time in input order.

    Ties go to the lexicographically smallest plane key, then to the lowest
    face index.
    """
    load: Counter = Counter()
    chosen = []
    for keys in family.key_table():
        j = min(range(len(keys)), key=lambda j: (load[keys[j]], keys[j], j))
        load[keys[j]] += 1
        chosen.append(j)
    return FaceSelection(family, tuple(chosen))


def _key_ids(family: SkeletonFamily) -> np.ndarray:
    table = family.key_table()
    index: dict[PlaneKey, int] = {}
    return np.array([[index.setdefault(key, len(index)) for key in row] for row in table])


def brute_force_select(family: SkeletonFamily, limit: int = BRUTE_FORCE_LIMIT) -> FaceSelection:
    """Exhaustive minimizer of the maximal coplanar count.

    Among optimal selections the first one in ``itertools.product`` order is
    returned.
    """
    N = face_count(family.n, family.k)
    m = family.m
    if N**m > limit:
        raise InstanceTooLargeError(f"{N}^{m} selections exceed the limit {limit}")
    ids = _key_ids(family)
    n_keys = int(ids.max()) + 1
    best_val, best_sel = None, None
    # enumerate the last coordinates vectorized, the leading ones in Python
    tail = min(m, max(1, int(math.log(2**16, N))))
    tail_sel = np.array(list(itertools.product(range(N), repeat=tail)), dtype=int)
    tail_keys = ids[np.arange(m - tail, m)[None, :], tail_sel]
    rows = np.arange(tail_sel.shape[0])[:, None]
    for head in itertools.product(range(N), repeat=m - tail):
        counts = np.zeros((tail_sel.shape[0], n_keys), dtype=np.int32)
        for i, c in enumerate(head):
            counts[:, ids[i, c]] += 1
        np.add.at(counts, (np.broadcast_to(rows, tail_keys.shape), tail_keys), 1)
        worst = counts.max(axis=1)
        j = int(np.argmin(worst))
        if best_val is None or worst[j] < best_val:
            best_val = int(worst[j])
            best_sel = tuple(head) + tuple(int(c) for c in tail_sel[j])
            if best_val == 1:
                break
    return FaceSelection(family, best_sel)


def random_family(n: int, k: int, m: int, delta: float, rng: np.random.Generator) -> SkeletonFamily:
    """Centers uniform over the cell centers of ``Q0``, radii uniform in ``[1,2] & delta*Z``."""
    cells = int(round(1.0 / delta))
    centers = (rng.integers(0, cells, size=(m, n)) + 0.5) * delta
    radii = rng.choice(dyadic_radii(delta), size=m)
    return SkeletonFamily(n, k, centers, radii)


def coupled_delta(m: int, n: int) -> float:
    """Dyadic spacing with ``delta^-n >= m``: ``m`` centers fit one per cell."""
    return 2.0 ** -max(3, math.ceil(math.log2(m) / n))


@dataclass(frozen=True)
class GrowthResult:
    n: int
    k: int
    rows: tuple[tuple[int, int, int, int], ...]
    table: tuple[tuple[int, float], ...]
    slope: float
    intercept: float
    predicted_exponent: float


def _task_seed(rng_seed: int, m: int, trial: int) -> int:
    return int(np.random.SeedSequence([rng_seed, m, trial]).generate_state(1, dtype=np.uint32)[0])


def coplanar_growth_experiment(
    n: int,
    k: int,
    m_list: Sequence[int],
    trials: int,
    rng_seed: int,
    delta: float | None = None,
) -> GrowthResult:
    """Mean greedy ``max_coplanar`` of random families, with a log-log slope fit.

    Without an explicit ``delta`` the grid is refined with ``m`` (see
    :func:`coupled_delta`), mirroring families indexed by the cells of ``Q0``.
    """
    rows = []
    table = []
    for m in m_list:
        d = delta if delta is not None else coupled_delta(m, n)
        vals = []
        for t in range(trials):
            seed = _task_seed(rng_seed, m, t)
            fam = random_family(n, k, m, d, np.random.default_rng(seed))
            mc = overlap_report(greedy_select(fam)).max_coplanar
            rows.append((int(m), t, mc, seed))
            vals.append(mc)
        table.append((int(m), float(np.mean(vals))))
    slope, intercept = (float("nan"), float("nan"))
    if len(table) >= 2:
        x = np.log([m for m, _ in table])
        y = np.log([v for _, v in table])
        slope, intercept = (float(c) for c in np.polyfit(x, y, 1))
    return GrowthResult(n, k, tuple(rows), tuple(table), slope, intercept, overlap_exponent(n, k))


@dataclass(frozen=True)
class Arrangement:
    """Elementary cells cut out by a set of box coordinates."""

    coords: tuple[np.ndarray, ...]

    @classmethod
    def from_boxes(cls, boxes: Sequence[Box]) -> "Arrangement":
        n = boxes[0].n
        return cls(tuple(np.unique([v for b in boxes for v in (b.lo[d], b.hi[d])]) for d in range(n)))

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(c) - 1 for c in self.coords)

    def cell_volumes(self) -> np.ndarray:
        out = np.ones(())
        for c in self.coords:
            out = np.multiply.outer(out, np.diff(c))
        return out

    def mask(self, box: Box) -> np.ndarray:
        m = np.zeros(self.shape, dtype=bool)
        m[tuple(
            slice(np.searchsorted(c, lo), np.searchsorted(c, hi))
            for c, lo, hi in zip(self.coords, box.lo, box.hi)
        )] = True
        return m

    def locate(self, points) -> tuple[np.ndarray, ...]:
        pts = np.atleast_2d(points)
        return tuple(np.searchsorted(c, pts[:, d], side="right") - 1 for d, c in enumerate(self.coords))


@dataclass(frozen=True)
class MultiplicityProfile:
    faces: tuple[Box, ...]
    E: BoxUnionIndicator
    lam: float
    arrangement: Arrangement
    upsilon: np.ndarray
    mu: int
    delta: float
    tau: float
    lhs: float
    rhs: float

    @property
    def m(self) -> int:
        return len(self.faces)

    @property
    def measure_bound_holds(self) -> bool:
        """``mu * |E| >= (lambda/2) * m * delta^tau``."""
        return self.lhs >= self.rhs

    def upsilon_at(self, points) -> np.ndarray:
        """Multiplicity at points in the interior of arrangement cells."""
        idx = self.arrangement.locate(points)
        shape = self.arrangement.shape
        inside = np.all([(i >= 0) & (i < s) for i, s in zip(idx, shape)], axis=0)
        out = np.zeros(len(idx[0]), dtype=int)
        clipped = tuple(np.clip(i, 0, s - 1) for i, s in zip(idx, shape))
        out[inside] = self.upsilon[clipped][inside]
        return out


def multiplicity_mu(faces: Sequence[Box], E: BoxUnionIndicator, lam: float,
                    delta: float, tau: float) -> MultiplicityProfile:
    """Multiplicity of ``faces & E`` and the smallest threshold ``mu`` such that at
    least half of the faces keep a ``lam/2`` fraction of their volume where the
    multiplicity is at most ``mu``.

    Everything is evaluated exactly on the arrangement of all box coordinates.
    """
    faces = tuple(faces)
    if not faces:
        raise PreconditionError("need at least one face neighborhood")
    if not 0 < lam <= 1:
        raise DomainError(f"lambda must lie in (0, 1], got {lam}")
    for j, b in enumerate(faces):
        if not E.integral(b) > lam * b.volume:
            raise PreconditionError(f"face {j} has |face & E| <= lambda |face|")
    arr = Arrangement.from_boxes(list(faces) + list(E.boxes))
    vol = arr.cell_volumes()
    in_E = np.zeros(arr.shape, dtype=bool)
    for b in E.boxes:
        in_E |= arr.mask(b)
    masks = [arr.mask(b) & in_E for b in faces]
    upsilon = np.sum(masks, axis=0).astype(int)
    m = len(faces)
    # level[j, t] = |{x in face_j & E : upsilon(x) <= t}|
    level = np.array([
        np.cumsum(np.bincount(upsilon[mk], weights=vol[mk], minlength=m + 1)) for mk in masks
    ])
    need = np.array([lam / 2.0 * b.volume for b in faces])
    enough = (level >= need[:, None]).sum(axis=0)
    mu = int(np.argmax(enough >= m / 2.0))
    lhs = mu * indicator_measure(E)
    rhs = lam / 2.0 * m * delta**tau
    return MultiplicityProfile(faces, E, lam, arr, upsilon, mu, delta, tau, lhs, rhs)
