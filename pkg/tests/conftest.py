"""Independent oracles shared by the test modules.

Nothing here goes through the product-structured evaluators of the package:
face boxes for the plane are written out by hand and integrals are plain
loops over box pairs.
"""

import numpy as np
import pytest

from skelmax.geometry import Box
from skelmax.grid import BoxUnionIndicator


def monte_carlo_volume(inside, box: Box, samples: int, rng):
    """Estimate of ``|{x in box : inside(x)}|`` and its standard error."""
    lo, hi = np.asarray(box.lo), np.asarray(box.hi)
    pts = lo + rng.random((samples, len(lo))) * (hi - lo)
    hits = inside(pts).astype(float)
    vol = box.volume
    return vol * hits.mean(), vol * hits.std(ddof=1) / np.sqrt(samples)


def plane_face_boxes(x, r, k, w):
    """Hand-written ``w``-neighborhoods of the faces of the square ``x + [-r, r]^2``."""
    x0, x1 = x
    if k == 1:
        return [
            Box((x0 - r - w, x1 - r - w), (x0 + r + w, x1 - r + w)),  # bottom
            Box((x0 - r - w, x1 + r - w), (x0 + r + w, x1 + r + w)),  # top
            Box((x0 - r - w, x1 - r - w), (x0 - r + w, x1 + r + w)),  # left
            Box((x0 + r - w, x1 - r - w), (x0 + r + w, x1 + r + w)),  # right
        ]
    return [
        Box((x0 + sx * r - w, x1 + sy * r - w), (x0 + sx * r + w, x1 + sy * r + w))
        for sx in (-1, 1)
        for sy in (-1, 1)
    ]


def brute_force_field_2d(E: BoxUnionIndicator, k: int, delta: float, radii, width=None):
    """Double loop over cells of ``Q0`` and radii; inner loops over faces and boxes."""
    width = delta if width is None else width
    cells = int(round(1 / delta))
    out = np.zeros((cells, cells))
    for i in range(cells):
        for j in range(cells):
            x = ((i + 0.5) * delta, (j + 0.5) * delta)
            best = 0.0
            for r in radii:
                worst = np.inf
                for face in plane_face_boxes(x, r, k, width):
                    acc = 0.0
                    for b in E.boxes:
                        s0 = min(face.hi[0], b.hi[0]) - max(face.lo[0], b.lo[0])
                        s1 = min(face.hi[1], b.hi[1]) - max(face.lo[1], b.lo[1])
                        if s0 > 0 and s1 > 0:
                            acc += s0 * s1
                    worst = min(worst, acc / face.volume)
                best = max(best, worst)
            out[i, j] = best
    return out


def random_disjoint_union(rng, n=2, count=5, region=((-3.0, 4.0)), grain=None):
    """Disjoint union of random boxes; coordinates snapped to ``grain`` if given."""
    from skelmax.geometry import disjoint_union

    a, b = region
    boxes = []
    for _ in range(count):
        lo = rng.uniform(a, b - 0.2, n)
        hi = lo + rng.uniform(0.05, 2.5, n)
        hi = np.minimum(hi, b)
        if grain:
            lo = np.floor(lo / grain) * grain
            hi = np.maximum(np.ceil(hi / grain) * grain, lo + grain)
        boxes.append(Box(tuple(lo), tuple(hi)))
    return BoxUnionIndicator(tuple(disjoint_union(boxes)), n)


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)
