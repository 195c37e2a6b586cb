import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import monte_carlo_volume
from skelmax.errors import DomainError
from skelmax.geometry import (
    Box,
    PlaneKey,
    box_intersection_volume,
    disjoint_union,
    enumerate_faces,
    face_count,
    face_neighborhood,
    plane_key,
)

coord = st.floats(-5, 5, allow_nan=False, allow_infinity=False)


@st.composite
def boxes(draw, n=2):
    lo = [draw(coord) for _ in range(n)]
    sides = [draw(st.floats(0, 4)) for _ in range(n)]
    return Box(tuple(lo), tuple(a + s for a, s in zip(lo, sides)))


@st.composite
def nk_pairs(draw):
    n = draw(st.integers(1, 4))
    k = draw(st.integers(0, n - 1))
    return n, k


@pytest.mark.parametrize("n,k,expected", [(2, 1, 4), (3, 1, 12), (2, 0, 4), (3, 2, 6), (3, 0, 8)])
def test_face_counts(n, k, expected):
    faces = enumerate_faces(n, k, (0.0,) * n, 1.0)
    assert len(faces) == expected == face_count(n, k)


def test_square_sides():
    faces = enumerate_faces(2, 1, (0.0, 0.0), 1.0)
    got = {(f.as_box().lo, f.as_box().hi) for f in faces}
    assert got == {
        ((-1.0, -1.0), (1.0, -1.0)),
        ((-1.0, 1.0), (1.0, 1.0)),
        ((-1.0, -1.0), (-1.0, 1.0)),
        ((1.0, -1.0), (1.0, 1.0)),
    }


def test_corner_faces_are_points():
    faces = enumerate_faces(2, 0, (0.0, 0.0), 1.0)
    assert {f.as_box().lo for f in faces} == {(-1.0, -1.0), (-1.0, 1.0), (1.0, -1.0), (1.0, 1.0)}
    assert all(f.as_box().volume == 0 for f in faces)


@pytest.mark.parametrize("n,k", [(2, 2), (2, 3), (2, -1), (0, 0)])
def test_invalid_dimensions(n, k):
    with pytest.raises(DomainError):
        enumerate_faces(n, k, (0.0,) * max(n, 1), 1.0)


def test_nonpositive_radius():
    with pytest.raises(DomainError):
        enumerate_faces(2, 1, (0.0, 0.0), 0.0)


@given(nk_pairs(), st.floats(1, 2), st.lists(coord, min_size=4, max_size=4))
@settings(max_examples=60, deadline=None)
def test_faces_distinct_and_on_cube_boundary(nk, r, center):
    n, k = nk
    x = np.array(center[:n])
    faces = enumerate_faces(n, k, x, r)
    assert len(faces) == 2 ** (n - k) * math.comb(n, k)
    assert len({(f.free, f.signs) for f in faces}) == len(faces)
    for f in faces:
        b = f.as_box()
        assert f.measure == pytest.approx((2 * r) ** k)
        # corners of the face are at sup-distance exactly r from the center
        for corner in (b.lo, b.hi):
            assert np.max(np.abs(np.array(corner) - x)) == pytest.approx(r)


def test_neighborhood_examples():
    right = [f for f in enumerate_faces(2, 1, (0.0, 0.0), 1.0) if f.free == (1,) and f.signs == (1,)][0]
    assert face_neighborhood(right, 0.1).volume == pytest.approx(2.2 * 0.2)
    corner = enumerate_faces(2, 0, (0.0, 0.0), 1.0)[0]
    assert face_neighborhood(corner, 0.5).volume == pytest.approx(1.0)


def test_neighborhood_requires_positive_width():
    face = enumerate_faces(2, 1, (0.0, 0.0), 1.0)[0]
    with pytest.raises(DomainError):
        face_neighborhood(face, 0.0)


@given(nk_pairs(), st.floats(1, 2), st.floats(1e-3, 0.5))
@settings(max_examples=60, deadline=None)
def test_neighborhood_contains_face_and_has_closed_form_volume(nk, r, delta):
    n, k = nk
    for f in enumerate_faces(n, k, (0.25,) * n, r):
        nb = face_neighborhood(f, delta)
        assert nb.contains_box(f.as_box())
        assert nb.volume == pytest.approx((2 * r + 2 * delta) ** k * (2 * delta) ** (n - k), rel=1e-12)


def test_intersection_examples(rng):
    unit = Box.unit(2)
    assert box_intersection_volume(unit, unit) == 1.0
    assert box_intersection_volume(unit, Box((2.0, 2.0), (3.0, 3.0))) == 0.0
    b = Box((0.5, 0.0), (1.5, 1.0))
    assert box_intersection_volume(unit, b) == 0.5
    est, se = monte_carlo_volume(lambda p: np.all((p >= b.lo) & (p <= b.hi), axis=1), unit, 200_000, rng)
    assert abs(est - 0.5) <= 3 * se


@given(boxes(), boxes())
def test_intersection_symmetric_and_bounded(a, b):
    v = box_intersection_volume(a, b)
    assert v == box_intersection_volume(b, a)
    assert 0.0 <= v <= min(a.volume, b.volume) + 1e-12


@pytest.mark.parametrize("seed", range(8))
def test_intersection_matches_monte_carlo(seed):
    rng = np.random.default_rng(seed)
    lo1, lo2 = rng.uniform(-1, 1, 3), rng.uniform(-1, 1, 3)
    a = Box(tuple(lo1), tuple(lo1 + rng.uniform(0.2, 2, 3)))
    b = Box(tuple(lo2), tuple(lo2 + rng.uniform(0.2, 2, 3)))
    est, se = monte_carlo_volume(lambda p: np.all((p >= b.lo) & (p <= b.hi), axis=1), a, 100_000, rng)
    assert abs(est - box_intersection_volume(a, b)) <= 3 * se + 1e-12


@given(st.lists(boxes(), min_size=1, max_size=5))
@settings(max_examples=50, deadline=None)
def test_disjoint_union_preserves_union(bs):
    parts = disjoint_union(bs)
    for i, a in enumerate(parts):
        for b in parts[i + 1 :]:
            assert box_intersection_volume(a, b) == 0.0
    rng = np.random.default_rng(0)
    pts = rng.uniform(-5, 9, (500, 2))
    in_orig = np.zeros(len(pts), bool)
    for b in bs:
        if b.volume > 0:
            in_orig |= np.all((pts > b.lo) & (pts < b.hi), axis=1)
    in_parts = np.zeros(len(pts), bool)
    for b in parts:
        in_parts |= np.all((pts >= b.lo) & (pts <= b.hi), axis=1)
    assert np.all(in_orig <= in_parts)
    assert sum(p.volume for p in parts) <= sum(b.volume for b in bs) + 1e-9


def test_plane_keys():
    sq = enumerate_faces(2, 1, (0.0, 0.0), 1.0)
    left = [f for f in sq if f.free == (1,) and f.signs == (-1,)][0]
    right = [f for f in sq if f.free == (1,) and f.signs == (1,)][0]
    assert plane_key(left) != plane_key(right)
    # another square whose left side sits on x = 1
    other = enumerate_faces(2, 1, (2.5, 7.0), 1.5)
    other_left = [f for f in other if f.free == (1,) and f.signs == (-1,)][0]
    assert plane_key(other_left) == plane_key(right)
    cube = enumerate_faces(3, 2, (0.0, 0.0, 0.0), 1.0)
    top = [f for f in cube if f.free == (0, 1) and f.signs == (1,)][0]
    assert plane_key(top) == PlaneKey((0, 1), (1.0,))


def test_plane_key_absorbs_rounding_noise():
    a = enumerate_faces(2, 1, (0.1 + 0.2, 0.0), 1.0)[3]
    b = enumerate_faces(2, 1, (0.3, 5.0), 1.0)[3]
    assert plane_key(a) == plane_key(b)


def test_box_rejects_inverted_corners():
    with pytest.raises(DomainError):
        Box((1.0, 0.0), (0.0, 1.0))
