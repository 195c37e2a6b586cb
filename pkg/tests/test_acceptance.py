"""Acceptance gate.  Each test prints one ``[PASS]``/``[FAIL]`` line.

Run alone with ``pytest tests/test_acceptance.py -v``; the summary lines are
printed even with output capture on.
"""

import math
from fractions import Fraction

import numpy as np
import pytest

from conftest import brute_force_field_2d, random_disjoint_union
from skelmax.geometry import Box, disjoint_union, enumerate_faces, face_neighborhood
from skelmax.grid import BoxUnionIndicator
from skelmax.operators import Backend, OperatorConfig, dyadic_radii, face_average, skeleton_maximal_field
from skelmax.scaling import (
    SKELETON,
    big_cube_growth,
    critical_q,
    norm_scan,
    predicted_exponent,
    skeleton_extremizer,
    weak_type_params,
)
from skelmax.selection import (
    brute_force_select,
    coplanar_growth_experiment,
    greedy_select,
    multiplicity_mu,
    overlap_report,
    random_family,
)

DELTAS = [2.0**-j for j in range(4, 10)]


@pytest.fixture
def report(capsys):
    def emit(number, title, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title}: {detail}")
        assert ok, detail

    return emit


def test_criterion_01_skeleton_exponent(report):
    pred = predicted_exponent(2, 8, 2, 1)
    series = norm_scan(DELTAS, ["skeleton"], 2, 8, OperatorConfig(2, 1, DELTAS[0]))
    ok = pred.regime == SKELETON and abs(series.slope - (-0.25)) <= 0.1
    report(1, "skeleton-dominated slope", ok,
           f"fitted {series.slope:.5f} vs -0.25 +/- 0.1 (R^2 {series.r2:.5f})")


def test_criterion_02_diagonal_upper_bound(report):
    e = predicted_exponent(2, 2, 2, 1).exponent
    series = norm_scan(DELTAS, ["skeleton", "cell", "random"], 2, 2, OperatorConfig(2, 1, DELTAS[0]), seed=0)
    C = max(r for d, _, r in series.rows if d == DELTAS[0]) / DELTAS[0] ** e
    worst = max(r / (C * d**e) for d, _, r in series.rows)
    report(2, "diagonal upper bound", e == -0.125 and worst <= 1.0,
           f"C={C:.5f}, max ratio/(C delta^-1/8) = {worst:.5f} over {len(series.rows)} points")


def test_criterion_03_lower_bound_witness(report):
    delta = 2.0**-6
    field = skeleton_maximal_field(OperatorConfig(2, 1, delta), skeleton_extremizer(2, 1, delta))
    # every cell meeting the closed ball of radius delta about x0
    dist = np.max(np.abs(field.grid.centers() - 0.5), axis=1)
    near = dist <= delta + delta / 2
    low = float(field.values[near].min())
    report(3, "extremizer witness", low >= 1.0, f"min field {low!r} on {near.sum()} cells")


def test_criterion_04_phase_boundary(report):
    rng = np.random.default_rng(4)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(1, 9))
        k = int(rng.integers(0, n))
        p = float(rng.uniform(1.0001, 20))
        q = critical_q(n, k) * p
        worst = max(worst, abs((k - n) / (2 * n * p) - (n / q - (n - k) / p)))
    report(4, "phase-boundary continuity", worst <= 1e-12, f"max gap {worst:.3e} over 100 samples")


def test_criterion_05_weak_type_params(report):
    w = weak_type_params(Fraction(0), Fraction(5, 8), tau=1, n=2)
    got = (w.p, w.q, w.gamma)
    report(5, "weak-type parameters", got == (1, Fraction(8, 3), Fraction(1, 4)),
           f"(p, q, gamma) = ({w.p}, {w.q}, {w.gamma})")


def _multiplicity_instance(rng, k):
    delta = float(rng.choice([1 / 8, 1 / 16, 1 / 32]))
    fam = random_family(2, k, int(rng.integers(1, 16)), delta, rng)
    faces = [face_neighborhood(fam.faces(i)[int(rng.integers(0, len(fam.faces(i))))], delta)
             for i in range(fam.m)]
    half = delta / 2
    pieces = []
    for f in faces:
        lo = np.array(f.lo)
        span = np.round((np.array(f.hi) - lo) / half).astype(int)
        a = np.array([rng.integers(0, s) for s in span])
        b = np.array([rng.integers(i + 1, s + 1) for i, s in zip(a, span)])
        pieces.append(Box(tuple(lo + a * half), tuple(lo + b * half)))
    E = BoxUnionIndicator(tuple(disjoint_union(pieces)), 2)
    lam = float(rng.uniform(0.02, 0.6))
    kept = [f for f in faces if E.integral(f) > lam * f.volume]
    return delta, kept, E, lam


def test_criterion_06_multiplicity_inequality(report):
    rng = np.random.default_rng(6)
    tested = violations = 0
    while tested < 240:
        k = tested % 2
        delta, faces, E, lam = _multiplicity_instance(rng, k)
        if not faces:
            continue
        prof = multiplicity_mu(faces, E, lam, delta, 2 - k)
        tested += 1
        violations += not prof.lhs >= prof.rhs
    report(6, "multiplicity inequality", violations == 0,
           f"{violations} violations on {tested} instances (k in {{0, 1}})")


def test_criterion_07_coplanar_growth(report):
    res = coplanar_growth_experiment(2, 1, [64, 128, 256, 512, 1024, 2048, 4096], 8, 7)
    rng = np.random.default_rng(7)
    ratios = []
    for _ in range(60):
        fam = random_family(2, 1, int(rng.integers(1, 9)), 1 / 4, rng)
        g = overlap_report(greedy_select(fam)).max_coplanar
        b = overlap_report(brute_force_select(fam)).max_coplanar
        ratios.append(g / b)
    ok = res.slope <= 5 / 8 + 0.1 and min(ratios) >= 1.0
    report(7, "coplanar growth", ok,
           f"slope {res.slope:.4f} (bound 0.725); greedy/optimum on 60 small families: "
           f"mean {np.mean(ratios):.3f}, max {max(ratios):.3f}, min {min(ratios):.3f}")


def test_criterion_08_oracle_equivalence(report):
    delta = 0.25
    worst = 0.0
    for seed in range(20):
        rng = np.random.default_rng(800 + seed)
        k = seed % 2
        E = random_disjoint_union(rng, count=int(rng.integers(1, 7)))
        fast = skeleton_maximal_field(OperatorConfig(2, k, delta), E).as_array()
        slow = brute_force_field_2d(E, k, delta, dyadic_radii(delta))
        worst = max(worst, float(np.max(np.abs(fast - slow))))
    report(8, "oracle equivalence", worst <= 1e-12, f"max |fast - brute force| = {worst:.3e} on 20 inputs")


def test_criterion_09_backend_agreement(report):
    rng = np.random.default_rng(9)
    delta = 1 / 8
    h = delta / 4
    quad = Backend("quadrature", h)
    worst = 0.0
    for _ in range(100):
        E = random_disjoint_union(rng, count=int(rng.integers(1, 7)))
        k = int(rng.integers(0, 2))
        c = (rng.integers(0, 8, 2) + 0.5) * delta
        faces = enumerate_faces(2, k, c, float(rng.choice(dyadic_radii(delta))))
        face = faces[int(rng.integers(0, len(faces)))]
        worst = max(worst, abs(face_average(face, delta, E) - face_average(face, delta, E, quad)))
    report(9, "backend agreement", worst <= 5 * h, f"max |exact - quadrature| = {worst:.5f} <= 5h = {5 * h}")


def test_criterion_10_big_cube(report):
    n, k, delta = 2, 1, 0.25
    worst = 0.0
    inner = True
    for p, q in [(2, 1), (2, 2), (3, 1.5)]:
        for row in big_cube_growth([8, 16], p, q, n, k, delta):
            worst = max(worst, abs(row.ratio_bound - math.pow(row.N - 6, n / q) / math.pow(row.N, n / p)))
            inner &= row.min_inner_field >= 1.0
    report(10, "big-cube growth", worst <= 1e-12 and inner,
           f"max formula gap {worst:.2e}; field >= 1 on every inner cell: {inner}")
