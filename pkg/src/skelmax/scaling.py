"""Predicted delta-exponents, weak-type bookkeeping, extremal test functions and
empirical norm scans of the skeleton maximal operator."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import ConfigurationError, DomainError
from .geometry import Box, disjoint_union, skeleton_neighborhood
from .grid import BoxUnionIndicator, Grid, TestFunction, indicator_measure, lp_norm, lp_norm_of
from .operators import OperatorConfig, skeleton_maximal_field

DIAGONAL = "diagonal-dominated"
SKELETON = "skeleton-dominated"


def critical_q(n: int, k: int):
    """``q* = 2n^2 / ((n-k)(2n-1))``."""
    if n < 1 or not 0 <= k < n:
        raise DomainError(f"need 0 <= k < n, got n={n}, k={k}")
    return 2 * n * n / ((n - k) * (2 * n - 1))


def _exponent(p, q, n, k):
    qs = critical_q(n, k)
    if q <= qs * p:
        return DIAGONAL, (k - n) / (2 * n * p)
    return SKELETON, n / q - (n - k) / p


@dataclass(frozen=True)
class ExponentPrediction:
    p: float
    q: float
    n: int
    k: int
    q_star: float
    regime: str
    exponent: float


def predicted_exponent(p: float, q: float, n: int, k: int) -> ExponentPrediction:
    """Exponent ``e`` with ``||M^k_delta||_{L^p -> L^q} ~ delta^e``."""
    if not 1 < p < math.inf or not q < math.inf:
        raise DomainError(f"need 1 < p <= q < inf, got p={p}, q={q}")
    if q < p:
        raise DomainError(
            f"q={q} < p={p}: the operator is unbounded there (indicators of large cubes, see big_cube_growth)"
        )
    regime, e = _exponent(p, q, n, k)
    return ExponentPrediction(p, q, n, k, critical_q(n, k), regime, e)


def weak_exponent(q: float, n: int, k: int) -> float:
    """Exponent of the restricted weak-type ``(1, q)`` constant."""
    return _exponent(1, q, n, k)[1]


@dataclass(frozen=True)
class WeakTypeParams:
    alpha: float
    beta: float
    H: float
    tau: float
    n: int
    p: float
    q: float
    gamma: float

    def constant(self, delta: float, C: float = 1.0) -> float:
        """``C * H^(1/p) * delta^(-gamma)``."""
        return C * self.H ** (1 / self.p) * delta ** (-self.gamma)


def weak_type_params(alpha, beta, H=1, tau=0, n=1) -> WeakTypeParams:
    """Restricted weak-type exponents implied by ``mu <= H lambda^-alpha m^beta``.

    Arithmetic is generic, so :class:`fractions.Fraction` inputs stay exact.
    """
    if alpha < 0:
        raise DomainError(f"alpha must be non-negative, got {alpha}")
    if beta >= 1:
        raise DomainError(f"beta must be < 1, got {beta}")
    if not H > 0:
        raise DomainError("H must be positive")
    p = alpha + 1
    q = p / (1 - beta)
    gamma = tau / p - n / q
    return WeakTypeParams(alpha, beta, H, tau, n, p, q, gamma)


def skeleton_extremizer(n: int, k: int, delta: float, x0: Sequence[float] | None = None) -> BoxUnionIndicator:
    """Indicator of the ``6 delta``-neighborhood of ``S_k(x0, 1)`` as disjoint boxes."""
    if not 0 < delta < 1 / 12:
        raise DomainError(f"the extremizer needs 0 < delta < 1/12, got {delta}")
    x0 = tuple(x0) if x0 is not None else (0.5,) * n
    return BoxUnionIndicator(tuple(skeleton_neighborhood(n, k, x0, 1.0, 6 * delta)), n)


def cube_indicator(n: int, side: float, lo: float = 0.0) -> BoxUnionIndicator:
    return BoxUnionIndicator((Box((lo,) * n, (lo + side,) * n),), n)


def single_cell_indicator(n: int, delta: float, x0: Sequence[float] | None = None) -> BoxUnionIndicator:
    """The ``delta``-cell of the ``Q0`` grid with lower corner at ``x0``."""
    x0 = tuple(x0) if x0 is not None else (0.5,) * n
    return BoxUnionIndicator((Box(x0, tuple(v + delta for v in x0)),), n)


def random_box_union(n: int, seed: int, count: int = 6, region: Box | None = None) -> BoxUnionIndicator:
    """Seeded union of ``count`` random boxes inside ``region`` (default ``7Q0``)."""
    region = region or Box((-3.0,) * n, (4.0,) * n)
    rng = np.random.default_rng(seed)
    lo = np.asarray(region.lo)
    span = np.asarray(region.sides)
    boxes = []
    for _ in range(count):
        size = rng.uniform(0.05, 0.5, n) * span
        start = lo + rng.uniform(0, 1, n) * (span - size)
        boxes.append(Box(tuple(start), tuple(start + size)))
    return BoxUnionIndicator(tuple(disjoint_union(boxes)), n)


def constant_indicator(n: int) -> BoxUnionIndicator:
    """``1`` on ``7Q0``, the whole region the operator sees from ``Q0``."""
    return BoxUnionIndicator((Box((-3.0,) * n, (4.0,) * n),), n)


CANDIDATES: dict[str, Callable[[int, int, float, int], BoxUnionIndicator]] = {
    "skeleton": lambda n, k, delta, seed: skeleton_extremizer(n, k, delta),
    "cell": lambda n, k, delta, seed: single_cell_indicator(n, delta),
    "random": lambda n, k, delta, seed: random_box_union(n, seed),
    "constant": lambda n, k, delta, seed: constant_indicator(n),
}


@dataclass(frozen=True)
class BigCubeRow:
    N: int
    ratio_bound: float
    min_inner_field: float
    inner_ok: bool


def big_cube_growth(N_list: Iterable[int], p: float, q: float, n: int, k: int, delta: float) -> list[BigCubeRow]:
    """Lower bounds ``(N-6)^(n/q) N^(-n/p)`` from indicators of ``[0, N]^n``.

    The operator is also evaluated on every cell of the concentric cube of
    side ``N - 6`` to confirm it is at least 1 there.
    """
    rows = []
    config = OperatorConfig(n, k, delta)
    for N in N_list:
        if N < 8:
            raise DomainError(f"need N >= 8, got {N}")
        f = cube_indicator(n, N)
        inner = Grid(Box((3.0,) * n, (N - 3.0,) * n), delta)
        field = skeleton_maximal_field(config, f, inner)
        lowest = float(field.values.min())
        rows.append(BigCubeRow(int(N), (N - 6) ** (n / q) * N ** (-n / p), lowest, lowest >= 1.0))
    return rows


def _global_grid(f: TestFunction, config: OperatorConfig) -> Grid:
    """Union of the unit tiles ``Q_z`` on which ``M f`` can be non-zero."""
    if isinstance(f, BoxUnionIndicator):
        bbox = f.bounding_box()
    else:
        bbox = f.grid.domain
    if bbox is None:
        return config.grid()
    reach = 2.0 + config.width
    lo = tuple(math.floor(v - reach) for v in bbox.lo)
    hi = tuple(math.ceil(v + reach) for v in bbox.hi)
    return Grid(Box(lo, hi), config.delta)


def norm_ratio(f: TestFunction, p: float, q: float, config: OperatorConfig, global_norm: bool = False) -> float:
    """``||M f||_q / ||f||_p`` with the output norm over ``Q0`` or, with
    ``global_norm``, over every tile ``Q_z`` that can see ``f``."""
    fnorm = lp_norm_of(f, p)
    if not fnorm > 0:
        raise DomainError("norm ratio of the zero function is undefined")
    grid = _global_grid(f, config) if global_norm else None
    field = skeleton_maximal_field(config, f, grid)
    return lp_norm(field, q) / fnorm


@dataclass(frozen=True)
class ScalingSeries:
    p: float
    q: float
    deltas: tuple[float, ...]
    ratios: tuple[float, ...]
    rows: tuple[tuple[float, str, float], ...]
    slope: float
    intercept: float
    r2: float

    def candidate_ratios(self, name: str) -> list[float]:
        return [r for _, c, r in self.rows if c == name]


def fit_loglog(x: Sequence[float], y: Sequence[float]) -> tuple[float, float, float]:
    """Least-squares line through ``(log x, log y)``: slope, intercept, R^2."""
    if len(x) < 3:
        raise ConfigurationError("a slope fit needs at least 3 points")
    lx, ly = np.log(x), np.log(y)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    tot = np.sum((ly - ly.mean()) ** 2)
    r2 = 1.0 - np.sum(resid**2) / tot if tot > 0 else 1.0
    return float(slope), float(intercept), float(r2)


def _check_dyadic(deltas: Sequence[float]) -> None:
    for a, b in zip(deltas, deltas[1:]):
        if not b < a:
            raise ConfigurationError("deltas must be strictly decreasing")
    for d in deltas:
        j = -math.log2(d)
        if abs(j - round(j)) > 1e-9:
            raise ConfigurationError(f"delta {d} is not dyadic")


def norm_scan(
    delta_list: Sequence[float],
    candidates: Sequence[str | Callable[[int, int, float, int], TestFunction]],
    p: float,
    q: float,
    config: OperatorConfig,
    seed: int = 0,
    global_norm: bool = False,
) -> ScalingSeries:
    """Best candidate ratio at every ``delta`` and the log-log slope in ``delta``.

    ``config`` supplies ``n``, ``k``, the backend and the width factor; its
    ``delta`` and radius set are replaced per scan point.
    """
    deltas = [float(d) for d in delta_list]
    _check_dyadic(deltas)
    if len(deltas) < 3:
        raise ConfigurationError("a slope fit needs at least 3 deltas")
    rows = []
    best = []
    for d in deltas:
        cfg = replace(config, delta=d, radius_set=None)
        top = 0.0
        for cand in candidates:
            name = cand if isinstance(cand, str) else getattr(cand, "__name__", "custom")
            build = CANDIDATES[cand] if isinstance(cand, str) else cand
            ratio = norm_ratio(build(cfg.n, cfg.k, d, seed), p, q, cfg, global_norm)
            rows.append((d, name, ratio))
            top = max(top, ratio)
        if not top > 0:
            raise DomainError(f"every candidate vanishes at delta={d}")
        best.append(top)
    slope, intercept, r2 = fit_loglog(deltas, best)
    return ScalingSeries(p, q, tuple(deltas), tuple(best), tuple(rows), slope, intercept, r2)


@dataclass(frozen=True)
class WeakTypeRow:
    lam: float
    level_measure: float
    implied_constant: float


def weak_type_scan(E: BoxUnionIndicator, lambda_list: Sequence[float], q: float,
                   config: OperatorConfig) -> tuple[list[WeakTypeRow], float]:
    """Level sets ``|{x in Q0 : M 1_E(x) > lambda}|`` and the constants
    ``|level|^(1/q) lambda / (delta^e |E|)`` they imply, with ``e`` the
    restricted weak-type ``(1, q)`` exponent.  Returns the rows and their max.
    """
    field = skeleton_maximal_field(config, E)
    cell = field.grid.cell_volume
    e = weak_exponent(q, config.n, config.k)
    mass = indicator_measure(E)
    rows = []
    for lam in lambda_list:
        if not 0 < lam <= 1:
            raise DomainError(f"lambda must lie in (0, 1], got {lam}")
        level = float(np.count_nonzero(field.values > lam) * cell)
        implied = level ** (1 / q) * lam / (config.delta**e * mass) if mass > 0 else 0.0
        rows.append(WeakTypeRow(float(lam), level, implied))
    return rows, max((r.implied_constant for r in rows), default=0.0)
