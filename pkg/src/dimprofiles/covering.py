"""Dyadic box counting, greedy separated nets, localized counts, and the
box / Assouad-spectrum / Assouad dimension estimators built on them.

Estimators accept either a PointCloud (geometric counting) or a DigitSet
(exact combinatorial counting on X_S^n, valid at arbitrary depth).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .core import PointCloud, ScaleSchedule, SlopeFit, fit_slope
from .digitsets import DigitSet, log2_exact_count
from .errors import InvalidInputError

__all__ = [
    "LocalCountRecord",
    "box_count",
    "separated_set",
    "local_count",
    "box_dim_estimate",
    "assouad_spectrum_estimate",
    "assouad_estimate",
    "quasi_assouad_estimate",
    "THETA_GRID",
]

THETA_GRID = (0.5, 0.75, 0.9, 0.95)

MAX_CENTERS = 512


def _scale_exponent(r: float) -> int:
    """The integer k with r = 2^-k, or raise."""
    if r <= 0:
        raise InvalidInputError("scale must be positive")
    k = round(-math.log2(r))
    if not math.isclose(r, 2.0 ** -k, rel_tol=0, abs_tol=0):
        raise InvalidInputError(f"scale {r} is not a dyadic 2^-k")
    return k


def box_count(F: PointCloud, r: float) -> int:
    """Number of half-open dyadic grid cells of side r (anchored at 0)
    containing at least one point."""
    k = _scale_exponent(r)
    if k > F.resolution_exponent:
        raise InvalidInputError(
            f"scale exponent {k} exceeds cloud resolution {F.resolution_exponent}"
        )
    return _grid_count(F.points, r)


def _grid_count(points: np.ndarray, r: float) -> int:
    cells = np.floor(points / r).astype(np.int64)
    return np.unique(cells, axis=0).shape[0]


def separated_set(F: PointCloud, r: float) -> PointCloud:
    """Greedy maximal subset with pairwise distances >= r, scanning points in
    lexicographic coordinate order.  Grid-hashed so only neighbouring cells
    are checked."""
    if r <= 0:
        raise InvalidInputError("r must be positive")
    pts = F.points
    n = F.ambient_dim
    order = np.lexsort(pts.T[::-1])  # sort by x1, then x2, ...
    buckets: dict = {}
    kept = []
    offsets = list(itertools.product((-1, 0, 1), repeat=n))
    for idx in order:
        p = pts[idx]
        cell = tuple(np.floor(p / r).astype(np.int64))
        ok = True
        for off in offsets:
            neigh = tuple(c + o for c, o in zip(cell, off))
            for q in buckets.get(neigh, ()):
                if np.linalg.norm(p - q) < r:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            kept.append(p)
            buckets.setdefault(cell, []).append(p)
    return PointCloud(
        ambient_dim=n,
        points=np.array(kept),
        resolution_exponent=F.resolution_exponent,
        unit_box=F.unit_box,
    )


@dataclass(frozen=True)
class LocalCountRecord:
    center: tuple
    R: float
    r: float
    count: int


def local_count(F: PointCloud, x, R: float, r: float) -> LocalCountRecord:
    """Box count at scale r of F intersected with the closed ball B(x, R)."""
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if x.shape[0] != F.ambient_dim:
        raise InvalidInputError("center dimension mismatch")
    if not np.any(np.all(F.points == x, axis=1)):
        raise InvalidInputError("center must be a point of the cloud")
    if r <= 0 or R <= 0:
        raise InvalidInputError("scales must be positive")
    _scale_exponent(r)
    mask = np.linalg.norm(F.points - x, axis=1) <= R
    count = _grid_count(F.points[mask], r)
    return LocalCountRecord(tuple(x), R, r, count)


def _count_pairs(source, schedule: ScaleSchedule, n: int | None):
    """(k, log2 count) pairs over the schedule for either input kind."""
    if isinstance(source, DigitSet):
        if n is None:
            raise InvalidInputError("n is required for digit-set input")
        if schedule.exponents[-1] > source.depth:
            raise InvalidInputError(
                f"schedule exceeds digit-set depth {source.depth}"
            )
        return [(k, float(log2_exact_count(source, n, k))) for k in schedule.exponents]
    if isinstance(source, PointCloud):
        if schedule.exponents[-1] > source.resolution_exponent:
            raise InvalidInputError(
                f"schedule exceeds cloud resolution {source.resolution_exponent}"
            )
        return [
            (k, float(np.log2(box_count(source, 2.0 ** -k))))
            for k in schedule.exponents
        ]
    raise InvalidInputError(f"unsupported input type {type(source).__name__}")


def box_dim_estimate(source, schedule: ScaleSchedule | None = None, n: int | None = None):
    """(lower, upper) box-dimension slope fits of log2 count against k."""
    schedule = schedule or ScaleSchedule.default()
    pairs = _count_pairs(source, schedule, n)
    return fit_slope(pairs, "liminf"), fit_slope(pairs, "limsup")


def _digit_local_exponent(S: DigitSet, n: int, kmax: int, theta: float | None) -> float:
    """Max over windows of n·#(S ∩ {l+1..l+k})/k, the exact local covering
    exponent of X_S^n between scales 2^-l and 2^-(l+k).

    theta constrains the scale pair to r <= R^(1/theta), i.e.
    k >= l(1-theta)/theta; window lengths start at ceil(kmax/8) to damp
    small-window bias."""
    counts = np.cumsum(S.indicator())[: kmax + 1]
    kmin = max(1, math.ceil(kmax / 8))
    best = 0.0
    for k in range(kmin, kmax + 1):
        lmax = kmax - k
        if theta is not None:
            lmax = min(lmax, math.floor(k * theta / (1.0 - theta)))
        if lmax < 0:
            continue
        window = counts[k : k + lmax + 1] - counts[: lmax + 1]
        best = max(best, n * float(window.max()) / k)
    return best


def _cloud_local_exponent(
    F: PointCloud, schedule: ScaleSchedule, theta: float | None
) -> float:
    """Max over schedule scale pairs and net centers of
    log2 N_r(B(x,R) ∩ F) / log2(R/r)."""
    exps = schedule.exponents
    if exps[-1] > F.resolution_exponent:
        raise InvalidInputError(
            f"schedule exceeds cloud resolution {F.resolution_exponent}"
        )
    ntail = max(1, len(exps) // 2)
    best = None
    for ia, ka in enumerate(exps):
        for kb in exps[max(ia + 1, len(exps) - ntail):]:
            if kb <= ka:
                continue
            if theta is not None and kb < ka / theta:
                continue
            R = 2.0 ** -ka
            r = 2.0 ** -kb
            centers = separated_set(F, R).points[:MAX_CENTERS]
            for x in centers:
                rec = local_count(F, x, R, r)
                val = np.log2(rec.count) / (kb - ka)
                best = val if best is None else max(best, val)
    if best is None:
        raise InvalidInputError("no admissible (R, r) scale pairs in schedule")
    return float(best)


def _exponent_fit(value: float, schedule: ScaleSchedule) -> SlopeFit:
    return SlopeFit(
        slope=float(value),
        intercept=0.0,
        max_residual=0.0,
        scale_count=len(schedule),
        mode="limsup",
    )


def assouad_spectrum_estimate(
    source,
    theta: float,
    schedule: ScaleSchedule | None = None,
    n: int | None = None,
) -> SlopeFit:
    """Upper Assouad-spectrum estimate: the worst local covering exponent over
    scale pairs with r <= R^(1/theta)."""
    if not 0 < theta < 1:
        raise InvalidInputError("theta must lie in (0, 1)")
    schedule = schedule or ScaleSchedule.default()
    if isinstance(source, DigitSet):
        if n is None:
            raise InvalidInputError("n is required for digit-set input")
        kmax = min(source.depth, schedule.exponents[-1])
        return _exponent_fit(_digit_local_exponent(source, n, kmax, theta), schedule)
    return _exponent_fit(_cloud_local_exponent(source, schedule, theta), schedule)


def assouad_estimate(
    source, schedule: ScaleSchedule | None = None, n: int | None = None
) -> SlopeFit:
    """Assouad-dimension estimate: worst local covering exponent over
    unconstrained scale pairs r < R."""
    schedule = schedule or ScaleSchedule.default()
    if isinstance(source, DigitSet):
        if n is None:
            raise InvalidInputError("n is required for digit-set input")
        kmax = min(source.depth, schedule.exponents[-1])
        return _exponent_fit(_digit_local_exponent(source, n, kmax, None), schedule)
    return _exponent_fit(_cloud_local_exponent(source, schedule, None), schedule)


def quasi_assouad_estimate(
    source,
    schedule: ScaleSchedule | None = None,
    n: int | None = None,
    theta_grid=THETA_GRID,
):
    """Quasi-Assouad estimate: spectrum values on a theta grid, linearly
    extrapolated toward theta = 1 and clamped by the Assouad estimate.

    Returns (value, {theta: spectrum estimate})."""
    schedule = schedule or ScaleSchedule.default()
    grid = {
        th: assouad_spectrum_estimate(source, th, schedule, n).slope
        for th in theta_grid
    }
    thetas = sorted(grid)
    t1, t2 = thetas[-2], thetas[-1]
    v1, v2 = grid[t1], grid[t2]
    extrapolated = v2 + (v2 - v1) * (1.0 - t2) / (t2 - t1)
    ceiling = assouad_estimate(source, schedule, n).slope
    value = min(max(extrapolated, max(grid.values())), ceiling)
    return value, grid
