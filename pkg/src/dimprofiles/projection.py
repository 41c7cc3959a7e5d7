"""Random subspace sampling, orthogonal projection of clouds, and streaming
covering counts of projected digit-product sets.

Projected covering counts use the sumset structure of X_S^n: the projection
is a sum of independently chosen digit vectors, so occupied cells can be
folded in one digit at a time with deduplication, without enumerating the
full 2^(n·#S) point set.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import PointCloud, ScaleSchedule, Subspace, fit_slope
from .covering import _scale_exponent
from .digitsets import DigitSet, analytic_dims
from .errors import InvalidInputError, SizeLimitError

__all__ = [
    "sample_subspace",
    "project",
    "project_count",
    "ProjectCountResult",
    "projection_experiment",
    "ProjectionExperimentReport",
]

CELL_BUDGET = 1 << 26


def sample_subspace(n: int, m: int, seed: int) -> Subspace:
    """An orthonormal m-frame spanning a rotation-invariantly distributed
    subspace: QR of an m-column standard normal matrix, deterministic in the
    seed."""
    if not 1 <= m <= n:
        raise InvalidInputError(f"need 1 <= m <= n, got m={m}, n={n}")
    rng = np.random.default_rng(seed)
    for _ in range(16):
        g = rng.standard_normal((n, m))
        q, rmat = np.linalg.qr(g)
        diag = np.diag(rmat)
        if np.min(np.abs(diag)) < 1e-10:
            continue  # degenerate draw; redraw
        frame = (q * np.sign(diag)).T
        return Subspace(ambient_dim=n, dim=m, frame=frame)
    raise InvalidInputError("could not draw a full-rank frame")


def project(F: PointCloud, V: Subspace) -> PointCloud:
    """Orthogonal projection coordinates <x, v_i>, quantized at resolution
    2^-(K+2) and deduplicated (projection does not preserve dyadic
    alignment)."""
    if F.ambient_dim != V.ambient_dim:
        raise InvalidInputError(
            f"ambient dims differ: cloud {F.ambient_dim}, subspace {V.ambient_dim}"
        )
    kq = F.resolution_exponent + 2
    coords = F.points @ V.frame.T
    quant = np.round(coords * 2.0 ** kq) / 2.0 ** kq
    quant = np.unique(quant, axis=0)
    return PointCloud(
        ambient_dim=V.dim,
        points=quant,
        resolution_exponent=kq,
        unit_box=False,
    )


@dataclass(frozen=True)
class ProjectCountResult:
    """Occupied r-cell count of a projected digit set, as an interval.

    The streaming fold keeps exact representatives but drops near-duplicates
    at cell resolution, so the reported count is a lower witness; the true
    count lies within the cell-adjacency factor 3^m."""

    count_lo: int
    count_hi: int
    scale_exponent: int


def project_count(
    S: DigitSet,
    n: int,
    depth: int,
    V: Subspace,
    r: float,
    budget: int = CELL_BUDGET,
) -> ProjectCountResult:
    """Number of occupied r-cells of pi_V(X_S^n) truncated at `depth`,
    computed by folding the projected digit vectors pi_V(2^-j e_i) into a
    deduplicated cell set one at a time."""
    if V.ambient_dim != n:
        raise InvalidInputError("subspace ambient dim must equal n")
    k = _scale_exponent(r)
    if k > depth + 2:
        raise InvalidInputError(f"count scale 2^-{k} finer than depth {depth} allows")
    m = V.dim
    digits = [j for j in S.sorted_members if j <= depth]
    log2_points = n * len(digits)
    width_cells = math.ceil(2.0 * math.sqrt(n) / r) + 1
    if min(width_cells ** m, 2.0 ** log2_points) > budget:
        admissible = None
        for kk in range(k, 0, -1):
            if (math.ceil(2.0 * math.sqrt(n) * 2.0 ** kk) + 1) ** m <= budget:
                admissible = kk
                break
        raise SizeLimitError(
            f"{width_cells ** m} candidate cells exceed budget {budget}",
            admissible=admissible,
        )
    fine = r / 2.0
    pts = np.zeros((1, m))
    for j in digits:
        for i in range(n):
            w = V.frame[:, i] * 2.0 ** -j
            pts = np.concatenate([pts, pts + w], axis=0)
            keys = np.floor(pts / fine).astype(np.int64)
            _, idx = np.unique(keys, axis=0, return_index=True)
            pts = pts[np.sort(idx)]
            if pts.shape[0] > budget:
                raise SizeLimitError(
                    f"fold produced {pts.shape[0]} cells, over budget {budget}"
                )
    count = np.unique(np.floor(pts / r).astype(np.int64), axis=0).shape[0]
    return ProjectCountResult(count, count * 3 ** m, k)


@dataclass(frozen=True)
class TrialResult:
    seed: int
    counts: tuple  # (k, count_lo, count_hi) per scale
    slope_upper: float


@dataclass(frozen=True)
class ProjectionExperimentReport:
    digitset_line: str
    n: int
    m: int
    schedule: ScaleSchedule
    trials: tuple
    slope_min: float
    slope_median: float
    slope_max: float
    bounds: dict


def _max_workers() -> int:
    env = os.environ.get("DIMPROFILES_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def projection_experiment(
    S: DigitSet,
    n: int,
    m: int,
    trials: int,
    schedule: ScaleSchedule | None = None,
    seeds=None,
    base_seed: int = 0,
) -> ProjectionExperimentReport:
    """Per-trial upper box estimates of pi_V(X_S^n) over sampled subspaces,
    with min/median/max aggregates and the closed-form bound comparisons."""
    from .capacity import bound_formulas
    from .digitsets import digitset_to_text

    if trials < 1:
        raise InvalidInputError("trials must be >= 1")
    schedule = schedule or ScaleSchedule(tuple(range(8, 27, 2)))
    if seeds is None:
        seeds = [base_seed + i for i in range(trials)]
    elif len(seeds) != trials:
        raise InvalidInputError("need one seed per trial")
    depth = min(S.depth, schedule.exponents[-1])

    def run_trial(seed: int) -> TrialResult:
        V = sample_subspace(n, m, seed)
        rows = []
        pairs = []
        for k in schedule.exponents:
            res = project_count(S, n, depth, V, 2.0 ** -k)
            rows.append((k, res.count_lo, res.count_hi))
            pairs.append((k, math.log2(max(1, res.count_lo))))
        fit = fit_slope(pairs, "limsup")
        return TrialResult(seed, tuple(rows), fit.slope)

    workers = _max_workers()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_trial, seeds))
    else:
        results = [run_trial(seed) for seed in seeds]

    slopes = sorted(t.slope_upper for t in results)
    median = float(np.median(slopes))

    dims = analytic_dims(S, n)
    if m < n:
        bounds = bound_formulas(m=m, n=n, ubd=dims["box"], ad=max(dims["assouad"], dims["box"]))
    else:
        bounds = {"general_lower": dims["box"], "general_upper": dims["box"]}
    if S.kind == "blocks":
        s_target, t_target = S.params[0], S.params[1]
        if m < s_target <= n and 0 < t_target < s_target:
            bounds["sharpness_value"] = (
                m * s_target * t_target / (m * (s_target - t_target) + s_target * t_target)
            )

    return ProjectionExperimentReport(
        digitset_line=digitset_to_text(S),
        n=n,
        m=m,
        schedule=schedule,
        trials=tuple(results),
        slope_min=slopes[0],
        slope_median=median,
        slope_max=slopes[-1],
        bounds=bounds,
    )
