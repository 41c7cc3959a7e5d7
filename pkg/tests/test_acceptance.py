"""Acceptance suite: nine end-to-end checks, one PASS/FAIL line each.

Each criterion combines an exact combinatorial or analytic oracle with a
finite-scale tolerance check and a wall-clock budget.  The verdict line is
printed unconditionally (bypassing capture) so a plain ``pytest -v`` run
shows one line per criterion.
"""

from __future__ import annotations

import itertools
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from dimprofiles.core import PointCloud, ScaleSchedule
from dimprofiles.digitsets import (
    DigitSet,
    enumerate_cloud,
    exact_count,
    explicit_set,
    periodic_set,
    sharpness_set,
)
from dimprofiles.covering import (
    assouad_estimate,
    assouad_spectrum_estimate,
    box_count,
    box_dim_estimate,
    separated_set,
)
from dimprofiles.capacity import (
    bound_formulas,
    capacity,
    energy,
    kernel_matrix,
    min_energy,
    profile_estimate,
    region_curve,
)
from dimprofiles.projection import projection_experiment


def _verdict(capsys, num: int, claim: str, ok: bool) -> None:
    with capsys.disabled():
        print(f"criterion {num}: {'PASS' if ok else 'FAIL'} - {claim}")
    assert ok, f"criterion {num} failed: {claim}"


def _random_digitset(rng, max_depth=20, max_members=8) -> DigitSet:
    depth = int(rng.integers(5, max_depth + 1))
    size = int(rng.integers(1, min(max_members, depth) + 1))
    members = sorted(rng.choice(np.arange(1, depth + 1), size=size, replace=False).tolist())
    return explicit_set(members, depth)


def test_criterion_1_exact_count_oracle(capsys):
    # Counting dyadic cells of the enumerated cloud must reproduce the
    # closed-form count 2^(n * #(S intersect {1..k})) at every scale.
    t0 = time.monotonic()
    rng = np.random.default_rng(101)
    checked = 0
    ok = True
    for _ in range(50):
        n = int(rng.integers(1, 3))
        S = _random_digitset(rng, max_depth=20, max_members=8 if n == 1 else 6)
        F = enumerate_cloud(S, n)
        for k in range(1, S.depth + 1):
            if box_count(F, 2.0 ** -k) != exact_count(S, n, k):
                ok = False
            checked += 1
    elapsed = time.monotonic() - t0
    _verdict(
        capsys, 1,
        f"box counts equal closed-form digit counts at all {checked} scale checks "
        f"over 50 random sets ({elapsed:.1f}s < 10s)",
        ok and elapsed < 10.0,
    )


def test_criterion_2_dyadic_dimension_reproduction(capsys):
    # Density-1/2 digits in the plane: upper box slope 1.0 +/- 0.02.
    # Two-block fixture: prefix-scale box slope near 1.0 (+/- 0.1) while the
    # in-block Assouad window exponent is near the full dimension 2.0.
    t0 = time.monotonic()
    evens_up = box_dim_estimate(periodic_set(2, [0], 40), ScaleSchedule.default(), 2)[1].slope
    S = sharpness_set(2.0, 1.0, 2)  # kseq (4, 64, 4096), depth 8192
    sched = ScaleSchedule([8, 128, 8192])
    sharp_up = box_dim_estimate(S, sched, 2)[1].slope
    sharp_ad = assouad_estimate(S, sched, 2).slope
    elapsed = time.monotonic() - t0
    ok = (
        abs(evens_up - 1.0) <= 0.02
        and abs(sharp_up - 1.0) <= 0.1
        and abs(sharp_ad - 2.0) <= 0.15
        and elapsed < 30.0
    )
    _verdict(
        capsys, 2,
        f"box slope {evens_up:.3f}=1.00+/-0.02; block fixture box {sharp_up:.3f}"
        f"=1.0+/-0.1, local window exponent {sharp_ad:.3f}=2.0+/-0.15 ({elapsed:.1f}s < 30s)",
        ok,
    )


def _grid_min_energy(phi: np.ndarray, step: float = 1e-3) -> float:
    """Independent oracle: brute-force the quadratic form over the simplex."""
    N = phi.shape[0]
    M = round(1 / step)
    if N == 2:
        p = np.arange(M + 1) / M
        W = np.stack([p, 1 - p], axis=1)
        return float(np.min(np.einsum("gi,ij,gj->g", W, phi, W)))
    if N == 3:
        i, j = np.meshgrid(np.arange(M + 1), np.arange(M + 1), indexing="ij")
        mask = i + j <= M
        i, j = i[mask], j[mask]
        W = np.stack([i, j, M - i - j], axis=1) / M
        best = np.inf
        for lo in range(0, W.shape[0], 200000):
            chunk = W[lo:lo + 200000]
            best = min(best, float(np.min(np.einsum("gi,ij,gj->g", chunk, phi, chunk))))
        return best
    # N == 4: coarse 5e-3 sweep, then a full-resolution pass near the minimizer.
    coarse = 5
    Mc = M // coarse
    best_val, best_w = np.inf, None
    for i in range(Mc + 1):
        j, k = np.meshgrid(np.arange(Mc + 1 - i), np.arange(Mc + 1 - i), indexing="ij")
        mask = j + k <= Mc - i
        j, k = j[mask], k[mask]
        W = np.stack([np.full_like(j, i), j, k, Mc - i - j - k], axis=1) / Mc
        vals = np.einsum("gi,ij,gj->g", W, phi, W)
        a = int(np.argmin(vals))
        if vals[a] < best_val:
            best_val, best_w = float(vals[a]), W[a]
    c = np.round(best_w * M).astype(int)
    R = 30
    lo = np.maximum(c[:3] - R, 0)
    hi = np.minimum(c[:3] + R, M)
    ii, jj, kk = np.meshgrid(*[np.arange(l, h + 1) for l, h in zip(lo, hi)], indexing="ij")
    mask = ii + jj + kk <= M
    ii, jj, kk = ii[mask], jj[mask], kk[mask]
    W = np.stack([ii, jj, kk, M - ii - jj - kk], axis=1) / M
    return min(best_val, float(np.min(np.einsum("gi,ij,gj->g", W, phi, W))))


def test_criterion_3_capacity_oracle(capsys):
    # The energy minimizer must agree with an exhaustive simplex grid search
    # on every support of size <= 4, and hit the two-point analytic value.
    t0 = time.monotonic()
    rng = np.random.default_rng(12345)
    worst = 0.0
    for cfg in range(100):
        N = [2, 3, 4][cfg % 3]
        d = 1 + cfg % 2
        pts = np.unique(np.round(rng.random((N, d)) * 1024) / 1024, axis=0)
        while pts.shape[0] < N:
            pts = np.unique(np.vstack([pts, np.round(rng.random((1, d)) * 1024) / 1024]), axis=0)
        F = PointCloud(d, pts, 10)
        r = float(rng.choice([0.05, 0.1, 0.25, 0.5]))
        s = float(rng.choice([0.5, 1.0, 2.0]))
        e_solver = energy(min_energy(F, r, s), r, s)
        e_grid = _grid_min_energy(kernel_matrix(F.points, r, s))
        worst = max(worst, abs(e_solver - e_grid))
    # Two points at distance 0.5 with r = 0.25, s = 1: the kernel matrix is
    # [[1, 1/2], [1/2, 1]], minimized at equal weights with energy 3/4.
    two = PointCloud(1, np.array([[0.0], [0.5]]), 4)
    mu = min_energy(two, 0.25, 1.0)
    e_two = energy(mu, 0.25, 1.0)
    c_two = capacity(two, 0.25, 1.0).value
    elapsed = time.monotonic() - t0
    ok = (
        worst <= 1e-5
        and abs(e_two - 0.75) <= 1e-9
        and abs(c_two - 4.0 / 3.0) <= 1e-9
        and elapsed < 60.0
    )
    _verdict(
        capsys, 3,
        f"solver vs grid-search worst energy gap {worst:.2e} <= 1e-5 over 100 configs; "
        f"two-point energy {e_two:.10f}=0.75, capacity {c_two:.10f}=4/3 within 1e-9 "
        f"({elapsed:.1f}s < 60s)",
        ok,
    )


def test_criterion_4_profile_matches_box_at_large_s(capsys):
    # At exponent s >= ambient dimension the capacity profile reproduces the
    # box-counting slope.
    t0 = time.monotonic()
    S = periodic_set(2, [0], 16)
    F = enumerate_cloud(S, 1)
    assert F.points.shape[0] <= 256
    sched = ScaleSchedule([4, 6, 8, 10, 12, 14, 16])
    prof = profile_estimate(F, 1.0, sched).upper.slope
    box_up = box_dim_estimate(S, sched, 1)[1].slope
    elapsed = time.monotonic() - t0
    ok = abs(prof - box_up) <= 0.1
    _verdict(
        capsys, 4,
        f"profile slope at s=1 ({prof:.4f}) matches box slope ({box_up:.4f}) "
        f"within 0.1 ({elapsed:.1f}s)",
        ok,
    )


def test_criterion_5_profile_lower_ladder(capsys):
    # Finite-scale version of the profile lower bound: the upper profile may
    # fall below the upper box slope by at most
    # max{0, spectrum(theta) - s, (assouad - s)(1 - theta)} plus tolerance.
    t0 = time.monotonic()
    fixtures = [
        (periodic_set(2, [0], 18), [4, 6, 10, 14, 18]),
        (periodic_set(2, [1], 18), [4, 6, 10, 14, 18]),
        (periodic_set(3, [0], 24), [6, 9, 12, 15, 18, 21, 24]),
        (periodic_set(3, [0, 1], 15), [3, 6, 9, 12, 15]),
        (periodic_set(4, [0], 28), [4, 8, 12, 16, 20, 24, 28]),
        (periodic_set(5, [0, 1], 25), [5, 10, 15, 20, 25]),
        (periodic_set(7, [0], 28), [7, 14, 21, 28]),
        (periodic_set(6, [0, 3], 24), [6, 12, 18, 24]),
        (explicit_set([1, 4, 9, 16], 20), [4, 8, 12, 16, 20]),
        (explicit_set([3, 5, 6, 11, 12, 13], 18), [6, 9, 12, 15, 18]),
    ]
    worst = math.inf
    for S, exps in fixtures:
        sched = ScaleSchedule(exps)
        F = enumerate_cloud(S, 1)
        box_up = box_dim_estimate(S, sched, 1)[1].slope
        ad = assouad_estimate(S, sched, 1).slope
        for s in (0.5, 1.0):
            prof = profile_estimate(F, s, sched).upper.slope
            for theta in (0.5, 0.75, 0.9):
                spec = assouad_spectrum_estimate(S, theta, sched, 1).slope
                drop = max(0.0, spec - s, (ad - s) * (1 - theta))
                worst = min(worst, prof - (box_up - drop - 0.1))
    elapsed = time.monotonic() - t0
    ok = worst >= 0.0 and elapsed < 300.0
    _verdict(
        capsys, 5,
        f"profile drop bound holds on 10 fixtures x s in {{0.5,1}} x theta in "
        f"{{0.5,0.75,0.9}}; worst slack {worst:+.4f} >= 0 ({elapsed:.1f}s < 300s)",
        ok,
    )


def test_criterion_6_projection_preservation(capsys):
    # Density-0.4 digits squared (box slope 0.8 < m = 1): almost every line
    # projection should keep the full slope, so the median over 20 sampled
    # lines stays above 0.8 - 0.1.
    t0 = time.monotonic()
    S = periodic_set(5, [0, 1], 22)
    sched = ScaleSchedule(list(range(8, 23, 2)))
    rep = projection_experiment(S, n=2, m=1, trials=20, schedule=sched, base_seed=0)
    elapsed = time.monotonic() - t0
    ok = rep.slope_median >= 0.7 and elapsed < 300.0
    _verdict(
        capsys, 6,
        f"median projected box slope {rep.slope_median:.4f} >= 0.7 over 20 lines "
        f"({elapsed:.1f}s < 300s)",
        ok,
    )


def test_criterion_7_projection_sharpness(capsys):
    # Two-block fixture: every sampled line projection should drop to at most
    # 2/3 + 0.1, and the closed-form value 2/3 must equal the exact general
    # lower bound for m=1, n=2, box slope 1.
    t0 = time.monotonic()
    S = sharpness_set(2.0, 1.0, 2, kseq=(4, 64), depth=256)
    sched = ScaleSchedule(list(range(8, 27, 2)))
    rep = projection_experiment(S, n=2, m=1, trials=20, schedule=sched, base_seed=0)
    bounds = bound_formulas(m=1, n=2, ubd=Fraction(1), ad=Fraction(2), s=Fraction(2), t=Fraction(1))
    exact_ok = (
        bounds["sharpness_value"] == Fraction(2, 3)
        and bounds["general_lower"] == Fraction(2, 3)
    )
    elapsed = time.monotonic() - t0
    ok = rep.slope_max <= 2.0 / 3.0 + 0.1 and exact_ok and elapsed < 300.0
    _verdict(
        capsys, 7,
        f"all 20 projected slopes <= 2/3+0.1 (max {rep.slope_max:.4f}); closed-form "
        f"drop 2/3 equals exact general lower bound ({elapsed:.1f}s < 300s)",
        ok,
    )


def test_criterion_8_bound_calculator_spot_checks(capsys):
    # Exact rational spot checks of the closed-form bound calculator.
    curve_ok = (
        region_curve(Fraction(0)) == Fraction(1)
        and region_curve(Fraction(1)) == Fraction(4, 3)
        and region_curve(Fraction(2)) == Fraction(3, 2)
    )
    # When the local exponent does not exceed the projection rank there is no
    # drop: the bound equals the box slope itself.
    no_drop = bound_formulas(m=2, n=3, ubd=Fraction(3, 2), ad=Fraction(2))
    no_drop_ok = no_drop["best_theorem_rhs"] == Fraction(3, 2) and no_drop["preserved"]
    # The distinguished theta for the spectrum bound is 1 - ubd/m.
    theta = bound_formulas(m=1, n=2, ubd=Fraction(1, 4), ad=Fraction(1, 2))["theta_choice"]
    theta_ok = theta == 1 - Fraction(1, 4)
    ok = curve_ok and no_drop_ok and theta_ok
    _verdict(
        capsys, 8,
        "region curve hits {1, 4/3, 3/2} at x in {0,1,2}; no drop when local "
        "exponent <= rank; distinguished theta equals 1 - ubd/m (exact rationals)",
        ok,
    )


def test_criterion_9_property_suites(capsys):
    t0 = time.monotonic()
    rng = np.random.default_rng(909)

    # Suite A: covering counts are non-increasing in the scale and at most
    # double per dimension when the scale halves.
    a_ok = True
    for _ in range(100):
        n = int(rng.integers(1, 3))
        S = _random_digitset(rng, max_depth=14, max_members=7 if n == 1 else 5)
        F = enumerate_cloud(S, n)
        prev = None
        for k in range(1, S.depth + 1):
            cnt = box_count(F, 2.0 ** -k)
            if prev is not None and not (prev <= cnt <= prev * 2 ** n):
                a_ok = False
            prev = cnt

    # Suite B: estimator chain box <= spectrum(theta) <= assouad with the
    # spectrum non-decreasing in theta (0.05 numerical slack).
    b_ok = True
    sched = ScaleSchedule([5, 10, 20, 40])
    for _ in range(100):
        q = int(rng.integers(2, 6))
        residues = sorted(set(rng.integers(0, q, size=int(rng.integers(1, q))).tolist()))
        S = periodic_set(q, residues, 40)
        box_up = box_dim_estimate(S, sched, 1)[1].slope
        ad = assouad_estimate(S, sched, 1).slope
        prev = box_up - 0.05
        for theta in (0.5, 0.75, 0.9):
            spec = assouad_spectrum_estimate(S, theta, sched, 1).slope
            if spec < prev - 0.05 or spec > ad + 0.05:
                b_ok = False
            prev = max(prev, spec)

    # Suite C: capacity is non-decreasing as r shrinks and as s grows.
    c_ok = True
    for _ in range(100):
        n = int(rng.integers(1, 3))
        N = int(rng.integers(2, 9))
        pts = np.unique(np.round(rng.random((N, n)) * 64) / 64, axis=0)
        F = PointCloud(n, pts, 6)
        r = float(2.0 ** -rng.integers(2, 6))
        s = float(rng.choice([0.5, 1.0, 1.5]))
        c0 = capacity(F, r, s).value
        if capacity(F, r / 2, s).value < c0 - 1e-7:
            c_ok = False
        if capacity(F, r, s + 0.5).value < c0 - 1e-7:
            c_ok = False

    # Suite D: greedy separated sets are pairwise r-separated and maximal.
    d_ok = True
    for _ in range(100):
        n = int(rng.integers(1, 3))
        N = int(rng.integers(2, 40))
        pts = np.unique(np.round(rng.random((N, n)) * 256) / 256, axis=0)
        F = PointCloud(n, pts, 8)
        r = float(2.0 ** -rng.integers(1, 6))
        sep = separated_set(F, r)
        sp = sep.points
        if sp.shape[0] > 1:
            diffs = np.linalg.norm(sp[:, None, :] - sp[None, :, :], axis=2)
            np.fill_diagonal(diffs, np.inf)
            if diffs.min() < r - 1e-12:
                d_ok = False
        dists = np.linalg.norm(F.points[:, None, :] - sp[None, :, :], axis=2).min(axis=1)
        if dists.max() >= r:
            d_ok = False

    elapsed = time.monotonic() - t0
    ok = a_ok and b_ok and c_ok and d_ok
    _verdict(
        capsys, 9,
        f"property suites x100: covering monotone ({'ok' if a_ok else 'FAIL'}), "
        f"estimator chain ordered ({'ok' if b_ok else 'FAIL'}), capacity monotone in "
        f"r and s ({'ok' if c_ok else 'FAIL'}), separated sets maximal "
        f"({'ok' if d_ok else 'FAIL'}) ({elapsed:.1f}s)",
        ok,
    )
