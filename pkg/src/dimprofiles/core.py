"""Domain types shared by every estimator: point clouds at dyadic resolution,
orthonormal subspace frames, scale schedules, and log-log slope fits.

All types are immutable values; all operations are pure functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError

__all__ = [
    "PointCloud",
    "Subspace",
    "ScaleSchedule",
    "SlopeFit",
    "fit_slope",
]

_ORTHO_TOL = 1e-12


def _freeze(arr):
    arr = np.ascontiguousarray(arr, dtype=np.float64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class PointCloud:
    """A finite set of points in R^n whose coordinates are integer multiples
    of 2^(-resolution_exponent).

    Clouds produced by digit-set enumeration live in [0,1]^n; projected
    clouds may have coordinates outside the unit box (unit_box=False).
    """

    ambient_dim: int
    points: np.ndarray
    resolution_exponent: int
    unit_box: bool = True

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.ndim != 2 or pts.shape[1] != self.ambient_dim:
            raise InvalidInputError(
                f"points must have shape (N, {self.ambient_dim}), got {pts.shape}"
            )
        if pts.shape[0] == 0:
            raise InvalidInputError("point cloud must be non-empty")
        scale = 2.0 ** self.resolution_exponent
        scaled = pts * scale
        if not np.array_equal(scaled, np.round(scaled)):
            raise InvalidInputError(
                "coordinates must be integer multiples of "
                f"2^(-{self.resolution_exponent})"
            )
        if self.unit_box and (pts.min() < 0.0 or pts.max() > 1.0):
            raise InvalidInputError("coordinates must lie in [0, 1]")
        if np.unique(pts, axis=0).shape[0] != pts.shape[0]:
            raise InvalidInputError("points must be pairwise distinct")
        object.__setattr__(self, "points", _freeze(pts))

    def __len__(self):
        return self.points.shape[0]

    @property
    def diameter(self) -> float:
        lo = self.points.min(axis=0)
        hi = self.points.max(axis=0)
        return float(np.linalg.norm(hi - lo))


@dataclass(frozen=True)
class Subspace:
    """An m-dimensional subspace of R^n, held as an orthonormal m-frame
    (rows of `frame`)."""

    ambient_dim: int
    dim: int
    frame: np.ndarray

    def __post_init__(self):
        if not 1 <= self.dim <= self.ambient_dim:
            raise InvalidInputError(
                f"need 1 <= m <= n, got m={self.dim}, n={self.ambient_dim}"
            )
        fr = np.asarray(self.frame, dtype=np.float64)
        if fr.shape != (self.dim, self.ambient_dim):
            raise InvalidInputError(
                f"frame must have shape ({self.dim}, {self.ambient_dim})"
            )
        gram = fr @ fr.T
        if not np.allclose(gram, np.eye(self.dim), atol=1e-10):
            raise InvalidInputError("frame vectors must be orthonormal")
        object.__setattr__(self, "frame", _freeze(fr))


@dataclass(frozen=True)
class ScaleSchedule:
    """Strictly decreasing dyadic scales r_i = 2^(-k_i), stored as the
    increasing exponents k_i."""

    exponents: tuple

    def __post_init__(self):
        exps = tuple(int(k) for k in self.exponents)
        if len(exps) < 3:
            raise InvalidInputError("schedule needs at least 3 scales")
        if any(k <= 0 for k in exps):
            raise InvalidInputError("scale exponents must be positive")
        if any(b <= a for a, b in zip(exps, exps[1:])):
            raise InvalidInputError("scale exponents must be strictly increasing")
        object.__setattr__(self, "exponents", exps)

    @property
    def scales(self):
        return tuple(2.0 ** -k for k in self.exponents)

    def __len__(self):
        return len(self.exponents)

    @classmethod
    def default(cls) -> "ScaleSchedule":
        return cls(tuple(range(8, 41, 2)))

    @classmethod
    def parse(cls, text: str) -> "ScaleSchedule":
        """Parse 'start:stop:step' (inclusive stop) or a comma list of exponents."""
        text = text.strip()
        if ":" in text:
            parts = [int(p) for p in text.split(":")]
            if len(parts) == 2:
                parts.append(1)
            if len(parts) != 3:
                raise InvalidInputError(f"bad schedule spec {text!r}")
            start, stop, step = parts
            return cls(tuple(range(start, stop + 1, step)))
        return cls(tuple(int(p) for p in text.split(",")))


@dataclass(frozen=True)
class SlopeFit:
    """A dimension estimate: the slope of log-count against -log r, together
    with how it was extracted (least squares, or extreme tail secants for the
    limsup/liminf forms of the defining limits)."""

    slope: float
    intercept: float
    max_residual: float
    scale_count: int
    mode: str


_MODES = ("least_squares", "limsup", "liminf")


def fit_slope(pairs, mode: str) -> SlopeFit:
    """Fit a slope to (x, y) pairs with strictly increasing x.

    least_squares: ordinary least squares.
    limsup/liminf: max/min of the secant slopes (y_i-y_0)/(x_i-x_0) taken
    over the tail half of the pairs, realising the limsup/liminf of y/x at
    finite scale with the first pair as base point.
    """
    if mode not in _MODES:
        raise InvalidInputError(f"mode must be one of {_MODES}, got {mode!r}")
    pts = [(float(x), float(y)) for x, y in pairs]
    if len(pts) < 3:
        raise InvalidInputError("need at least 3 pairs to fit a slope")
    xs = np.array([p[0] for p in pts])
    ys = np.array([p[1] for p in pts])
    if np.any(np.diff(xs) <= 0):
        raise InvalidInputError("x values must be strictly increasing")

    n = len(pts)
    if mode == "least_squares":
        slope, intercept = np.polyfit(xs, ys, 1)
        resid = np.max(np.abs(ys - (slope * xs + intercept)))
        return SlopeFit(float(slope), float(intercept), float(resid), n, mode)

    dx = xs[1:] - xs[0]
    dy = ys[1:] - ys[0]
    secants = dy / dx
    tail = secants[max(0, n // 2 - 1):]
    slope = float(np.max(tail) if mode == "limsup" else np.min(tail))
    intercept = float(ys[0] - slope * xs[0])
    resid = float(np.max(tail) - np.min(tail))
    return SlopeFit(slope, intercept, resid, n, mode)
