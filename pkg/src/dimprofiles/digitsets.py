"""Digit-restriction sets S and the dyadic fractals X_S^n they generate.

A DigitSet is a finite truncation of a subset of the naturals; X_S^n is the
n-fold product of { sum_k a_k 2^-k : a_k = 0 for k outside S }.  Covering
counts for X_S^n are exact combinatorics on S (left endpoints of dyadic
cells), never floating-point geometry.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import PointCloud
from .errors import InvalidInputError, SizeLimitError

__all__ = [
    "DigitSet",
    "DensityReport",
    "periodic_set",
    "explicit_set",
    "sharpness_set",
    "densities",
    "exact_count",
    "log2_exact_count",
    "enumerate_cloud",
    "analytic_dims",
    "digitset_to_text",
    "digitset_from_text",
    "cloud_to_csv",
]

ENUM_LOG2_CAP = 26  # enumerate_cloud refuses clouds above 2^26 points


@dataclass(frozen=True)
class DigitSet:
    """A subset of {1..depth} with its construction recorded.

    kind is 'periodic', 'blocks' or 'explicit'; params keeps the generator
    arguments so sets round-trip through the text format.  Generators with
    analytically known densities record them; finite-depth scans are done
    separately by densities().
    """

    members: frozenset
    depth: int
    kind: str = "explicit"
    params: tuple = ()
    analytic_upper_density: float | None = None
    analytic_banach_density: float | None = None
    warnings: tuple = ()

    def __post_init__(self):
        if self.depth < 1:
            raise InvalidInputError("depth must be >= 1")
        members = frozenset(int(k) for k in self.members)
        if any(k < 1 or k > self.depth for k in members):
            raise InvalidInputError("members must lie in 1..depth")
        object.__setattr__(self, "members", members)
        object.__setattr__(self, "_sorted", tuple(sorted(members)))

    @property
    def sorted_members(self) -> tuple:
        return self._sorted

    def count_prefix(self, k: int) -> int:
        """#(S ∩ {1..k})."""
        if k < 0:
            raise InvalidInputError("k must be nonnegative")
        return bisect_right(self._sorted, k)

    def count_window(self, lo: int, hi: int) -> int:
        """#(S ∩ {lo..hi}) inclusive."""
        return bisect_right(self._sorted, hi) - bisect_right(self._sorted, lo - 1)

    def indicator(self) -> np.ndarray:
        """0/1 array of length depth+1; index k says whether k is a member."""
        ind = np.zeros(self.depth + 1, dtype=np.int64)
        if self._sorted:
            ind[list(self._sorted)] = 1
        return ind


@dataclass(frozen=True)
class DensityReport:
    upper_density: float
    banach_density: float
    realizing_prefix: int
    realizing_window: tuple  # (start, length)


def periodic_set(q: int, residues, depth: int) -> DigitSet:
    """S = {k <= depth : k mod q in residues}; both densities are |residues|/q."""
    if q < 1:
        raise InvalidInputError("q must be >= 1")
    residues = frozenset(int(r) for r in residues)
    if any(r < 0 or r >= q for r in residues):
        raise InvalidInputError(f"residues must be in 0..{q - 1}")
    if depth < q:
        raise InvalidInputError(f"depth must be >= q (got depth={depth}, q={q})")
    members = frozenset(k for k in range(1, depth + 1) if k % q in residues)
    dens = len(residues) / q
    return DigitSet(
        members,
        depth,
        kind="periodic",
        params=(q, tuple(sorted(residues))),
        analytic_upper_density=dens,
        analytic_banach_density=dens,
    )


def explicit_set(members, depth: int) -> DigitSet:
    return DigitSet(frozenset(members), depth, kind="explicit")


def _block_base_members(base, upto: int):
    """Members of the base rule A (a subset of {0,1,...}) up to `upto`.

    base is None for all of the nonnegative integers, or (q, residues)."""
    if base is None:
        return range(0, upto + 1)
    q, residues = base
    return [a for a in range(0, upto + 1) if a % q in set(residues)]


def sharpness_set(
    s: float,
    t: float,
    n: int,
    kseq=(4, 64, 4096),
    depth: int = 8192,
    base=None,
) -> DigitSet:
    """Block construction separating prefix density from window density.

    S = union over j of (A + k_j) ∩ {k_j .. floor(s/(s-t)·k_j)}, truncated at
    depth.  A is the base rule: all nonnegative integers when s = n, else a
    periodic rule of density s/n.  The resulting set has prefix density t/n
    but window density s/n, so X_S^n has box dimension t and Assouad
    dimension s.
    """
    if not (0 < t < s <= n):
        raise InvalidInputError(f"need 0 < t < s <= n, got s={s}, t={t}, n={n}")
    kseq = tuple(int(k) for k in kseq)
    if len(kseq) < 1 or any(k < 1 for k in kseq):
        raise InvalidInputError("kseq must be positive integers")
    if any(b <= a for a, b in zip(kseq, kseq[1:])):
        raise InvalidInputError("kseq must be strictly increasing")

    if base is None and s < n:
        frac = Fraction(s / n).limit_denominator(128)
        base = (frac.denominator, tuple(range(frac.numerator)))

    ratio = s / (s - t)
    members = set()
    his = []
    for j, kj in enumerate(kseq):
        hi = math.floor(ratio * kj)
        his.append(hi)
        if j + 1 < len(kseq) and kseq[j + 1] <= hi:
            raise InvalidInputError(
                f"blocks overlap: block at k={kj} reaches {hi} >= next k={kseq[j + 1]}"
            )
        if kj > depth:
            break
        for a in _block_base_members(base, min(hi, depth) - kj):
            members.add(kj + a)

    warnings = []
    ratios = []
    for j in range(1, len(kseq)):
        prod = 1
        for ki in kseq[:j]:
            prod *= ki
        ratios.append(prod / kseq[j])
    if any(b > a for a, b in zip(ratios, ratios[1:])):
        warnings.append(
            "block gaps do not grow monotonically; finite-depth densities may "
            "be biased relative to the target values"
        )

    return DigitSet(
        frozenset(m for m in members if m <= depth),
        depth,
        kind="blocks",
        params=(float(s), float(t), int(n), kseq, base),
        analytic_upper_density=t / n,
        analytic_banach_density=s / n,
        warnings=tuple(warnings),
    )


def densities(S: DigitSet, full_windows: bool = False) -> DensityReport:
    """Finite-depth upper and Banach density estimates.

    Upper density: max prefix frequency over dyadic prefixes in
    [ceil(K/8), K] plus K itself.  Banach density: max window frequency over
    all windows of length w in [ceil(K/8), K] (all lengths when
    full_windows).  Short prefixes/windows are excluded to damp the upward
    bias of tiny samples; the estimates still overshoot the asymptotic
    densities by O(1/w).
    """
    K = S.depth
    if K < 8:
        raise InvalidInputError("densities requires truncation depth >= 8")
    wmin = 1 if full_windows else math.ceil(K / 8)

    counts = np.cumsum(S.indicator())  # counts[k] = #(S ∩ {1..k})

    prefixes = sorted({1 << j for j in range(K.bit_length()) if wmin <= (1 << j) <= K} | {K})
    upper = 0.0
    realizing_prefix = prefixes[0]
    for k in prefixes:
        d = counts[k] / k
        if d > upper:
            upper = float(d)
            realizing_prefix = k

    banach = 0.0
    realizing_window = (1, wmin)
    for w in range(wmin, K + 1):
        window_counts = counts[w:] - counts[:-w]  # window starts 1..K-w+1
        best = int(window_counts.max())
        if best / w > banach:
            banach = best / w
            start = int(np.argmax(window_counts)) + 1
            realizing_window = (start, w)

    return DensityReport(upper, banach, realizing_prefix, realizing_window)


def log2_exact_count(S: DigitSet, n: int, k: int) -> int:
    """log2 of the number of depth-k dyadic cells meeting X_S^n."""
    if n < 1:
        raise InvalidInputError("n must be >= 1")
    if k > S.depth:
        raise InvalidInputError(f"k={k} exceeds truncation depth {S.depth}")
    return n * S.count_prefix(k)


def exact_count(S: DigitSet, n: int, k: int) -> int:
    """Exact number of depth-k dyadic cells meeting X_S^n: 2^(n·#(S∩{1..k}))."""
    return 1 << log2_exact_count(S, n, k)


def _admissible_depth(S: DigitSet, n: int) -> int:
    """Largest depth K' with n·#(S∩{1..K'}) within the enumeration cap."""
    best = 0
    for k in range(S.depth + 1):
        if n * S.count_prefix(k) <= ENUM_LOG2_CAP:
            best = k
    return best


def enumerate_cloud(S: DigitSet, n: int, depth: int | None = None) -> PointCloud:
    """All points of X_S^n with digits supported on S ∩ {1..depth}."""
    if n < 1:
        raise InvalidInputError("n must be >= 1")
    K = S.depth if depth is None else int(depth)
    if K > S.depth:
        raise InvalidInputError(f"depth {K} exceeds truncation depth {S.depth}")
    digits = [j for j in S.sorted_members if j <= K]
    if n * len(digits) > ENUM_LOG2_CAP:
        raise SizeLimitError(
            f"cloud would have 2^{n * len(digits)} points (cap 2^{ENUM_LOG2_CAP}); "
            f"largest admissible depth is {_admissible_depth(S, n)}",
            admissible=_admissible_depth(S, n),
        )
    vals = np.zeros(1)
    for j in digits:
        vals = np.concatenate([vals, vals + 2.0 ** -j])
    vals.sort()
    grids = np.meshgrid(*([vals] * n), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    return PointCloud(ambient_dim=n, points=pts, resolution_exponent=K)


def analytic_dims(S: DigitSet, n: int) -> dict:
    """Box, packing and Assouad dimensions of X_S^n from the density formula
    (box = packing = upper density · n, Assouad = Banach density · n).

    Uses the generator's analytic densities when known, else the finite-depth
    scan."""
    if S.analytic_upper_density is not None:
        ud, bd = S.analytic_upper_density, S.analytic_banach_density
    elif not S.members:
        ud = bd = 0.0
    else:
        rep = densities(S)
        ud, bd = rep.upper_density, rep.banach_density
    return {"box": ud * n, "packing": ud * n, "assouad": bd * n}


# --- text serialization -----------------------------------------------------


def digitset_to_text(S: DigitSet) -> str:
    if S.kind == "periodic":
        q, residues = S.params
        res = ",".join(str(r) for r in residues)
        return f"type=periodic q={q} residues={res} depth={S.depth}"
    if S.kind == "blocks":
        s, t, n, kseq, base = S.params
        ks = ",".join(str(k) for k in kseq)
        return f"type=blocks s={s:g} t={t:g} n={n} k={ks} depth={S.depth}"
    mem = ",".join(str(k) for k in S.sorted_members)
    return f"members={mem} depth={S.depth}"


def digitset_from_text(line: str) -> DigitSet:
    fields = {}
    for tok in line.split():
        if "=" not in tok:
            raise InvalidInputError(f"bad token {tok!r} in digit-set line")
        key, val = tok.split("=", 1)
        fields[key] = val
    try:
        depth = int(fields["depth"])
        if fields.get("type") == "periodic":
            residues = [int(r) for r in fields["residues"].split(",") if r != ""]
            return periodic_set(int(fields["q"]), residues, depth)
        if fields.get("type") == "blocks":
            kseq = tuple(int(k) for k in fields["k"].split(","))
            return sharpness_set(
                float(fields["s"]), float(fields["t"]), int(fields["n"]),
                kseq=kseq, depth=depth,
            )
        members = [int(k) for k in fields["members"].split(",") if k != ""]
        return explicit_set(members, depth)
    except KeyError as exc:
        raise InvalidInputError(f"missing field {exc} in digit-set line") from exc


def cloud_to_csv(cloud: PointCloud) -> str:
    header = ",".join(f"x{i + 1}" for i in range(cloud.ambient_dim))
    lines = [header]
    for row in cloud.points:
        lines.append(",".join(f"{v:.17g}" for v in row))
    return "\n".join(lines) + "\n"
