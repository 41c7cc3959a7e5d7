"""Capacity machinery: the truncated-power kernel, energies of discrete
measures, energy minimization over the probability simplex, dimension-profile
slope estimates, and the closed-form projection bound formulas.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import PointCloud, ScaleSchedule, SlopeFit, fit_slope
from .covering import separated_set
from .errors import InvalidInputError, SizeLimitError

__all__ = [
    "DiscreteMeasure",
    "ProfileEstimate",
    "CapacityResult",
    "kernel_phi",
    "kernel_matrix",
    "energy",
    "min_energy",
    "capacity",
    "proof_measure_bound",
    "profile_estimate",
    "bound_formulas",
]

SUPPORT_CAP = 4096
GAP_TOL = 1e-8


@dataclass(frozen=True)
class DiscreteMeasure:
    """A probability measure with finite support."""

    support: PointCloud
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.shape != (len(self.support),):
            raise InvalidInputError("one weight per support point required")
        if np.any(w < -1e-12):
            raise InvalidInputError("weights must be nonnegative")
        if abs(w.sum() - 1.0) > 1e-12:
            raise InvalidInputError("weights must sum to 1")
        w = np.clip(w, 0.0, None)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, support: PointCloud) -> "DiscreteMeasure":
        N = len(support)
        return cls(support, np.full(N, 1.0 / N))


def kernel_phi(x, r: float, s: float):
    """min{1, (r/|x|)^s}; equals 1 at the origin."""
    if r <= 0 or s <= 0:
        raise InvalidInputError("r and s must be positive")
    x = np.asarray(x, dtype=np.float64)
    d = np.linalg.norm(np.atleast_2d(x), axis=1)
    vals = (r / np.maximum(d, r)) ** s
    return float(vals[0]) if np.ndim(x) <= 1 else vals


def kernel_matrix(points: np.ndarray, r: float, s: float) -> np.ndarray:
    if r <= 0 or s <= 0:
        raise InvalidInputError("r and s must be positive")
    diff = points[:, None, :] - points[None, :, :]
    d = np.linalg.norm(diff, axis=2)
    return (r / np.maximum(d, r)) ** s


def energy(mu: DiscreteMeasure, r: float, s: float) -> float:
    """Sum_ij w_i w_j phi(x_i - x_j), diagonal included (phi(0) = 1)."""
    phi = kernel_matrix(mu.support.points, r, s)
    return float(mu.weights @ phi @ mu.weights)


def _line_search(phi_w, phi, direction, gamma_max):
    """Exact minimization of the quadratic f(w + g*d) = f + 2g d'phi w + g^2 d'phi d."""
    lin = direction @ phi_w
    curv = direction @ phi @ direction
    if curv <= 1e-18:
        return gamma_max if lin < 0 else 0.0
    return float(np.clip(-lin / curv, 0.0, gamma_max))


def _face_polish(phi, w, energy_val):
    """Solve the first-order conditions exactly on the current active face:
    phi_AA z = 1, normalized.  Keep the solution only if it is feasible and
    improves the energy."""
    active = np.flatnonzero(w > 1e-12)
    if active.size < 2:
        return w, energy_val
    sub = phi[np.ix_(active, active)]
    try:
        z = np.linalg.solve(sub, np.ones(active.size))
    except np.linalg.LinAlgError:
        return w, energy_val
    if np.any(z < 0) or z.sum() <= 0:
        return w, energy_val
    cand = np.zeros_like(w)
    cand[active] = z / z.sum()
    cand_energy = float(cand @ phi @ cand)
    if cand_energy < energy_val - 1e-16:
        return cand, cand_energy
    return w, energy_val


def _frank_wolfe(phi, w0, max_iter, gap_tol):
    """Conditional-gradient descent with away steps and exact line search on
    the simplex-constrained quadratic.  Returns (weights, energy, gap).

    Both step directions have the form +-(e_i - w), so the line-search
    coefficients and the potential phi@w can be maintained with O(N) work per
    iteration; phi@w is recomputed periodically to cancel drift."""
    N = phi.shape[0]
    w = w0.copy()
    phi_w = phi @ w
    e = float(w @ phi_w)
    best_w, best_e = w.copy(), e
    for it in range(max_iter):
        if it % 256 == 255:
            phi_w = phi @ w
            e = float(w @ phi_w)
        if e < best_e:
            best_e, best_w = e, w.copy()
        grad = 2.0 * phi_w
        i_fw = int(np.argmin(grad))
        active = np.flatnonzero(w > 1e-14)
        i_away = int(active[np.argmax(grad[active])])
        gap = grad[i_away] - grad[i_fw]
        if gap < gap_tol:
            break
        fw_decrease = grad @ w - grad[i_fw]
        aw_decrease = grad[i_away] - grad @ w
        if fw_decrease >= aw_decrease:
            sign, i_vtx, gamma_max = 1.0, i_fw, 1.0
        else:
            wa = w[i_away]
            sign, i_vtx = -1.0, i_away
            gamma_max = wa / (1.0 - wa) if wa < 1.0 else 1.0
        # direction d = sign * (e_i - w):  d'phi w and d'phi d from phi_w, e
        phi_col = phi[i_vtx]
        lin = sign * (phi_w[i_vtx] - e)
        curv = phi[i_vtx, i_vtx] - 2.0 * phi_w[i_vtx] + e
        if curv <= 1e-18:
            gamma = gamma_max if lin < 0 else 0.0
        else:
            gamma = float(np.clip(-lin / curv, 0.0, gamma_max))
        if gamma <= 0.0:
            break
        phi_d = sign * (phi_col - phi_w)
        # quadratic update of e along the exact step, then the potential
        e = e + 2.0 * gamma * lin + gamma * gamma * curv
        w = w + (gamma * sign) * (-w)
        w[i_vtx] += gamma * sign
        np.clip(w, 0.0, None, out=w)
        total = w.sum()
        w /= total
        phi_w = (phi_w + gamma * phi_d) / total
    e = float(w @ phi @ w)
    if e < best_e:
        best_e, best_w = e, w.copy()
    best_w, best_e = _face_polish(phi, best_w, best_e)
    phi_w = phi @ best_w
    active = np.flatnonzero(best_w > 1e-14)
    gap = float(2.0 * (phi_w[active].max() - phi_w.min()))
    return best_w, best_e, gap


def min_energy(
    support: PointCloud,
    r: float,
    s: float,
    cap: int = SUPPORT_CAP,
    gap_tol: float = GAP_TOL,
    restarts: int = 5,
    seed: int = 0,
) -> DiscreteMeasure:
    """Weights approximately minimizing the quadratic kernel energy over the
    probability simplex.  Conditional-gradient steps with exact line search
    and an active-face polish; multi-start with fixed seeds when the duality
    gap stalls."""
    N = len(support)
    if N > cap:
        raise SizeLimitError(
            f"support of size {N} exceeds cap {cap}; reduce with a separated set",
        )
    phi = kernel_matrix(support.points, r, s)
    max_iter = max(10 * N, 50)
    w, e, gap = _frank_wolfe(phi, np.full(N, 1.0 / N), max_iter, gap_tol)
    if gap >= gap_tol and N > 1:
        rng = np.random.default_rng(seed)
        for _ in range(restarts):
            w0 = rng.dirichlet(np.ones(N))
            w2, e2, gap2 = _frank_wolfe(phi, w0, max_iter, gap_tol)
            if e2 < e:
                w, e, gap = w2, e2, gap2
    return DiscreteMeasure(support, w)


@dataclass(frozen=True)
class CapacityResult:
    value: float
    lower_bound: float
    r: float
    s: float
    measure: DiscreteMeasure


def capacity(F: PointCloud, r: float, s: float, cap: int = SUPPORT_CAP) -> CapacityResult:
    """Reciprocal of the minimal kernel energy over probability measures on F.

    Supports above the cap are reduced to a maximal (r/2)-separated subset.
    Also returns the certified lower bound 1/energy(uniform measure on a
    maximal r-separated subset)."""
    support = F
    if len(support) > cap:
        support = separated_set(F, r / 2.0)
        if len(support) > cap:
            raise SizeLimitError(
                f"(r/2)-separated support still has {len(support)} > {cap} points"
            )
    mu = min_energy(support, r, s, cap=cap)
    value = 1.0 / energy(mu, r, s)

    sep = separated_set(F, r)
    if len(sep) > cap:
        sep = PointCloud(
            sep.ambient_dim, sep.points[:cap], sep.resolution_exponent, sep.unit_box
        )
    uniform = DiscreteMeasure.uniform(sep)
    lower = 1.0 / energy(uniform, r, s)
    return CapacityResult(value, lower, r, s, mu)


@dataclass(frozen=True)
class ProofMeasureBound:
    n_r: int
    capacity_lower_bound: float
    uniform_energy: float
    ring_potential_bound: float
    D: int
    B: int


def proof_measure_bound(
    F: PointCloud, r: float, s: float, theta: float, alpha: float, beta: float
) -> ProofMeasureBound:
    """Capacity lower bound from the uniform measure on a maximal r-separated
    set: N_r(F) · min{1, r^(alpha-s), r^((beta-s)(1-theta))}, with the dyadic
    ring decomposition (rings 0..D, split at B) evaluated alongside for
    comparison against the directly computed energy of that measure."""
    if alpha < 0 or beta < alpha:
        raise InvalidInputError("need 0 <= alpha <= beta")
    if not 0 < theta < 1:
        raise InvalidInputError("theta must lie in (0, 1)")
    if r <= 0 or s <= 0:
        raise InvalidInputError("r and s must be positive")

    sep = separated_set(F, r)
    N = len(sep)
    bound = N * min(1.0, r ** (alpha - s), r ** ((beta - s) * (1.0 - theta)))
    uniform = DiscreteMeasure.uniform(sep)
    u_energy = energy(uniform, r, s)

    diam = F.diameter
    D = max(0, math.ceil(math.log2(2.0 * diam / r))) if diam > 0 else 0
    B = max(1, math.ceil((1.0 - theta) * math.log2(1.0 / r)))
    ring = 0.0
    for k in range(0, D + 1):
        expo = alpha if k >= B else beta
        ring += 2.0 ** (-k * s) * (2.0 ** k) ** expo
    ring_bound = 2.0 ** s * ring / N

    return ProofMeasureBound(N, bound, u_energy, ring_bound, D, B)


@dataclass(frozen=True)
class ProfileEstimate:
    s: float
    schedule: ScaleSchedule
    capacities: tuple
    lower: SlopeFit
    upper: SlopeFit


def profile_estimate(
    F: PointCloud, s: float, schedule: ScaleSchedule | None = None, cap: int = SUPPORT_CAP
) -> ProfileEstimate:
    """Capacity per schedule scale and slope fits of log2 capacity against k
    (both liminf and limsup modes)."""
    schedule = schedule or ScaleSchedule.default()
    caps = []
    for k in schedule.exponents:
        caps.append(capacity(F, 2.0 ** -k, s, cap=cap).value)
    pairs = [(k, math.log2(c)) for k, c in zip(schedule.exponents, caps)]
    return ProfileEstimate(
        s,
        schedule,
        tuple(caps),
        fit_slope(pairs, "liminf"),
        fit_slope(pairs, "limsup"),
    )


# --- closed-form bound formulas ----------------------------------------------

DEFAULT_THETA_GRID = (
    Fraction(1, 2),
    Fraction(3, 4),
    Fraction(9, 10),
    Fraction(19, 20),
)


def bound_formulas(
    m: int,
    n: int,
    ubd,
    lbd=None,
    ad=None,
    spectrum=None,
    s=None,
    theta=None,
    t=None,
    theta_grid=DEFAULT_THETA_GRID,
) -> dict:
    """Every closed-form quantity of the projection bound ladder.

    Inputs may be Fractions (or ints), in which case all outputs are exact
    rationals.  `spectrum` is an optional callable theta -> value; when
    omitted it defaults to the trivial bound min(ad, ubd/(1-theta)).
    Returns a dict; entries whose hypotheses fail are None.
    """
    if not 1 <= m < n:
        raise InvalidInputError("need integers 1 <= m < n")
    for name, val in (("ubd", ubd), ("lbd", lbd), ("ad", ad)):
        if val is not None and not 0 <= val <= n:
            raise InvalidInputError(f"{name} must lie in [0, {n}]")
    if ad is not None and ad < ubd:
        raise InvalidInputError("ad must be >= ubd")

    if spectrum is None:
        def spectrum(th):
            cap_val = ubd / (1 - th)
            return min(ad, cap_val) if ad is not None else cap_val

    out: dict = {}
    out["general_lower"] = ubd * m * n / (m * n + (n - m) * ubd) if ubd > 0 else ubd * 0
    out["general_upper"] = min(m, ubd)
    if lbd is not None:
        out["general_lower_lbd"] = lbd * m * n / (m * n + (n - m) * lbd) if lbd > 0 else lbd * 0
        out["general_upper_lbd"] = min(m, lbd)

    def profile_rhs(s_val, th):
        drop = max(0 * s_val, spectrum(th) - s_val, (ad - s_val) * (1 - th))
        return ubd - drop

    if ad is not None:
        if theta is not None:
            out["theorem_rhs"] = profile_rhs(m, theta)
            if s is not None:
                out["profile_rhs"] = profile_rhs(s, theta)
        vals = [profile_rhs(m, th) for th in theta_grid]
        out["best_theorem_rhs"] = max(vals)
        out["best_theta"] = theta_grid[vals.index(out["best_theorem_rhs"])]

        qad = spectrum(theta_grid[-1])
        out["qad_proxy"] = qad
        out["preserved"] = qad <= max(m, ubd)
        out["preserved_value"] = min(m, ubd) if out["preserved"] else None
        out["qad_drop_bound"] = ubd - max(0 * qad, qad - m)
        out["exceptional_dim_bound"] = (
            m * (n - m) - (m - qad) if qad < m else None
        )

        thr = (m * n + 2 * ubd * (n - m)) * m
        thr_den = m * n + ubd * (n - m)
        out["assouad_threshold"] = thr / thr_den
        out["assouad_improved_bound"] = (
            ubd - (ad - m) * ubd / m
            if ubd <= m and max(m, ubd) <= ad < out["assouad_threshold"]
            else None
        )
        out["theta_choice"] = 1 - ubd / m if ubd <= m else None
    else:
        thr = (m * n + 2 * ubd * (n - m)) * m
        thr_den = m * n + ubd * (n - m)
        out["assouad_threshold"] = thr / thr_den
        out["theta_choice"] = 1 - ubd / m if ubd <= m else None

    if s is not None and t is not None:
        if not (m < s <= n and 0 < t < s):
            raise InvalidInputError("sharpness value needs m < s <= n and 0 < t < s")
        out["sharpness_value"] = m * s * t / (m * (s - t) + s * t)

    return out


def region_curve(x, m: int = 1, n: int = 2):
    """Threshold curve in the (upper box, Assouad) plane below which the
    improved projection bound applies; (2x+2)/(x+2) for lines in the plane."""
    return (m * n + 2 * x * (n - m)) * m / (m * n + x * (n - m))
