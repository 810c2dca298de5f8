"""Approximate lp-centerpoints of finite point sets.

A rho-centerpoint certificate lower-bounds, over a finite direction
sample, the fraction of the point set captured by every limit halfspace
rooted at the candidate.  The sample is a finite proxy for "all unit
directions": it always contains the 2d signed axis directions (exactly
the worst cases for the simplex-tightness construction and for the
axis-aligned halfspace collapse) plus seeded uniform directions.

Existence of a 1/(d+1)-centerpoint is non-constructive, so the finder
evaluates a candidate slate (coordinate median, centroid, a push-map
iterate, random members of the set) and returns the best certificate;
consumers account for progress with the achieved rho, never the
theoretical 1/(d+1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ContractViolation, NoCandidateReached
from .pnorm import PNorm

__all__ = [
    "DirectionSample",
    "CenterpointCertificate",
    "centerpoint_quality",
    "find_centerpoint",
    "push_map_step",
    "push_map_iterate",
    "round_centerpoint_to_grid_l1",
    "round_to_grid_ints",
    "tightness_instance",
]


@dataclass(frozen=True)
class DirectionSample:
    """Unit directions: the 2d signed axes first, then seeded uniform draws."""

    dirs: np.ndarray
    seed: int
    count: int

    @staticmethod
    def make(d: int, count: int | None = None, seed: int = 0) -> "DirectionSample":
        if count is None:
            count = 64 * d
        if count < 2 * d:
            raise ContractViolation(f"need at least 2d={2 * d} directions, got {count}")
        axes = np.vstack([np.eye(d), -np.eye(d)])
        extra = count - 2 * d
        rng = np.random.default_rng(seed)
        rows = []
        while len(rows) < extra:
            g = rng.normal(size=d)
            n = np.linalg.norm(g)
            if n > 1e-12:
                rows.append(g / n)
        dirs = np.vstack([axes] + [np.asarray(rows)]) if rows else axes
        return DirectionSample(dirs=np.ascontiguousarray(dirs), seed=seed, count=count)

    @property
    def d(self) -> int:
        return self.dirs.shape[1]

    def __len__(self) -> int:
        return self.dirs.shape[0]


@dataclass(frozen=True)
class CenterpointCertificate:
    candidate: np.ndarray
    rho: float
    worst_dir: np.ndarray
    sample: DirectionSample
    set_size: int


def _as_point_set(P, assume_unique: bool) -> np.ndarray:
    P = np.ascontiguousarray(P, dtype=np.float64)
    if P.ndim == 1:
        P = P[:, None]
    if P.ndim != 2 or P.shape[0] == 0:
        raise ContractViolation("P must be a nonempty (n, d) point set")
    if not assume_unique:
        P = np.unique(P, axis=0)
    return P


def centerpoint_quality(P, c, p, sample: DirectionSample, *,
                        assume_unique: bool = False) -> CenterpointCertificate:
    """Exact minimum captured fraction of P over the sampled directions."""
    P = _as_point_set(P, assume_unique)
    p = PNorm.of(p)
    c = np.ascontiguousarray(c, dtype=np.float64)
    counts = kernels.membership_counts(P - c[None, :], sample.dirs, p)
    worst = int(np.argmin(counts))
    rho = counts[worst] / P.shape[0]
    return CenterpointCertificate(candidate=c, rho=float(rho),
                                  worst_dir=sample.dirs[worst].copy(),
                                  sample=sample, set_size=P.shape[0])


def _bounding_box(P: np.ndarray):
    return P.min(axis=0), P.max(axis=0)


def push_map_step(x, P, p, sample: DirectionSample, *,
                  assume_unique: bool = False) -> np.ndarray:
    """One step of the centerpoint push map, clamped to the bounding box of P.

    Monte Carlo surrogate of F_i(x) = x_i + integral over unit directions
    of v_i * max(1/(d+1) - frac(H_{x,-v} cap P), 0), with unit
    sphere-measure normalization.
    """
    P = _as_point_set(P, assume_unique)
    p = PNorm.of(p)
    x = np.ascontiguousarray(x, dtype=np.float64)
    n, d = P.shape
    counts = kernels.membership_counts(P - x[None, :], -sample.dirs, p)
    deficit = np.maximum(1.0 / (d + 1) - counts / n, 0.0)
    step = (sample.dirs * deficit[:, None]).sum(axis=0) / len(sample)
    lo, hi = _bounding_box(P)
    return np.clip(x + step, lo, hi)


def push_map_iterate(x0, P, p, sample: DirectionSample, *, tol: float = 1e-6,
                     max_iters: int = 500, assume_unique: bool = False):
    """Iterate push_map_step until the step norm drops below tol.

    Returns (endpoint, last_step_norm).
    """
    P = _as_point_set(P, assume_unique)
    x = np.ascontiguousarray(x0, dtype=np.float64)
    last = math.inf
    for _ in range(max_iters):
        nxt = push_map_step(x, P, p, sample, assume_unique=True)
        last = float(np.linalg.norm(nxt - x))
        x = nxt
        if last < tol:
            break
    return x, last


def find_centerpoint(P, p, sample: DirectionSample, rho_min: float, *,
                     seed: int = 0, k_random: int = 32,
                     screen_size: int | None = 4096, push_iters: int = 64,
                     assume_unique: bool = False) -> CenterpointCertificate:
    """Best certificate over the candidate slate; error below rho_min.

    The slate is the coordinate-wise median, the centroid, a push-map
    iterate, and k_random members of P.  All candidates lie in the
    bounding box of P by construction (the push iterate by clamping).
    With more points than ``screen_size`` the slate is ranked on a seeded
    subsample first and only the winner gets the full evaluation; the
    returned certificate is always exact for the full set.
    """
    P = _as_point_set(P, assume_unique)
    p = PNorm.of(p)
    n, d = P.shape
    if not (0.0 < rho_min <= 1.0 / (d + 1)):
        raise ContractViolation(f"rho_min must lie in (0, 1/(d+1)], got {rho_min}")
    rng = np.random.default_rng(seed)

    screened = screen_size is not None and n > screen_size
    if screened:
        pick = np.sort(rng.choice(n, size=screen_size, replace=False))
        P_screen = P[pick]
    else:
        P_screen = P

    push_end, _ = push_map_iterate(P.mean(axis=0), P_screen, p, sample,
                                   max_iters=push_iters, assume_unique=True)
    slate = [np.median(P, axis=0), P.mean(axis=0), push_end]
    if n and k_random:
        take = rng.integers(0, n, size=min(k_random, n))
        slate.extend(P[i].copy() for i in take)

    if screened:
        scores = []
        for c in slate:
            counts = kernels.membership_counts(P_screen - c[None, :], sample.dirs, p)
            scores.append(counts.min() / P_screen.shape[0])
        best_i = int(np.argmax(scores))
        best = centerpoint_quality(P, slate[best_i], p, sample, assume_unique=True)
    else:
        best = None
        for c in slate:
            cert = centerpoint_quality(P, c, p, sample, assume_unique=True)
            if best is None or cert.rho > best.rho:
                best = cert
    if best.rho < rho_min:
        raise NoCandidateReached(rho_min, best)
    return best


def round_to_grid_ints(c, b: int) -> np.ndarray:
    """Coordinate-wise nearest dyadic index k of c_i ~ k/2^b; half ties up."""
    c = np.ascontiguousarray(c, dtype=np.float64)
    if np.any(c < 0.0) or np.any(c > 1.0):
        raise ContractViolation("point to round must lie in the unit cube")
    scale = float(2 ** b)
    k = np.floor(c * scale + 0.5)
    return np.clip(k, 0, scale).astype(np.int64)


def round_centerpoint_to_grid_l1(c, b: int) -> np.ndarray:
    """Nearest grid point of spacing 2^-b (ties round up).

    For p = 1 the rounding keeps every captured set captured: whenever
    z_i - c'_i is nonzero it has the same sign as z_i - c_i, so any
    subgradient witnessing membership at c also witnesses it at c'.
    """
    return round_to_grid_ints(c, b) / float(2 ** b)


def tightness_instance(d: int) -> np.ndarray:
    """The simplex point set {0, e_1, ..., e_d} in [0,1]^d."""
    if d < 1:
        raise ContractViolation("d must be >= 1")
    return np.vstack([np.zeros(d), np.eye(d)])
