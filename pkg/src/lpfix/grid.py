"""Discretized l1 solver on the dyadic grid, with violation certificates.

The search space is the set of still-alive grid points; the measure of
the remaining region is simply their count.  Each iteration rounds the
centerpoint of the alive set coordinate-wise to the nearest grid point,
which for p = 1 preserves every captured set (any subgradient witnessing
membership at the centerpoint still witnesses it after the rounding),
queries it, and discards the bisector halfspace of query and response.

On a map that extends to a true l1-contraction, fine enough grids
(b at least the resolution bound) guarantee a fixpoint is found.  On
anything else the alive set can empty out; the queried (x, f(x)) pairs
then form a total-search violation certificate: their bisector
halfspaces jointly cover the whole grid, witnessing that no grid point
was wrongly ruled out.  Certificates are verified by full enumeration,
which is why grid mode refuses grids past the enumeration cap instead
of silently sampling.

Grid coordinates are kept as integers k (point = k/2^b) so that nearest
rounding, membership sign tests, and query validation are exact; floats
k/2^b are exact in binary for b <= 52.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .centerpoint import DirectionSample, centerpoint_quality, find_centerpoint, \
    round_to_grid_ints
from .errors import (CertificateIncomplete, ContractViolation, GridTooLarge,
                     NoCandidateReached, ResolutionTooCoarse)
from .oracles import as_counting_oracle
from .pnorm import PNorm, norm

__all__ = [
    "ENUMERATION_CAP",
    "Grid",
    "ViolationCertificate",
    "GridIterationRecord",
    "GridSolveResult",
    "min_grid_resolution",
    "existence_resolution",
    "solve_grid_l1",
    "verify_violation_certificate",
]

ENUMERATION_CAP = 2 ** 24
_VERIFY_CHUNK = 2 ** 16


@dataclass(frozen=True)
class Grid:
    """The dyadic grid G^d_b = {k/2^b : k = 0..2^b}^d."""

    d: int
    b: int

    def __post_init__(self):
        if self.d < 1 or self.b < 1:
            raise ContractViolation("need d >= 1 and b >= 1")
        if self.b > 52:
            raise ContractViolation("b > 52 loses exactness in binary floats")
        if self.size > ENUMERATION_CAP:
            raise GridTooLarge(
                f"(2^{self.b}+1)^{self.d} = {self.size} grid points exceed the "
                f"explicit-enumeration cap {ENUMERATION_CAP}")

    @property
    def side(self) -> int:
        return 2 ** self.b + 1

    @property
    def size(self) -> int:
        return self.side ** self.d

    @property
    def spacing(self) -> float:
        return 2.0 ** -self.b

    def all_ints(self) -> np.ndarray:
        ks = np.indices((self.side,) * self.d).reshape(self.d, -1).T
        return np.ascontiguousarray(ks, dtype=np.int64)

    def chunks(self, chunk: int = _VERIFY_CHUNK):
        """Yield (m, d) float chunks of the full grid without materializing it."""
        scale = self.spacing
        for lo in range(0, self.size, chunk):
            flat = np.arange(lo, min(lo + chunk, self.size))
            ks = np.stack(np.unravel_index(flat, (self.side,) * self.d), axis=1)
            yield ks.astype(np.float64) * scale


def min_grid_resolution(d: int, eps: float, lam: float) -> int:
    """Smallest b with 2^-b <= survival_radius/d: ceil(log2((2d/eps)(1+lam)/(1-lam)))."""
    if eps <= 0.0 or not (0.0 <= lam < 1.0):
        raise ContractViolation("need eps > 0 and lam in [0, 1)")
    b = math.ceil(math.log2((2.0 * d / eps) * (1.0 + lam) / (1.0 - lam)))
    return max(1, b)


def existence_resolution(d: int, eps: float, lam: float) -> int:
    """Weaker bound ceil(log2((d + d lam)/(2 eps))) under which a grid
    eps-fixpoint merely exists (clamped to the minimum b = 1)."""
    if eps <= 0.0 or not (0.0 <= lam < 1.0):
        raise ContractViolation("need eps > 0 and lam in [0, 1)")
    b = math.ceil(math.log2((d + d * lam) / (2.0 * eps)))
    return max(1, b)


@dataclass
class ViolationCertificate:
    """Queried grid points whose bisector halfspaces cover the whole grid."""

    ks: np.ndarray          # (m, d) int64 grid indices
    fx: np.ndarray          # (m, d) float oracle responses
    d: int
    b: int

    @property
    def points(self) -> np.ndarray:
        return self.ks.astype(np.float64) * (2.0 ** -self.b)

    def __len__(self) -> int:
        return self.ks.shape[0]

    def to_json(self) -> list:
        return [{"x": [int(k) for k in row_k], "b": self.b,
                 "fx": [float(v) for v in row_f]}
                for row_k, row_f in zip(self.ks, self.fx)]

    @staticmethod
    def from_json(doc: list, d: int, b: int) -> "ViolationCertificate":
        ks = np.asarray([entry["x"] for entry in doc], dtype=np.int64)
        fx = np.asarray([entry["fx"] for entry in doc], dtype=np.float64)
        if len(doc) and any(entry["b"] != b for entry in doc):
            raise ContractViolation("certificate entries disagree on b")
        if ks.size and ks.shape[1] != d:
            raise ContractViolation("certificate entries disagree on d")
        return ViolationCertificate(ks=ks.reshape(-1, d), fx=fx.reshape(-1, d),
                                    d=d, b=b)

    def dump(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh)


def verify_violation_certificate(cert: ViolationCertificate, d: int, b: int) -> bool:
    """Full enumeration: every grid point lies in some listed bisector halfspace."""
    grid = Grid(d, b)  # enforces the enumeration cap
    if len(cert) == 0:
        return False
    xs = cert.points
    for Z in grid.chunks():
        covered = np.zeros(Z.shape[0], dtype=bool)
        for x, fx in zip(xs, cert.fx):
            if covered.all():
                break
            rest = ~covered
            covered[rest] = kernels.bisector_mask(Z[rest], x, fx, PNorm.one())
        if not covered.all():
            return False
    return True


@dataclass
class GridIterationRecord:
    index: int
    query_ks: np.ndarray
    query: np.ndarray
    response: np.ndarray
    residual: float
    alive_before: int
    alive_after: int
    achieved_rho: float
    discard_fraction: float
    snapped: bool


@dataclass
class GridSolveResult:
    outcome: str                      # "found" | "violation"
    x: np.ndarray | None
    x_ks: np.ndarray | None
    residual: float | None
    certificate: ViolationCertificate | None
    trace: list
    queries_used: int

    @property
    def found(self) -> bool:
        return self.outcome == "found"


def _nearest_alive(ks_alive: np.ndarray, target: np.ndarray) -> int:
    dist = np.abs(ks_alive - target[None, :]).sum(axis=1)
    best = np.flatnonzero(dist == dist.min())
    if best.size == 1:
        return int(best[0])
    # lexicographic smallest among ties, for determinism
    order = np.lexsort(ks_alive[best].T[::-1])
    return int(best[order[0]])


def solve_grid_l1(f, d: int, b: int, eps: float, lam: float, *,
                  dirs: int | None = None, rho_min: float | None = None,
                  seed: int = 0, max_queries: int | None = None,
                  k_random: int = 32, screen_size: int | None = 4096,
                  check_resolution: bool = True) -> GridSolveResult:
    """Centerpoint cutting over G^d_b in the l1 metric.

    Returns FoundFixpoint (a grid point with l1 residual <= eps) or a
    verified ViolationCertificate.  Raises ResolutionTooCoarse below the
    resolution bound and CertificateIncomplete if the query cap is hit
    with alive points left.

    The resolution bound backs the totality promise for maps that extend
    to true contractions; deliberately non-conforming instances (the
    violation-certificate exercises) may disable the check since any
    grid supports the certificate path.
    """
    p = PNorm.one()
    if check_resolution and b < min_grid_resolution(d, eps, lam):
        raise ResolutionTooCoarse(
            f"b={b} is below min_grid_resolution={min_grid_resolution(d, eps, lam)}")
    grid = Grid(d, b)
    oracle = as_counting_oracle(f)
    if dirs is None:
        dirs = 64 * d
    if rho_min is None:
        rho_min = 1.0 / (2 * (d + 1))
    if max_queries is None:
        from .solver import theoretical_query_bound
        max_queries = max(4 * theoretical_query_bound(d, p, eps, lam, rho_min), 16)
        max_queries = min(max_queries, grid.size)

    sample = DirectionSample.make(d, dirs, seed)
    ks = grid.all_ints()
    alive = np.ones(ks.shape[0], dtype=bool)
    scale = grid.spacing
    queried: set[tuple] = set()
    trace: list[GridIterationRecord] = []

    while alive.any() and oracle.count < max_queries:
        idx = np.flatnonzero(alive)
        pts = ks[idx].astype(np.float64) * scale
        alive_before = idx.size
        try:
            cert = find_centerpoint(pts, p, sample, rho_min,
                                    seed=seed + len(trace) + 1,
                                    k_random=k_random, screen_size=screen_size,
                                    assume_unique=True)
            candidate = cert.candidate
        except NoCandidateReached as exc:
            candidate = exc.best.candidate
        q_ks = round_to_grid_ints(candidate, b)
        snapped = False
        if tuple(q_ks) in queried:
            # rounding collided with a spent query; the nearest alive grid
            # point is never queried (every query dies in its own discard)
            q_ks = ks[idx[_nearest_alive(ks[idx], q_ks)]].copy()
            snapped = True
        queried.add(tuple(q_ks))
        q = q_ks.astype(np.float64) * scale
        fx = oracle(q)
        resid = norm(fx - q, p)
        rho = centerpoint_quality(pts, q, p, sample, assume_unique=True).rho
        if resid <= eps:
            trace.append(GridIterationRecord(
                index=len(trace), query_ks=q_ks, query=q, response=fx,
                residual=resid, alive_before=alive_before,
                alive_after=alive_before, achieved_rho=rho,
                discard_fraction=0.0, snapped=snapped))
            return GridSolveResult(outcome="found", x=q, x_ks=q_ks,
                                   residual=resid, certificate=None,
                                   trace=trace, queries_used=oracle.count)
        kill = kernels.bisector_mask(pts, q, fx, p)
        alive[idx[kill]] = False
        alive_after = alive_before - int(kill.sum())
        trace.append(GridIterationRecord(
            index=len(trace), query_ks=q_ks, query=q, response=fx,
            residual=resid, alive_before=alive_before, alive_after=alive_after,
            achieved_rho=rho,
            discard_fraction=(alive_before - alive_after) / alive_before,
            snapped=snapped))

    if alive.any():
        raise CertificateIncomplete(
            f"query cap {max_queries} hit with {int(alive.sum())} grid points "
            f"alive and no fixpoint; rho_min may be too ambitious", trace=trace)

    xs = np.asarray([x for x, _ in oracle.log], dtype=np.float64)
    fxs = np.asarray([fx for _, fx in oracle.log], dtype=np.float64)
    cert = ViolationCertificate(
        ks=np.rint(xs * 2.0 ** b).astype(np.int64), fx=fxs, d=d, b=b)
    if not verify_violation_certificate(cert, d, b):
        raise CertificateIncomplete(
            "alive set emptied but the queried halfspaces do not cover the "
            "grid; this should be impossible", trace=trace)
    return GridSolveResult(outcome="violation", x=None, x_ks=None, residual=None,
                           certificate=cert, trace=trace,
                           queries_used=oracle.count)
