"""Centerpoint-cutting solver for lp-contraction fixpoints on [0,1]^d.

The search space is a fixed-size uniform point cloud standing in for the
true remaining region: the region is an intersection of non-convex
halfspace complements with no compact representation, and only its
measure matters for the analysis, so alive_count/N proxies the volume.

Each iteration queries (an approximation of) a centerpoint c of the
alive cloud and discards the bisector halfspace of (c, f(c)): the true
fixpoint is at least as close to f(c) as to c, so it survives every
discard, and while no query is an eps-approximate fixpoint a whole ball
of radius eps(1-lam)/(2+2 lam) around it survives.  Progress is
accounted with the achieved certificate quality, never the theoretical
1/(d+1).

A fixed cloud cannot resolve the termination ball once the alive region
shrinks to a few points, so when the cloud thins out (or stalls) the
solve finishes with the plain residual-decay iteration from the best
query so far; its geometric decay bounds the tail by
log(residual/eps)/log(1/lam) further queries.  The same iteration also
serves the whole solve whenever max(1/eps, 1/(1-lam)) < d, where it is
cheaper than cutting from the start.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .centerpoint import DirectionSample, find_centerpoint
from .errors import (ContractViolation, EmptySearchSpace, NoCandidateReached,
                     NonContractionSuspected)
from .oracles import as_counting_oracle
from .pnorm import PNorm, norm

__all__ = [
    "SearchSpace",
    "SolveParams",
    "IterationRecord",
    "SolveReport",
    "residual",
    "discard_halfspace",
    "survival_radius",
    "theoretical_query_bound",
    "banach_iterate",
    "solve_continuous",
]


@dataclass
class SearchSpace:
    """Uniform point cloud in [0,1]^d with alive flags."""

    points: np.ndarray
    alive: np.ndarray
    seed: int

    @staticmethod
    def uniform(n: int, d: int, seed: int) -> "SearchSpace":
        rng = np.random.default_rng(seed)
        pts = rng.random((n, d))
        return SearchSpace(points=pts, alive=np.ones(n, dtype=bool), seed=seed)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    @property
    def alive_count(self) -> int:
        return int(self.alive.sum())

    def alive_points(self) -> np.ndarray:
        return self.points[self.alive]

    def discard_bisector(self, c, fc, p) -> int:
        """Kill every alive point at least as close to c as to fc; returns kills."""
        idx = np.flatnonzero(self.alive)
        if idx.size == 0:
            return 0
        kill = kernels.bisector_mask(self.points[idx], np.asarray(c, dtype=np.float64),
                                     np.asarray(fc, dtype=np.float64), p)
        self.alive[idx[kill]] = False
        return int(kill.sum())


def discard_halfspace(space: SearchSpace, c, fc, p):
    """Discard the bisector halfspace of (c, fc); returns (space, fraction killed).

    The fraction is relative to the points alive before the discard;
    an already-empty space discards nothing.
    """
    before = space.alive_count
    if before == 0:
        return space, 0.0
    killed = space.discard_bisector(c, fc, p)
    return space, killed / before


def residual(f, x, p) -> float:
    """||f(x) - x||_p; consumes one oracle query."""
    oracle = as_counting_oracle(f)
    x = np.ascontiguousarray(x, dtype=np.float64)
    return norm(oracle(x) - x, PNorm.of(p))


def survival_radius(eps: float, lam: float) -> float:
    """Radius eps(1 - lam)/(2 + 2 lam) of the ball around the fixpoint that
    no discard can touch while queries still have residual > eps."""
    if eps <= 0.0:
        raise ContractViolation("eps must be positive")
    if not (0.0 <= lam < 1.0):
        raise ContractViolation("lam must lie in [0, 1)")
    return eps * (1.0 - lam) / (2.0 + 2.0 * lam)


def theoretical_query_bound(d: int, p, eps: float, lam: float, rho: float) -> int:
    """ceil(log(1 / ((2^d/d!) r^d)) / log(1/(1-rho))) with r the survival radius.

    (2^d/d!) r^d lower-bounds the volume of any lp-ball of radius r, so
    with per-query volume factor (1-rho) this is the query count at
    which the search space could no longer hold the survival ball.
    """
    if not (0.0 < rho < 1.0):
        raise ContractViolation("rho must lie in (0, 1)")
    r = survival_radius(eps, lam)
    log_vol = d * math.log(2.0) - math.lgamma(d + 1) + d * math.log(r)
    if log_vol >= 0.0:
        return 0
    return max(0, math.ceil(-log_vol / -math.log1p(-rho)))


def banach_iterate(f, x0, eps: float, lam: float, p, *,
                   max_queries: int | None = None):
    """Iterate x <- f(x) until the residual drops to eps.

    Returns (x, residual, queries).  The first residual is at most the
    cube diameter d and decays by lam per step, so a conforming oracle
    stops within ceil(log(d/eps)/log(1/lam)) + 1 queries (two for a
    constant map); exceeding that cap raises NonContractionSuspected.
    """
    p = PNorm.of(p)
    oracle = as_counting_oracle(f)
    x = np.ascontiguousarray(x0, dtype=np.float64)
    d = x.size
    if lam == 0.0:
        cap = 2
    else:
        cap = max(1, math.ceil(math.log(d / eps) / math.log(1.0 / lam)) + 1)
    queries = 0
    while True:
        fx = oracle(x)
        queries += 1
        r = norm(fx - x, p)
        if r <= eps:
            return x, r, queries
        if queries >= cap:
            raise NonContractionSuspected(
                f"residual {r:.3g} > eps after {queries} iterations "
                f"(cap {cap} for lam={lam})")
        if max_queries is not None and queries >= max_queries:
            return x, r, queries
        x = fx


@dataclass
class SolveParams:
    d: int
    p: PNorm
    epsilon: float
    lam: float
    n_cloud: int = 2 ** 17
    dirs: int | None = None
    rho_min: float | None = None
    max_queries: int | None = None
    seed: int = 0
    k_random: int = 32
    screen_size: int | None = 4096
    min_alive: int | None = None
    banach_finish: bool = True

    def __post_init__(self):
        self.p = PNorm.of(self.p)
        if self.d < 1:
            raise ContractViolation("d must be >= 1")
        if not (0.0 < self.epsilon <= self.d):
            raise ContractViolation("need 0 < epsilon <= d")
        if not (0.0 <= self.lam < 1.0):
            raise ContractViolation("need lam in [0, 1)")
        if self.dirs is None:
            self.dirs = 64 * self.d
        if self.rho_min is None:
            self.rho_min = 1.0 / (2 * (self.d + 1))
        if self.max_queries is None:
            bound = theoretical_query_bound(self.d, self.p, self.epsilon,
                                            self.lam, self.rho_min)
            self.max_queries = max(4 * bound, 16)
        if self.min_alive is None:
            self.min_alive = max(8, 2 * (self.d + 1))


@dataclass
class IterationRecord:
    index: int
    query: np.ndarray
    response: np.ndarray
    residual: float
    alive_before: int
    alive_after: int
    alive_frac_before: float
    alive_frac_after: float
    achieved_rho: float
    discard_fraction: float


@dataclass
class SolveReport:
    outcome: str                      # "found" | "budget_exhausted"
    x: np.ndarray | None
    residual: float | None
    trace: list
    queries_used: int
    theoretical_bound: int
    banach_queries: int
    min_achieved_rho: float | None
    params: SolveParams

    @property
    def found(self) -> bool:
        return self.outcome == "found"


def _banach_dispatch(params: SolveParams) -> bool:
    return max(1.0 / params.epsilon, 1.0 / (1.0 - params.lam)) < params.d


def solve_continuous(f, params: SolveParams) -> SolveReport:
    """Find an eps-approximate fixpoint of a declared lp-contraction.

    Returns a SolveReport with outcome "found" (residual <= eps) or
    "budget_exhausted" (with the full trace).  A malformed oracle raises
    MalformedOracle; a cloud that empties with the residual-decay finish
    disabled raises EmptySearchSpace; a finish that outlives the decay
    cap of a contraction raises NonContractionSuspected.
    """
    oracle = as_counting_oracle(f)
    p = params.p
    eps = params.epsilon

    def report(outcome, x, resid, trace, bq):
        rhos = [rec.achieved_rho for rec in trace]
        min_rho = min(rhos) if rhos else None
        # a zero-progress iteration is recorded as below cloud resolution
        rho_used = min_rho if min_rho is not None else params.rho_min
        rho_used = max(rho_used, 1.0 / (2 * params.n_cloud))
        bound = theoretical_query_bound(params.d, p, eps, params.lam, rho_used)
        return SolveReport(outcome=outcome, x=x, residual=resid, trace=trace,
                           queries_used=oracle.count, theoretical_bound=bound,
                           banach_queries=bq, min_achieved_rho=min_rho,
                           params=params)

    if _banach_dispatch(params):
        x0 = np.full(params.d, 0.5)
        x, r, q = banach_iterate(oracle, x0, eps, params.lam, p,
                                 max_queries=params.max_queries)
        if r <= eps:
            return report("found", x, r, [], q)
        return report("budget_exhausted", None, None, [], q)

    space = SearchSpace.uniform(params.n_cloud, params.d, params.seed)
    sample = DirectionSample.make(params.d, params.dirs, params.seed)
    trace: list[IterationRecord] = []
    best_x = None
    best_resid = math.inf
    n = space.n

    while oracle.count < params.max_queries:
        alive_before = space.alive_count
        if alive_before < params.min_alive:
            break
        pts = space.alive_points()
        try:
            cert = find_centerpoint(pts, p, sample, params.rho_min,
                                    seed=params.seed + len(trace) + 1,
                                    k_random=params.k_random,
                                    screen_size=params.screen_size,
                                    assume_unique=True)
        except NoCandidateReached as exc:
            # proceed with the best certificate; the achieved rho keeps
            # the progress accounting honest
            cert = exc.best
        c = cert.candidate
        fc = oracle(c)
        resid = norm(fc - c, p)
        achieved = cert.rho
        if resid > 0.0:
            v_star = c - fc
            capture = kernels.membership_mask(pts - c[None, :], v_star, p)
            achieved = min(achieved, float(capture.sum()) / alive_before)
        if resid <= eps:
            trace.append(IterationRecord(
                index=len(trace), query=c, response=fc, residual=resid,
                alive_before=alive_before, alive_after=alive_before,
                alive_frac_before=alive_before / n,
                alive_frac_after=alive_before / n,
                achieved_rho=achieved, discard_fraction=0.0))
            return report("found", c, resid, trace, 0)
        if resid < best_resid:
            best_resid, best_x = resid, c
        killed = space.discard_bisector(c, fc, p)
        alive_after = alive_before - killed
        trace.append(IterationRecord(
            index=len(trace), query=c, response=fc, residual=resid,
            alive_before=alive_before, alive_after=alive_after,
            alive_frac_before=alive_before / n, alive_frac_after=alive_after / n,
            achieved_rho=achieved, discard_fraction=killed / alive_before))
        if killed == 0:
            break

    if oracle.count >= params.max_queries:
        return report("budget_exhausted", None, None, trace, 0)

    if not params.banach_finish:
        raise EmptySearchSpace(
            f"cloud thinned to {space.alive_count}/{n} alive points before "
            f"termination; non-contraction suspected or cloud too small")

    x0 = best_x if best_x is not None else np.full(params.d, 0.5)
    remaining = params.max_queries - oracle.count
    before = oracle.count
    x, r, _ = banach_iterate(oracle, x0, eps, params.lam, p, max_queries=remaining)
    bq = oracle.count - before
    if r <= eps:
        return report("found", x, r, trace, bq)
    return report("budget_exhausted", None, None, trace, bq)
