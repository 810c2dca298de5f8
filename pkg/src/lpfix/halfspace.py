"""Bisector and limit lp-halfspaces with exact membership predicates.

Points are plain 1-d float arrays throughout.  A bisector halfspace is
the set of points at least as close to ``x`` as to ``y``; a limit
halfspace is its limit for ``y = x - eps*v`` as eps -> 0, i.e. the set

    { z : ||x - z||_p <= ||x - eps*v - z||_p  for all eps > 0 }.

Limit membership is decided in closed form through the support function
of the subdifferential of the norm at ``z - x``: ``z`` is in the
halfspace iff some subgradient ``u`` of ``||.||_p`` at ``z - x`` has
``<u, v> >= 0``, iff the maximum of ``<u, v>`` over the subdifferential
is >= 0.  Boundary ties are in (>=, not >), so discards stay
conservative.

``limit_contains_bruteforce`` is the independent test oracle: it checks
the defining inequality on a finite decreasing eps-grid using only
``bisector_contains``.  It shares no code path with the closed form.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolation, DimensionMismatch
from .pnorm import Kind, PNorm, _check_vector, norm, norm_le, norm_le_shifted

__all__ = [
    "BisectorHalfspace",
    "LimitHalfspace",
    "bisector_contains",
    "subgradient_support",
    "limit_contains",
    "limit_contains_bruteforce",
    "DEFAULT_EPS_GRID",
]

# 2^0 .. 2^-40: spans from cube scale down to just above machine scale
# without denormal noise.
DEFAULT_EPS_GRID = tuple(2.0 ** -k for k in range(41))


@dataclass(frozen=True)
class BisectorHalfspace:
    """Points at least as close to ``x`` as to ``y`` in the ``p`` metric."""

    x: np.ndarray
    y: np.ndarray
    p: PNorm

    def __post_init__(self):
        object.__setattr__(self, "x", _check_vector(self.x))
        object.__setattr__(self, "y", _check_vector(self.y))
        object.__setattr__(self, "p", PNorm.of(self.p))
        if self.x.shape != self.y.shape:
            raise DimensionMismatch("x and y have different dimensions")
        if bool(np.all(self.x == self.y)):
            raise ContractViolation("bisector halfspace requires x != y")

    @property
    def dim(self) -> int:
        return self.x.size


@dataclass(frozen=True)
class LimitHalfspace:
    """Halfspace through ``x`` in direction ``v`` (v normalized to unit length)."""

    x: np.ndarray
    v: np.ndarray
    p: PNorm
    # the raw direction before normalization, kept for debugging only
    _raw_norm: float = field(default=0.0, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "x", _check_vector(self.x))
        v = _check_vector(self.v)
        object.__setattr__(self, "p", PNorm.of(self.p))
        if v.shape != self.x.shape:
            raise DimensionMismatch("x and v have different dimensions")
        n = float(np.linalg.norm(v))
        if n == 0.0:
            raise ContractViolation("direction v must be nonzero")
        object.__setattr__(self, "_raw_norm", n)
        if abs(n - 1.0) > 1e-12:
            v = v / n
        object.__setattr__(self, "v", v)

    @property
    def dim(self) -> int:
        return self.x.size


def bisector_contains(h: BisectorHalfspace, z) -> bool:
    """True iff norm(x - z, p) <= norm(y - z, p); boundary ties are in."""
    z = _check_vector(z)
    if z.shape != h.x.shape:
        raise DimensionMismatch("z has wrong dimension for this halfspace")
    return norm_le(h.x - z, h.y - z, h.p)


def subgradient_support(w, v, p: PNorm) -> float:
    """max over u in the subdifferential of ||.||_p at w of <u, v>.

    Closed forms:
      p in (1, inf):  the norm is differentiable away from 0; the single
                      gradient is u_i = |w_i / ||w||_p|^(p-1) * sign(w_i).
      p = 1:          u_i = sign(w_i) where w_i != 0, free in [-1, 1] on
                      zero coordinates, so those contribute |v_i|.
      p = inf:        subdifferential is the convex hull of signed basis
                      vectors on max-magnitude coordinates; the support is
                      the best vertex.

    ``w = 0`` is rejected; the caller must short-circuit z = x.
    Zero tests ("w_i == 0", "|w_i| == max") are exact: grid data and
    constructed instances produce exactly representable coordinates.
    """
    p = PNorm.of(p)
    w = _check_vector(w)
    v = _check_vector(v)
    if w.shape != v.shape:
        raise DimensionMismatch("w and v have different dimensions")
    if not w.any():
        raise ContractViolation("subdifferential support at w = 0 is the unit ball; "
                                "short-circuit z = x instead")
    if p.kind is Kind.ONE:
        zero = w == 0.0
        return float(np.sign(w) @ v + np.abs(v[zero]).sum())
    if p.kind is Kind.INFINITY:
        m = np.abs(w).max()
        on_max = np.abs(w) == m
        return float((np.sign(w[on_max]) * v[on_max]).max())
    if p.kind is Kind.TWO:
        return float(w @ v) / norm(w, p)
    s = norm(w, p)
    u = np.abs(w / s) ** (p.p - 1.0) * np.sign(w)
    return float(u @ v)


def subgradient_maximizer(w, p: PNorm) -> np.ndarray:
    """A subgradient attaining the support maximum in its own direction.

    For differentiable p this is the gradient; for p = 1 zero coordinates
    get 0 (an admissible choice); for p = inf the first max-magnitude
    coordinate is used.  Exposed for the angle-bound tests.
    """
    p = PNorm.of(p)
    w = _check_vector(w)
    if not w.any():
        raise ContractViolation("subdifferential at w = 0")
    if p.kind is Kind.ONE:
        return np.sign(w)
    if p.kind is Kind.INFINITY:
        u = np.zeros_like(w)
        i = int(np.argmax(np.abs(w)))
        u[i] = np.sign(w[i])
        return u
    if p.kind is Kind.TWO:
        return w / norm(w, p)
    s = norm(w, p)
    return np.abs(w / s) ** (p.p - 1.0) * np.sign(w)


def limit_contains(h: LimitHalfspace, z) -> bool:
    """True iff z is in the limit halfspace; boundary (support 0) is in."""
    z = _check_vector(z)
    if z.shape != h.x.shape:
        raise DimensionMismatch("z has wrong dimension for this halfspace")
    w = z - h.x
    if not w.any():
        return True
    return subgradient_support(w, h.v, h.p) >= 0.0


def limit_contains_bruteforce(h: LimitHalfspace, z, eps_grid=None) -> bool:
    """Independent oracle: AND of bisector memberships over a finite eps-grid.

    Checks the defining inequality ``norm(x - z) <= norm(x - eps*v - z)``
    for every eps in the grid; it must agree with ``limit_contains`` away
    from the support-function zero set.  The shift ``eps*v`` is applied
    inside the guarded comparison rather than by materializing the point
    ``x - eps*v``: at the smallest grid eps the true norm gap sits below
    the coordinate rounding of that point, and a pre-rounded input would
    make the comparison answer for the wrong halfspace.
    """
    if eps_grid is None:
        eps_grid = DEFAULT_EPS_GRID
    else:
        eps_grid = tuple(float(e) for e in eps_grid)
        if any(e <= 0 for e in eps_grid) or any(
                nxt >= prev for nxt, prev in zip(eps_grid[1:], eps_grid)):
            raise ContractViolation("eps_grid must be a decreasing positive sequence")
    z = _check_vector(z)
    if z.shape != h.x.shape:
        raise DimensionMismatch("z has wrong dimension for this halfspace")
    w = h.x - z
    for eps in eps_grid:
        if not norm_le_shifted(w, h.v, eps, h.p):
            return False
    return True
