"""The p-norm selector and exact norm comparisons.

``PNorm`` carries the metric through the whole package.  Dispatch is
structural (``One``/``Two``/``Infinity``/``General``), never a floating
comparison of ``p``, so the closed-form subdifferentials for the kink
cases p = 1 and p = infinity are used exactly when intended.

``norm_le`` is the workhorse comparison predicate.  A plain float64
comparison of two nearly equal norms is a coin flip at the rounding
scale, which is not good enough for the bisector membership tests that
probe the limit-halfspace boundary with perturbations down to 2^-40.
Near-ties therefore escalate: float64 -> 80-bit long double -> mpmath.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import mpmath
import numpy as np

from .errors import ContractViolation, DimensionMismatch


class Kind(Enum):
    ONE = "one"
    TWO = "two"
    INFINITY = "infinity"
    GENERAL = "general"


@dataclass(frozen=True)
class PNorm:
    """Metric selector: p in [1, inf) or inf, with exact kind dispatch."""

    kind: Kind
    p: float

    def __post_init__(self):
        if self.kind is Kind.GENERAL:
            if not (1.0 < self.p < math.inf):
                raise ContractViolation(f"General kind requires p in (1, inf), got {self.p}")

    @staticmethod
    def one() -> "PNorm":
        return PNorm(Kind.ONE, 1.0)

    @staticmethod
    def two() -> "PNorm":
        return PNorm(Kind.TWO, 2.0)

    @staticmethod
    def infinity() -> "PNorm":
        return PNorm(Kind.INFINITY, math.inf)

    @staticmethod
    def general(p: float) -> "PNorm":
        return PNorm(Kind.GENERAL, float(p))

    @staticmethod
    def of(p) -> "PNorm":
        """Coerce a float, string, or PNorm into a PNorm.

        Exact values 1, 2, and inf map to their dedicated kinds.
        """
        if isinstance(p, PNorm):
            return p
        if isinstance(p, str):
            s = p.strip().lower()
            if s in ("inf", "infinity", "oo"):
                return PNorm.infinity()
            p = float(s)
        p = float(p)
        if p == 1.0:
            return PNorm.one()
        if p == 2.0:
            return PNorm.two()
        if math.isinf(p):
            return PNorm.infinity()
        return PNorm.general(p)

    @property
    def is_finite(self) -> bool:
        return self.kind is not Kind.INFINITY

    def __str__(self):
        if self.kind is Kind.ONE:
            return "1"
        if self.kind is Kind.TWO:
            return "2"
        if self.kind is Kind.INFINITY:
            return "inf"
        return format(self.p, "g")


def _check_vector(w) -> np.ndarray:
    w = np.asarray(w, dtype=np.float64)
    if w.ndim != 1 or w.size == 0:
        raise DimensionMismatch(f"expected a 1-d vector, got shape {w.shape}")
    if not np.isfinite(w).all():
        raise ContractViolation("non-finite entry in vector")
    return w


def norm(w, p: PNorm) -> float:
    """The lp-norm: (sum |w_i|^p)^(1/p) for finite p, max |w_i| for p = inf.

    Exactly 0 iff w = 0.  NaN/inf input is a programming error and is
    rejected.  General-p sums are normalized by the largest entry first
    so that powers up to p ~ 64 neither overflow nor lose the lead digit.
    """
    p = PNorm.of(p)
    w = np.abs(_check_vector(w))
    if p.kind is Kind.INFINITY:
        return float(w.max())
    if p.kind is Kind.ONE:
        return float(w.sum())
    if p.kind is Kind.TWO:
        return float(np.sqrt((w * w).sum()))
    m = float(w.max())
    if m == 0.0:
        return 0.0
    return m * float(((w / m) ** p.p).sum() ** (1.0 / p.p))


def angle(a, b) -> float:
    """Angle in [0, pi] between two nonzero vectors (Euclidean)."""
    a = _check_vector(a)
    b = _check_vector(b)
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        raise ContractViolation("angle of a zero vector is undefined")
    c = float(a @ b) / (na * nb)
    return math.acos(min(1.0, max(-1.0, c)))


# Relative widths of the near-tie bands that trigger precision escalation.
_GUARD_F64 = 1e-12
_GUARD_LD = 1e-17
_MP_DPS = 60
_MP_TIE = mpmath.mpf("1e-45")


def _norm_ld(w: np.ndarray, p: PNorm) -> np.longdouble:
    w = np.abs(w.astype(np.longdouble))
    if p.kind is Kind.INFINITY:
        return w.max()
    if p.kind is Kind.ONE:
        return w.sum()
    if p.kind is Kind.TWO:
        return np.sqrt((w * w).sum())
    m = w.max()
    if m == 0.0:
        return np.longdouble(0.0)
    return m * ((w / m) ** np.longdouble(p.p)).sum() ** (np.longdouble(1.0) / np.longdouble(p.p))


def _norm_mp_values(vals, p: PNorm):
    if p.kind is Kind.INFINITY:
        return max(abs(x) for x in vals)
    if p.kind is Kind.ONE:
        return mpmath.fsum(abs(x) for x in vals)
    if p.kind is Kind.TWO:
        return mpmath.sqrt(mpmath.fsum(x * x for x in vals))
    pp = mpmath.mpf(p.p)
    return mpmath.fsum(abs(x) ** pp for x in vals) ** (1 / pp)


def _norm_mp(w: np.ndarray, p: PNorm):
    return _norm_mp_values([mpmath.mpf(float(x)) for x in w], p)


def norm_le(a, b, p: PNorm) -> bool:
    """Decide norm(a, p) <= norm(b, p), escalating precision on near-ties.

    float64 decides when the two norms are separated by more than a
    relative 1e-12; bit-equal float64 norms are accepted as a tie (<=
    holds).  The remaining sliver goes to long double, and from there the
    rare still-undecided cases go to mpmath at 60 digits, where a
    relative difference below 1e-45 counts as a tie.
    """
    p = PNorm.of(p)
    a = _check_vector(a)
    b = _check_vector(b)
    na = norm(a, p)
    nb = norm(b, p)
    if na == nb:
        return True
    scale = max(na, nb)
    if abs(na - nb) > _GUARD_F64 * scale:
        return na <= nb
    la = _norm_ld(a, p)
    lb = _norm_ld(b, p)
    if la == lb:
        return True
    if abs(la - lb) > np.longdouble(_GUARD_LD) * max(la, lb):
        return bool(la <= lb)
    with mpmath.workdps(_MP_DPS):
        ma = _norm_mp(a, p)
        mb = _norm_mp(b, p)
        if abs(ma - mb) <= _MP_TIE * max(ma, mb, mpmath.mpf(1e-300)):
            return True
        return ma <= mb


def norm_le_shifted(w, v, eps: float, p: PNorm) -> bool:
    """Decide norm(w, p) <= norm(w - eps*v, p) with the shift kept exact.

    Forming ``w - eps*v`` in float64 loses the shift below the rounding
    of the coordinates (~1e-17), which is fatal when the true norm gap
    is ``eps`` times a tiny support value.  Here each escalation level
    reapplies the shift at its own precision, so the comparison stays
    faithful to the given ``w``, ``v``, ``eps`` down to the mpmath tie
    band.  Dyadic ``eps`` makes ``eps*v`` itself exact.
    """
    p = PNorm.of(p)
    w = _check_vector(w)
    v = _check_vector(v)
    if w.shape != v.shape:
        raise DimensionMismatch("w and v have different dimensions")
    na = norm(w, p)
    b64 = w - eps * v
    nb = norm(b64, p)
    if na != nb and abs(na - nb) > _GUARD_F64 * max(na, nb):
        return na <= nb
    wl = w.astype(np.longdouble)
    bl = wl - np.longdouble(eps) * v.astype(np.longdouble)
    la = _norm_ld(wl, p)
    lb = _norm_ld(bl, p)
    if la != lb and abs(la - lb) > np.longdouble(_GUARD_LD) * max(la, lb):
        return bool(la <= lb)
    with mpmath.workdps(_MP_DPS):
        me = mpmath.mpf(eps)
        bm = [mpmath.mpf(float(wi)) - me * mpmath.mpf(float(vi))
              for wi, vi in zip(w, v)]
        ma = _norm_mp(w, p)
        mb = _norm_mp_values(bm, p)
        if abs(ma - mb) <= _MP_TIE * max(ma, mb, mpmath.mpf(1e-300)):
            return True
        return ma <= mb
