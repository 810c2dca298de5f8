"""Hot membership kernels with a compiled core and a NumPy fallback.

The solver spends nearly all of its time deciding, for a cloud of points
and a batch of directions, which points lie in which limit halfspace,
and which points a bisector discard kills.  Those inner loops live here
in two interchangeable implementations:

* ``_native`` - a Cython extension (built by ``setup.py``; optional),
* ``fallback`` - vectorized NumPy.

Selection happens once at import.  By default the compiled core serves
the kinds where fused loops win (the branchy p = 1 and p = inf kernels
and the bisector keys) while the smooth-p counting stays on the
fallback's chunked BLAS matmul, which the compiled loop cannot beat.
``LPFIX_KERNEL=native`` or ``=numpy`` forces one implementation
everywhere (forcing native without the extension raises at import);
``python -m lpfix.kernels.bench`` prints the comparison that justifies
the default routing.

All kernels receive the direction of a limit halfspace as given (no
normalization) and treat a zero row ``w = z - x`` as contained, matching
the scalar predicates in ``lpfix.halfspace``.
"""

from __future__ import annotations

import importlib
import os

import numpy as np

from ..errors import ContractViolation
from ..pnorm import Kind, PNorm, norm_le
from . import fallback

_native = None
_choice = os.environ.get("LPFIX_KERNEL", "").strip().lower()
if _choice not in ("", "native", "numpy"):
    raise ContractViolation(f"LPFIX_KERNEL must be 'native' or 'numpy', got {_choice!r}")
if _choice != "numpy":
    try:
        _native = importlib.import_module(__name__ + "._native")
    except ImportError:
        _native = None
        if _choice == "native":
            raise

IMPLEMENTATION = "native" if _native is not None else "numpy"

# kinds routed to the compiled core when it is available (benchmark-driven:
# BLAS keeps the smooth-p counting, fused C loops win everything branchy)
_NATIVE_COUNT_KINDS = frozenset((1, 3))
_NATIVE_KEY_KINDS = frozenset((1, 2, 3))


def _module_for(kind: int, native_kinds) -> object:
    if _native is None:
        return fallback
    if _choice == "native":
        return _native
    return _native if kind in native_kinds else fallback

# relative width of the near-tie band handed to the exact comparator
_TIE_GUARD = 1e-11


def _as_matrix(W) -> np.ndarray:
    W = np.ascontiguousarray(W, dtype=np.float64)
    if W.ndim != 2:
        raise ContractViolation(f"expected an (n, d) array, got shape {W.shape}")
    return W


def _kind_code(p: PNorm) -> int:
    return {Kind.ONE: 1, Kind.TWO: 2, Kind.INFINITY: 3, Kind.GENERAL: 4}[p.kind]


def membership_counts(W, V, p) -> np.ndarray:
    """Count rows of W contained in the limit halfspace of each direction.

    W is (n, d) offsets ``z - c``; V is (K, d) directions.  Returns int64
    counts of shape (K,).  Zero rows count for every direction.
    """
    p = PNorm.of(p)
    W = _as_matrix(W)
    V = _as_matrix(V)
    if W.shape[1] != V.shape[1]:
        raise ContractViolation("W and V disagree on dimension")
    kind = _kind_code(p)
    return _module_for(kind, _NATIVE_COUNT_KINDS).membership_counts(W, V, kind, p.p)


def membership_mask(W, v, p) -> np.ndarray:
    """Boolean mask of rows of W contained in the halfspace of direction v."""
    p = PNorm.of(p)
    W = _as_matrix(W)
    v = np.ascontiguousarray(v, dtype=np.float64)
    if v.ndim != 1 or v.size != W.shape[1]:
        raise ContractViolation("direction v has wrong shape")
    kind = _kind_code(p)
    return _module_for(kind, _NATIVE_COUNT_KINDS).membership_mask(W, v, kind, p.p)


def bisector_mask(Z, c, fc, p) -> np.ndarray:
    """Rows of Z at least as close to ``c`` as to ``fc`` (ties in).

    Clearly separated rows are decided in float64 on monotone transforms
    of the norms; rows inside the near-tie band are re-decided with the
    escalating exact comparison used by ``bisector_contains``, so the
    mask agrees with the scalar predicate.
    """
    p = PNorm.of(p)
    Z = _as_matrix(Z)
    c = np.ascontiguousarray(c, dtype=np.float64)
    fc = np.ascontiguousarray(fc, dtype=np.float64)
    if c.shape != (Z.shape[1],) or fc.shape != (Z.shape[1],):
        raise ContractViolation("c/fc have wrong shape")
    kind = _kind_code(p)
    a, b = _module_for(kind, _NATIVE_KEY_KINDS).bisector_keys(Z, c, fc, kind, p.p)
    mask = a <= b
    scale = np.maximum(a, b)
    ties = np.flatnonzero(np.abs(a - b) <= _TIE_GUARD * scale)
    for i in ties:
        mask[i] = norm_le(c - Z[i], fc - Z[i], p)
    return mask
