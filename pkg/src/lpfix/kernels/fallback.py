"""NumPy implementation of the membership kernels.

Counting tricks keep the work far below the naive n*K*d:

* p = 1: the support sign depends only on the sign pattern of the row,
  so rows collapse into at most 3^d groups (2^d for generic clouds) and
  each group is evaluated once against all directions.
* p = inf: a row with a unique max-magnitude coordinate contributes
  through that single (index, sign) pair, giving at most 2d groups; rows
  with tied maxima (exact equality only) are evaluated individually.
* p in (1, inf): the support sign equals the sign of <g, v> for the
  unnormalized gradient surrogate g_i = |w_i/m|^(p-1) sign(w_i), m the
  row max, so counting is a chunked BLAS matmul against the directions.
"""

from __future__ import annotations

import numpy as np

_CHUNK = 8192


def _sign(W: np.ndarray) -> np.ndarray:
    return np.sign(W)


def _gradient_surrogate(W: np.ndarray, p: float) -> np.ndarray:
    """Row-positive multiple of the norm gradient; zero rows stay zero."""
    A = np.abs(W)
    m = A.max(axis=1)
    safe = np.where(m == 0.0, 1.0, m)
    G = (A / safe[:, None]) ** (p - 1.0) * _sign(W)
    return G


_MAX_PATTERN_D = 12


def _counts_one(W: np.ndarray, V: np.ndarray) -> np.ndarray:
    d = W.shape[1]
    if d > _MAX_PATTERN_D:
        # pattern codes would get huge; evaluate supports chunk-wise instead
        counts = np.zeros(V.shape[0], dtype=np.int64)
        for lo in range(0, W.shape[0], _CHUNK):
            S = _sign(W[lo:lo + _CHUNK])
            sup = S @ V.T + (S == 0.0) @ np.abs(V).T
            counts += (sup >= 0.0).sum(axis=0)
        return counts
    S = _sign(W).astype(np.int8)
    codes = (S + 1).astype(np.int64) @ (3 ** np.arange(d, dtype=np.int64))
    uniq, inv_counts = np.unique(codes, return_counts=True)
    # decode each distinct pattern back to its sign vector
    P = np.empty((uniq.size, d), dtype=np.float64)
    rest = uniq.copy()
    for i in range(d):
        P[:, i] = rest % 3 - 1
        rest //= 3
    support = P @ V.T + (P == 0.0) @ np.abs(V).T
    return ((support >= 0.0) * inv_counts[:, None]).sum(axis=0).astype(np.int64)


def _counts_inf(W: np.ndarray, V: np.ndarray) -> np.ndarray:
    n, d = W.shape
    A = np.abs(W)
    m = A.max(axis=1)
    zero = m == 0.0
    on_max = A == m[:, None]
    n_max = on_max.sum(axis=1)
    single = (n_max == 1) & ~zero
    counts = np.full(V.shape[0], int(zero.sum()), dtype=np.int64)
    if single.any():
        rows = np.flatnonzero(single)
        idx = np.argmax(A[rows], axis=1)
        sgn = _sign(W[rows, idx])
        # group by (argmax index, sign)
        group = idx * 2 + (sgn > 0)
        gcounts = np.bincount(group, minlength=2 * d)
        # support for group (i, s) in direction v is s * v_i
        for i in range(d):
            neg, pos = gcounts[2 * i], gcounts[2 * i + 1]
            if pos:
                counts += np.where(V[:, i] >= 0.0, pos, 0)
            if neg:
                counts += np.where(-V[:, i] >= 0.0, neg, 0)
    ties = np.flatnonzero((n_max > 1) & ~zero)
    for r in ties:
        sel = on_max[r]
        sup = (_sign(W[r, sel])[None, :] * V[:, sel]).max(axis=1)
        counts += (sup >= 0.0).astype(np.int64)
    return counts


def _counts_dot(G: np.ndarray, V: np.ndarray) -> np.ndarray:
    counts = np.zeros(V.shape[0], dtype=np.int64)
    for lo in range(0, G.shape[0], _CHUNK):
        S = G[lo:lo + _CHUNK] @ V.T
        counts += (S >= 0.0).sum(axis=0)
    return counts


def membership_counts(W, V, kind: int, p: float) -> np.ndarray:
    if kind == 1:
        return _counts_one(W, V)
    if kind == 3:
        return _counts_inf(W, V)
    if kind == 2:
        return _counts_dot(W, V)
    return _counts_dot(_gradient_surrogate(W, p), V)


def membership_mask(W, v, kind: int, p: float) -> np.ndarray:
    if kind == 1:
        S = _sign(W)
        sup = S @ v + np.abs((S == 0.0) * v).sum(axis=1)
        return sup >= 0.0
    if kind == 3:
        A = np.abs(W)
        m = A.max(axis=1)
        T = np.where(A == m[:, None], _sign(W) * v[None, :], -np.inf)
        sup = T.max(axis=1)
        out = sup >= 0.0
        out[m == 0.0] = True
        return out
    G = W if kind == 2 else _gradient_surrogate(W, p)
    return G @ v >= 0.0


def bisector_keys(Z, c, fc, kind: int, p: float):
    """Monotone comparison keys: (key(c), key(fc)) per row of Z."""
    A = np.abs(Z - c[None, :])
    B = np.abs(Z - fc[None, :])
    if kind == 3:
        return A.max(axis=1), B.max(axis=1)
    if kind == 1:
        return A.sum(axis=1), B.sum(axis=1)
    if kind == 2:
        return (A * A).sum(axis=1), (B * B).sum(axis=1)
    return (A ** p).sum(axis=1), (B ** p).sum(axis=1)
