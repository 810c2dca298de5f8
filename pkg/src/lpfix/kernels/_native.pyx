# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled membership kernels (see kernels/__init__ for the contract).

Same grouping strategy as the NumPy fallback, fused into single passes:
sign patterns for p = 1, (argmax, sign) groups for p = inf, gradient
surrogate dot products otherwise.  Dense pattern tables are used up to
3^d <= 3^12; beyond that the per-row path takes over.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, fabs, pow

cnp.import_array()

_MAX_DENSE_D = 12


def membership_counts(double[:, ::1] W, double[:, ::1] V, int kind, double p):
    if kind == 1:
        if W.shape[1] <= _MAX_DENSE_D:
            return _counts_one(W, V)
        return _counts_rowwise(W, V, kind, p)
    if kind == 3:
        return _counts_inf(W, V)
    return _counts_dot(W, V, kind, p)


def membership_mask(double[:, ::1] W, double[::1] v, int kind, double p):
    cdef Py_ssize_t n = W.shape[0], d = W.shape[1]
    out = np.empty(n, dtype=bool)
    cdef cnp.uint8_t[::1] mv = out.view(np.uint8)
    cdef Py_ssize_t r, i
    cdef double s, m, g, scale
    if kind == 1:
        for r in range(n):
            s = 0.0
            for i in range(d):
                if W[r, i] > 0.0:
                    s += v[i]
                elif W[r, i] < 0.0:
                    s -= v[i]
                else:
                    s += fabs(v[i])
            mv[r] = s >= 0.0
    elif kind == 3:
        for r in range(n):
            m = 0.0
            for i in range(d):
                if fabs(W[r, i]) > m:
                    m = fabs(W[r, i])
            if m == 0.0:
                mv[r] = 1
                continue
            s = -INFINITY
            for i in range(d):
                if fabs(W[r, i]) == m:
                    g = v[i] if W[r, i] > 0.0 else -v[i]
                    if g > s:
                        s = g
            mv[r] = s >= 0.0
    else:
        for r in range(n):
            m = 0.0
            for i in range(d):
                if fabs(W[r, i]) > m:
                    m = fabs(W[r, i])
            if m == 0.0:
                mv[r] = 1
                continue
            s = 0.0
            for i in range(d):
                if kind == 2:
                    g = W[r, i]
                elif W[r, i] > 0.0:
                    g = pow(W[r, i] / m, p - 1.0)
                elif W[r, i] < 0.0:
                    g = -pow(-W[r, i] / m, p - 1.0)
                else:
                    g = 0.0
                s += g * v[i]
            mv[r] = s >= 0.0
    return out


def bisector_keys(double[:, ::1] Z, double[::1] c, double[::1] fc,
                  int kind, double p):
    cdef Py_ssize_t n = Z.shape[0], d = Z.shape[1]
    a = np.empty(n, dtype=np.float64)
    b = np.empty(n, dtype=np.float64)
    cdef double[::1] av = a, bv = b
    cdef Py_ssize_t r, i
    cdef double sa, sb, ta, tb
    for r in range(n):
        sa = 0.0
        sb = 0.0
        if kind == 3:
            for i in range(d):
                ta = fabs(c[i] - Z[r, i])
                tb = fabs(fc[i] - Z[r, i])
                if ta > sa:
                    sa = ta
                if tb > sb:
                    sb = tb
        elif kind == 1:
            for i in range(d):
                sa += fabs(c[i] - Z[r, i])
                sb += fabs(fc[i] - Z[r, i])
        elif kind == 2:
            for i in range(d):
                ta = c[i] - Z[r, i]
                tb = fc[i] - Z[r, i]
                sa += ta * ta
                sb += tb * tb
        else:
            for i in range(d):
                sa += pow(fabs(c[i] - Z[r, i]), p)
                sb += pow(fabs(fc[i] - Z[r, i]), p)
        av[r] = sa
        bv[r] = sb
    return a, b


cdef _counts_one(double[:, ::1] W, double[:, ::1] V):
    cdef Py_ssize_t n = W.shape[0], d = W.shape[1], K = V.shape[0]
    cdef Py_ssize_t n_codes = 1, r, i, k, g, code
    for i in range(d):
        n_codes *= 3
    gcount_arr = np.zeros(n_codes, dtype=np.int64)
    cdef long long[::1] gcount = gcount_arr
    seen_arr = np.empty(n_codes, dtype=np.int64)
    cdef long long[::1] seen = seen_arr
    cdef Py_ssize_t n_seen = 0
    for r in range(n):
        code = 0
        for i in range(d - 1, -1, -1):
            code = code * 3 + (2 if W[r, i] > 0.0 else (0 if W[r, i] < 0.0 else 1))
        if gcount[code] == 0:
            seen[n_seen] = code
            n_seen += 1
        gcount[code] += 1
    counts_arr = np.zeros(K, dtype=np.int64)
    cdef long long[::1] counts = counts_arr
    cdef double s
    cdef long long cnt
    cdef Py_ssize_t trit
    for g in range(n_seen):
        code = seen[g]
        cnt = gcount[code]
        for k in range(K):
            s = 0.0
            r = code
            for i in range(d):
                trit = r % 3
                r //= 3
                if trit == 2:
                    s += V[k, i]
                elif trit == 0:
                    s -= V[k, i]
                else:
                    s += fabs(V[k, i])
            if s >= 0.0:
                counts[k] += cnt
    return counts_arr


cdef _counts_inf(double[:, ::1] W, double[:, ::1] V):
    cdef Py_ssize_t n = W.shape[0], d = W.shape[1], K = V.shape[0]
    counts_arr = np.zeros(K, dtype=np.int64)
    cdef long long[::1] counts = counts_arr
    group_arr = np.zeros(2 * d, dtype=np.int64)
    cdef long long[::1] group = group_arr
    cdef long long zeros = 0
    tie_rows = []
    cdef Py_ssize_t r, i, k, arg, n_max
    cdef double m, s, g
    for r in range(n):
        m = 0.0
        for i in range(d):
            if fabs(W[r, i]) > m:
                m = fabs(W[r, i])
        if m == 0.0:
            zeros += 1
            continue
        n_max = 0
        arg = 0
        for i in range(d):
            if fabs(W[r, i]) == m:
                n_max += 1
                arg = i
        if n_max == 1:
            group[2 * arg + (1 if W[r, arg] > 0.0 else 0)] += 1
        else:
            tie_rows.append(r)
    for k in range(K):
        counts[k] = zeros
        for i in range(d):
            if group[2 * i + 1] > 0 and V[k, i] >= 0.0:
                counts[k] += group[2 * i + 1]
            if group[2 * i] > 0 and -V[k, i] >= 0.0:
                counts[k] += group[2 * i]
    cdef double mm
    for r in tie_rows:
        mm = 0.0
        for i in range(d):
            if fabs(W[r, i]) > mm:
                mm = fabs(W[r, i])
        for k in range(K):
            s = -INFINITY
            for i in range(d):
                if fabs(W[r, i]) == mm:
                    g = V[k, i] if W[r, i] > 0.0 else -V[k, i]
                    if g > s:
                        s = g
            if s >= 0.0:
                counts[k] += 1
    return counts_arr


cdef _counts_dot(double[:, ::1] W, double[:, ::1] V, int kind, double p):
    cdef Py_ssize_t n = W.shape[0], d = W.shape[1], K = V.shape[0]
    counts_arr = np.zeros(K, dtype=np.int64)
    cdef long long[::1] counts = counts_arr
    g_arr = np.empty(d, dtype=np.float64)
    cdef double[::1] gr = g_arr
    cdef Py_ssize_t r, i, k
    cdef double m, s
    for r in range(n):
        m = 0.0
        for i in range(d):
            if fabs(W[r, i]) > m:
                m = fabs(W[r, i])
        if m == 0.0:
            for k in range(K):
                counts[k] += 1
            continue
        for i in range(d):
            if kind == 2:
                gr[i] = W[r, i]
            elif W[r, i] > 0.0:
                gr[i] = pow(W[r, i] / m, p - 1.0)
            elif W[r, i] < 0.0:
                gr[i] = -pow(-W[r, i] / m, p - 1.0)
            else:
                gr[i] = 0.0
        for k in range(K):
            s = 0.0
            for i in range(d):
                s += gr[i] * V[k, i]
            if s >= 0.0:
                counts[k] += 1
    return counts_arr


cdef _counts_rowwise(double[:, ::1] W, double[:, ::1] V, int kind, double p):
    cdef Py_ssize_t n = W.shape[0], d = W.shape[1], K = V.shape[0]
    counts_arr = np.zeros(K, dtype=np.int64)
    cdef long long[::1] counts = counts_arr
    cdef Py_ssize_t r, i, k
    cdef double s
    for r in range(n):
        for k in range(K):
            s = 0.0
            for i in range(d):
                if W[r, i] > 0.0:
                    s += V[k, i]
                elif W[r, i] < 0.0:
                    s -= V[k, i]
                else:
                    s += fabs(V[k, i])
            if s >= 0.0:
                counts[k] += 1
    return counts_arr
