"""Micro-benchmark: native kernels vs the NumPy fallback.

    python -m lpfix.kernels.bench [--n 131072] [--dirs 128] [--d 3]

Times membership counting, single-direction masks, and bisector keys for
every metric kind on both implementations.  The native column is blank
when the extension is not built.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from ..pnorm import PNorm
from . import _kind_code, _native, fallback

_KINDS = ("1", "2", "inf", "3")


def _time(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def run_bench(n=2 ** 17, dirs=128, d=3, repeats=3, seed=0):
    rng = np.random.default_rng(seed)
    W = rng.standard_normal((n, d))
    W[::9] = np.round(W[::9], 1)
    V = rng.standard_normal((dirs, d))
    V /= np.linalg.norm(V, axis=1, keepdims=True)
    V = np.ascontiguousarray(V)
    c = rng.random(d)
    fc = rng.random(d)
    rows = []
    for p in _KINDS:
        pn = PNorm.of(p)
        code, pp = _kind_code(pn), pn.p
        jobs = [
            (f"counts p={p}",
             lambda impl: impl.membership_counts(W, V, code, pp)),
            (f"mask p={p}",
             lambda impl: impl.membership_mask(W, np.ascontiguousarray(V[0]),
                                               code, pp)),
            (f"bisector p={p}",
             lambda impl: impl.bisector_keys(W, c, fc, code, pp)),
        ]
        for name, job in jobs:
            t_fb = _time(lambda: job(fallback), repeats)
            t_nat = _time(lambda: job(_native), repeats) if _native else None
            rows.append((name, t_fb, t_nat))
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=2 ** 17)
    ap.add_argument("--dirs", type=int, default=128)
    ap.add_argument("--d", type=int, default=3)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args(argv)
    rows = run_bench(n=args.n, dirs=args.dirs, d=args.d, repeats=args.repeats)
    print(f"n={args.n} dirs={args.dirs} d={args.d} "
          f"(native {'built' if _native else 'NOT BUILT'})")
    print(f"{'kernel':<18} {'numpy':>10} {'native':>10} {'speedup':>8}")
    for name, t_fb, t_nat in rows:
        if t_nat is None:
            print(f"{name:<18} {t_fb * 1e3:>8.2f}ms {'-':>10} {'-':>8}")
        else:
            print(f"{name:<18} {t_fb * 1e3:>8.2f}ms {t_nat * 1e3:>8.2f}ms "
                  f"{t_fb / t_nat:>7.2f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
