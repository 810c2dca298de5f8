"""Constructed contraction instances, query counting, grid restriction.

Instances compose a coordinate-wise clamp to [0,1]^d outside an affine
(or constant) map.  The clamp is 1-Lipschitz per coordinate and hence
non-expansive in every lp metric, so the declared contraction factor of
the affine part survives the composition and the range lands in the
cube, as the problem statement requires.

Induced operator norms are NP-hard for general p, so the declared
factors come from the exact column/row-sum norms at p = 1 and p = inf
and the Riesz-Thorin style interpolation bound between them elsewhere;
the bound is conservative, so a declared factor is always a true
contraction factor.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolation, MalformedOracle, OffGridQuery
from .pnorm import Kind, PNorm, norm

__all__ = [
    "ConstantMap",
    "AffineClampedMap",
    "CompositeMap",
    "ContractionInstance",
    "CountingOracle",
    "operator_contraction_bound",
    "make_constant",
    "make_affine_clamped",
    "make_composite",
    "random_affine_instance",
    "restrict_to_grid",
    "make_non_contraction",
    "instance_to_json",
    "instance_from_json",
    "load_instance",
]


def _clamp(x: np.ndarray) -> np.ndarray:
    return np.clip(x, 0.0, 1.0)


@dataclass(frozen=True)
class ConstantMap:
    c: np.ndarray

    def __call__(self, x):
        return self.c.copy()

    def batch(self, X):
        return np.tile(self.c, (X.shape[0], 1))

    def contraction_bound(self, p: PNorm) -> float:
        return 0.0

    @property
    def d(self) -> int:
        return self.c.size


@dataclass(frozen=True)
class AffineClampedMap:
    """x -> clamp(A x + t)."""

    A: np.ndarray
    t: np.ndarray

    def __call__(self, x):
        return _clamp(self.A @ np.asarray(x, dtype=np.float64) + self.t)

    def batch(self, X):
        return _clamp(X @ self.A.T + self.t[None, :])

    def contraction_bound(self, p: PNorm) -> float:
        return operator_contraction_bound(self.A, p)

    @property
    def d(self) -> int:
        return self.t.size


@dataclass(frozen=True)
class CompositeMap:
    """Finite composition, applied first-to-last."""

    maps: tuple

    def __call__(self, x):
        y = np.asarray(x, dtype=np.float64)
        for m in self.maps:
            y = m(y)
        return y

    def batch(self, X):
        Y = X
        for m in self.maps:
            Y = m.batch(Y)
        return Y

    def contraction_bound(self, p: PNorm) -> float:
        out = 1.0
        for m in self.maps:
            out *= m.contraction_bound(p)
        return out

    @property
    def d(self) -> int:
        return self.maps[0].d


@dataclass(frozen=True)
class ContractionInstance:
    """An oracle with a verified contraction factor and optional known fixpoint."""

    map: object
    lam_declared: float
    p: PNorm
    known_fixpoint: np.ndarray | None = None

    def __call__(self, x):
        return self.map(x)

    def batch(self, X):
        return self.map.batch(X)

    @property
    def d(self) -> int:
        return self.map.d


def operator_contraction_bound(A, p) -> float:
    """Upper bound on the induced lp operator norm of a square matrix.

    Exact for p = 1 (max column sum), p = inf (max row sum), and any p on
    diagonal matrices; otherwise ||A||_1^(1/p) * ||A||_inf^(1-1/p).
    """
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ContractViolation("operator bound needs a square matrix")
    p = PNorm.of(p)
    col = float(np.abs(A).sum(axis=0).max())
    row = float(np.abs(A).sum(axis=1).max())
    if p.kind is Kind.ONE:
        return col
    if p.kind is Kind.INFINITY:
        return row
    if np.all(A == np.diag(np.diagonal(A))):
        return float(np.abs(np.diagonal(A)).max())
    inv_p = 1.0 / p.p
    return col ** inv_p * row ** (1.0 - inv_p)


def make_constant(c, p) -> ContractionInstance:
    c = np.ascontiguousarray(c, dtype=np.float64)
    if np.any(c < 0.0) or np.any(c > 1.0):
        raise ContractViolation("constant target must lie in the unit cube")
    return ContractionInstance(map=ConstantMap(c), lam_declared=0.0,
                               p=PNorm.of(p), known_fixpoint=c.copy())


def _fixpoint_of(mapping, d: int, p: PNorm) -> np.ndarray:
    x = np.full(d, 0.5)
    for _ in range(100000):
        fx = mapping(x)
        if norm(fx - x, p) <= 1e-15:
            return fx
        x = fx
    raise ContractViolation("fixpoint iteration did not converge; map not contracting?")


def make_affine_clamped(A, t, p) -> ContractionInstance:
    A = np.ascontiguousarray(A, dtype=np.float64)
    t = np.ascontiguousarray(t, dtype=np.float64)
    p = PNorm.of(p)
    lam = operator_contraction_bound(A, p)
    if lam >= 1.0:
        raise ContractViolation(f"operator bound {lam} >= 1: not a contraction")
    mapping = AffineClampedMap(A, t)
    d = t.size
    x_star = np.linalg.solve(np.eye(d) - A, t)
    if np.any(x_star < 0.0) or np.any(x_star > 1.0):
        x_star = _fixpoint_of(mapping, d, p)
    return ContractionInstance(map=mapping, lam_declared=lam, p=p,
                               known_fixpoint=x_star)


def make_composite(instances, p) -> ContractionInstance:
    p = PNorm.of(p)
    maps = tuple(inst.map for inst in instances)
    comp = CompositeMap(maps)
    lam = comp.contraction_bound(p)
    if lam >= 1.0:
        raise ContractViolation(f"composite bound {lam} >= 1")
    return ContractionInstance(map=comp, lam_declared=lam, p=p,
                               known_fixpoint=_fixpoint_of(comp, comp.d, p))


def random_affine_instance(d: int, p, lam: float, seed: int,
                           mix: float = 0.3) -> ContractionInstance:
    """Seeded affine instance with declared factor exactly lam.

    A is a mix of the identity with a random matrix, rescaled so the
    operator bound sits just under lam; the fixpoint is drawn from the
    middle of the cube so the clamp never moves it.
    """
    p = PNorm.of(p)
    if not (0.0 <= lam < 1.0):
        raise ContractViolation("lam must lie in [0, 1)")
    rng = np.random.default_rng(seed)
    if lam == 0.0:
        return make_constant(rng.uniform(0.25, 0.75, size=d), p)
    G = rng.uniform(-1.0, 1.0, size=(d, d))
    A = (1.0 - mix) * np.eye(d) + mix * G / d
    A *= lam * (1.0 - 1e-12) / operator_contraction_bound(A, p)
    x_star = rng.uniform(0.25, 0.75, size=d)
    t = (np.eye(d) - A) @ x_star
    inst = make_affine_clamped(A, t, p)
    return ContractionInstance(map=inst.map, lam_declared=lam, p=p,
                               known_fixpoint=inst.known_fixpoint)


@dataclass
class CountingOracle:
    """Query counter with response caching.

    Responses are pure functions of queries, so re-asking a seen query
    returns the cached response without incrementing: query complexity
    counts distinct information only.
    """

    inner: object
    count: int = 0
    log: list = field(default_factory=list)
    _cache: dict = field(default_factory=dict)

    def __call__(self, x):
        x = np.ascontiguousarray(x, dtype=np.float64)
        key = x.tobytes()
        hit = self._cache.get(key)
        if hit is not None:
            return hit.copy()
        fx = np.ascontiguousarray(self.inner(x), dtype=np.float64)
        if fx.shape != x.shape or not np.isfinite(fx).all() \
                or np.any(fx < 0.0) or np.any(fx > 1.0):
            raise MalformedOracle(f"oracle output {fx!r} is outside [0,1]^d")
        self._cache[key] = fx
        self.count += 1
        self.log.append((x.copy(), fx.copy()))
        return fx.copy()


def as_counting_oracle(f) -> CountingOracle:
    return f if isinstance(f, CountingOracle) else CountingOracle(f)


def _on_grid_ints(x: np.ndarray, b: int) -> np.ndarray:
    scale = float(2 ** b)
    ks = x * scale
    rounded = np.rint(ks)
    for i in range(x.size):
        if ks[i] != rounded[i] or not (0.0 <= x[i] <= 1.0):
            raise OffGridQuery(i, float(x[i]), b)
    return rounded.astype(np.int64)


@dataclass(frozen=True)
class GridRestriction:
    """Delegates on-grid queries to the instance, rejects everything else."""

    inner: object
    b: int

    def __call__(self, x):
        x = np.ascontiguousarray(x, dtype=np.float64)
        _on_grid_ints(x, self.b)
        return self.inner(x)

    @property
    def d(self) -> int:
        return self.inner.d


def restrict_to_grid(inst, b: int) -> GridRestriction:
    if b < 1:
        raise ContractViolation("grid bits b must be >= 1")
    return GridRestriction(inner=inst, b=b)


@dataclass(frozen=True)
class FarCornerMap:
    """Grid map sending every point to the farthest cube corner (ties up).

    f_i(x) = 1 if x_i <= 1/2 else 0, so every residual is at least d/2 in
    l1 and the corner pair (0, 1) violates contraction for every
    declared lambda < 1.  Negative-instance generator for the violation
    certificate paths.
    """

    d: int
    b: int

    def __call__(self, x):
        x = np.ascontiguousarray(x, dtype=np.float64)
        _on_grid_ints(x, self.b)
        return np.where(x <= 0.5, 1.0, 0.0)


def make_non_contraction(d: int, b: int) -> FarCornerMap:
    if (2 ** b + 1) ** d > 2 ** 24:
        raise ContractViolation("grid too large for the explicit-enumeration cap")
    return FarCornerMap(d=d, b=b)


# --- instance JSON schema -------------------------------------------------
#
# {"d": int, "p": "1"|"2"|"inf"|decimal-string, "lambda": float,
#  "epsilon": float,
#  "map": {"type": "affine", "A": row-major floats, "t": floats}
#       | {"type": "constant", "c": floats}
#       | {"type": "non_contraction_demo", "b": int}}


def instance_to_json(inst: ContractionInstance, epsilon: float) -> dict:
    m = inst.map
    if isinstance(m, ConstantMap):
        spec = {"type": "constant", "c": list(map(float, m.c))}
    elif isinstance(m, AffineClampedMap):
        spec = {"type": "affine",
                "A": [float(v) for v in m.A.reshape(-1)],
                "t": list(map(float, m.t))}
    else:
        raise ContractViolation(f"cannot serialize map of type {type(m).__name__}")
    return {"d": inst.d, "p": str(inst.p), "lambda": float(inst.lam_declared),
            "epsilon": float(epsilon), "map": spec}


def instance_from_json(doc: dict):
    """Build (oracle, meta) from the schema; meta holds d, p, lambda, epsilon."""
    try:
        d = int(doc["d"])
        p = PNorm.of(doc["p"])
        lam = float(doc["lambda"])
        epsilon = float(doc["epsilon"])
        spec = doc["map"]
        kind = spec["type"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ContractViolation(f"malformed instance document: {exc}") from exc
    meta = {"d": d, "p": p, "lambda": lam, "epsilon": epsilon, "type": kind}
    if kind == "constant":
        inst = make_constant(np.asarray(spec["c"], dtype=np.float64), p)
        return inst, meta
    if kind == "affine":
        A = np.asarray(spec["A"], dtype=np.float64).reshape(d, d)
        t = np.asarray(spec["t"], dtype=np.float64)
        inst = make_affine_clamped(A, t, p)
        return inst, meta
    if kind == "non_contraction_demo":
        b = int(spec["b"])
        meta["b"] = b
        return make_non_contraction(d, b), meta
    raise ContractViolation(f"unknown map type {kind!r}")


def load_instance(path):
    with open(path, "r", encoding="utf-8") as fh:
        return instance_from_json(json.load(fh))
