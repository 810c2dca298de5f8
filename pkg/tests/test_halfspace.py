import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lpfix.errors import ContractViolation, DimensionMismatch
from lpfix.halfspace import (DEFAULT_EPS_GRID, BisectorHalfspace, LimitHalfspace,
                             bisector_contains, limit_contains,
                             limit_contains_bruteforce, subgradient_maximizer,
                             subgradient_support)
from lpfix.pnorm import PNorm, angle, norm

P_KINDS = ("1", "2", "inf", "3", "1.5")


def random_unit(rng, d):
    while True:
        v = rng.standard_normal(d)
        n = np.linalg.norm(v)
        if n > 1e-9:
            return v / n


# --- bisector halfspaces ---------------------------------------------------

def test_bisector_examples():
    assert bisector_contains(BisectorHalfspace([0, 0], [1, 0], "2"), [0.4, 0.3])
    assert not bisector_contains(BisectorHalfspace([0, 0], [1, 0], "1"), [0.9, 0.0])


def test_bisector_midpoint_tie_is_in():
    # dyadic pairs make the midpoint (and the tie) exact for every p
    pairs = [([0.0, 0.0], [1.0, 1.0]),
             ([0.0, 0.0], [0.25, 0.75]),
             ([0.125, 0.5], [0.625, 0.25])]
    for p in P_KINDS:
        for x, y in pairs:
            x, y = np.asarray(x), np.asarray(y)
            z = (x + y) / 2
            assert bisector_contains(BisectorHalfspace(x, y, p), z)


def test_bisector_requires_distinct_points():
    with pytest.raises(ContractViolation):
        BisectorHalfspace([1, 2], [1, 2], "2")


def test_bisector_dimension_mismatch():
    h = BisectorHalfspace([0, 0], [1, 0], "2")
    with pytest.raises(DimensionMismatch):
        bisector_contains(h, [0.1, 0.2, 0.3])


def test_bisector_is_the_definition():
    # 1e4 random tuples: the predicate equals the plain norm comparison
    rng = np.random.default_rng(42)
    for _ in range(10_000):
        d = int(rng.integers(1, 5))
        p = rng.choice(P_KINDS)
        x, y, z = rng.random(d), rng.random(d), rng.random(d)
        if np.all(x == y):
            continue
        got = bisector_contains(BisectorHalfspace(x, y, p), z)
        assert got == (norm(x - z, p) <= norm(y - z, p))


# --- subgradient support ---------------------------------------------------

def test_support_euclidean_gradient():
    assert subgradient_support([3, 4], [1, 0], "2") == pytest.approx(0.6, abs=1e-15)


def test_support_l1_free_coordinate():
    # u_2 ranges over [-1, 1] on the zero coordinate, so the support is 1
    assert subgradient_support([1, 0], [0, 1], "1") == 1.0


def test_support_linf_vertices():
    # vertices e_1 and -e_2; max(<e_1,(0,1)>, <-e_2,(0,1)>) = max(0, -1)
    assert subgradient_support([1, -1], [0, 1], "inf") == 0.0


def test_support_rejects_zero():
    with pytest.raises(ContractViolation):
        subgradient_support([0.0, 0.0], [1.0, 0.0], "2")


def test_support_scale_invariant_in_w():
    rng = np.random.default_rng(1)
    for p in P_KINDS:
        w = rng.standard_normal(4)
        v = random_unit(rng, 4)
        s = subgradient_support(w, v, p)
        assert subgradient_support(3.0 * w, v, p) == pytest.approx(s, rel=1e-12)


# --- limit halfspaces ------------------------------------------------------

def test_limit_contains_center():
    for p in P_KINDS:
        h = LimitHalfspace([0.3, 0.7], [0.6, 0.8], p)
        assert limit_contains(h, [0.3, 0.7])


def test_limit_axis_direction_is_euclidean():
    # for v = e_1 and finite p the halfspace is exactly {z_1 >= x_1}
    h = LimitHalfspace([0.2, 0.0], [1.0, 0.0], "1")
    assert limit_contains(h, [0.5, 0.7])
    assert limit_contains(h, [0.2, -3.0])
    assert not limit_contains(h, [0.1, 0.7])


def test_limit_boundary_ray_l1():
    s = 1.0 / math.sqrt(2)
    h = LimitHalfspace([0.0, 0.0], [-s, s], "1")
    assert limit_contains(h, [1.0, 0.0])
    assert limit_contains_bruteforce(h, [1.0, 0.0])


def test_bruteforce_examples():
    h = LimitHalfspace([0.0, 0.0], [1.0, 0.0], "2")
    assert not limit_contains_bruteforce(h, [-0.1, 5.0])
    assert not limit_contains(h, [-0.1, 5.0])
    hinf = LimitHalfspace([0.0, 0.0], [1.0, 0.0], "inf")
    assert limit_contains_bruteforce(hinf, [0.3, 2.0])
    assert limit_contains(hinf, [0.3, 2.0])


def test_bruteforce_grid_validation():
    h = LimitHalfspace([0.0, 0.0], [1.0, 0.0], "2")
    with pytest.raises(ContractViolation):
        limit_contains_bruteforce(h, [0.5, 0.5], eps_grid=[0.25, 0.5])
    with pytest.raises(ContractViolation):
        limit_contains_bruteforce(h, [0.5, 0.5], eps_grid=[0.5, 0.0])


def test_default_eps_grid_shape():
    assert DEFAULT_EPS_GRID[0] == 1.0
    assert DEFAULT_EPS_GRID[-1] == 2.0 ** -40
    assert len(DEFAULT_EPS_GRID) == 41


def test_limit_direction_normalized():
    h = LimitHalfspace([0.0, 0.0], [3.0, 4.0], "2")
    assert np.linalg.norm(h.v) == pytest.approx(1.0, abs=1e-12)


def test_limit_rescaling_invariance():
    rng = np.random.default_rng(7)
    for _ in range(300):
        d = int(rng.integers(1, 5))
        p = rng.choice(P_KINDS)
        x = rng.random(d)
        z = rng.random(d)
        v = random_unit(rng, d)
        w = z - x
        if not w.any() or abs(subgradient_support(w, v, p)) < 1e-9:
            continue
        for scale in (0.25, 1.0, 7.5):
            assert limit_contains(LimitHalfspace(x, scale * v, p), z) \
                == limit_contains(LimitHalfspace(x, v, p), z)


def test_oracle_equivalence_randomized():
    # smaller cousin of acceptance criterion 4
    rng = np.random.default_rng(11)
    checked = 0
    for _ in range(2000):
        d = int(rng.integers(1, 5))
        p = rng.choice(P_KINDS)
        x, z = rng.random(d), rng.random(d)
        v = random_unit(rng, d)
        w = z - x
        if not w.any():
            continue
        if abs(subgradient_support(w, v, p)) <= 1e-6:
            continue
        h = LimitHalfspace(x, v, p)
        assert limit_contains(h, z) == limit_contains_bruteforce(h, z)
        checked += 1
    assert checked > 1500


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2 ** 32 - 1),
       st.sampled_from(P_KINDS), st.sampled_from([0.1, 1.0, 7.0]))
def test_ray_invariance(d, seed, p, delta):
    # membership is constant along rays from x
    rng = np.random.default_rng(seed)
    x = rng.random(d)
    z = rng.random(d)
    v = random_unit(rng, d)
    if not (z - x).any():
        return
    h = LimitHalfspace(x, v, p)
    assert limit_contains(h, x + delta * (z - x)) == limit_contains(h, z)


def test_inner_and_outer_cones():
    rng = np.random.default_rng(13)
    for _ in range(1500):
        d = int(rng.integers(2, 5))
        p = rng.choice(P_KINDS)
        x = rng.random(d)
        v = random_unit(rng, d)
        h = LimitHalfspace(x, v, p)
        z = x + rng.uniform(0.1, 2.0) * random_unit(rng, d)
        a = angle(z - x, v)
        if a <= math.sqrt(1.0 / d):
            assert limit_contains(h, z)
        if limit_contains(h, z):
            assert a <= math.pi - math.sqrt(1.0 / d) + 1e-12


def test_orthant_monotonicity():
    rng = np.random.default_rng(17)
    for _ in range(1500):
        d = int(rng.integers(1, 5))
        p = rng.choice(P_KINDS)
        x = rng.random(d)
        v = random_unit(rng, d)
        z = rng.random(d)
        h = LimitHalfspace(x, v, p)
        if not (z - x).any() or not limit_contains(h, z):
            continue
        step = rng.uniform(0.0, 0.5, size=d)
        z2 = z + np.where(v > 0, step, np.where(v < 0, -step, rng.uniform(-0.5, 0.5, d)))
        assert limit_contains(h, z2)


def test_axis_aligned_collapse():
    rng = np.random.default_rng(19)
    for _ in range(1500):
        d = int(rng.integers(1, 5))
        p = rng.choice(("1", "2", "3", "1.5"))   # finite p only
        x = rng.random(d)
        z = rng.random(d)
        i = int(rng.integers(0, d))
        sign = 1.0 if rng.random() < 0.5 else -1.0
        v = np.zeros(d)
        v[i] = sign
        got = limit_contains(LimitHalfspace(x, v, p), z)
        assert got == (sign * (z[i] - x[i]) >= 0.0)


def test_pull_towards_zero():
    rng = np.random.default_rng(23)
    for d in (2, 3, 4):
        for _ in range(100):
            x = random_unit(rng, d) * rng.uniform(2 * d + 1e-6, 6 * d)
            assert np.linalg.norm(x) > 2 * d
            p = rng.choice(P_KINDS)
            h = LimitHalfspace(x, -x, p)
            for _ in range(100):
                z = rng.random(d)
                assert limit_contains(h, z)


def test_limit_subset_of_bisectors():
    rng = np.random.default_rng(29)
    for _ in range(800):
        d = int(rng.integers(1, 5))
        p = rng.choice(P_KINDS)
        x = rng.random(d)
        v = random_unit(rng, d)
        z = rng.random(d)
        h = LimitHalfspace(x, v, p)
        if limit_contains(h, z):
            for eps in (1.0, 2.0 ** -7, 2.0 ** -19):
                assert bisector_contains(BisectorHalfspace(x, x - eps * v, p), z)


def test_oracle_equivalence_near_boundary():
    # members with support barely above the exclusion band: a plain float64
    # comparison provably flips some of these at tiny eps; the escalating
    # comparison must not
    rng = np.random.default_rng(53)
    checked = 0
    while checked < 150:
        d = int(rng.integers(2, 5))
        p = rng.choice(("1.5", "2", "3"))
        x = rng.random(d)
        z = rng.random(d)
        w = z - x
        if not w.any():
            continue
        u = subgradient_maximizer(w, p)
        t = rng.standard_normal(d)
        t -= (t @ u) * u / (u @ u)
        nt = np.linalg.norm(t)
        if nt < 1e-9:
            continue
        t /= nt
        v = t + 10.0 ** rng.uniform(-6, -4.5) * u / np.linalg.norm(u)
        v /= np.linalg.norm(v)
        s = subgradient_support(w, v, p)
        if not (1e-6 < s < 3e-4):
            continue
        h = LimitHalfspace(x, v, p)
        assert limit_contains(h, z)
        assert limit_contains_bruteforce(h, z), f"flip at s={s:.3e} p={p} d={d}"
        checked += 1


def test_large_p_membership_stable():
    # p = 64 must not overflow or lose the oracle agreement
    rng = np.random.default_rng(37)
    checked = 0
    while checked < 100:
        d = int(rng.integers(2, 5))
        x, z = rng.random(d), rng.random(d)
        v = random_unit(rng, d)
        w = z - x
        if not w.any() or abs(subgradient_support(w, v, "64")) <= 1e-5:
            continue
        h = LimitHalfspace(x, v, "64")
        assert limit_contains(h, z) == limit_contains_bruteforce(h, z)
        checked += 1


def test_subgradient_angle_bound():
    rng = np.random.default_rng(31)
    for _ in range(1000):
        d = int(rng.integers(1, 5))
        p = rng.choice(P_KINDS)
        w = rng.standard_normal(d)
        if not w.any():
            continue
        w = w / norm(w, p)
        u = subgradient_maximizer(w, p)
        assert angle(u, w) <= math.pi / 2 - math.sqrt(1.0 / d) + 1e-9
