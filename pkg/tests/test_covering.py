import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from phidim.covering import (BoxUnion, CellBudgetError, EmptySetError, GeomSet, PointCloud,
                             _cells, ball_restrict, chain_lower_bound_check, components_1d,
                             cover_centers_1d, covering_number, doubling_constant, interval,
                             packing_number, sandwich_check)
from phidim.moran import constant_spec, level_set


def set_partitions(items):
    if not items:
        yield []
        return
    head, rest = items[0], items[1:]
    for part in set_partitions(rest):
        yield [[head]] + part
        for i in range(len(part)):
            yield part[:i] + [[head] + part[i]] + part[i + 1:]


def brute_cover(P, r):
    # a group fits in one closed cube of side 2r iff its extent is <= 2r per axis
    best = len(P)
    for part in set_partitions(list(range(len(P)))):
        if len(part) >= best:
            continue
        if all(np.all(np.ptp(P[g], axis=0) <= 2 * r * (1 + 1e-9)) for g in part):
            best = len(part)
    return best


def brute_pack(P, r):
    for k in range(len(P), 0, -1):
        for sub in itertools.combinations(range(len(P)), k):
            if all(np.max(np.abs(P[i] - P[j])) > r * (1 + 1e-9)
                   for i, j in itertools.combinations(sub, 2)):
                return k
    return 0


points_1d = st.lists(st.floats(0.0, 1.0), min_size=1, max_size=8)
points_2d = st.lists(st.tuples(st.floats(0.0, 1.0), st.floats(0.0, 1.0)), min_size=1, max_size=6)
radii = st.floats(0.02, 0.6)


@st.composite
def interval_unions(draw):
    n = draw(st.integers(1, 6))
    lo = np.array(draw(st.lists(st.floats(0.0, 1.0), min_size=n, max_size=n)))
    w = np.array(draw(st.lists(st.floats(0.0, 0.3), min_size=n, max_size=n)))
    return BoxUnion(lo[:, None], (lo + w)[:, None])


# -- examples --------------------------------------------------------------


def test_unit_interval_counts():
    F = interval(0.0, 1.0)
    assert covering_number(F, 0.25).upper == 2
    assert packing_number(F, 0.25).upper == 4
    assert covering_number(F, 0.125).upper == 4
    assert sandwich_check(F, 0.25).passed


def test_interval_formulas():
    F = interval(0.0, 1.0)
    for r in (0.3, 0.2, 0.1, 0.07):
        assert covering_number(F, r).upper == math.ceil(1 / (2 * r))
        assert packing_number(F, r).upper == math.ceil(1 / r)


def test_cantor_level_set():
    F = level_set(constant_spec(1 / 3), 2).to_box_union()
    assert covering_number(F, 1 / 18).upper == 4
    assert covering_number(F, 1 / 2).upper == 1
    assert packing_number(F, 0.2).upper == 4


def test_unit_square():
    F = BoxUnion([[0, 0]], [[1, 1]])
    assert covering_number(F, 0.25).upper == 4
    assert packing_number(F, 0.25).upper == 16


def test_lattice_cloud_uses_bounds():
    g = np.arange(4.0)
    P = np.array([(x, y) for x in g for y in g])
    cov = covering_number(PointCloud(P), 0.5)
    pack = packing_number(PointCloud(P), 1.0)
    # each unit cube holds at most a 2x2 block, and blocks of 2x2 are a cover
    assert cov.lower <= 4 <= cov.upper
    assert pack.lower <= 4 <= pack.upper


def test_points_on_a_line_are_exact():
    P = PointCloud(np.column_stack([np.linspace(0, 1, 30), np.full(30, 0.5)]))
    cb = covering_number(P, 0.1)
    assert cb.exact and cb.upper == covering_number(PointCloud(np.linspace(0, 1, 30)), 0.1).upper


def test_ball_restrict():
    F = interval(0.0, 1.0)
    sub = ball_restrict(F, [0.9], 0.2)
    lo, hi = sub.boxes()
    assert lo[0, 0] == pytest.approx(0.7) and hi[0, 0] == pytest.approx(1.0)
    loc = ball_restrict(F, [0.9], 0.2, local=True)
    assert loc.boxes()[0][0, 0] == pytest.approx(-0.2)
    with pytest.raises(EmptySetError):
        ball_restrict(F, [3.0], 0.5)


def test_components_merge():
    A, B = components_1d([0.0, 0.5, 0.2, 2.0], [0.3, 0.6, 0.4, 2.5])
    assert A == [0.0, 0.5, 2.0] and B == [0.4, 0.6, 2.5]


def test_bad_inputs():
    with pytest.raises(ValueError):
        PointCloud(np.zeros((0, 2)))
    with pytest.raises(ValueError):
        BoxUnion([[1.0]], [[0.0]])
    with pytest.raises(ValueError):
        covering_number(interval(0, 1), 0.0)


def test_cell_budget():
    F = BoxUnion([[0, 0]], [[1, 1]]).union(PointCloud([[2.0, 2.0]]))
    with pytest.raises(CellBudgetError):
        _cells(F, 1e-4, budget=1000)


def test_csv_round_trip():
    F = BoxUnion([[0, 0], [1, 2]], [[0.5, 0.25], [1.5, 2.0]])
    back = GeomSet.from_csv(F.to_csv())
    assert np.array_equal(back.boxes()[0], F.boxes()[0])
    P = PointCloud([[0.1, 0.2], [0.3, 1 / 3]])
    back = GeomSet.from_csv(P.to_csv())
    assert isinstance(back, PointCloud) and np.array_equal(back.points, P.points)


def test_interval_doubling_constant():
    assert doubling_constant(interval(0.0, 1.0), [0.1, 0.01]) == 2


def test_chain_bound_on_interval():
    rep = chain_lower_bound_check(interval(0.0, 1.0), [0.5], [0.1, 0.01], 0.4)
    assert rep.passed
    with pytest.raises(ValueError):
        chain_lower_bound_check(interval(0.0, 1.0), [0.5], [0.01, 0.1], 0.4)


# -- properties ------------------------------------------------------------


@given(points_1d, radii)
def test_1d_cover_matches_partition_oracle(pts, r):
    P = np.array(pts)[:, None]
    assert covering_number(PointCloud(P), r).upper == brute_cover(P, r)


@given(points_1d, radii)
def test_1d_pack_matches_subset_oracle(pts, r):
    P = np.array(pts)[:, None]
    assert packing_number(PointCloud(P), r).upper == brute_pack(P, r)


@settings(max_examples=40)
@given(points_2d, radii)
def test_2d_small_clouds_exact(pts, r):
    P = np.array(pts)
    cov = covering_number(PointCloud(P), r)
    pack = packing_number(PointCloud(P), r)
    U = np.unique(P, axis=0)
    assert cov.exact and cov.upper == brute_cover(U, r)
    assert pack.exact and pack.upper == brute_pack(U, r)


@given(interval_unions(), radii)
def test_sandwich(F, r):
    assert sandwich_check(F, r).passed


@given(interval_unions(), radii)
def test_greedy_centers_cover(F, r):
    A, B = components_1d(*F.boxes())
    cs = np.array(cover_centers_1d(A, B, r))
    assert cs.size == covering_number(F, r).upper
    # every component endpoint and midpoint lies within r of a center
    probes = np.concatenate([A, B, (np.array(A) + np.array(B)) / 2])
    assert np.all(np.min(np.abs(probes[:, None] - cs[None, :]), axis=1) <= r * (1 + 1e-9))


@given(interval_unions(), radii, st.floats(-5, 5))
def test_translation_invariance(F, r, shift):
    lo, hi = F.boxes()
    G = BoxUnion(lo + shift, hi + shift)
    assert covering_number(G, r) == covering_number(F, r)
    assert packing_number(G, r) == packing_number(F, r)


@given(interval_unions(), radii)
def test_counts_monotone_in_radius(F, r):
    assert covering_number(F, r / 2).upper >= covering_number(F, r).upper
    assert packing_number(F, r / 2).upper >= packing_number(F, r).upper


@settings(max_examples=25)
@given(st.lists(st.tuples(st.floats(0, 1), st.floats(0, 1), st.floats(0, 0.2), st.floats(0, 0.2)),
                min_size=2, max_size=5), st.floats(0.03, 0.3))
def test_2d_bounds_bracket_and_sandwich(boxes, r):
    b = np.array(boxes)
    F = BoxUnion(b[:, :2], b[:, :2] + b[:, 2:])
    cov = covering_number(F, r)
    pack = packing_number(F, r)
    assert cov.lower <= cov.upper and pack.lower <= pack.upper
    assert sandwich_check(F, r).passed


# -- small worked cases ------------------------------------------------------


def test_restrict_small_cases():
    lo, hi = ball_restrict(interval(0, 1), [0.0], 0.5).boxes()
    assert (lo[0, 0], hi[0, 0]) == (0.0, 0.5)
    P = ball_restrict(PointCloud([0.0, 0.3, 0.9]), [0.25], 0.1)
    assert P.points.ravel().tolist() == [0.3]
    # level-3 Cantor cylinders in B(0, 1/9) are the children of [0, 1/9]
    F = level_set(constant_spec(1 / 3), 3).to_box_union()
    lo, hi = ball_restrict(F, [0.0], 1 / 9).boxes()
    assert np.allclose(np.sort(lo[:, 0]), [0, 2 / 27]) and np.allclose(np.sort(hi[:, 0]), [1 / 27, 1 / 9])


def test_strict_packing_convention():
    F = PointCloud([0.0, 0.5, 1.0])
    assert packing_number(F, 0.5).upper == 2
    assert packing_number(F, 0.49).upper == 3
    assert packing_number(interval(0, 1), 0.5).upper == 2


def test_two_points_and_singletons():
    F = PointCloud([0.0, 1.0])
    assert covering_number(F, 0.4).upper == 2
    rep = sandwich_check(F, 0.4)
    assert (rep.cover.upper, rep.pack.upper, rep.cover_half.upper) == (2, 2, 2)
    rep = sandwich_check(PointCloud([[0.3, 0.7]]), 0.01)
    assert (rep.cover.upper, rep.pack.upper, rep.cover_half.upper) == (1, 1, 1)


def test_chain_bound_on_cantor_level_six():
    F = level_set(constant_spec(1 / 3), 6).to_box_union()
    assert chain_lower_bound_check(F, [0.0], [1 / 9, 1 / 27], 1 / 3).passed
    assert chain_lower_bound_check(interval(0, 1), [0.0], [0.1, 0.02], 0.5).passed
