import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from phidim.covering import ball_restrict, covering_number
from phidim.dimfunc import constant_df
from phidim.popcorn import (IRRATIONAL, PopcornSample, ResolutionError, SampleBudgetError,
                            baseline_trace, box_dimension_trace, box_target, count_reduced,
                            default_r_grid, isolated_point_collapse, modified_dimension_witness,
                            popcorn_value, sample_graph, totient_sieve)


def test_popcorn_values():
    assert popcorn_value(1.0, (2, 4)) == 0.5
    assert popcorn_value(2.0, Fraction(3, 9)) == pytest.approx(1 / 9)
    assert popcorn_value(1.5, IRRATIONAL) == 0.0
    assert popcorn_value(1.0, (0, 1)) == 1.0
    with pytest.raises(ZeroDivisionError):
        popcorn_value(1.0, (1, 0))
    with pytest.raises(ValueError):
        popcorn_value(0.0, (1, 2))


@given(st.integers(1, 300))
def test_totient_by_gcd(n):
    want = sum(1 for k in range(1, n + 1) if math.gcd(k, n) == 1)
    assert totient_sieve(n)[n] == want


def test_small_counts():
    # 1/2, 1/3, 2/3, 1/4, 3/4, 1/5, 2/5, 3/5, 4/5
    assert count_reduced(5, include_endpoints=False) == 9
    assert len(sample_graph(1.0, 5, include_endpoints=False)) == 9
    assert len(sample_graph(1.0, 5)) == 11


def test_count_asymptotics():
    Q = 1000
    assert count_reduced(Q) == pytest.approx(3 * Q * Q / math.pi ** 2, rel=0.02)


@settings(max_examples=30)
@given(st.integers(2, 60), st.floats(0.2, 3.0))
def test_sample_is_reduced_and_distinct(Q, t):
    s = sample_graph(t, Q)
    assert len(s) == count_reduced(Q)
    assert np.all(np.gcd(s.p, s.q) == 1)
    assert np.unique(s.x).size == len(s)
    assert np.all((s.x >= 0) & (s.x <= 1))
    assert np.allclose(s.heights, s.q.astype(float) ** -t)
    # ordered by denominator
    assert np.all(np.diff(s.q) >= 0)


def test_budget():
    with pytest.raises(SampleBudgetError):
        sample_graph(1.0, 2000, budget=1000)


def test_csv_round_trip():
    s = sample_graph(1.3, 12)
    back = PopcornSample.from_csv(s.to_csv(), 1.3)
    assert back.Q == 12 and back.include_endpoints
    assert np.array_equal(back.p, s.p) and np.array_equal(back.q, s.q)


def test_isolated_point_at_one_half():
    s = sample_graph(1.0, 50)
    rep = isolated_point_collapse(s, constant_df(1.0))
    # nearest neighbours of (1/2, 1/2) are (1/3, 1/3) and (2/3, 1/3)
    assert rep.nearest == pytest.approx(1 / 6)
    assert rep.R == pytest.approx(1 / 12)
    assert rep.count == 1 and rep.quotient == 0.0 and rep.certified


def test_isolation_needs_resolution():
    with pytest.raises(ResolutionError):
        isolated_point_collapse(sample_graph(1.0, 3), constant_df(1.0), R=0.3)
    with pytest.raises(ValueError):
        isolated_point_collapse(sample_graph(1.0, 10), constant_df(1.0), witness=(1, 11))


def test_box_target():
    assert box_target(1.0) == pytest.approx(4 / 3)
    assert box_target(0.5) == pytest.approx(1.6)
    assert box_target(2.0) == 1.0 and box_target(5.0) == 1.0


def test_default_grid_stops_at_truncation_height():
    r = default_r_grid(sample_graph(1.0, 2000, include_endpoints=False))
    assert np.allclose(r, 2.0 ** -np.arange(2, 11))
    with pytest.raises(ResolutionError):
        default_r_grid(sample_graph(0.2, 3))


def test_baseline_trace_by_hand():
    k = np.arange(2, 12)
    tr = baseline_trace(2.0 ** -k)
    # the unit segment needs 2**(k-1) balls of radius 2**-k
    assert np.allclose(tr.values, (k - 1) / k)


def test_box_trace_guards():
    s = sample_graph(1.0, 20)
    with pytest.raises(ResolutionError):
        box_dimension_trace(s, [0.1, 1e-4])
    with pytest.raises(ValueError):
        box_dimension_trace(s, [0.01, 0.1])


def test_box_trace_above_baseline():
    s = sample_graph(1.0, 200)
    tr = box_dimension_trace(s)
    base = baseline_trace(tr.r)
    assert np.all(tr.values >= base.values - 1e-12)
    assert np.all(tr.lower <= tr.values)
    assert tr.target == pytest.approx(4 / 3)


def test_threads_do_not_change_trace():
    s = sample_graph(1.0, 100)
    a = box_dimension_trace(s)
    b = box_dimension_trace(s, threads=3)
    assert np.array_equal(a.values, b.values)


def test_witness_range_and_degeneracy():
    with pytest.raises(ValueError):
        modified_dimension_witness(sample_graph(2.5, 20), constant_df(1.0))
    w = modified_dimension_witness(sample_graph(1.9, 60), constant_df(1.0))
    assert w.near_degenerate
    assert w.collapse.certified
    assert w.baseline == pytest.approx(1.0, abs=0.03)


def test_small_enumeration_and_heights():
    s = sample_graph(2.0, 3, include_endpoints=False)
    assert list(zip(s.p.tolist(), s.q.tolist())) == [(1, 2), (1, 3), (2, 3)]
    assert popcorn_value(2.0, (3, 4)) == pytest.approx(1 / 16)
    assert popcorn_value(1.0, (2, 4)) == 0.5


@pytest.mark.parametrize("Q", [10, 997, 10_000])
def test_count_matches_gcd_scan(Q):
    direct = sum(int(np.count_nonzero(np.gcd(np.arange(1, q), q) == 1)) for q in range(2, Q + 1))
    assert count_reduced(Q) == direct + 2


def test_witness_unaffected_by_baseline():
    # the baseline is at sup-distance 2**-t from the witness, far beyond R
    s = sample_graph(1.0, 50)
    rep = isolated_point_collapse(s, constant_df(1.0), include_baseline=True)
    assert rep.certified and rep.R == pytest.approx(1 / 12)


def test_baseline_points_are_never_isolated():
    F = sample_graph(1.0, 50).with_baseline()
    for R in (0.1, 0.01, 0.001):
        n = covering_number(ball_restrict(F, [math.sqrt(2) / 2, 0.0], R, local=True), R ** 2).upper
        assert n > 1
