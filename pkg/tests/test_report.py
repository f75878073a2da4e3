import json
import math
from decimal import Decimal, localcontext

import numpy as np
import pytest
from hypothesis import given, strategies as st

from phidim.report import (CSV_COLUMNS, EstimateReport, ScaleRecord, count_str, parse_count,
                           parse_csv, rows_to_csv, scale_str)


def record(q, t_R=1.0, t_r=2.0, n=4):
    return ScaleRecord(t_R, t_r, n, n, q, q, q)


def test_running_min_skips_nan_and_burn_in():
    rep = EstimateReport([record(v) for v in [0.2, 0.9, math.nan, 0.7, 0.8]], start=1)
    rm = rep.running_min
    assert math.isnan(rm[0]) and rm[2] == 0.9
    assert rm[1] == 0.9 and rm[3] == 0.7 and rm[4] == 0.7
    assert rep.value == 0.7


def test_value_clamped_to_dimension():
    rep = EstimateReport([record(1.7)], dim=1)
    assert rep.raw_value == 1.7 and rep.value == 1.0
    assert math.isnan(EstimateReport([record(math.nan)]).value)


def test_values_at_matches_log_scales():
    rep = EstimateReport([record(0.3, t_R=1.0), record(0.4, t_R=2.0)])
    got = rep.values_at([2.0, 5.0])
    assert got[0] == 0.4 and math.isnan(got[1])


@given(st.lists(st.floats(0.0, 2.0, allow_nan=False), min_size=1, max_size=30))
def test_running_min_is_prefix_minimum(vals):
    rm = EstimateReport([record(v) for v in vals]).running_min
    assert np.allclose(rm, np.minimum.accumulate(vals))


@given(st.floats(0.0, 1e5))
def test_scale_str_matches_decimal(t):
    with localcontext() as ctx:
        ctx.prec = 50
        want = (-Decimal(repr(t))).exp()
    got = Decimal(scale_str(t))
    assert abs(got - want) <= want * Decimal("1e-11")


def test_scale_str_examples():
    assert scale_str(0.0) == "1.000000000000000E0"
    assert scale_str(math.log(2)).startswith("5.00000000000000")
    assert scale_str(5000.0).endswith("E-2172")


@given(st.integers(0, 2 ** 4000))
def test_count_text_round_trip(n):
    assert parse_count(count_str(n)) == n


def test_count_text_forms():
    assert count_str(1 << 5000) == "2^5000"
    assert count_str(12) == "12"
    assert count_str((1 << 4000) + 1).startswith("0x")


def test_csv_round_trip():
    recs = [ScaleRecord(float(k), 2.0 * k, 1 << k, 1 << k, 0.3, 0.35, 0.4) for k in range(1, 6)]
    rep = EstimateReport(recs)
    text = rep.to_csv()
    rows = parse_csv(text)
    assert list(rows[0]) == list(CSV_COLUMNS)
    assert rows_to_csv(rows, CSV_COLUMNS) == text
    assert [parse_count(r["count_hi"]) for r in rows] == [1 << k for k in range(1, 6)]


def test_json_is_loadable():
    rep = EstimateReport([record(0.5), record(math.nan)], provenance={"method": "x"})
    doc = json.loads(rep.to_json())
    assert doc["value"] == "0.5" and doc["records"][1]["quotient"] == "nan"
    assert doc["provenance"] == {"method": "x"}


def test_scale_properties():
    rec = record(0.5, t_R=math.log(4), t_r=math.log(16))
    assert rec.R == pytest.approx(0.25) and rec.r == pytest.approx(1 / 16)
