"""Per-scale quotient traces and their running-minimum summaries."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from typing import Sequence

import numpy as np

CSV_COLUMNS = ("R", "r", "count_lo", "count_hi", "quotient_lo", "quotient", "quotient_hi",
               "running_min")


_LN10 = math.log(10.0)
_LN10_HI = math.ldexp(math.floor(math.ldexp(_LN10, 32)), -32)
_LN10_LO = float(Decimal(10).ln() - Decimal(_LN10_HI))


def scale_str(t: float) -> str:
    """Decimal string of ``exp(-t)``, valid far below the float underflow threshold.

    ``t`` is split as ``k log 10 + rem`` with a two-part ``log 10`` so the
    mantissa keeps the precision of ``t`` itself.
    """
    t = float(t)
    k = math.floor(t / _LN10)
    rem = (t - k * _LN10_HI) - k * _LN10_LO
    m = 10.0 * math.exp(-rem)
    e = -k - 1
    while m >= 10.0:
        m, e = m / 10.0, e + 1
    while m < 1.0:
        m, e = m * 10.0, e - 1
    text = f"{m:.15f}"
    if text.startswith("10."):
        text, e = f"{m / 10.0:.15f}", e + 1
    return f"{text}E{e}"


def count_str(n: int) -> str:
    """Exact text for a possibly astronomical count: ``2^k`` for powers of two."""
    n = int(n)
    if n > 1 and n & (n - 1) == 0:
        return f"2^{n.bit_length() - 1}"
    if n.bit_length() > 3000:
        return hex(n)
    return str(n)


def parse_count(text: str) -> int:
    if text.startswith("2^"):
        return 1 << int(text[2:])
    return int(text, 0)


def _fmt(x: float) -> str:
    return "nan" if x is None or (isinstance(x, float) and math.isnan(x)) else repr(float(x))


@dataclass
class ScaleRecord:
    """Quotient at one scale pair.

    ``t_R`` and ``t_r`` are the log-scales ``log(1/R)`` and ``log(1/r)``.
    ``quotient`` is NaN when the scale carries no information (for
    example an empty level window); such records are skipped by the
    running minimum.
    """

    t_R: float
    t_r: float
    count_lo: int
    count_hi: int
    quotient_lo: float
    quotient: float
    quotient_hi: float
    info: dict = field(default_factory=dict)

    @property
    def R(self) -> float:
        return math.exp(-self.t_R)

    @property
    def r(self) -> float:
        return math.exp(-self.t_r)


@dataclass
class EstimateReport:
    """Quotient trace with running minimum as a liminf proxy.

    ``start`` is the index of the first record entering the running
    minimum; earlier records are kept in the trace for inspection.
    """

    records: list
    dim: int = 1
    start: int = 0
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        self.start = max(0, min(self.start, len(self.records)))

    @property
    def quotients(self) -> np.ndarray:
        return np.array([rec.quotient for rec in self.records], dtype=float)

    @property
    def quotient_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        lo = np.array([rec.quotient_lo for rec in self.records], dtype=float)
        hi = np.array([rec.quotient_hi for rec in self.records], dtype=float)
        return lo, hi

    @property
    def running_min(self) -> np.ndarray:
        q = self.quotients.copy()
        q[: self.start] = np.nan
        q = np.where(np.isnan(q), np.inf, q)
        out = np.minimum.accumulate(q) if q.size else q
        return np.where(np.isinf(out), np.nan, out)

    @property
    def raw_value(self) -> float:
        rm = self.running_min
        return float(rm[-1]) if rm.size else math.nan

    @property
    def value(self) -> float:
        """Final running minimum clamped to ``[0, dim]``."""
        v = self.raw_value
        return v if math.isnan(v) else min(max(v, 0.0), float(self.dim))

    @property
    def value_bounds(self) -> tuple[float, float]:
        lo, hi = self.quotient_bounds
        lo, hi = lo[self.start:], hi[self.start:]
        ok = ~np.isnan(self.quotients[self.start:])
        if not ok.any():
            return math.nan, math.nan
        return float(lo[ok].min()), float(hi[ok].min())

    def values_at(self, t_R: Sequence[float], rtol: float = 1e-12) -> np.ndarray:
        """Quotients at the records whose ``t_R`` matches the given log-scales."""
        ts = np.array([rec.t_R for rec in self.records])
        q = self.quotients
        out = []
        for t in t_R:
            hit = np.flatnonzero(np.isclose(ts, t, rtol=rtol, atol=0))
            out.append(q[hit[0]] if hit.size else math.nan)
        return np.array(out)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for rec, rm in zip(self.records, self.running_min):
            w.writerow([scale_str(rec.t_R), scale_str(rec.t_r), count_str(rec.count_lo),
                        count_str(rec.count_hi),
                        _fmt(rec.quotient_lo), _fmt(rec.quotient), _fmt(rec.quotient_hi),
                        _fmt(rm)])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "value": _fmt(self.value),
            "raw_value": _fmt(self.raw_value),
            "dim": self.dim,
            "start": self.start,
            "provenance": self.provenance,
            "records": [
                {"t_R": rec.t_R, "t_r": rec.t_r, "count_lo": count_str(rec.count_lo),
                 "count_hi": count_str(rec.count_hi), "quotient_lo": _fmt(rec.quotient_lo),
                 "quotient": _fmt(rec.quotient), "quotient_hi": _fmt(rec.quotient_hi),
                 "info": rec.info}
                for rec in self.records
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True, default=str)


def parse_csv(text: str) -> list[dict]:
    """Read a report CSV back into row dictionaries (values as strings)."""
    return list(csv.DictReader(io.StringIO(text)))


def rows_to_csv(rows: list[dict], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


@dataclass
class ScanReport:
    """Dimension values keyed by a rate-window parameter ``alpha``."""

    alphas: np.ndarray
    values: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    checks: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)

    @property
    def infimum(self) -> float:
        return float(np.nanmin(self.values))

    @property
    def passed(self) -> bool:
        return all(bool(np.all(v)) for v in self.checks.values())

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["alpha", "value", "value_lo", "value_hi"])
        for a, v, lo, hi in zip(self.alphas, self.values, self.lower, self.upper):
            w.writerow([repr(float(a)), _fmt(v), _fmt(lo), _fmt(hi)])
        return buf.getvalue()
