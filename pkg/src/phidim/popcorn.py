"""Popcorn (Thomae-type) graphs sampled on reduced fractions.

The graph of ``f_t(p/q) = q**-t`` over the rationals of ``[0, 1]`` is
sampled up to a maximal denominator ``Q``.  The irrational part of the
graph, ``([0, 1] minus Q) x {0}``, is represented by the full segment
``[0, 1] x {0}``; both have the same covering numbers at every radius
since covering counts only see closures.

Three desk-scale quantities are assembled here:

* an isolated high point whose small balls contain nothing else, so the
  phi-lower quotient at that scale is exactly 0 for every phi;
* a phi-lower estimate on the baseline segment, close to 1;
* a box-counting trace on sample plus baseline, creeping towards
  ``4 / (2 + t)`` from below.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .covering import BoxUnion, EmptySetError, PointCloud, ball_restrict, covering_number
from .dimfunc import DimensionFunction
from .estimator import ScaleGrid, phi_lower_estimate
from .report import EstimateReport, ScaleRecord

IRRATIONAL = None
DEFAULT_POINT_BUDGET = 5_000_000
NEAR_DEGENERATE_GAP = 0.05


class SampleBudgetError(RuntimeError):
    pass


class ResolutionError(ValueError):
    pass


def popcorn_value(t: float, x) -> float:
    """Height ``q**-t`` of the popcorn function at ``x``.

    ``x`` is an integer pair ``(p, q)`` (reduced internally), a
    :class:`fractions.Fraction`, or :data:`IRRATIONAL` for height 0.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    if x is IRRATIONAL:
        return 0.0
    if isinstance(x, Fraction):
        q = x.denominator
    else:
        p, q = (int(v) for v in x)
        if q == 0:
            raise ZeroDivisionError("denominator q = 0")
        q = Fraction(p, q).denominator
    return float(q) ** -t


def totient_sieve(n: int) -> np.ndarray:
    """Euler's totient for ``0..n``."""
    phi = np.arange(n + 1, dtype=np.int64)
    for p in range(2, n + 1):
        if phi[p] == p:
            phi[p::p] -= phi[p::p] // p
    return phi


def count_reduced(Q: int, include_endpoints: bool = True) -> int:
    """Number of sample points: ``1 + sum_{q<=Q} totient(q)`` with endpoints."""
    s = int(totient_sieve(Q)[2:].sum())
    return s + 2 if include_endpoints else s


@dataclass(frozen=True)
class PopcornSample:
    """Reduced fractions ``p/q`` with ``q <= Q``, ordered by ``(q, p)``."""

    t: float
    Q: int
    p: np.ndarray
    q: np.ndarray
    include_endpoints: bool = True

    @property
    def x(self) -> np.ndarray:
        return self.p / self.q

    @property
    def heights(self) -> np.ndarray:
        return np.power(self.q.astype(float), -self.t)

    @property
    def points(self) -> np.ndarray:
        return np.column_stack([self.x, self.heights])

    def __len__(self):
        return int(self.p.size)

    def cloud(self) -> PointCloud:
        return PointCloud(self.points)

    def with_baseline(self) -> BoxUnion:
        return self.cloud().union(baseline())

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["p", "q", "x", "height"])
        for p, q, x, h in zip(self.p.tolist(), self.q.tolist(), self.x, self.heights):
            w.writerow([p, q, repr(float(x)), repr(float(h))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, t: float) -> "PopcornSample":
        rows = list(csv.DictReader(io.StringIO(text)))
        p = np.array([int(r["p"]) for r in rows], dtype=np.int64)
        q = np.array([int(r["q"]) for r in rows], dtype=np.int64)
        ends = bool(np.any(p == 0))
        return cls(float(t), int(q.max()), p, q, ends)


def baseline() -> BoxUnion:
    """The segment ``[0, 1] x {0}`` as a degenerate box."""
    return BoxUnion([[0.0, 0.0]], [[1.0, 0.0]])


def sample_graph(t: float, Q: int, include_endpoints: bool = True,
                 budget: int = DEFAULT_POINT_BUDGET) -> PopcornSample:
    """All reduced ``p/q`` in ``[0, 1]`` with ``q <= Q``, grouped by denominator."""
    if not t > 0:
        raise ValueError("t must be positive")
    if Q < 2:
        raise ValueError("need Q >= 2")
    n = count_reduced(Q, include_endpoints)
    if n > budget:
        raise SampleBudgetError(f"{n} points exceed budget {budget}")
    ps, qs = [], []
    if include_endpoints:
        ps.append(np.array([0, 1], dtype=np.int64))
        qs.append(np.array([1, 1], dtype=np.int64))
    for q in range(2, Q + 1):
        p = np.arange(1, q, dtype=np.int64)
        p = p[np.gcd(p, q) == 1]
        ps.append(p)
        qs.append(np.full(p.size, q, dtype=np.int64))
    return PopcornSample(float(t), int(Q), np.concatenate(ps), np.concatenate(qs),
                         include_endpoints)


# -- isolated points ------------------------------------------------------


@dataclass
class CollapseReport:
    witness: tuple
    R: float
    r: float
    nearest: float
    count: int
    quotient: float

    @property
    def certified(self) -> bool:
        return self.count == 1 and self.quotient == 0.0

    def to_dict(self) -> dict:
        return {"witness": list(self.witness), "R": self.R, "r": self.r, "nearest": self.nearest,
                "count": self.count, "quotient": self.quotient, "certified": self.certified}


def isolated_point_collapse(sample: PopcornSample, phi: DimensionFunction, R: float | None = None,
                            witness=(1, 2), include_baseline: bool = False) -> CollapseReport:
    """Certify a per-scale quotient of 0 at an isolated sample point.

    The witness is the point above ``p/q = witness``; by default
    ``(1/2, 2**-t)``.  ``R`` defaults to half the sup-norm distance to the
    nearest other point.  Points missing from the sample all have height
    below ``Q**-t``, so the ball must stay above that height for the
    isolation to say anything about the full graph.
    """
    p, q = witness
    fr = Fraction(int(p), int(q))
    x = np.array([float(fr), popcorn_value(sample.t, (fr.numerator, fr.denominator))])
    F = sample.with_baseline() if include_baseline else sample.cloud()
    lo, hi = F.boxes()
    # sup-norm distance from x to each box
    gap = np.maximum(np.maximum(lo - x, x - hi), 0.0).max(axis=1)
    if not np.any(gap == 0):
        raise ValueError("witness is not a sample point")
    others = gap[gap > 0]
    nearest = float(others.min()) if others.size else math.inf
    if R is None:
        R = 0.5 * nearest if math.isfinite(nearest) else 0.5 * x[1]
    if not 0 < R < 1:
        raise ValueError("R must lie in (0, 1)")
    floor = float(sample.Q) ** -sample.t
    if x[1] - R <= floor:
        raise ResolutionError(f"ball of radius {R:g} reaches heights below Q**-t = {floor:g}; "
                              "sample too sparse to certify isolation")
    r = R ** (1.0 + float(phi(R)))
    count = covering_number(ball_restrict(F, x, R, local=True), r).upper
    quotient = math.log(count) / math.log(R / r)
    return CollapseReport((float(x[0]), float(x[1])), float(R), float(r), nearest, int(count),
                          float(quotient))


# -- box counting ---------------------------------------------------------


def resolution_floor(sample: PopcornSample) -> float:
    """Smallest admissible radius, ``1 / (2 Q**2)``."""
    return 0.5 / sample.Q ** 2


def default_r_grid(sample: PopcornSample, k_start: int = 2) -> np.ndarray:
    """Radii ``2**-k`` down to the truncation height ``Q**-t``.

    Below ``Q**-t`` the omitted points (all lower than ``Q**-t``) would
    matter and the sampled trace flattens out.
    """
    k_stop = int(math.floor(sample.t * math.log2(sample.Q)))
    if k_stop < k_start:
        raise ResolutionError("sample too coarse for any grid point")
    return 2.0 ** -np.arange(k_start, k_stop + 1, dtype=float)


@dataclass
class BoxTrace:
    """``log N_r / log(1/r)`` over a decreasing radius grid."""

    t: float
    report: EstimateReport
    target: float
    floor: float
    trend_window: int = 5

    @property
    def r(self) -> np.ndarray:
        return np.array([rec.r for rec in self.report.records])

    @property
    def values(self) -> np.ndarray:
        return self.report.quotients

    @property
    def lower(self) -> np.ndarray:
        return self.report.quotient_bounds[0]

    @property
    def final(self) -> float:
        return float(self.values[-1])

    @property
    def increasing_tail(self) -> bool:
        tail = self.values[-self.trend_window:]
        return tail.size == self.trend_window and bool(np.all(np.diff(tail) > 0))

    def to_dict(self) -> dict:
        return {"t": self.t, "target": self.target, "final": self.final, "floor": self.floor,
                "increasing_tail": self.increasing_tail, "trend_window": self.trend_window,
                "r": self.r.tolist(), "values": self.values.tolist(),
                "lower": self.lower.tolist()}


def box_target(t: float) -> float:
    """Box dimension of the full popcorn graph: ``4/(2+t)`` for ``t < 2``, else 1."""
    if not t > 0:
        raise ValueError("t must be positive")
    return 4.0 / (2.0 + t) if t < 2 else 1.0


def box_dimension_trace(sample: PopcornSample, r_grid=None, with_baseline: bool = True,
                        trend_window: int = 5, threads: int = 1) -> BoxTrace:
    """Box-counting trace of the sample (plus baseline) on radii ``r_grid``.

    The value at ``r`` uses the certified upper count; the lower count
    is reported as ``quotient_lo``.
    """
    r_grid = default_r_grid(sample) if r_grid is None else np.asarray(r_grid, dtype=float)
    if np.any(np.diff(r_grid) >= 0):
        raise ValueError("r_grid must be strictly decreasing")
    if np.any(r_grid >= 1):
        raise ValueError("radii must be below 1")
    floor = resolution_floor(sample)
    if r_grid[-1] < floor:
        raise ResolutionError(f"r = {r_grid[-1]:g} below resolution floor 1/(2Q^2) = {floor:g}")
    F = sample.with_baseline() if with_baseline else sample.cloud()
    return _trace(F, sample.t, r_grid, floor, trend_window, box_target(sample.t), threads)


def baseline_trace(r_grid) -> BoxTrace:
    """Box-counting trace of the bare segment, for comparison."""
    r_grid = np.asarray(r_grid, dtype=float)
    return _trace(baseline(), math.nan, r_grid, 0.0, 5, 1.0)


def _trace(F, t, r_grid, floor, trend_window, target, threads: int = 1) -> BoxTrace:
    radii = [float(r) for r in r_grid]
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            counts = list(pool.map(lambda r: covering_number(F, r), radii))
    else:
        counts = [covering_number(F, r) for r in radii]
    records = []
    for r, cb in zip(radii, counts):
        L = -math.log(r)
        q = math.log(cb.upper) / L
        records.append(ScaleRecord(0.0, L, cb.lower, cb.upper, math.log(cb.lower) / L, q, q))
    rep = EstimateReport(records, dim=2, provenance={"method": "box-trace", "t": t})
    return BoxTrace(t, rep, target, floor, trend_window)


# -- strict chain ---------------------------------------------------------


def baseline_estimate(phi: DimensionFunction, grid: ScaleGrid | None = None) -> EstimateReport:
    """phi-lower estimate of the baseline segment (a subset of every ``S_t``).

    The default grid is deep (``R = 2**-48 .. 2**-64``) because the
    quotient approaches 1 only like ``1 - log 2 / log(R/r)``.
    """
    grid = ScaleGrid.geometric(48, 64, step=2) if grid is None else grid
    return phi_lower_estimate(baseline(), phi, grid)


@dataclass
class ChainWitness:
    t: float
    collapse: CollapseReport
    baseline: float
    box: BoxTrace
    tol: float
    near_degenerate: bool
    info: dict = field(default_factory=dict)

    @property
    def chain_holds(self) -> bool:
        return (self.collapse.quotient < self.baseline - self.tol
                and self.baseline - self.tol < self.box.final)

    def to_dict(self) -> dict:
        return {"t": self.t, "collapse": self.collapse.to_dict(), "baseline": self.baseline,
                "box_final": self.box.final, "box_target": self.box.target, "tol": self.tol,
                "chain_holds": self.chain_holds, "near_degenerate": self.near_degenerate}


def modified_dimension_witness(sample: PopcornSample, phi: DimensionFunction, tol: float = 0.05,
                               r_grid=None, grid: ScaleGrid | None = None) -> ChainWitness:
    """Assemble ``0 < 1 < box value`` for the popcorn graph at desk scale.

    The three numbers are the collapsed phi-lower quotient at an isolated
    point, the phi-lower estimate of the baseline segment (a lower bound
    for the modified dimension), and the box-counting trace.  The strict
    chain only exists for ``t < 2``; when ``4/(2+t) - 1`` is within
    :data:`NEAR_DEGENERATE_GAP` the report flags near-degeneracy.
    """
    if not 0 < sample.t < 2:
        raise ValueError("the strict chain needs 0 < t < 2")
    col = isolated_point_collapse(sample, phi)
    base = baseline_estimate(phi, grid).value
    box = box_dimension_trace(sample, r_grid)
    near = box.target - 1.0 < NEAR_DEGENERATE_GAP
    return ChainWitness(sample.t, col, base, box, tol, near)

