"""Covering and packing numbers of finite unions of boxes and points.

The metric is the sup-norm, so the closed ball ``B(x, r)`` is the cube
``x + [-r, r]^d``.  Packing uses strict separation: ``M_r(F)`` is the
largest subset of ``F`` with pairwise distances ``> r``.

In one dimension both counts are exact (greedy sweeps over merged
components).  In two dimensions exact answers are returned for single
boxes, sets lying on one axis-parallel line, and clouds of at most 12
points; otherwise certified lower and upper bounds are returned.
"""

from __future__ import annotations

import bisect
import csv
import io
import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

# Relative slack for boundary hits; closed balls contain their boundary.
_TOL = 1e-9
EXACT_POINT_LIMIT = 12
DEFAULT_CELL_BUDGET = 20_000_000


class EmptySetError(ValueError):
    """A ball restriction with empty result."""


class CellBudgetError(RuntimeError):
    """Grid bounds would enumerate too many cells."""


class GeomSet:
    """Finite union of closed boxes (points are degenerate boxes) in R^d."""

    d: int

    def boxes(self) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def bbox(self) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.boxes()
        return lo.min(axis=0), hi.max(axis=0)

    def union(self, other: "GeomSet") -> "BoxUnion":
        if other.d != self.d:
            raise ValueError("dimension mismatch")
        a_lo, a_hi = self.boxes()
        b_lo, b_hi = other.boxes()
        return BoxUnion(np.vstack([a_lo, b_lo]), np.vstack([a_hi, b_hi]))

    def to_csv(self) -> str:
        lo, hi = self.boxes()
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"lo{j}" for j in range(self.d)] + [f"hi{j}" for j in range(self.d)])
        for a, b in zip(lo, hi):
            w.writerow([repr(float(v)) for v in (*a, *b)])
        return buf.getvalue()

    @staticmethod
    def from_csv(text: str) -> "GeomSet":
        rows = list(csv.reader(io.StringIO(text)))
        head, body = rows[0], np.array(rows[1:], dtype=float)
        if all(h.startswith("x") for h in head):
            return PointCloud(body)
        d = len(head) // 2
        return BoxUnion(body[:, :d], body[:, d:])

    def __len__(self):
        return self.boxes()[0].shape[0]


def _as_2d(a, d: int | None = None) -> np.ndarray:
    arr = np.asarray(a, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None] if d in (None, 1) else arr[None, :]
    if arr.ndim != 2:
        raise ValueError("expected an (n, d) array")
    return arr


class PointCloud(GeomSet):
    """Finite set of points, one row per point."""

    def __init__(self, points):
        pts = _as_2d(points)
        if pts.shape[0] == 0:
            raise ValueError("empty point cloud")
        if pts.shape[1] not in (1, 2):
            raise ValueError("only d = 1 and d = 2 are supported")
        if not np.all(np.isfinite(pts)):
            raise ValueError("points must be finite")
        self.points = pts
        self.d = pts.shape[1]

    def boxes(self):
        return self.points, self.points

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"x{j}" for j in range(self.d)])
        for p in self.points:
            w.writerow([repr(float(v)) for v in p])
        return buf.getvalue()

    def __repr__(self):
        return f"<PointCloud d={self.d} n={self.points.shape[0]}>"


class BoxUnion(GeomSet):
    """Union of closed axis-aligned boxes ``[lo_i, hi_i]``."""

    def __init__(self, lo, hi):
        lo = _as_2d(lo)
        hi = _as_2d(hi, lo.shape[1])
        if lo.shape != hi.shape or lo.shape[0] == 0:
            raise ValueError("need matching non-empty lo/hi arrays")
        if lo.shape[1] not in (1, 2):
            raise ValueError("only d = 1 and d = 2 are supported")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise ValueError("boxes must be bounded")
        if np.any(hi < lo):
            raise ValueError("box with negative side length")
        self.lo, self.hi = lo, hi
        self.d = lo.shape[1]

    def boxes(self):
        return self.lo, self.hi

    def __repr__(self):
        return f"<BoxUnion d={self.d} n={self.lo.shape[0]}>"


def interval(a: float, b: float) -> BoxUnion:
    return BoxUnion([[a]], [[b]])


def ball_restrict(F: GeomSet, x, R: float, local: bool = False) -> GeomSet:
    """``F`` intersected with the closed sup-norm ball ``B(x, R)``.

    With ``local=True`` the result is translated by ``-x``.  Covering and
    packing numbers are translation invariant, and differences taken
    before clipping keep full precision when ``R`` is far below the
    resolution of the absolute coordinates.

    Raises :class:`EmptySetError` when the intersection is empty.
    """
    if not R > 0:
        raise ValueError("radius must be positive")
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size != F.d:
        raise ValueError("center dimension mismatch")
    lo, hi = F.boxes()
    lo, hi = lo - x, hi - x
    slack = _TOL * 1e-3 * R
    keep = np.all((hi >= -R - slack) & (lo <= R + slack), axis=1)
    if not keep.any():
        raise EmptySetError("ball misses the set")
    lo, hi = lo[keep], hi[keep]
    shift = 0.0 if local else x
    if isinstance(F, PointCloud):
        return PointCloud(lo + shift)
    new_lo = np.maximum(lo, -R)
    new_hi = np.maximum(np.minimum(hi, R), new_lo)
    return BoxUnion(new_lo + shift, new_hi + shift)


@dataclass(frozen=True)
class CountBounds:
    """Certified bracket ``lower <= count <= upper``."""

    lower: int
    upper: int

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError(f"lower {self.lower} exceeds upper {self.upper}")

    @property
    def exact(self) -> bool:
        return self.lower == self.upper

    @classmethod
    def of(cls, n: int) -> "CountBounds":
        return cls(int(n), int(n))

    def to_dict(self, r: float) -> dict:
        return {"r": r, "lower": self.lower, "upper": self.upper, "exact": self.exact}


# -- one dimension --------------------------------------------------------


def components_1d(lo, hi) -> tuple[list, list]:
    """Merge intervals into sorted disjoint components ``[A_i, B_i]``."""
    lo = np.asarray(lo, dtype=float).ravel()
    hi = np.asarray(hi, dtype=float).ravel()
    order = np.argsort(lo, kind="stable")
    lo, hi = lo[order], hi[order]
    reach = np.maximum.accumulate(hi)
    new = np.ones(lo.size, dtype=bool)
    new[1:] = lo[1:] > reach[:-1]
    starts = np.flatnonzero(new)
    A = lo[starts]
    B = np.maximum.reduceat(hi, starts)
    return A.tolist(), B.tolist()


def _ceil(x: float) -> int:
    return int(math.ceil(x - _TOL))


def cover_count_1d(A: list, B: list, r: float) -> int:
    """Greedy sweep: exact minimum number of closed intervals of length ``2r``."""
    D = 2.0 * r
    eps = _TOL * D
    n = len(A)
    count = 0
    i = 0
    while i < n:
        k = max(1, _ceil((B[i] - A[i]) / D))
        count += k
        end = A[i] + k * D
        i += 1
        while i < n and A[i] <= end + eps:
            i = bisect.bisect_right(B, end + eps, i)
            if i < n and A[i] <= end + eps:
                k = _ceil((B[i] - end) / D)
                count += k
                end += k * D
                i += 1
    return count


def cover_centers_1d(A: list, B: list, r: float) -> list[float]:
    """Centers of the greedy cover (same sweep, materialized)."""
    D = 2.0 * r
    eps = _TOL * D
    out: list[float] = []
    end = -math.inf
    for a, b in zip(A, B):
        if b <= end + eps:
            continue
        start = a if a > end + eps else end
        k = max(1 if a > end + eps else 0, _ceil((b - start) / D))
        out.extend(start + (j + 0.5) * D for j in range(k))
        end = start + k * D
    return out


def pack_count_1d(A: list, B: list, r: float) -> int:
    """Greedy sweep: exact maximum size of a subset with gaps ``> r``."""
    eps = _TOL * r
    n = len(A)
    count = 0
    lim = -math.inf
    i = 0
    while i < n:
        if A[i] > lim + eps:
            k = max(1, _ceil((B[i] - A[i]) / r))
            lim = A[i] + k * r
        else:
            k = _ceil((B[i] - lim) / r)
            lim += k * r
        count += k
        i = bisect.bisect_right(B, lim + eps, i + 1)
    return count


def _line_reduction(F: GeomSet):
    """1D components if a 2D set lies on one axis-parallel line."""
    lo, hi = F.boxes()
    for axis in (0, 1):
        other = 1 - axis
        if np.all(lo[:, other] == lo[0, other]) and np.all(hi[:, other] == lo[0, other]):
            return components_1d(lo[:, axis], hi[:, axis])
    return None


# -- two dimensions -------------------------------------------------------


def _cells(F: GeomSet, side: float, offset=(0.0, 0.0), budget: int = DEFAULT_CELL_BUDGET):
    """Distinct half-open grid cells of the given side meeting ``F``."""
    lo, hi = F.boxes()
    off = np.asarray(offset)
    ilo = np.floor((lo - off) / side).astype(np.int64)
    ihi = np.floor((hi - off) / side).astype(np.int64)
    span = ihi - ilo + 1
    sizes = span[:, 0] * span[:, 1]
    if sizes.sum() > budget:
        raise CellBudgetError(f"{int(sizes.sum())} grid cells exceed budget {budget}")
    single = sizes == 1
    parts = [ilo[single]]
    for k in np.flatnonzero(~single):
        xs = np.arange(ilo[k, 0], ihi[k, 0] + 1)
        ys = np.arange(ilo[k, 1], ihi[k, 1] + 1)
        gx, gy = np.meshgrid(xs, ys, indexing="ij")
        parts.append(np.column_stack([gx.ravel(), gy.ravel()]))
    cells = np.vstack(parts)
    if cells.shape[0] < 2:
        return cells
    base = cells.min(axis=0)
    rel = cells - base
    width = int(rel[:, 1].max()) + 1
    if (int(rel[:, 0].max()) + 1) * width >= 2**62:
        return np.unique(cells, axis=0)
    keys = np.unique(rel[:, 0] * width + rel[:, 1])
    return np.column_stack([keys // width, keys % width]) + base


def _grid_cover_upper(F: GeomSet, r: float) -> int:
    side = 2.0 * r
    best = None
    for off in ((0.0, 0.0), (r, 0.0), (0.0, r), (r, r)):
        n = _cells(F, side, off).shape[0]
        best = n if best is None else min(best, n)
    return best


def _grid_pack_lower(F: GeomSet, r: float) -> int:
    """Occupied cells of side ``r`` in the best parity class: pairwise ``> r`` apart."""
    cells = _cells(F, r)
    par = (cells[:, 0] & 1) * 2 + (cells[:, 1] & 1)
    return int(np.bincount(par, minlength=4).max())


def _exact_cover_points_2d(P: np.ndarray, r: float) -> int:
    n = P.shape[0]
    D = 2.0 * r * (1 + _TOL)
    full = (1 << n) - 1
    masks = set()
    for x0 in P[:, 0]:
        inx = (P[:, 0] >= x0) & (P[:, 0] <= x0 + D)
        for y0 in P[:, 1]:
            sel = inx & (P[:, 1] >= y0) & (P[:, 1] <= y0 + D)
            m = int(np.dot(sel.astype(np.int64), 1 << np.arange(n, dtype=np.int64)))
            if m:
                masks.add(m)
    masks = sorted(masks)
    reach = {0}
    for k in range(1, n + 1):
        reach = {a | m for a in reach for m in masks}
        if full in reach:
            return k
    return n


def _exact_pack_points_2d(P: np.ndarray, r: float) -> int:
    n = P.shape[0]
    dist = np.max(np.abs(P[:, None, :] - P[None, :, :]), axis=2)
    ok = dist > r * (1 + _TOL)
    for k in range(n, 0, -1):
        for sub in combinations(range(n), k):
            idx = np.array(sub)
            blk = ok[np.ix_(idx, idx)]
            if np.all(blk | np.eye(k, dtype=bool)):
                return k
    return 1


def _small_cloud(F: GeomSet):
    lo, hi = F.boxes()
    if np.array_equal(lo, hi):
        P = np.unique(lo, axis=0)
        if P.shape[0] <= EXACT_POINT_LIMIT:
            return P
    return None


def _single_box(F: GeomSet):
    lo, hi = F.boxes()
    if np.all(lo == lo[0]) and np.all(hi == hi[0]):
        return hi[0] - lo[0]
    return None


# -- public counts --------------------------------------------------------


def covering_number(F: GeomSet, r: float) -> CountBounds:
    """Bounds on the least number of closed radius-``r`` balls covering ``F``."""
    if not r > 0:
        raise ValueError("radius must be positive")
    if F.d == 1:
        lo, hi = F.boxes()
        return CountBounds.of(cover_count_1d(*components_1d(lo, hi), r))
    line = _line_reduction(F)
    if line is not None:
        return CountBounds.of(cover_count_1d(*line, r))
    side = _single_box(F)
    if side is not None:
        return CountBounds.of(math.prod(max(1, _ceil(L / (2 * r))) for L in side))
    P = _small_cloud(F)
    if P is not None:
        return CountBounds.of(_exact_cover_points_2d(P, r))
    lower = packing_number(F, 2 * r).lower
    return CountBounds(lower, max(lower, _grid_cover_upper(F, r)))


def packing_number(F: GeomSet, r: float) -> CountBounds:
    """Bounds on the largest subset of ``F`` with pairwise distance ``> r``."""
    if not r > 0:
        raise ValueError("radius must be positive")
    if F.d == 1:
        lo, hi = F.boxes()
        return CountBounds.of(pack_count_1d(*components_1d(lo, hi), r))
    line = _line_reduction(F)
    if line is not None:
        return CountBounds.of(pack_count_1d(*line, r))
    side = _single_box(F)
    if side is not None:
        return CountBounds.of(math.prod(max(1, _ceil(L / r)) for L in side))
    P = _small_cloud(F)
    if P is not None:
        return CountBounds.of(_exact_pack_points_2d(P, r))
    lower = _grid_pack_lower(F, r)
    upper = _grid_cover_upper(F, r / 2)
    return CountBounds(lower, max(lower, upper))


# -- consistency checks ---------------------------------------------------


@dataclass(frozen=True)
class SandwichReport:
    r: float
    cover: CountBounds
    pack: CountBounds
    cover_half: CountBounds

    @property
    def passed(self) -> bool:
        return self.cover.lower <= self.pack.upper and self.pack.lower <= self.cover_half.upper


def sandwich_check(F: GeomSet, r: float) -> SandwichReport:
    """Check ``N_r <= M_r <= N_{r/2}`` on the certifiable side of each bound."""
    return SandwichReport(r, covering_number(F, r), packing_number(F, r),
                          covering_number(F, r / 2))


def default_centers(F: GeomSet, cap: int = 4096) -> np.ndarray:
    """Box corners (lower and upper) as candidate centers, strided to ``cap``."""
    lo, hi = F.boxes()
    pts = np.unique(np.vstack([lo, hi]), axis=0)
    if pts.shape[0] > cap:
        idx = np.linspace(0, pts.shape[0] - 1, cap).round().astype(int)
        pts = pts[np.unique(idx)]
    return pts


@dataclass(frozen=True)
class ChainReport:
    lhs: CountBounds
    factors: tuple
    rhs_lower: int
    rhs_upper: int

    @property
    def passed(self) -> bool:
        return self.lhs.upper >= self.rhs_lower


def chain_lower_bound_check(F: GeomSet, x, scales, R: float, centers=None) -> ChainReport:
    """Compare ``M_{r_k}(B(x,R))`` with the product of coarser packings.

    The right side is ``M_{r_1}(B(x, R - r_1)) * prod_i inf_y M_{r_i}(B(y, r_{i-1} - r_i))``
    with the infimum taken over ``centers`` (default: box corners of F).
    The check passes unless the left count is certainly smaller.
    """
    sc = [float(s) for s in scales]
    if not sc or any(b >= a for a, b in zip(sc, sc[1:])) or sc[-1] <= 0:
        raise ValueError("scales must be positive and strictly decreasing")
    if not sc[0] < R:
        raise ValueError("need r_1 < R")
    cs = default_centers(F) if centers is None else _as_2d(centers, F.d)
    lhs = packing_number(ball_restrict(F, x, R, local=True), sc[-1])
    first = packing_number(ball_restrict(F, x, R - sc[0], local=True), sc[0])
    factors = [first]
    for prev, cur in zip(sc, sc[1:]):
        best = None
        for y in cs:
            try:
                m = packing_number(ball_restrict(F, y, prev - cur, local=True), cur)
            except EmptySetError:
                continue
            if best is None or m.upper < best.upper:
                best = m
        factors.append(best)
    lo = math.prod(f.lower for f in factors)
    hi = math.prod(f.upper for f in factors)
    return ChainReport(lhs, tuple(factors), lo, hi)


def doubling_constant(F: GeomSet, radii, centers=None) -> int:
    """Largest observed ``N_r(B(x, 2r) ∩ F)`` over centers and radii.

    Default centers are box corners and box midpoints.
    """
    if centers is None:
        lo, hi = F.boxes()
        cs = np.unique(np.vstack([default_centers(F), default_centers(BoxUnion((lo + hi) / 2,
                                                                           (lo + hi) / 2))]), axis=0)
    else:
        cs = _as_2d(centers, F.d)
    best = 1
    for r in radii:
        for x in cs:
            try:
                best = max(best, covering_number(ball_restrict(F, x, 2 * r, local=True), r).upper)
            except EmptySetError:
                continue
    return best
