"""Homogeneous Moran sets in one and two dimensions.

At level ``n`` every cube of side ``rho(n-1)`` keeps its ``2**d`` corner
sub-cubes of side ``rho(n) = r_1 * ... * r_n``, placed at offsets
``0`` or ``1 - r_n`` in each coordinate (relative to the parent).

All scale arithmetic uses the log-depth ``s(n) = -log rho(n)``, a
running sum of ``-log r_k``; levels in the thousands are routine.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from typing import Callable, Iterator

import numpy as np

from .dimfunc import DimensionFunction, constant_df
from .report import EstimateReport, ScaleRecord

LOG2 = math.log(2.0)
DEFAULT_BOX_BUDGET = 2 ** 22
DEFAULT_LEVEL_BUDGET = 2_000_000

# Relative slack for scale comparisons: distinct levels differ by at
# least log 2 in log-depth, so this never merges genuine levels.
_REL = 1e-12


class BudgetError(RuntimeError):
    """A requested depth or box count exceeds the configured budget."""


class ScheduleError(ValueError):
    """An example schedule cannot satisfy its defining requirements."""


class MoranSpec:
    """Ratio schedule of a homogeneous Moran set.

    Parameters
    ----------
    d : int
        Ambient dimension, 1 or 2.
    ratios : array_like, optional
        Explicit prefix ``r_1, r_2, ...``.
    rule : callable, optional
        ``n -> r_n`` (1-based) used to extend beyond the prefix.
    meta : dict, optional
        Schedule description (kind, parameters, checkpoints).
    level_budget : int
        Maximum number of levels that may be materialized.
    """

    def __init__(self, d: int = 1, ratios=None, rule: Callable[[int], float] | None = None,
                 meta: dict | None = None, level_budget: int = DEFAULT_LEVEL_BUDGET):
        if d not in (1, 2):
            raise ValueError("only d = 1 and d = 2 are supported")
        if ratios is None and rule is None:
            raise ValueError("need explicit ratios or a rule")
        self.d = d
        self.rule = rule
        self.meta = dict(meta or {})
        self.level_budget = int(level_budget)
        self._lock = threading.Lock()
        r = np.asarray([] if ratios is None else ratios, dtype=float)
        self._check_ratios(r, 1)
        self._neg_log_r = -np.log(r)
        self._s = np.concatenate([[0.0], np.cumsum(self._neg_log_r)])

    @staticmethod
    def _check_ratios(r: np.ndarray, first: int) -> None:
        bad = np.flatnonzero(~((r > 0) & (r <= 0.5)))
        if bad.size:
            k = int(bad[0])
            raise ValueError(f"ratio r_{k + first} = {r[k]} outside (0, 1/2]")

    # -- materialization ---------------------------------------------

    @property
    def depth(self) -> int:
        """Number of materialized levels."""
        return self._neg_log_r.size

    def materialize(self, n: int) -> None:
        if n <= self.depth:
            return
        if n > self.level_budget:
            raise BudgetError(f"depth {n} exceeds level budget {self.level_budget}")
        if self.rule is None:
            raise BudgetError(f"schedule defined only to depth {self.depth}, level {n} requested")
        with self._lock:
            start = self.depth
            if n <= start:
                return
            want = max(n, 2 * start)
            want = min(want, self.level_budget)
            r = np.array([self.rule(k) for k in range(start + 1, want + 1)], dtype=float)
            self._check_ratios(r, start + 1)
            nl = -np.log(r)
            s = self._s[-1] + np.cumsum(nl)
            self._neg_log_r = np.concatenate([self._neg_log_r, nl])
            self._s = np.concatenate([self._s, s])

    def materialize_log_depth(self, t: float) -> None:
        """Materialize until ``s(depth) > t``."""
        while self._s[-1] <= t * (1 + _REL):
            self.materialize(max(self.depth + 1, 2 * self.depth))

    def ratios(self, n: int | None = None) -> np.ndarray:
        n = self.depth if n is None else n
        self.materialize(n)
        return np.exp(-self._neg_log_r[:n])

    def log_depths(self, n: int | None = None) -> np.ndarray:
        """Array ``s(0..n)`` with ``s(k) = -log rho(k)``."""
        n = self.depth if n is None else n
        self.materialize(n)
        return self._s[: n + 1].copy()

    @property
    def r_star(self) -> float:
        """Infimum of the materialized ratios."""
        return float(np.exp(-self._neg_log_r.max())) if self.depth else math.nan

    # -- serialization -----------------------------------------------

    def to_dict(self) -> dict:
        from .report import scale_str
        sched = {
            "kind": self.meta.get("kind", "explicit"),
            "params": {k: v for k, v in self.meta.items()
                       if k not in ("kind", "checkpoints_t") and _jsonable(v)},
            "ratios_prefix": [repr(float(x)) for x in np.exp(-self._neg_log_r)],
        }
        cps = [scale_str(t) for t in self.meta.get("checkpoints_t", [])]
        return {"d": self.d, "schedule": sched, "checkpoints": cps}

    @classmethod
    def from_dict(cls, doc: dict) -> "MoranSpec":
        sched = doc["schedule"]
        kind = sched.get("kind", "explicit")
        params = dict(sched.get("params", {}))
        ratios = [float(x) for x in sched.get("ratios_prefix", [])]
        rule = None
        if kind == "constant":
            rv = float(params["r"])
            rule = lambda n, rv=rv: rv  # noqa: E731
        meta = {"kind": kind, **params}
        if doc.get("checkpoints"):
            from decimal import Decimal
            meta["checkpoints_t"] = [float(-Decimal(c).ln()) for c in doc["checkpoints"]]
        return cls(int(doc.get("d", 1)), ratios, rule, meta)

    def __repr__(self):
        return f"<MoranSpec d={self.d} kind={self.meta.get('kind', 'explicit')} depth={self.depth}>"


def _jsonable(v) -> bool:
    return isinstance(v, (int, float, str, bool, list, tuple, dict)) or v is None


def constant_spec(r: float, d: int = 1, depth: int = 64) -> MoranSpec:
    """Schedule with every ratio equal to ``r``."""
    if not 0 < r <= 0.5:
        raise ValueError("ratio must lie in (0, 1/2]")
    return MoranSpec(d, np.full(depth, r), rule=lambda n: r, meta={"kind": "constant", "r": r})


def explicit_spec(ratios, d: int = 1) -> MoranSpec:
    return MoranSpec(d, ratios, meta={"kind": "explicit"})


# -- scale ladder queries ------------------------------------------------


def rho(spec: MoranSpec, n: int) -> float:
    """``log rho(n)``; ``rho(0) = 1``."""
    if n < 0:
        raise ValueError("level must be non-negative")
    spec.materialize(n)
    return -float(spec._s[n])


def _as_log(R=None, t=None) -> float:
    if (R is None) == (t is None):
        raise ValueError("give exactly one of R or t")
    if t is not None:
        return float(t)
    if not R > 0:
        raise ValueError(f"scale must be positive, got {R}")
    return -math.log(R)


def _level_at(spec: MoranSpec, t: float) -> int:
    """Largest ``n`` with ``s(n) <= t`` (up to relative slack)."""
    spec.materialize_log_depth(t)
    return int(np.searchsorted(spec._s, t * (1 + _REL) + 1e-300, side="right")) - 1


def level_of(spec: MoranSpec, R: float | None = None, *, t: float | None = None) -> int:
    """Level ``l`` with ``rho(l+1) < R <= rho(l)``; requires ``R <= rho(1)``."""
    t = _as_log(R, t)
    spec.materialize(1)
    if t < spec._s[1] * (1 - _REL):
        raise ValueError(f"scale above rho(1) = {math.exp(-spec._s[1])}")
    return _level_at(spec, t)


@dataclass(frozen=True)
class WindowLevels:
    """Level indices of the window ``[R**(1+phi(R)), R]``."""

    level: int
    offset: int
    degenerate: bool


def window_levels(spec: MoranSpec, phi: DimensionFunction, R: float | None = None, *,
                  t: float | None = None) -> WindowLevels:
    """``l(R)`` and the offset ``l_phi(R)`` locating ``R**(1+phi(R))``.

    The offset is never negative; ``degenerate`` flags an empty window
    (offset 0), where the quotient is undefined.
    """
    t = _as_log(R, t)
    lev = level_of(spec, t=t)
    target = t * (1.0 + float(phi.at_log(t)))
    off = _level_at(spec, target) - lev
    off = max(off, 0)
    return WindowLevels(lev, off, off == 0)


def l_of_R(spec: MoranSpec, R: float) -> int:
    return level_of(spec, R)


def l_phi_of_R(spec: MoranSpec, phi: DimensionFunction, R: float) -> int:
    return window_levels(spec, phi, R).offset


# -- level sets --------------------------------------------------------


@dataclass
class LevelApproximation:
    """Level-``n`` cylinders: boxes ``[lower, lower + side]`` per row."""

    level: int
    lower: np.ndarray
    side: float
    log_side: float

    @property
    def count(self) -> int:
        return self.lower.shape[0]

    def to_box_union(self):
        from .covering import BoxUnion
        return BoxUnion(self.lower, self.lower + self.side)

    def to_csv(self) -> str:
        d = self.lower.shape[1]
        head = ",".join([f"lo{j}" for j in range(d)] + [f"hi{j}" for j in range(d)])
        hi = self.lower + self.side
        rows = [",".join(repr(float(v)) for v in (*a, *b)) for a, b in zip(self.lower, hi)]
        return head + "\n" + "\n".join(rows) + "\n"


def cylinder_offsets(spec: MoranSpec, start: int, stop: int, budget: int = DEFAULT_BOX_BUDGET,
                     window: tuple[float, float] | None = None) -> np.ndarray:
    """1D left endpoints of level-``stop`` cylinders inside a level-``start`` one.

    Coordinates are normalized by ``rho(start)`` so the parent cylinder
    is ``[0, 1]``.  With ``window=(lo, hi)`` only descendants meeting
    ``[lo, hi]`` are generated (pruned level by level).
    """
    spec.materialize(stop)
    s = spec._s
    pos = np.zeros(1)
    for k in range(start + 1, stop + 1):
        side = math.exp(s[start] - s[k])
        shift = math.exp(s[start] - s[k - 1]) - side
        pos = np.concatenate([pos, pos + shift])
        if window is not None:
            lo, hi = window
            keep = (pos + side >= lo - 1e-15 * side) & (pos <= hi + 1e-15 * side)
            pos = pos[keep]
        if pos.size > budget:
            raise BudgetError(f"{pos.size} cylinders exceed budget {budget}")
    return np.sort(pos)


def level_set(spec: MoranSpec, n: int, budget: int = DEFAULT_BOX_BUDGET) -> LevelApproximation:
    """All ``2**(d n)`` level-``n`` cylinders of the unit cube."""
    if n < 0:
        raise ValueError("level must be non-negative")
    if 2.0 ** (spec.d * n) > budget:
        raise BudgetError(f"2^{spec.d * n} boxes exceed budget {budget}")
    x = cylinder_offsets(spec, 0, n, budget)
    if spec.d == 1:
        lower = x[:, None]
    else:
        xx, yy = np.meshgrid(x, x, indexing="ij")
        lower = np.column_stack([xx.ravel(), yy.ravel()])
    log_side = rho(spec, n)
    return LevelApproximation(n, lower, math.exp(log_side), log_side)


# -- the dimension formula ---------------------------------------------


def formula_dimension(spec: MoranSpec, phi: DimensionFunction, n_max: int | None = None,
                      start_level: int = 1) -> EstimateReport:
    """Cylinder-count quotient ``l_phi log 2 / log(rho(n)/rho(n+l_phi))`` at ``R = rho(n)``.

    The trace covers levels ``1..n_max`` (default: every level whose
    window lies in the materialized prefix).  Quotient bounds come from
    shifting the window offset by one level either way.  Levels with an
    empty window give NaN and are skipped by the running minimum, as are
    levels below ``start_level``.
    """
    if spec.d != 1:
        raise ValueError("the cylinder-count formula is stated for d = 1")
    if spec.depth < 2:
        spec.materialize(2)
    s = spec._s
    if n_max is None:
        ts = s[1:]
        target = ts * (1.0 + np.asarray(phi.at_log(ts)))
        fits = np.flatnonzero(target < s[-1] * (1 - _REL))
        if not fits.size:
            raise BudgetError("materialized prefix too short for any window")
        n_max = int(fits[-1]) + 1
    if not spec.r_star > 0:
        raise ValueError("schedule ratios must stay bounded away from 0")
    levels = np.arange(1, n_max + 1)
    ts = None
    # make sure every window end is materialized
    while True:
        s = spec._s
        ts = s[levels]
        target = ts * (1.0 + np.asarray(phi.at_log(ts)))
        if target.max() < s[-1] * (1 - _REL):
            break
        spec.materialize(min(2 * spec.depth + 2, spec.level_budget))
    if spec.r_star <= 0:
        raise ValueError("schedule ratios must stay bounded away from 0")
    m = np.searchsorted(s, target * (1 + _REL), side="right") - 1
    off = np.maximum(m - levels, 0)
    records = []
    top = s.size - 1
    for n, k, tR, tr in zip(levels, off, ts, target):
        n, k = int(n), int(k)
        if k == 0:
            q = lo = hi = math.nan
        else:
            q = k * LOG2 / (s[n + k] - s[n])
            cands = [q]
            if k - 1 >= 1:
                cands.append((k - 1) * LOG2 / (s[n + k - 1] - s[n]))
            else:
                cands.append(0.0)
            if n + k + 1 <= top:
                cands.append((k + 1) * LOG2 / (s[n + k + 1] - s[n]))
            lo, hi = min(cands), max(cands)
        records.append(ScaleRecord(float(tR), float(tr), 1 << k, 1 << k, lo, q, hi,
                                   {"level": n, "offset": k}))
    prov = {"set": spec.meta.get("kind", "explicit"), "phi": phi.name, "method": "formula"}
    return EstimateReport(records, dim=1, start=max(0, start_level - 1), provenance=prov)


# -- example schedules --------------------------------------------------


@dataclass
class _Builder:
    """Append-only ratio schedule tracked in log-depth."""

    alpha: float
    level_budget: int
    neg_log: list = field(default_factory=list)
    s: list = field(default_factory=lambda: [0.0])

    @property
    def a(self) -> float:
        return self.alpha * LOG2

    def push(self, nl: float) -> None:
        if len(self.neg_log) >= self.level_budget:
            raise BudgetError(f"schedule exceeds level budget {self.level_budget}")
        self.neg_log.append(nl)
        self.s.append(self.s[-1] + nl)

    def fill(self, nl: float, target: float) -> None:
        """Append ratio ``exp(-nl)`` while the next level stays at or above ``exp(-target)``."""
        lim = target * (1 + _REL)
        while self.s[-1] + nl <= lim:
            self.push(nl)

    def pass_beyond(self, target: float) -> None:
        """Append halves until the current level is strictly below ``exp(-target)``."""
        while self.s[-1] <= target * (1 + _REL):
            self.push(LOG2)


def _next_checkpoint_bound(t: float, psi_t: float, n: int) -> float:
    """Log of ``1 / (min{R^(1+psi)/16, R^(2n)} / 2)``."""
    return max(t * (1.0 + psi_t) + 4 * LOG2, 2 * n * t) + LOG2


def _example1_misfit(b: _Builder, phi: DimensionFunction, t: float) -> int:
    """Half-ratio levels left in the ``phi``-window at ``t`` after the fast block.

    Uses the same slack as the level search so that block lengths and
    window offsets agree.
    """
    room = t * float(phi.at_log(t)) + t * (1 + float(phi.at_log(t))) * _REL
    full = math.floor(room / b.a)
    return math.floor((room - full * b.a) / LOG2)


def example1_spec(alpha: float, phi: DimensionFunction, psi: DimensionFunction,
                  n_checkpoints: int = 6, R1: float = 0.5, eps: float = 0.01,
                  align: int = 8, close: float = 10.0,
                  level_budget: int = DEFAULT_LEVEL_BUDGET) -> MoranSpec:
    """Schedule separating the ``phi`` and ``psi`` lower dimensions.

    Starting from the checkpoint ``R_1``, each checkpoint ``R_n = rho(l)``
    opens a block of ratios ``2**-alpha`` filling the ``phi``-window
    ``[R_n**(1+phi), R_n]``, followed by ratios ``1/2`` down to the next
    checkpoint, chosen greedily below ``min{R_n**(1+psi)/16, R_n**(2n)}/2``.
    Checkpoints are then advanced by up to ``align`` levels so that the
    ``phi``-window is filled exactly by the fast block, which pins the
    checkpoint quotient at ``1/alpha``.

    After the last checkpoint, halves continue down to
    ``R**(1 + close*phi)`` so that rate windows ``phi/alpha`` with
    ``alpha >= 1/close`` stay computable there.

    Raises :class:`ScheduleError` if ``phi/psi >= 1 - eps`` at a checkpoint.
    """
    if not alpha > 1:
        raise ValueError("alpha must exceed 1")
    if not 0 < R1 <= 0.5:
        raise ValueError("R1 must lie in (0, 1/2]")
    b = _Builder(alpha, level_budget)
    b.push(-math.log(R1))
    cps = [b.s[-1]]
    cp_levels = [1]
    for n in range(1, n_checkpoints):
        t = cps[-1]
        ph, ps = float(phi.at_log(t)), float(psi.at_log(t))
        if not ph / ps < 1 - eps:
            raise ScheduleError(f"phi/psi = {ph / ps:.4f} not below 1 - eps at checkpoint {n}")
        b.fill(b.a, t * (1 + ph))
        b.pass_beyond(_next_checkpoint_bound(t, ps, n))
        for _ in range(align):
            if _example1_misfit(b, phi, b.s[-1]) == 0:
                break
            b.push(LOG2)
        cps.append(b.s[-1])
        cp_levels.append(len(b.neg_log))
    # close the last window so its quotients are computable
    t = cps[-1]
    b.fill(b.a, t * (1 + float(phi.at_log(t))))
    b.pass_beyond(max(t * (1 + float(psi.at_log(t))) + 4 * LOG2,
                      t * (1 + close * float(phi.at_log(t)))))
    ratios = np.exp(-np.asarray(b.neg_log))
    meta = {"kind": "example1", "alpha": alpha, "R1": R1, "eps": eps,
            "phi": phi.name, "psi": psi.name, "checkpoints_t": cps,
            "checkpoint_levels": cp_levels}
    return MoranSpec(1, ratios, meta=meta, level_budget=level_budget)


def example2_spec(alpha: float, phi: DimensionFunction, n_checkpoints: int = 6,
                  R1: float = 0.5, close: float = 10.0,
                  level_budget: int = DEFAULT_LEVEL_BUDGET) -> MoranSpec:
    """Four-block schedule separating the ``phi`` and ``3 phi / 2`` values.

    From each checkpoint ``R_n`` the ratios are ``2**-alpha`` down to
    ``R_n**(1+phi/2)``, ``1/2`` down to ``R_n**(1+phi)``, ``2**-alpha``
    down to ``R_n**(1+3phi/2)`` and ``1/2`` down to the next checkpoint.
    The comparison function ``psi = rate_window(phi, 2/3)`` is stored in
    ``meta["psi_function"]``.  The tail is closed as in
    :func:`example1_spec`.
    """
    from .dimfunc import rate_window
    if not alpha > 1:
        raise ValueError("alpha must exceed 1")
    psi = rate_window(phi, 2.0 / 3.0)
    b = _Builder(alpha, level_budget)
    b.push(-math.log(R1))
    cps = [b.s[-1]]
    cp_levels = [1]

    def blocks(t):
        ph = float(phi.at_log(t))
        b.fill(b.a, t * (1 + ph / 2))
        b.fill(LOG2, t * (1 + ph))
        b.fill(b.a, t * (1 + 1.5 * ph))

    for n in range(1, n_checkpoints):
        t = cps[-1]
        blocks(t)
        b.pass_beyond(_next_checkpoint_bound(t, float(psi.at_log(t)), n))
        cps.append(b.s[-1])
        cp_levels.append(len(b.neg_log))
    t = cps[-1]
    blocks(t)
    b.pass_beyond(max(t * (1 + float(psi.at_log(t))) + 4 * LOG2,
                      t * (1 + close * float(phi.at_log(t)))))
    ratios = np.exp(-np.asarray(b.neg_log))
    meta = {"kind": "example2", "alpha": alpha, "R1": R1, "phi": phi.name,
            "checkpoints_t": cps, "checkpoint_levels": cp_levels}
    spec = MoranSpec(1, ratios, meta=meta, level_budget=level_budget)
    spec.meta["psi_function"] = psi
    return spec


def checkpoint_log_scales(spec: MoranSpec) -> np.ndarray:
    return np.asarray(spec.meta.get("checkpoints_t", []), dtype=float)


# -- covering numbers of ball intersections -------------------------------


_FRESH = None
_MAX_LOG_RANGE = 700.0


class BallCounter:
    """Exact covering numbers of ``B(x, R) ∩ M`` without enumerating cylinders.

    All level-``j`` subtrees of a homogeneous Moran set are translates of
    each other, so the greedy left-to-right sweep (optimal in 1D) can be
    memoized on ``(level, covered prefix length)``.  Coordinates are
    normalized by ``rho(l)`` for the cylinder level ``l`` of the ball.

    Parameters
    ----------
    spec : MoranSpec
        One-dimensional schedule; it is materialized as deep as needed.
    tiny : float
        Subtrees shorter than ``tiny * 2r`` are treated as single points.
    """

    def __init__(self, spec: MoranSpec, tiny: float = 1e-13):
        if spec.d != 1:
            raise ValueError("ball counting is implemented for d = 1")
        self.spec = spec
        self.tiny = tiny

    # sizes normalized by rho(l): size(j) = exp(s(l) - s(j))
    def _setup(self, level: int, t_r: float):
        spec = self.spec
        if spec.rule is not None:
            spec.materialize_log_depth(t_r + 40.0)
        s = spec._s
        if s[-1] <= t_r:
            raise BudgetError("schedule not materialized below the small scale")
        stop = min(int(np.searchsorted(s, t_r + 40.0, side="right")), spec.depth)
        with np.errstate(under="ignore"):
            self._size = np.exp(s[level] - s[level: stop + 1])
        self._lev = level
        self._D = 2.0 * math.exp(s[level] - t_r)
        self._tol = 1e-9 * self._D
        self._memo = {}
        # solid[k]: the subtree at level+k is a whole interval (halving ratios all the way down)
        sz = self._size
        touch = np.append(sz[:-1] - 2.0 * sz[1:] <= 1e-12 * sz[:-1], True)
        small = sz <= self.tiny * self._D
        ok = touch | small
        bad = np.flatnonzero(~ok)
        self._solid_from = int(bad[-1]) + 1 if bad.size else 0

    def _sz(self, j: int) -> float:
        k = j - self._lev
        return float(self._size[k]) if k < self._size.size else 0.0

    def _first_point(self, j: int, x0: float, after: float, strict: bool) -> float | None:
        """Smallest point of the level-``j`` subtree at ``x0`` beyond ``after``."""
        tol = self._tol
        while True:
            size = self._sz(j)
            end = x0 + size
            if (end < after - tol) or (strict and end <= after + tol):
                return None
            if x0 > after + tol or (not strict and x0 >= after - tol):
                return x0
            if size <= self.tiny * self._D:
                return end
            child = self._sz(j + 1)
            left_end = x0 + child
            if (left_end > after + tol) or (not strict and left_end >= after - tol):
                j += 1
                continue
            x0 = end - child
            j += 1

    def _full(self, j: int, e):
        """Greedy over a whole level-``j`` subtree with covered prefix ``e``.

        Returns ``(count, overhang)`` where the overhang is the covered
        length beyond the subtree's right end.
        """
        size = self._sz(j)
        tol = self._tol
        if e is not _FRESH and e >= size - tol:
            return 0, e - size
        key = (j, e)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        D = self._D
        if j - self._lev >= self._solid_from:
            rest = size if e is _FRESH else size - e
            n = max(1, math.ceil(rest / D - 1e-9))
            out = (n, n * D - rest)
        elif size <= D + tol:
            if e is _FRESH:
                out = (1, D - size)
            else:
                p = self._first_point(j, 0.0, e, True)
                out = (0, e - size) if p is None else (1, p + D - size)
        else:
            child = self._sz(j + 1)
            gap = size - 2.0 * child
            c0, o0 = self._full(j + 1, e)
            e1 = o0 - gap
            c1, o1 = self._full(j + 1, e1 if e1 >= -tol else _FRESH)
            out = (c0 + c1, o1)
        self._memo[key] = out
        return out

    def _sweep(self, j: int, x0: float, E, lo: float, hi: float):
        """Greedy over the subtree at ``x0`` clipped to ``[lo, hi]``.

        ``E`` is the absolute end of coverage so far (``None`` if nothing
        is covered yet).  Returns ``(count, E)``.
        """
        size = self._sz(j)
        tol = self._tol
        end = x0 + size
        if end < lo - tol or x0 > hi + tol:
            return 0, E
        if x0 >= lo - tol and end <= hi + tol:
            e = _FRESH if E is None or E - x0 < -tol else E - x0
            c, o = self._full(j, e)
            return c, end + o
        D = self._D
        if size <= D + tol or size <= self.tiny * D:
            start = lo if E is None or E < lo else E
            p = self._first_point(j, x0, start, E is not None and E >= lo)
            if p is None or p > hi + tol:
                return 0, E
            return 1, p + D
        child = self._sz(j + 1)
        c0, E = self._sweep(j + 1, x0, E, lo, hi)
        c1, E = self._sweep(j + 1, end - child, E, lo, hi)
        return c0 + c1, E

    def center_classes(self, level: int, R_rel: float) -> list:
        """Distinct left-neighbour gaps (normalized) seen by ball centers.

        A center is the left end of a level-``level`` cylinder; only the
        gap to the neighbouring cylinder on the left matters for the ball
        of relative radius ``R_rel <= 1``.  ``None`` stands for the
        leftmost cylinder, which has no neighbour within reach.
        """
        s = self.spec._s
        j = np.arange(1, level + 1)
        with np.errstate(over="ignore", under="ignore", invalid="ignore"):
            g = np.exp(s[level] - s[j - 1]) - 2.0 * np.exp(s[level] - s[j])
        g = g[np.isfinite(g) & (g <= R_rel * (1 + 1e-12))]
        g = np.maximum(g, 0.0)
        out: list = [None]
        for v in np.unique(np.round(g, 12)):
            out.append(float(v))
        return out

    def count(self, t_R: float, t_r: float, gap=None) -> int:
        """``N_r(B(x, R) ∩ M)`` for a center with left-neighbour gap ``gap``."""
        if not t_r > t_R:
            raise ValueError("need r < R")
        level = level_of(self.spec, t=t_R)
        if t_r - self.spec._s[level] > _MAX_LOG_RANGE:
            raise BudgetError("R/r exceeds the floating-point range of normalized sizes")
        self._setup(level, t_r)
        R_rel = math.exp(self.spec._s[level] - t_R)
        c = 0
        E = None
        if gap is not None and gap <= R_rel * (1 + 1e-12):
            c, E = self._sweep(level, -1.0 - gap, None, -R_rel, R_rel)
        c2, _ = self._sweep(level, 0.0, E, -R_rel, R_rel)
        return c + c2

    def min_count(self, t_R: float, t_r: float) -> tuple[int, object]:
        """Smallest count over all center classes, with the minimizing gap."""
        level = level_of(self.spec, t=t_R)
        R_rel = math.exp(self.spec._s[level] - t_R)
        best = None
        for g in self.center_classes(level, R_rel):
            n = self.count(t_R, t_r, g)
            if best is None or n < best[0]:
                best = (n, g)
        return best
