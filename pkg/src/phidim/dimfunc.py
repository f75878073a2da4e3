"""Dimension functions built from constant and log-reciprocal pieces.

A dimension function maps a scale ``R`` in ``(0, R_max]`` to a positive
exponent ``phi(R)``; the associated small scale is ``R**(1 + phi(R))``.
Every function here is assembled from two exactly evaluable shapes:

* ``const``:  ``phi(R) = theta``
* ``logrec``: ``phi(R) = c / log(1/R)``

Breakpoints are stored in log-scale ``t = log(1/R)`` so that scales far
below the double-precision underflow threshold (``R = exp(-5000)``) are
represented without loss.  Public evaluation accepts plain scales through
``__call__`` and log-scales through :meth:`DimensionFunction.at_log`.
"""

from __future__ import annotations

import bisect
import math
import threading
from dataclasses import dataclass
from decimal import Decimal, localcontext
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

CONST = "const"
LOGREC = "logrec"
_KINDS = (CONST, LOGREC)

# Relative tolerance for grid axiom checks and checkpoint hits.
AXIOM_RTOL = 1e-12


class DomainError(ValueError):
    """A scale outside the represented domain of a dimension function."""


class CheckpointError(ValueError):
    """Checkpoint data violating monotonicity or growth requirements."""


@dataclass(frozen=True)
class Piece:
    """One piece on the log-scale interval ``[t_lo, t_hi)``.

    In scale terms the piece covers ``(exp(-t_hi), exp(-t_lo)]``.
    ``t_hi`` may be ``inf`` for a terminal constant piece.
    """

    t_lo: float
    t_hi: float
    kind: str
    value: float

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown piece kind {self.kind!r}")
        if not (self.value > 0 and math.isfinite(self.value)):
            raise ValueError(f"piece value must be positive and finite, got {self.value}")
        if not (self.t_lo < self.t_hi):
            raise ValueError(f"empty piece [{self.t_lo}, {self.t_hi})")
        if self.kind == LOGREC and self.t_lo <= 0:
            raise ValueError("logrec piece needs R < 1 on its whole interval")

    def at_log(self, t: float) -> float:
        return self.value if self.kind == CONST else self.value / t

    def scaled(self, factor: float) -> "Piece":
        return Piece(self.t_lo, self.t_hi, self.kind, self.value * factor)

    @property
    def top_value(self) -> float:
        """Value at the largest scale of the piece (its maximum)."""
        return self.value if self.kind == CONST else self.value / self.t_lo


def _same_shape(a: Piece, b: Piece) -> bool:
    return a.kind == b.kind and math.isclose(a.value, b.value, rel_tol=1e-15, abs_tol=0.0)


def _normalize(pieces: Iterable[Piece]) -> list[Piece]:
    """Merge adjacent pieces of identical shape; pieces must be contiguous."""
    out: list[Piece] = []
    for p in pieces:
        if out:
            prev = out[-1]
            if not math.isclose(prev.t_hi, p.t_lo, rel_tol=1e-14, abs_tol=1e-300):
                raise ValueError(f"pieces not contiguous at t={prev.t_hi} vs {p.t_lo}")
            if _same_shape(prev, p):
                out[-1] = Piece(prev.t_lo, p.t_hi, prev.kind, prev.value)
                continue
            p = Piece(prev.t_hi, p.t_hi, p.kind, p.value)
        out.append(p)
    return out


class DimensionFunction:
    """Piecewise dimension function on ``(0, R_max]``.

    Parameters
    ----------
    pieces : sequence of Piece
        Contiguous pieces ordered by increasing ``t``; the first starts at
        ``t_min = log(1/R_max)``.
    tail : float, optional
        Constant value used beyond the last piece.  Required unless a
        ``source`` generator is supplied.
    source : iterator of Piece, optional
        Lazily extends the piece sequence on demand (infinite schedules).
        Once exhausted, ``tail`` applies.
    sup_bound : float, optional
        Upper bound ``M`` on the function.  Defaults to the largest piece
        value at its right endpoint.
    name : str, optional
        Label recorded in reports.
    """

    def __init__(self, pieces: Sequence[Piece], tail: float | None = None, *,
                 source: Iterator[Piece] | None = None, sup_bound: float | None = None,
                 t_min: float | None = None, name: str | None = None):
        pieces = _normalize(pieces)
        if not pieces and t_min is None:
            raise ValueError("need at least one piece or an explicit t_min")
        if tail is None and source is None:
            raise ValueError("a finite dimension function needs a constant tail")
        if tail is not None and not (tail > 0 and math.isfinite(tail)):
            raise ValueError(f"tail must be positive, got {tail}")
        self._pieces: list[Piece] = pieces
        self._starts: list[float] = [p.t_lo for p in pieces]
        self._t_min = pieces[0].t_lo if pieces else float(t_min)
        self._tail = tail
        self._source = source
        self._lock = threading.Lock()
        self.name = name
        if sup_bound is None:
            tops = [p.top_value for p in pieces]
            if tail is not None:
                tops.append(tail)
            sup_bound = max(tops)
        if not sup_bound > 0:
            raise ValueError("sup_bound must be positive")
        self.sup_bound = float(sup_bound)

    # -- structure -----------------------------------------------------

    @property
    def t_min(self) -> float:
        return self._t_min

    @property
    def r_max(self) -> float:
        return math.exp(-self._t_min)

    @property
    def tail(self) -> float | None:
        return self._tail

    @property
    def is_lazy(self) -> bool:
        return self._source is not None

    @property
    def frontier(self) -> float:
        """Log-scale up to which pieces are materialized."""
        return self._pieces[-1].t_hi if self._pieces else self._t_min

    def pieces(self, until_t: float | None = None) -> list[Piece]:
        if until_t is not None:
            self._ensure(until_t)
        return list(self._pieces)

    def _ensure(self, t: float) -> None:
        if self._source is None or t < self.frontier:
            return
        with self._lock:
            while self._source is not None and t >= self.frontier:
                try:
                    nxt = next(self._source)
                except StopIteration:
                    self._source = None
                    if self._tail is None:
                        raise DomainError("lazy dimension function exhausted without a tail")
                    break
                if self._pieces:
                    last = self._pieces[-1]
                    if _same_shape(last, nxt):
                        self._pieces[-1] = Piece(last.t_lo, nxt.t_hi, last.kind, last.value)
                        continue
                    nxt = Piece(last.t_hi, nxt.t_hi, nxt.kind, nxt.value)
                self._pieces.append(nxt)
                self._starts.append(nxt.t_lo)

    # -- evaluation ----------------------------------------------------

    def at_log(self, t):
        """Evaluate at log-scale ``t = log(1/R)`` (scalar or array)."""
        arr = np.asarray(t, dtype=float)
        if arr.size == 0:
            return arr.copy()
        lo = float(arr.min())
        if not np.all(np.isfinite(arr)) or lo < self._t_min * (1 - 1e-15) - 1e-300:
            raise DomainError(f"scale outside domain (0, {self.r_max!r}]")
        self._ensure(float(arr.max()))
        if arr.ndim == 0:
            return self._eval_scalar(float(arr))
        out = np.empty(arr.shape, dtype=float)
        flat = arr.ravel()
        res = out.ravel()
        idx = np.searchsorted(np.asarray(self._starts), flat, side="right") - 1
        idx = np.maximum(idx, 0)
        ends = np.array([p.t_hi for p in self._pieces]) if self._pieces else np.zeros(0)
        for k in np.unique(idx):
            sel = idx == k
            if self._pieces and flat[sel].min() < ends[k]:
                inside = sel & (flat < ends[k])
                p = self._pieces[k]
                res[inside] = p.value if p.kind == CONST else p.value / flat[inside]
                sel = sel & ~inside
            if sel.any():
                res[sel] = self._tail
        return out

    def _eval_scalar(self, t: float) -> float:
        if t < self._t_min:
            t = self._t_min
        k = bisect.bisect_right(self._starts, t) - 1
        if k >= 0 and t < self._pieces[k].t_hi:
            return float(self._pieces[k].at_log(t))
        if k < 0 and not self._pieces:
            return float(self._tail)
        if self._tail is None:
            raise DomainError("scale beyond the materialized range")
        return float(self._tail)

    def __call__(self, R):
        """Evaluate at scale ``R`` in ``(0, R_max]`` (scalar or array)."""
        R_arr = np.asarray(R, dtype=float)
        if np.any(R_arr <= 0) or np.any(R_arr > self.r_max * (1 + 1e-15)):
            raise DomainError(f"scale outside domain (0, {self.r_max!r}]")
        t = -np.log(R_arr)
        return self.at_log(t if t.ndim else float(t))

    def __repr__(self):
        label = f" {self.name!r}" if self.name else ""
        return (f"<DimensionFunction{label}: {len(self._pieces)} pieces, tail={self._tail}, "
                f"sup_bound={self.sup_bound:g}{', lazy' if self.is_lazy else ''}>")

    # -- transforms ----------------------------------------------------

    def scaled(self, factor: float, name: str | None = None) -> "DimensionFunction":
        """Return ``R -> factor * phi(R)``."""
        if not factor > 0:
            raise ValueError("scale factor must be positive")
        src = None
        if self._source is not None:
            parent = self

            def gen(start=len(self._pieces)):
                k = start
                while True:
                    parent._ensure(parent.frontier)
                    if k < len(parent._pieces):
                        yield parent._pieces[k].scaled(factor)
                        k += 1
                    elif parent._source is None:
                        return
            src = gen()
        tail = None if self._tail is None else self._tail * factor
        return DimensionFunction([p.scaled(factor) for p in self._pieces], tail, source=src,
                                 sup_bound=self.sup_bound * factor, t_min=self._t_min, name=name)

    def materialized(self, until_t: float) -> "DimensionFunction":
        """Finite copy valid up to log-scale ``until_t``.

        For lazy functions the copy uses the value at ``until_t`` as a
        constant tail, so it is only faithful on ``t <= until_t``.
        """
        self._ensure(until_t)
        if not self.is_lazy:
            return DimensionFunction(self._pieces, self._tail, sup_bound=self.sup_bound,
                                     t_min=self._t_min, name=self.name)
        keep = [p for p in self._pieces if p.t_lo <= until_t]
        last = keep[-1]
        if last.t_hi > until_t > last.t_lo:
            keep[-1] = Piece(last.t_lo, until_t, last.kind, last.value)
        tail = float(last.at_log(min(until_t, last.t_hi)))
        if keep[-1].t_hi == math.inf:
            keep.pop()
        if not keep:
            return DimensionFunction([], tail, t_min=self._t_min, name=self.name)
        return DimensionFunction(keep, tail, sup_bound=self.sup_bound, name=self.name)

    # -- serialization -------------------------------------------------

    def to_dict(self) -> dict:
        if self.is_lazy:
            raise ValueError("lazy dimension function: serialize materialized(t) instead")
        return {
            "pieces": [
                {"r_lo": _scale_str(p.t_hi), "r_hi": _scale_str(p.t_lo), "kind": p.kind,
                 "value": repr(p.value)}
                for p in self._pieces
            ],
            "tail": {"kind": CONST, "value": repr(self._tail)},
            "sup_bound": repr(self.sup_bound),
            "r_max": _scale_str(self._t_min),
        }

    @classmethod
    def from_dict(cls, doc: dict, name: str | None = None) -> "DimensionFunction":
        try:
            tail_doc = doc["tail"]
            if tail_doc.get("kind", CONST) != CONST:
                raise ValueError("only constant tails can be serialized")
            tail = float(tail_doc["value"])
            pieces = []
            for p in doc.get("pieces", []):
                t_hi = _log_of_scale_str(p["r_lo"])
                pieces.append(Piece(_log_of_scale_str(p["r_hi"]), t_hi, p["kind"],
                                    float(p["value"])))
            t_min = _log_of_scale_str(doc["r_max"]) if "r_max" in doc else None
            sup = float(doc["sup_bound"]) if "sup_bound" in doc else None
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed dimension function document: {exc}") from exc
        return cls(pieces, tail, sup_bound=sup, t_min=t_min if not pieces else None, name=name)


def _scale_str(t: float) -> str:
    """Decimal string for the scale ``exp(-t)``."""
    if t == math.inf:
        return "0"
    with localcontext() as ctx:
        ctx.prec = 40
        val = (-Decimal(t)).exp()
    return f"{val:.20E}"


def _log_of_scale_str(s: str) -> float:
    with localcontext() as ctx:
        ctx.prec = 40
        val = Decimal(s)
        if val == 0:
            return math.inf
        if val <= 0:
            raise ValueError(f"scale must be positive, got {s}")
        return float(-val.ln())


# -- constructors -------------------------------------------------------


def constant_df(theta: float, r_max: float = 1.0, name: str | None = None) -> DimensionFunction:
    """Constant dimension function ``phi = theta`` on ``(0, r_max]``."""
    if not (theta > 0 and math.isfinite(theta)):
        raise ValueError(f"theta must be positive, got {theta}")
    if not 0 < r_max <= 1:
        raise ValueError("r_max must lie in (0, 1]")
    return DimensionFunction([], float(theta), t_min=-math.log(r_max),
                             name=name or f"const({theta:g})")


def from_spectrum_theta(theta_prime: float) -> DimensionFunction:
    """Constant function realizing the lower spectrum at ``theta'``.

    The spectrum parameter ``theta'`` and the constant ``theta`` are
    related by ``theta' = 1 / (1 + theta)``.
    """
    if not 0 < theta_prime < 1:
        raise ValueError("spectrum parameter must lie in (0, 1)")
    return constant_df(1.0 / theta_prime - 1.0)


def log_reciprocal_df(c: float, r_max: float, tail: float) -> DimensionFunction:
    """``c / log(1/R)`` on ``[exp(-c/tail), r_max]`` followed by ``tail``."""
    t0 = -math.log(r_max)
    t1 = c / tail
    if not t1 > t0:
        raise ValueError("tail value must be below c / log(1/r_max)")
    return DimensionFunction([Piece(t0, t1, LOGREC, c)], tail)


def rate_window(phi: DimensionFunction, alpha: float) -> DimensionFunction:
    """Rate window ``R -> phi(R) / alpha``."""
    if not (alpha > 0 and math.isfinite(alpha)):
        raise ValueError(f"alpha must be positive, got {alpha}")
    base = phi.name or "phi"
    return phi.scaled(1.0 / alpha, name=f"{base}/{alpha:g}")


# -- checkpoints and interpolants ----------------------------------------


@dataclass(frozen=True)
class CheckpointSequence:
    """Checkpoints ``(R_n, theta_n)`` stored by log-scale ``t_n = log(1/R_n)``.

    Requires ``t_n`` strictly increasing, ``theta_n`` non-increasing and
    ``theta_n * t_n`` strictly increasing.
    """

    t: tuple
    theta: tuple

    def __post_init__(self):
        if len(self.t) != len(self.theta) or len(self.t) == 0:
            raise CheckpointError("need a non-empty list of (scale, theta) pairs")
        bad = self.violations()
        if bad:
            raise CheckpointError("checkpoint invariants violated: " + "; ".join(bad))

    @classmethod
    def from_scales(cls, pairs: Iterable[tuple[float, float]]) -> "CheckpointSequence":
        pairs = list(pairs)
        for R, _ in pairs:
            if not 0 < R < 1:
                raise CheckpointError(f"checkpoint scale {R} outside (0, 1)")
        return cls(tuple(-math.log(R) for R, _ in pairs), tuple(float(th) for _, th in pairs))

    @classmethod
    def from_logs(cls, t: Iterable[float], theta: Iterable[float]) -> "CheckpointSequence":
        return cls(tuple(float(x) for x in t), tuple(float(x) for x in theta))

    def violations(self) -> list[str]:
        out = []
        for i, (t, th) in enumerate(zip(self.t, self.theta)):
            if not (t > 0 and math.isfinite(t)):
                out.append(f"entry {i}: scale outside (0, 1)")
            if not (th > 0 and math.isfinite(th)):
                out.append(f"entry {i}: theta must be positive")
        for i in range(len(self.t) - 1):
            t0, t1 = self.t[i], self.t[i + 1]
            a, b = self.theta[i], self.theta[i + 1]
            if not t1 > t0:
                out.append(f"pair ({i},{i + 1}): scales not strictly decreasing")
            if b > a:
                out.append(f"pair ({i},{i + 1}): theta increases")
            if not b * t1 > a * t0:
                out.append(f"pair ({i},{i + 1}): theta*log(1/R) not strictly increasing")
        return out

    @property
    def scales(self) -> np.ndarray:
        return np.exp(-np.asarray(self.t))

    def __len__(self):
        return len(self.t)


def _gap_pieces(t0, th0, t1, th1, mode: str) -> list[Piece]:
    """Pieces joining checkpoint ``(t0, th0)`` to ``(t1, th1)``."""
    if th1 == th0:
        return [Piece(t0, t1, CONST, th0)]
    if mode == "max":
        # hold theta_n until theta_n * t reaches theta_{n+1} * t_{n+1}
        c = th1 * t1
        t_mid = c / th0
        if t_mid >= t1:  # thetas equal up to rounding
            return [Piece(t0, t1, CONST, th0)]
        out = [Piece(t0, t_mid, CONST, th0)] if t_mid > t0 else []
        return out + [Piece(max(t_mid, t0), t1, LOGREC, c)]
    if mode == "min":
        # keep theta_n * t fixed until the value drops to theta_{n+1}
        c = th0 * t0
        t_mid = c / th1
        if t_mid >= t1:
            return [Piece(t0, t1, LOGREC, c)]
        out = [Piece(t0, t_mid, LOGREC, c)] if t_mid > t0 else []
        return out + [Piece(max(t_mid, t0), t1, CONST, th1)]
    raise ValueError(f"mode must be 'max' or 'min', got {mode!r}")


def checkpoint_interpolant(pts: CheckpointSequence, modes: str | Sequence[str] = "max",
                           name: str | None = None) -> DimensionFunction:
    """Interpolant through checkpoints choosing the max or min join per gap.

    The function is defined on ``(0, R_1]`` with constant tail ``theta_N``.
    """
    n = len(pts)
    if isinstance(modes, str):
        modes = [modes] * (n - 1)
    if len(modes) != n - 1:
        raise ValueError("need one mode per gap")
    pieces: list[Piece] = []
    for i in range(n - 1):
        pieces.extend(_gap_pieces(pts.t[i], pts.theta[i], pts.t[i + 1], pts.theta[i + 1],
                                  modes[i]))
    if not pieces:
        return DimensionFunction([], pts.theta[-1], t_min=pts.t[0], name=name)
    return DimensionFunction(pieces, pts.theta[-1], name=name)


def max_interpolant(pts: CheckpointSequence) -> DimensionFunction:
    """Largest dimension function with ``phi(R_n) = theta_n``."""
    return checkpoint_interpolant(pts, "max", name="max-interpolant")


def min_interpolant(pts: CheckpointSequence) -> DimensionFunction:
    """Smallest dimension function with ``phi(R_n) = theta_n``."""
    return checkpoint_interpolant(pts, "min", name="min-interpolant")


def lazy_interpolant(checkpoints: Iterator[tuple[float, float]], mode: str = "max",
                     name: str | None = None) -> DimensionFunction:
    """Interpolant through an unbounded stream of ``(t_n, theta_n)`` checkpoints.

    Pieces are generated on demand; the stream must satisfy the checkpoint
    invariants, which are checked as pieces are produced.
    """
    it = iter(checkpoints)
    t0, th0 = next(it)
    first = next(it, None)
    if first is None:
        return DimensionFunction([], th0, t_min=t0, name=name)

    def gen(prev=(t0, th0), nxt=first):
        while nxt is not None:
            CheckpointSequence.from_logs([prev[0], nxt[0]], [prev[1], nxt[1]])
            yield from _gap_pieces(prev[0], prev[1], nxt[0], nxt[1], mode)
            prev, nxt = nxt, next(it, None)
        # finite stream: hold the last value forever
        yield Piece(prev[0], math.inf, CONST, prev[1])

    source = gen()
    head = next(source)
    return DimensionFunction([head], None, source=source, sup_bound=th0, name=name)


def inverse_sqrt_log_df(n_max: int = 200) -> DimensionFunction:
    """Maximal interpolant through ``(t, theta) = (4**m, 2**-m)``.

    Tracks ``phi(R) = 1/sqrt(log(1/R))`` within a factor 2: ``phi`` decays
    while ``phi(R) log(1/R)`` still grows.  Used as the default for the
    example schedules, where a decaying ``phi`` keeps the level windows of
    consecutive checkpoints from overlapping.
    """
    return lazy_interpolant(((4.0 ** m, 2.0 ** -m) for m in range(-3, n_max)), "max",
                            name="inv-sqrt-log")


# -- validation ---------------------------------------------------------


@dataclass(frozen=True)
class AxiomReport:
    scales: np.ndarray
    values: np.ndarray
    monotone: np.ndarray
    growth: np.ndarray

    @property
    def passed(self) -> bool:
        return bool(self.monotone.all() and self.growth.all())

    def failures(self) -> list[str]:
        out = []
        if not self.monotone.all():
            out.append(f"monotone axiom fails at pairs {np.flatnonzero(~self.monotone).tolist()}")
        if not self.growth.all():
            out.append(f"growth axiom fails at pairs {np.flatnonzero(~self.growth).tolist()}")
        return out


def _log_grid(grid, t) -> np.ndarray:
    if (grid is None) == (t is None):
        raise ValueError("give exactly one of grid (scales) or t (log-scales)")
    if t is None:
        g = np.asarray(grid, dtype=float)
        if g.ndim != 1 or g.size == 0:
            raise ValueError("grid must be a non-empty list of scales")
        if np.any(g <= 0) or np.any(g >= 1):
            raise ValueError("grid scales must lie in (0, 1)")
        if np.any(np.diff(g) >= 0):
            raise ValueError("grid must be strictly decreasing")
        return -np.log(g)
    ts = np.asarray(t, dtype=float)
    if ts.ndim != 1 or ts.size == 0 or np.any(np.diff(ts) <= 0) or np.any(ts <= 0):
        raise ValueError("log grid must be positive and strictly increasing")
    return ts


def check_axioms(phi: DimensionFunction | Callable, grid=None, *, t=None,
                 rtol: float = AXIOM_RTOL) -> AxiomReport:
    """Check the two axioms on adjacent pairs of a decreasing scale grid.

    ``phi`` may be any callable of a scale, so that non-dimension
    functions can be diagnosed; :class:`DimensionFunction` inputs may be
    given a log-scale grid ``t`` instead of scales.
    """
    ts = _log_grid(grid, t)
    if isinstance(phi, DimensionFunction):
        vals = np.asarray(phi.at_log(ts), dtype=float)
    else:
        vals = np.array([float(phi(math.exp(-x))) for x in ts])
    if np.any(~(vals > 0)):
        mono = np.zeros(max(ts.size - 1, 0), dtype=bool)
        return AxiomReport(np.exp(-ts), vals, mono, mono.copy())
    prod = vals * ts
    mono = vals[1:] <= vals[:-1] * (1 + rtol)
    growth = prod[1:] >= prod[:-1] * (1 - rtol)
    return AxiomReport(np.exp(-ts), vals, mono, growth)


@dataclass(frozen=True)
class DoublingReport:
    C: float
    M: float
    t: np.ndarray
    left_margin: np.ndarray
    right_margin: np.ndarray

    @property
    def passed(self) -> bool:
        tol = 1e-9 * (1 + np.abs(self.M * self.t))
        return bool(np.all(self.left_margin >= -tol) and np.all(self.right_margin >= -tol))


def doubling_bound_check(phi: DimensionFunction, C: float, grid=None, *, t=None) -> DoublingReport:
    """Check ``R**-phi(R) <= (CR)**-phi(CR) <= C**-M * R**-phi(R)`` in log form."""
    if not 0 < C < 1:
        raise ValueError(f"C must lie in (0, 1), got {C}")
    if t is None:
        g = np.asarray(grid, dtype=float)
        if g.size == 0 or np.any(g <= 0) or np.any(g > phi.r_max):
            raise ValueError("grid must be non-empty and inside the domain")
        ts = -np.log(g)
    else:
        ts = np.asarray(t, dtype=float)
    lc = -math.log(C)
    M = phi.sup_bound
    a = np.asarray(phi.at_log(ts)) * ts
    b = np.asarray(phi.at_log(ts + lc)) * (ts + lc)
    c = M * lc + a
    return DoublingReport(C, M, ts, b - a, c - b)
