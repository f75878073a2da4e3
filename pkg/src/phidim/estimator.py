"""Multiscale dimension estimates from covering counts.

Every estimator evaluates a quotient ``log N_r(B(x, R) ∩ F) / log(R / r)``
on a decreasing grid of scales ``R``, minimizes it over sampled centers
``x`` (and, for the quasi and windowed variants, over a sub-grid of small
scales ``r``), and reports the running minimum as a liminf proxy.

Sets are either :class:`~phidim.covering.GeomSet` instances (counts from
the covering kernel) or one-dimensional :class:`~phidim.moran.MoranSpec`
schedules (exact counts from :class:`~phidim.moran.BallCounter`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .covering import (CountBounds, EmptySetError, GeomSet, ball_restrict, covering_number,
                       default_centers)
from .dimfunc import DimensionFunction, rate_window
from .moran import BallCounter, MoranSpec, checkpoint_log_scales, formula_dimension, level_of
from .report import EstimateReport, ScaleRecord, ScanReport

QUASI_MULTIPLIERS = (1.0, 1.25, 1.5, 2.0, 3.0, 4.0)
WINDOW_MULTIPLIERS = (1.0, 0.75, 0.5, 0.25)


@dataclass
class ScaleGrid:
    """Strictly decreasing scales ``R`` stored as log-scales ``t = log(1/R)``.

    ``centers`` optionally fixes the candidate centers (one array for all
    scales, or one per scale); by default box corners of the set are used.
    """

    t: np.ndarray
    centers: object = None

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float).ravel()
        if self.t.size == 0:
            raise ValueError("empty scale grid")
        if np.any(np.diff(self.t) <= 0) or np.any(self.t <= 0):
            raise ValueError("scales must lie in (0, 1) and strictly decrease")

    @classmethod
    def from_scales(cls, scales, centers=None) -> "ScaleGrid":
        R = np.asarray(scales, dtype=float)
        if np.any(R <= 0):
            raise ValueError("scales must be positive")
        return cls(-np.log(R), centers)

    @classmethod
    def geometric(cls, k_start: int, k_stop: int, gamma: float = 0.5, R0: float = 1.0,
                  step: int = 1, centers=None) -> "ScaleGrid":
        """Scales ``R0 * gamma**k`` for ``k = k_start .. k_stop``."""
        k = np.arange(k_start, k_stop + 1, step, dtype=float)
        return cls(-math.log(R0) - k * math.log(gamma), centers)

    @property
    def scales(self) -> np.ndarray:
        return np.exp(-self.t)

    def centers_at(self, i: int):
        if self.centers is None:
            return None
        if isinstance(self.centers, (list, tuple)) and len(self.centers) == self.t.size:
            return np.asarray(self.centers[i], dtype=float)
        return np.asarray(self.centers, dtype=float)

    def __len__(self):
        return self.t.size


def checkpoint_grid(spec: MoranSpec, first: int = 0) -> ScaleGrid:
    """Grid of the recorded checkpoint scales of an example schedule."""
    t = checkpoint_log_scales(spec)[first:]
    if t.size == 0:
        raise ValueError("schedule has no recorded checkpoints")
    return ScaleGrid(t)


# -- counting backends -----------------------------------------------------


class _SetBackend:
    def __init__(self, F: GeomSet):
        self.F = F
        self.dim = F.d
        self._default = default_centers(F)

    def centers(self, given):
        if given is None:
            return self._default
        c = np.asarray(given, dtype=float)
        return c.reshape(-1, self.dim)

    def best(self, t_R: float, t_r: float, centers):
        """Smallest counts over centers: ``(lower, upper, center)``."""
        R = math.exp(-t_R)
        r = math.exp(-t_r)
        lo = hi = arg = None
        for x in self.centers(centers):
            try:
                cb = covering_number(ball_restrict(self.F, x, R, local=True), r)
            except EmptySetError:
                continue
            lo = cb.lower if lo is None else min(lo, cb.lower)
            if hi is None or cb.upper < hi:
                hi, arg = cb.upper, x
        if hi is None:
            raise EmptySetError("no center meets the set")
        return lo, hi, {"center": [float(v) for v in np.ravel(arg)]}


class _MoranBackend:
    def __init__(self, spec: MoranSpec):
        self.spec = spec
        self.dim = 1
        self.counter = BallCounter(spec)

    def best(self, t_R: float, t_r: float, centers):
        if centers is not None:
            raise ValueError("Moran estimates enumerate all cylinder centers; centers not allowed")
        n, gap = self.counter.min_count(t_R, t_r)
        return n, n, {"neighbour_gap": gap, "level": level_of(self.spec, t=t_R)}


def _backend(F):
    if isinstance(F, MoranSpec):
        return _MoranBackend(F)
    if isinstance(F, GeomSet):
        return _SetBackend(F)
    raise TypeError("expected a GeomSet or a MoranSpec")


def _quotient_record(backend, t_R: float, t_rs: Sequence[float], centers) -> ScaleRecord:
    best = None
    q_min_lo = math.inf
    for t_r in t_rs:
        L = t_r - t_R
        if not L > 0:
            raise ValueError("small scale must be below R")
        lo, hi, info = backend.best(t_R, t_r, centers)
        q_min_lo = min(q_min_lo, math.log(lo) / L)
        q = math.log(hi) / L
        if best is None or q < best.quotient:
            best = ScaleRecord(t_R, t_r, lo, hi, q, q, q, info)
    best.quotient_lo = q_min_lo
    return best


def _provenance(F, phi, grid, method, **extra):
    set_id = (F.meta.get("kind", "explicit") if isinstance(F, MoranSpec) else repr(F))
    return {"set": set_id, "phi": getattr(phi, "name", None), "method": method,
            "grid": [float(grid.t[0]), float(grid.t[-1]), len(grid)], **extra}


def _estimate(F, phi: DimensionFunction, grid: ScaleGrid, exponents, method: str,
              start: int = 0) -> EstimateReport:
    backend = _backend(F)
    records = []
    for i, t in enumerate(grid.t):
        ph = float(phi.at_log(t))
        t_rs = [t * (1.0 + m * ph) for m in exponents]
        records.append(_quotient_record(backend, float(t), t_rs, grid.centers_at(i)))
    prov = _provenance(F, phi, grid, method, exponents=[float(m) for m in exponents])
    return EstimateReport(records, dim=backend.dim, start=start, provenance=prov)


def phi_lower_estimate(F, phi: DimensionFunction, grid: ScaleGrid, start: int = 0) -> EstimateReport:
    """Quotient at ``r = R**(1+phi(R))`` minimized over centers, per grid scale."""
    return _estimate(F, phi, grid, (1.0,), "phi-lower", start)


def quasi_phi_lower_estimate(F, phi: DimensionFunction, grid: ScaleGrid,
                             multipliers: Sequence[float] = QUASI_MULTIPLIERS,
                             start: int = 0) -> EstimateReport:
    """Quotient minimized over ``r = R**(1 + m phi(R))`` with every ``m >= 1``."""
    if not multipliers or min(multipliers) < 1.0:
        raise ValueError("quasi sub-scales must lie at or below R**(1+phi(R))")
    return _estimate(F, phi, grid, tuple(sorted(multipliers)), "quasi-phi-lower", start)


def windowed_lower_estimate(F, Phi: DimensionFunction, grid: ScaleGrid,
                            multipliers: Sequence[float] = WINDOW_MULTIPLIERS,
                            start: int = 0) -> EstimateReport:
    """Quotient minimized over ``r = R**(1 + m Phi(R))`` with ``0 < m <= 1``.

    These sub-scales fill the window ``R**(1+Phi(R)) <= r < R``.
    """
    if not multipliers or min(multipliers) <= 0 or max(multipliers) > 1.0:
        raise ValueError("windowed sub-scales must lie in [R**(1+Phi(R)), R)")
    return _estimate(F, Phi, grid, tuple(sorted(multipliers)), "windowed-lower", start)


def matched_window(phi: DimensionFunction, quasi_multipliers: Sequence[float] = QUASI_MULTIPLIERS,
                   extra: Sequence[float] = WINDOW_MULTIPLIERS):
    """Windowed setup ``(Phi, multipliers)`` whose sub-scales contain the quasi ones.

    With ``Phi = max(m) * phi`` the quasi sub-scales ``R**(1 + m phi)``
    are windowed sub-scales with multipliers ``m / max(m)``, so on a
    common grid the windowed value never exceeds the quasi value.
    """
    top = max(quasi_multipliers)
    mults = sorted({*(m / top for m in quasi_multipliers), *extra})
    return phi.scaled(top), tuple(mults)


@dataclass(frozen=True)
class OmegaResult:
    value: float
    lower: float
    upper: float
    count: CountBounds
    info: dict = field(default_factory=dict)


def omega(F, x_scale: float, y_scale: float, centers=None) -> OmegaResult:
    """Local complexity ``min_xi log N_y(B(xi, x) ∩ F) / log(x / y)``."""
    if not 0 < y_scale < x_scale:
        raise ValueError("need 0 < y < x")
    backend = _backend(F)
    t_x, t_y = -math.log(x_scale), -math.log(y_scale)
    lo, hi, info = backend.best(t_x, t_y, centers)
    L = t_y - t_x
    return OmegaResult(math.log(hi) / L, math.log(lo) / L, math.log(hi) / L,
                       CountBounds(lo, hi), info)


# -- scans -------------------------------------------------------------------


def _alpha_value(F, phi, alpha, grid, start, method):
    phi_a = rate_window(phi, alpha)
    if method == "formula":
        rep = formula_dimension(F, phi_a, start_level=start + 1)
    else:
        rep = phi_lower_estimate(F, phi_a, grid, start=start)
    lo, hi = rep.value_bounds
    return rep.value, min(lo, rep.value), max(hi, rep.value)


def _method(F, method):
    if method is None:
        return "formula" if isinstance(F, MoranSpec) else "estimate"
    if method == "formula" and not isinstance(F, MoranSpec):
        raise ValueError("formula values need a MoranSpec")
    return method


def variational_scan(F, phi: DimensionFunction, alphas: Sequence[float],
                     grid: ScaleGrid | None = None, start: int = 0, method: str | None = None,
                     quasi_grid: ScaleGrid | None = None, quasi_start: int = 0,
                     tol: float = 0.05) -> ScanReport:
    """Values ``dim^{phi/alpha}`` over ``alpha`` in ``(0, 1]`` against the quasi estimate.

    For a MoranSpec with ``method='formula'`` (the default) the level
    formula is used and ``start`` is a burn-in level; otherwise ``grid``
    estimates are used and ``start`` is a grid index.  The quasi estimate
    minimizes over the sub-scales ``R**(1+phi/alpha)`` of every alpha.
    """
    alphas = np.asarray(sorted(alphas), dtype=float)
    if alphas.size == 0 or np.any(alphas <= 0) or np.any(alphas > 1):
        raise ValueError("alpha values must lie in (0, 1]")
    method = _method(F, method)
    vals, los, his = zip(*(_alpha_value(F, phi, a, grid, start, method) for a in alphas))
    qgrid = quasi_grid if quasi_grid is not None else grid
    if qgrid is None:
        raise ValueError("the quasi comparison needs a scale grid")
    quasi = quasi_phi_lower_estimate(F, phi, qgrid, multipliers=sorted({1.0, *(1 / alphas)}),
                                     start=quasi_start)
    vals = np.array(vals)
    inf = float(np.nanmin(vals))
    checks = {"infimum_vs_quasi": np.array([inf >= quasi.value - tol])}
    prov = {"method": method, "phi": phi.name, "quasi_value": quasi.value,
            "infimum": inf, "tol": tol}
    return ScanReport(alphas, vals, np.array(los), np.array(his), checks, prov)


def rate_window_scan(F, phi: DimensionFunction, alphas: Sequence[float],
                     grid: ScaleGrid | None = None, start: int = 0, method: str | None = None,
                     atol: float = 1e-9) -> ScanReport:
    """Rate-window values ``f(alpha) = dim^{phi/alpha}`` with two consistency checks.

    * ``f(alpha)/alpha`` is non-increasing along the grid;
    * ``(1/a - 1/b) f(ab/(b-a)) <= f(a)/a - f(b)/b`` for adjacent pairs.

    Both are checked with tolerances built from the value bounds.
    """
    alphas = np.asarray(sorted(alphas), dtype=float)
    if alphas.size == 0 or np.any(alphas <= 0):
        raise ValueError("alpha values must be positive")
    method = _method(F, method)
    cache: dict = {}

    def f(a):
        key = round(float(a), 12)
        if key not in cache:
            cache[key] = _alpha_value(F, phi, float(a), grid, start, method)
        return cache[key]

    vals = np.array([f(a)[0] for a in alphas])
    los = np.array([f(a)[1] for a in alphas])
    his = np.array([f(a)[2] for a in alphas])
    width = his - los
    ratio = vals / alphas
    mono = []
    ineq = []
    margins = []
    for i in range(alphas.size - 1):
        a, b = alphas[i], alphas[i + 1]
        tol = width[i] / a + width[i + 1] / b + atol
        mono.append(ratio[i + 1] <= ratio[i] + tol)
        g = a * b / (b - a)
        vg, lg, hg = f(g)
        lhs = (1 / a - 1 / b) * vg
        rhs = ratio[i] - ratio[i + 1]
        tol2 = tol + (1 / a - 1 / b) * (hg - lg)
        margins.append(rhs - lhs)
        ineq.append(lhs <= rhs + tol2)
    checks = {"ratio_nonincreasing": np.array(mono, dtype=bool),
              "lower_bound_inequality": np.array(ineq, dtype=bool)}
    prov = {"method": method, "phi": phi.name, "margins": [float(m) for m in margins],
            "extra_alphas": sorted(k for k in cache if k not in set(np.round(alphas, 12)))}
    return ScanReport(alphas, vals, los, his, checks, prov)


@dataclass
class GapReport:
    eps: float
    C: float
    bound: float
    gap: float
    tol: float
    value_phi: float
    value_psi: float
    status: str

    @property
    def passed(self) -> bool:
        return self.status == "ok"

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def measured_doubling_constant(F, grid: ScaleGrid, phi: DimensionFunction) -> int:
    """Largest ``N_r(B(x, 2r) ∩ F)`` over centers at the grid's small scales."""
    from .covering import doubling_constant
    if isinstance(F, MoranSpec):
        counter = BallCounter(F)
        best = 1
        for t in grid.t:
            t_r = t * (1 + float(phi.at_log(t)))
            t2 = t_r - math.log(2.0)
            lev = level_of(F, t=t2)
            for g in counter.center_classes(lev, math.exp(F._s[lev] - t2)):
                best = max(best, counter.count(t2, t_r, g))
        return best
    radii = [math.exp(-t * (1 + float(phi.at_log(t)))) for t in grid.t]
    return doubling_constant(F, radii)


def equivalence_gap_check(F, phi: DimensionFunction, psi: DimensionFunction, grid: ScaleGrid,
                          C: float | None = None, eps: float | None = None,
                          eps_max: float = 0.1, tol: float = 0.0, start: int = 0) -> GapReport:
    """Compare two estimates against ``eps (1 + 2 log2 C + eps)``.

    ``eps`` defaults to ``max |phi/psi - 1|`` on the grid; if it exceeds
    ``eps_max`` the bound is reported as inapplicable.
    """
    ratio = np.asarray(phi.at_log(grid.t)) / np.asarray(psi.at_log(grid.t))
    measured = float(np.max(np.abs(ratio - 1.0)))
    if eps is None:
        eps = measured
    elif measured > eps * (1 + 1e-12):
        raise ValueError(f"phi/psi leaves [1-eps, 1+eps] on the grid (measured {measured:g})")
    if C is None:
        C = float(measured_doubling_constant(F, grid, phi))
    bound = eps * (1 + 2 * math.log2(C) + eps)
    a = phi_lower_estimate(F, phi, grid, start=start).value
    b = phi_lower_estimate(F, psi, grid, start=start).value
    gap = abs(a - b)
    if eps > eps_max:
        status = "inapplicable"
    else:
        status = "ok" if gap <= bound + tol else "violated"
    return GapReport(eps, C, bound, gap, tol, a, b, status)
