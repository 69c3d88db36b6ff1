"""Pressure curves, Bowen dimension and the Lyapunov spectrum.

The pressure of the scaled geometric potential is sampled over an s-grid,
projected onto its lower convex hull (Monte Carlo noise may break convexity;
the true curve is convex, so the repair is a projection onto the feasible
class), and consumed three ways: root-finding for the Bowen dimension,
the Legendre transform l(beta) = inf_s (beta*s + p(s)) / beta on the open
interval of admissible exponents, and the implicit temperature curve T(q)
solving p(T(q)) = q * p(0) with its concave transform.

Exponent-interval endpoints are estimated from secant slopes at the grid
edges, widened by the analytic per-edge exponent hull when the instance
provides one; the validity interval is reported conservatively and endpoint
values are flagged as limit reports, distinct from the open interval
on which the transform formula is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_minimize(fn: Callable[[float], float], lo: float, hi: float, tol: float = 1e-10):
    """Golden-section minimum of a convex function on [lo, hi].

    The stopping width is relative to the bracket location: an absolute
    target below the local float resolution would never be reached."""
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(300):
        if b - a <= tol * (1.0 + abs(a) + abs(b)):
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = fn(d)
    x = 0.5 * (a + b)
    return x, fn(x)


def lower_convex_hull(xs: Sequence[float], ys: Sequence[float]) -> np.ndarray:
    """Largest convex minorant of the finite samples, evaluated at the xs."""
    pts = [(x, y) for x, y in zip(xs, ys) if math.isfinite(y)]
    if len(pts) < 3:
        return np.asarray(ys, dtype=float)
    hull: list[tuple[float, float]] = []
    for x, y in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (y2 - y1) * (x - x1) >= (y - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append((x, y))
    hx = np.array([p[0] for p in hull])
    hy = np.array([p[1] for p in hull])
    out = np.asarray(ys, dtype=float).copy()
    finite = np.isfinite(out)
    out[finite] = np.interp(np.asarray(xs)[finite], hx, hy)
    return out


@dataclass(frozen=True)
class PressureCurve:
    """Convexity-repaired samples of the scale-to-pressure map."""

    s_grid: np.ndarray
    raw_values: np.ndarray
    values: np.ndarray  # repaired
    s_infinity: float
    exponent_lo: float  # conservative -p'(+inf): least admissible exponent
    exponent_hi: float  # conservative -p'(s_infinity): largest admissible exponent
    evaluator: Optional[Callable[[float], float]] = None
    exact: bool = False
    repair_correction: float = 0.0

    def pressure_at(self, s: float) -> float:
        if self.evaluator is not None:
            return self.evaluator(s)
        if s <= self.s_infinity:
            return math.inf
        return float(np.interp(s, self.s_grid, self.values))

    @property
    def validity_interval(self) -> tuple[float, float]:
        return (self.exponent_lo, self.exponent_hi)


def pressure_curve(
    evaluate: Callable[[float], float],
    s_grid: Sequence[float],
    s_infinity: float = -math.inf,
    exponent_hull: Optional[tuple[float, float]] = None,
    exact: bool = False,
) -> PressureCurve:
    """Assemble a curve from a pressure evaluator over a grid.

    The evaluator returns +inf below the summability threshold.  Derivative
    endpoints come from the outermost finite secants, widened by the analytic
    exponent hull when given; the all-infinite grid is rejected.
    """
    s = np.asarray(sorted(s_grid), dtype=float)
    raw = np.array([evaluate(x) for x in s])
    if not np.isfinite(raw).any():
        raise ValueError("pressure is infinite on the whole grid; extend it above the threshold")
    repaired = lower_convex_hull(s, raw)
    finite = np.isfinite(repaired)
    correction = float(np.max(np.abs(repaired[finite] - raw[finite])))
    sf, vf = s[finite], repaired[finite]
    slope_right = (vf[-1] - vf[-2]) / (sf[-1] - sf[-2]) if len(sf) >= 2 else -1.0
    slope_left = (vf[1] - vf[0]) / (sf[1] - sf[0]) if len(sf) >= 2 else -1.0
    lo, hi = -slope_right, -slope_left
    if exponent_hull is not None:
        lo = min(lo, exponent_hull[0])
        hi = max(hi, exponent_hull[1])
    return PressureCurve(
        s_grid=s,
        raw_values=raw,
        values=repaired,
        s_infinity=s_infinity,
        exponent_lo=lo,
        exponent_hi=hi,
        evaluator=evaluate,
        exact=exact,
        repair_correction=correction,
    )


def bowen_dimension(curve: PressureCurve, tol: float = 1e-8, max_span: float = 64.0) -> float:
    """Root of the pressure along the scale axis: inf{s >= 0 : p(s) <= 0}.

    Bisection against the exact evaluator when present, else against the
    repaired grid interpolant; returns 0 when the pressure at 0 is already
    nonpositive."""
    p = curve.pressure_at
    if p(0.0) <= 0.0:
        return 0.0
    lo = max(0.0, curve.s_infinity + 1e-12)
    hi = 1.0
    while p(hi) > 0.0:
        hi *= 2.0
        if hi > max_span:
            raise ValueError("no pressure sign change below the bracket cap")
    # keep lo strictly above the summability threshold where p = +inf
    for _ in range(200):
        if math.isfinite(p(lo)):
            break
        lo = 0.5 * (lo + hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        v = p(mid)
        if v > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol * 0.01 and abs(v) <= tol:
            break
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class RegularityReport:
    applicable: bool
    s_infinity: float
    cofinitely_regular: bool
    rung_values: tuple[float, ...] = ()


def cofinite_regularity(
    potential,
    rung_sizes: Sequence[int] = (4, 16, 64, 256, 1024),
) -> RegularityReport:
    """Whether the pressure blows up at the summability threshold.

    Finite alphabets are vacuous (threshold -inf).  Otherwise: either the
    estimated threshold scale itself fails summability, or the
    finite-subalphabet pressures evaluated there keep growing across an
    exponentially widening ladder without leveling off (the bisection
    estimate can land a hair inside the summable side, where the transfer
    sums are finite but enormous)."""
    from .potentials import s_infinity as _s_inf, summability

    if not potential.system.has_tail:
        return RegularityReport(applicable=False, s_infinity=-math.inf, cofinitely_regular=True)
    s_inf = _s_inf(potential)
    if not summability(potential, s=s_inf).summable:
        return RegularityReport(applicable=True, s_infinity=s_inf, cofinitely_regular=True)
    edges = sorted(potential.system.edges)
    sizes = [k for k in rung_sizes if k <= len(edges)] or [len(edges)]
    scaled = potential.scaled(s_inf)
    drv = potential.driving
    rungs = []
    for k in sizes:
        symbols = tuple(edges[:k])
        rungs.append(drv.expectation(lambda st: scaled.unit_transfer_bounds(st, symbols)[0]))
    increments = [rungs[i + 1] - rungs[i] for i in range(len(rungs) - 1)]
    diverging = (
        len(increments) >= 2
        and increments[-1] > 0.05
        and increments[-1] >= 0.25 * increments[0]
    )
    return RegularityReport(
        applicable=True,
        s_infinity=s_inf,
        cofinitely_regular=diverging,
        rung_values=tuple(rungs),
    )


@dataclass(frozen=True)
class SpectrumResult:
    betas: np.ndarray
    values: np.ndarray
    flags: tuple[str, ...]  # "interior" | "endpoint" | "clipped"
    validity: tuple[float, float]
    bowen: float

    @property
    def max_value(self) -> float:
        ok = [v for v, f in zip(self.values, self.flags) if f == "interior"]
        return max(ok) if ok else float(np.nanmax(self.values))


def _transform_at(curve: PressureCurve, beta: float, tol: float = 1e-11) -> float:
    """inf over scales of beta*s + p(s), by golden refinement when an
    evaluator exists and by hull-node minimum otherwise."""
    g = lambda s: beta * s + curve.pressure_at(s)
    finite = np.isfinite(curve.values)
    nodes = curve.s_grid[finite]
    node_vals = beta * nodes + curve.values[finite]
    j = int(np.argmin(node_vals))
    if curve.evaluator is None:
        return float(node_vals[j])
    step0 = float(nodes[1] - nodes[0]) if len(nodes) > 1 else 1.0
    lo = float(nodes[max(0, j - 1)])
    hi = float(nodes[min(len(nodes) - 1, j + 1)])
    # Grow the bracket while the objective keeps improving outward; by
    # convexity the first non-improving probe is a valid bracket end, so it
    # must be kept inside the bracket, not discarded.
    if j == 0:
        step = step0
        while step < 1e7:
            probe = lo - step
            val = g(probe)
            if math.isfinite(val) and val < g(lo):
                lo, step = probe, 2 * step
                continue
            if math.isfinite(val):
                lo = probe
            elif math.isfinite(curve.s_infinity):
                lo = curve.s_infinity + 1e-12
            break
    if j == len(nodes) - 1:
        step = step0
        while step < 1e7:
            probe = hi + step
            if g(probe) < g(hi):
                hi, step = probe, 2 * step
                continue
            hi = probe
            break
    _, val = _golden_minimize(g, lo, hi, tol=tol)
    return min(val, float(node_vals[j]))


def legendre_spectrum(
    curve: PressureCurve,
    beta_grid: Sequence[float],
    bowen: Optional[float] = None,
) -> SpectrumResult:
    """Lyapunov spectrum values l(beta) = (1/beta) inf_s {beta s + p(s)}.

    Betas outside the conservative validity interval are clipped (flag
    "clipped"); betas within one grid cell of an interval edge are flagged
    "endpoint" and their values are limit reports rather than interior
    transform values.  Betas must be positive."""
    betas = np.asarray(sorted(beta_grid), dtype=float)
    if (betas <= 0).any():
        raise ValueError("exponents must be positive")
    lo, hi = curve.validity_interval
    cell = float(betas[1] - betas[0]) if len(betas) > 1 else 0.0
    vals = np.empty_like(betas)
    flags = []
    s_star = bowen if bowen is not None else bowen_dimension(curve)
    for i, b in enumerate(betas):
        if b < lo or b > hi:
            # outside the admissible interval the level set is empty and the
            # transform is unbounded below; no dimension to report
            flags.append("clipped")
            vals[i] = math.nan
            continue
        if b < lo + cell or b > hi - cell:
            flags.append("endpoint")
        else:
            flags.append("interior")
        vals[i] = _transform_at(curve, b) / b
    return SpectrumResult(
        betas=betas, values=vals, flags=tuple(flags), validity=(lo, hi), bowen=s_star
    )


# ---------------------------------------------------------------------------
# Implicit temperature curve
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TemperatureCurve:
    q_grid: np.ndarray
    t_values: np.ndarray
    p_zero: float
    evaluator: Callable[[float], float]  # pressure evaluator used for roots

    def t_at(self, q: float, tol: float = 1e-12) -> float:
        return _solve_t(self.evaluator, self.p_zero, q, tol)

    def transform(self, alpha: float, bracket: tuple[float, float] = (-64.0, 64.0)) -> float:
        """Concave transform inf_q (alpha q + T(q))."""
        fn = lambda q: alpha * q + self.t_at(q)
        _, val = _golden_minimize(fn, bracket[0], bracket[1], tol=1e-9)
        return val


def _solve_t(p: Callable[[float], float], p0: float, q: float, tol: float) -> float:
    """Unique t with p(t) = q * p(0); pressure is strictly decreasing."""
    target = q * p0
    lo, hi = -1.0, 1.0
    for _ in range(200):
        if p(lo) > target:
            break
        lo *= 2.0
    for _ in range(200):
        if p(hi) < target:
            break
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if p(mid) > target:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol:
            break
    return 0.5 * (lo + hi)


def tq_analysis(
    curve: PressureCurve,
    q_grid: Sequence[float],
    symbol_count: int,
) -> TemperatureCurve:
    """Implicit temperature curve for a finite symbol set of size >= 2.

    Solves the family of root problems p(T(q)) = q * p(0) against the exact
    evaluator; also sanity-checks that T is strictly decreasing (its slope is
    p(0)/p'(T), negative for nondegenerate finite alphabets)."""
    if symbol_count < 2:
        raise ValueError("temperature analysis needs at least two symbols")
    if curve.evaluator is None:
        raise ValueError("temperature analysis needs a pressure evaluator")
    p0 = curve.evaluator(0.0)
    qs = np.asarray(sorted(q_grid), dtype=float)
    ts = np.array([_solve_t(curve.evaluator, p0, q, 1e-12) for q in qs])
    if not all(ts[i + 1] < ts[i] + 1e-9 for i in range(len(ts) - 1)):
        raise ValueError("temperature curve is not decreasing; pressure evaluator suspect")
    return TemperatureCurve(q_grid=qs, t_values=ts, p_zero=p0, evaluator=curve.evaluator)
