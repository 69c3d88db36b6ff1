"""Fiberwise partition sums and relative topological pressure.

Four approximants of the pressure are implemented over a finite symbol set F
with anchor symbol e:

  Z  -- anchored words (first symbol e, last symbol may return to e), each
        weighted by the cylinder sup of the Birkhoff sum;
  L  -- return-constrained words weighted at the anchored point (the word
        continued by a standardized periodic tail);
  Lop -- the n-th transfer-operator iterate of the anchor-cylinder indicator
        at the anchored point (same word set as Z, anchored weights);
  A  -- all words, cylinder sup weights.

They share one exponential growth rate; the sandwich chain bounding each by
the next with explicit constants is checked inequality by inequality, in
Fraction or high-precision arithmetic when requested.

Pressure evaluation prefers exact routes: product structure (full shift with
a cylinder-constant potential) gives the marginal expectation of the log
transfer sum; deterministic or periodic driving over a finite alphabet gives
the spectral radius of the weighted transition matrix (cycle product).  The
Monte Carlo route averages depth-extrapolated partition-sum slopes over
independent orbits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import mpmath
import numpy as np

from .driving import DrivingOrbit, DrivingSystem, orbit_family
from .potentials import FirstSymbolPotential
from .shift import (
    PrimitivityWitness,
    SubalphabetLadder,
    SymbolicSystem,
    Word,
    enumerate_words,
    find_primitivity,
)


class _LogAccumulator:
    """Streaming log-sum-exp so exponentially many terms never materialize."""

    __slots__ = ("_max", "_sum")

    def __init__(self):
        self._max = -math.inf
        self._sum = 0.0

    def add(self, x: float):
        if x == -math.inf:
            return
        if x <= self._max:
            self._sum += math.exp(x - self._max)
        else:
            self._sum = self._sum * math.exp(self._max - x) + 1.0 if self._sum else 1.0
            self._max = x

    def value(self) -> float:
        if self._sum == 0.0:
            return -math.inf
        return self._max + math.log(self._sum)


def anchored_tail(
    system: SymbolicSystem,
    symbols: Sequence[int],
    anchor: int,
    witness: Optional[PrimitivityWitness],
    length: int,
) -> Word:
    """Prefix of the standardized anchored word: the anchor alternating with
    its lexicographically first self-connector.  Reproducible stand-in for the
    arbitrary cylinder point the anchored sums evaluate at."""
    if witness is None:
        witness = find_primitivity(system, symbols, max_order=8)
        if witness is None:
            raise ValueError("symbol set is not finitely primitive")
    loop = None
    for w in sorted(witness.connectors):
        if system.admissible_pair(anchor, w[0]) and system.admissible_pair(w[-1], anchor):
            loop = w
            break
    if loop is None:
        raise ValueError(f"no connector closes a loop at symbol {anchor}")
    out = []
    while len(out) < length:
        out.append(anchor)
        out.extend(loop)
    return tuple(out[:length])


@dataclass(frozen=True)
class PartitionSums:
    """Log values of the four depth-n partition sums at one orbit position."""

    depth: int
    anchor: int
    symbols: tuple[int, ...]
    position: int
    log_anchored_sup: float  # Z
    log_return: float  # L
    log_operator: float  # Lop
    log_all: float  # A
    exact: Optional[dict] = None


def partition_sums(
    system: SymbolicSystem,
    symbols: Sequence[int],
    potential: FirstSymbolPotential,
    orbit: DrivingOrbit,
    anchor: int,
    n: int,
    position: int = 0,
    witness: Optional[PrimitivityWitness] = None,
    arithmetic: str = "float",
    anchor_extension: int = 12,
) -> PartitionSums:
    """Exact partition sums by streamed lexicographic word enumeration.

    Empty admissible sets contribute 0 (log value -inf).  The "exact"
    arithmetic modes return Fraction/mpf sums alongside float logs for
    provably signed comparisons.
    """
    symbols = tuple(sorted(symbols))
    if anchor not in symbols:
        raise ValueError("anchor symbol must belong to the symbol set")
    if n < 1:
        raise ValueError("depth must be >= 1")
    exact_mode = arithmetic != "float"
    weight = potential.exact_weight_fn(arithmetic) if exact_mode else None
    zero = Fraction(0) if arithmetic == "fraction" else (mpmath.mpf(0) if exact_mode else None)

    states = [orbit.state(position + j) for j in range(n)]
    cylinder_exact = potential.exact_on_cylinders
    tail = None
    if not cylinder_exact:
        tail = anchored_tail(system, symbols, anchor, witness, anchor_extension)

    if exact_mode:
        tot_a = tot_z = tot_l = tot_op = zero
        for w in enumerate_words(system, symbols, n):
            wt = weight(states[0], w[0])
            for j in range(1, n):
                wt = wt * weight(states[j], w[j])
            tot_a = tot_a + wt
            if system.admissible_pair(w[-1], anchor):
                tot_l = tot_l + wt
                if w[0] == anchor:
                    tot_z = tot_z + wt
                    tot_op = tot_op + wt
        exact = {"all": tot_a, "anchored_sup": tot_z, "return": tot_l, "operator": tot_op}

        def flog(x):
            if x == 0:
                return -math.inf
            return float(mpmath.log(mpmath.mpf(x.numerator) / mpmath.mpf(x.denominator))) if isinstance(x, Fraction) else float(mpmath.log(x))

        return PartitionSums(
            depth=n,
            anchor=anchor,
            symbols=symbols,
            position=position,
            log_anchored_sup=flog(tot_z),
            log_return=flog(tot_l),
            log_operator=flog(tot_op),
            log_all=flog(tot_a),
            exact=exact,
        )

    acc_a, acc_z, acc_l, acc_op = (_LogAccumulator() for _ in range(4))
    for w in enumerate_words(system, symbols, n):
        if cylinder_exact:
            sup = math.fsum(potential.value(states[j], w[j]) for j in range(n))
            anchored = sup
        else:
            sup, _ = potential.sum_bounds(orbit, position, w, n)
            ext_hi, ext_lo = potential.sum_bounds(orbit, position, w + tail, n)
            anchored = 0.5 * (ext_hi + ext_lo)
        acc_a.add(sup)
        if system.admissible_pair(w[-1], anchor):
            acc_l.add(anchored)
            if w[0] == anchor:
                acc_z.add(sup)
                acc_op.add(anchored)
    return PartitionSums(
        depth=n,
        anchor=anchor,
        symbols=symbols,
        position=position,
        log_anchored_sup=acc_z.value(),
        log_return=acc_l.value(),
        log_operator=acc_op.value(),
        log_all=acc_a.value(),
    )


# ---------------------------------------------------------------------------
# Sandwich chain
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SandwichReport:
    """Margins (rhs - lhs, or log rhs - log lhs for the float path) of every
    inequality in the comparability chain; nonnegative margins everywhere
    certify the chain at this depth."""

    depth: int
    anchor: int
    inequalities: tuple[tuple[str, float], ...]

    @property
    def ok(self) -> bool:
        return all(m >= 0 for _, m in self.inequalities)

    @property
    def worst(self) -> float:
        return min(m for _, m in self.inequalities)


def _connector_minimum(
    potential: FirstSymbolPotential,
    orbit: DrivingOrbit,
    position: int,
    words: Sequence[Word],
    arithmetic: str,
):
    """min over the given words of the anchored-cylinder weight product."""
    if arithmetic == "float":
        best = math.inf
        for w in words:
            _, lo = potential.sum_bounds(orbit, position, w)
            best = min(best, lo)
        return best
    weight = potential.exact_weight_fn(arithmetic)
    best = None
    for w in words:
        wt = weight(orbit.state(position), w[0])
        for j in range(1, len(w)):
            wt = wt * weight(orbit.state(position + j), w[j])
        best = wt if best is None or wt < best else best
    return best


def check_sandwich(
    system: SymbolicSystem,
    symbols: Sequence[int],
    potential: FirstSymbolPotential,
    orbit: DrivingOrbit,
    anchor: int,
    n: int,
    witness: Optional[PrimitivityWitness] = None,
    arithmetic: str = "float",
) -> SandwichReport:
    """Verify the full comparability chain at depth n.

    Chain (log scale): Lop_n <= Z_n <= B*L_n <= B*A_n
      <= B^3 * e^{N*K} * L_{N+n}
      <= B^3 * e^{N*K} / R * Lop_{2N+1+n} at the orbit shifted back by N+1,
    plus the two direct connector bounds
      Lop_{N+1+n}(omega) >= R * L_n(theta^{N+1} omega) and
      L_{N+n}(omega) >= R_n * A_n(omega).
    """
    symbols = tuple(sorted(symbols))
    if witness is None:
        witness = find_primitivity(system, symbols, max_order=8)
        if witness is None:
            raise ValueError("symbol set is not finitely primitive")
    N = witness.order
    exact_mode = arithmetic != "float"

    def sums(depth, position):
        return partition_sums(
            system, symbols, potential, orbit, anchor, depth,
            position=position, witness=witness, arithmetic=arithmetic,
        )

    base = sums(n, 0)
    deeper = sums(N + n, 0)
    op_shifted = sums(2 * N + 1 + n, -(N + 1))
    op_forward = sums(N + 1 + n, 0)
    l_shifted = sums(n, N + 1)

    # constants
    logB = potential.log_distortion()
    if exact_mode:
        weight = potential.exact_weight_fn(arithmetic)
        one = Fraction(1) if arithmetic == "fraction" else mpmath.mpf(1)
        if logB != 0.0:
            raise ValueError("exact sandwich arithmetic needs a distortion-free potential")
        B = one
        # e^K = sup over connector alphabet and relevant fibers of the inverse weight
        states = orbit.system.state_support()
        conn = sorted(witness.connector_alphabet)
        eK = max(
            max(weight(st, e), one / weight(st, e)) for st in states for e in conn
        )
        eNK = eK ** N
    else:
        logB = potential.log_distortion()
        log_eNK = N * potential.sup_log_norm(sorted(witness.connector_alphabet))

    # R at fiber position p: min over connectors w with anchor*w admissible of
    # the inf of the (N+1)-sum over [anchor w]
    def connector_r(p):
        words = [
            (anchor,) + w
            for w in witness.connectors
            if system.admissible_pair(anchor, w[0]) and system.is_admissible((anchor,) + w)
        ]
        return _connector_minimum(potential, orbit, p, words, arithmetic)

    def connector_rn(p):
        words = [w for w in witness.connectors]
        m = _connector_minimum(potential, orbit, p, words, arithmetic)
        if exact_mode:
            return m / B
        return m - logB

    ineqs = []
    if exact_mode:
        ex = lambda s: s.exact
        b0, bd, bo, bf, bl = ex(base), ex(deeper), ex(op_shifted), ex(op_forward), ex(l_shifted)
        R_back = connector_r(-(N + 1))
        R_fwd = connector_r(0)
        Rn = connector_rn(n)
        ineqs = [
            ("operator<=anchored_sup", b0["anchored_sup"] - b0["operator"]),
            ("anchored_sup<=B*return", B * b0["return"] - b0["anchored_sup"]),
            ("B*return<=B*all", B * b0["all"] - B * b0["return"]),
            ("B*all<=B^3 e^{NK} deeper_return", B ** 3 * eNK * bd["return"] - B * b0["all"]),
            (
                "deeper_return<=.../R operator_shifted",
                B ** 3 * eNK / R_back * bo["operator"] - B ** 3 * eNK * bd["return"],
            ),
            ("comparability: operator>=R*return_shifted", bf["operator"] - R_fwd * bl["return"]),
            ("comparability: deeper_return>=R_n*all", bd["return"] - Rn * b0["all"]),
        ]
        margins = tuple((name, float(v)) for name, v in ineqs)
    else:
        R_back = connector_r(-(N + 1))
        R_fwd = connector_r(0)
        Rn = connector_rn(n)
        margins = (
            ("operator<=anchored_sup", base.log_anchored_sup - base.log_operator),
            ("anchored_sup<=B*return", logB + base.log_return - base.log_anchored_sup),
            ("B*return<=B*all", base.log_all - base.log_return),
            (
                "B*all<=B^3 e^{NK} deeper_return",
                2 * logB + log_eNK + deeper.log_return - base.log_all,
            ),
            (
                "deeper_return<=.../R operator_shifted",
                op_shifted.log_operator - R_back - deeper.log_return,
            ),
            (
                "comparability: operator>=R*return_shifted",
                op_forward.log_operator - (R_fwd + l_shifted.log_return),
            ),
            ("comparability: deeper_return>=R_n*all", deeper.log_return - (Rn + base.log_all)),
        )
    return SandwichReport(depth=n, anchor=anchor, inequalities=tuple(margins))


# ---------------------------------------------------------------------------
# Pressure
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PressureEstimate:
    value: float
    method: str  # "exact-product" | "exact-spectral" | "monte-carlo"
    depths: tuple[int, ...] = ()
    per_depth: tuple[float, ...] = ()
    spread: float = 0.0
    raw_value: Optional[float] = None

    @property
    def exact(self) -> bool:
        return self.method.startswith("exact")


def _is_full_over(system: SymbolicSystem, symbols: Sequence[int]) -> bool:
    if system.incidence_kind == "full":
        return True
    return all(system.admissible_pair(a, b) for a in symbols for b in symbols)


def _product_pressure(
    potential: FirstSymbolPotential, driving: DrivingSystem, symbols: Optional[Sequence[int]]
) -> float:
    return driving.expectation(lambda st: potential.unit_transfer_bounds(st, symbols)[0])


def _spectral_pressure(
    system: SymbolicSystem,
    symbols: Sequence[int],
    potential: FirstSymbolPotential,
    cycle: Sequence,
) -> float:
    symbols = tuple(sorted(symbols))
    idx = {e: i for i, e in enumerate(symbols)}
    adm = np.zeros((len(symbols), len(symbols)))
    for a in symbols:
        for b in symbols:
            if system.admissible_pair(a, b):
                adm[idx[a], idx[b]] = 1.0
    shift_total = 0.0
    prod = np.eye(len(symbols))
    for st in cycle:
        logs = np.array([potential.value(st, e) for e in symbols])
        shift = logs.max()
        shift_total += shift
        step = np.diag(np.exp(logs - shift)) @ adm.T
        prod = step @ prod
    rho = max(abs(np.linalg.eigvals(prod)))
    if rho == 0.0:
        return -math.inf
    return (shift_total + math.log(rho)) / len(cycle)


def _depth_extrapolate(depths: Sequence[int], values: Sequence[float]) -> float:
    """Fit value = p + c/n over the deepest three levels; returns p.

    The sandwich constants contribute an O(1/n) bias to every approximant, so
    the intercept of the 1/n fit is the honest depth-infinity estimate."""
    ns = list(depths)[-3:]
    vs = list(values)[-3:]
    if len(ns) == 1:
        return vs[0]
    x = np.array([1.0 / n for n in ns])
    y = np.array(vs)
    coef = np.polyfit(x, y, 1)
    return float(coef[1])


def pressure(
    system: SymbolicSystem,
    symbols: Optional[Sequence[int]],
    potential: FirstSymbolPotential,
    orbits: Optional[Sequence[DrivingOrbit]] = None,
    depths: Sequence[int] = (4, 5, 6, 7, 8),
    method: str = "auto",
    witness: Optional[PrimitivityWitness] = None,
) -> PressureEstimate:
    """Relative pressure of the potential over a finite symbol set (or the
    whole alphabet for product-structure systems when symbols is None).

    Route selection: product structure and deterministic/periodic transfer
    matrices are exact; otherwise depth-extrapolated Monte Carlo across
    orbits, reported with the cross-orbit spread.
    """
    drv = potential.driving
    if drv is None:
        raise ValueError("pressure needs the potential's driving system")
    full = symbols is None or _is_full_over(system, symbols)
    if method in ("auto", "exact-product") and full and potential.exact_on_cylinders:
        val = _product_pressure(potential, drv, None if symbols is None else tuple(sorted(symbols)))
        return PressureEstimate(value=val, method="exact-product")
    if symbols is None:
        raise ValueError("non-product systems need an explicit finite symbol set")
    if (
        method in ("auto", "exact-spectral")
        and potential.exact_on_cylinders
        and drv.kind in ("deterministic", "periodic")
        and len(symbols) <= 128
    ):
        val = _spectral_pressure(system, symbols, potential, drv.states)
        return PressureEstimate(value=val, method="exact-spectral")

    if orbits is None:
        orbits = orbit_family(drv, count=16, root_seed=0)
    anchor = min(symbols)
    per_orbit = []
    per_depth_all = []
    for orbit in orbits:
        vals = []
        for n in depths:
            ps = partition_sums(
                system, symbols, potential, orbit, anchor, n, witness=witness
            )
            vals.append(ps.log_all / n)
        per_depth_all.append(vals)
        per_orbit.append(_depth_extrapolate(depths, vals))
    mean = float(np.mean(per_orbit))
    spread = float(np.std(per_orbit, ddof=1)) if len(per_orbit) > 1 else 0.0
    per_depth = tuple(float(np.mean([v[i] for v in per_depth_all])) for i in range(len(depths)))
    return PressureEstimate(
        value=mean,
        method="monte-carlo",
        depths=tuple(depths),
        per_depth=per_depth,
        spread=spread,
        raw_value=per_depth[-1],
    )


@dataclass(frozen=True)
class CompactApproximation:
    rung_symbols: tuple[tuple[int, ...], ...]
    rung_values: tuple[float, ...]
    limit: float
    anchor: Optional[float]  # exact full-alphabet value, when available
    monotone: bool


def pressure_compact_approx(
    system: SymbolicSystem,
    ladder: SubalphabetLadder,
    potential: FirstSymbolPotential,
    orbits: Optional[Sequence[DrivingOrbit]] = None,
    depths: Sequence[int] = (4, 5, 6, 7, 8),
) -> CompactApproximation:
    """Increasing finite-subalphabet pressures and their limit estimate.

    When the full-alphabet transfer sums have closed form (product systems,
    analytic tails) the exact value anchors the limit from above; divergence
    of that anchor reports +inf, matching the convention for non-summable
    potentials.
    """
    rungs = tuple(tuple(r) for r in ladder)
    values = [
        pressure(system, r, potential, orbits=orbits, depths=depths).value for r in rungs
    ]
    monotone = all(values[i + 1] >= values[i] - 1e-9 for i in range(len(values) - 1))
    anchor = None
    if potential.exact_on_cylinders and _is_full_over(system, system.edges):
        try:
            anchor = _product_pressure(potential, potential.driving, None)
        except ValueError:
            anchor = None
    if anchor is not None:
        limit = anchor
    elif len(values) >= 2 and values[-1] - values[-2] > max(0.01, 0.5 * (values[1] - values[0])):
        limit = math.inf
    else:
        limit = values[-1]
    return CompactApproximation(
        rung_symbols=rungs,
        rung_values=tuple(values),
        limit=limit,
        anchor=anchor,
        monotone=monotone,
    )


# ---------------------------------------------------------------------------
# Gibbs property
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GibbsReport:
    checked: int
    violations: int
    max_upper_excess: float  # max of ratio/B - 1 over cylinders (<= 0 when ok)
    min_lower_slack: float  # min of ratio/lower - 1 over cylinders (>= 0 when ok)
    worst_ratio_deviation: float  # max |ratio - 1| (diagnostic for product systems)

    @property
    def ok(self) -> bool:
        return self.violations == 0


def check_gibbs(
    system: SymbolicSystem,
    symbols: Sequence[int],
    potential: FirstSymbolPotential,
    orbit: DrivingOrbit,
    measures,
    log_eigenvalues: Sequence[float],
    depth: int,
    witness: Optional[PrimitivityWitness] = None,
    rel_tol: float = 1e-12,
) -> GibbsReport:
    """Two-sided Gibbs bracket for every cylinder up to the given depth.

    measures[0] supplies cylinder masses at the base orbit position; the
    partial sums of log_eigenvalues play the role of the accumulated
    normalization.  The lower constant is
    1 / (B * e^{2NK} * N * prod_{i<2N} M(omega_{n+i})).
    """
    symbols = tuple(sorted(symbols))
    if witness is None:
        witness = find_primitivity(system, symbols, max_order=8)
    N = witness.order
    logB = potential.log_distortion()
    K = potential.sup_log_norm(sorted(witness.connector_alphabet))
    base = measures[0]
    checked = violations = 0
    max_up = -math.inf
    min_lo = math.inf
    worst_dev = 0.0
    for n in range(1, depth + 1):
        log_pn = math.fsum(log_eigenvalues[:n])
        log_lower = -(
            logB
            + 2 * N * K
            + math.log(N)
            + math.fsum(
                potential.unit_transfer_bounds(orbit.state(n + i), symbols)[0]
                for i in range(2 * N)
            )
        )
        for w in enumerate_words(system, symbols, n):
            mass = base.mass(w)
            if mass <= 0.0:
                continue
            sup, lo = potential.sum_bounds(orbit, 0, w, n)
            log_ratio_hi = math.log(mass) - (lo - log_pn)  # worst case vs upper bound
            log_ratio_lo = math.log(mass) - (sup - log_pn)  # worst case vs lower bound
            checked += 1
            up_excess = log_ratio_hi - logB
            lo_slack = log_ratio_lo - log_lower
            max_up = max(max_up, up_excess)
            min_lo = min(min_lo, lo_slack)
            worst_dev = max(worst_dev, abs(log_ratio_hi), abs(log_ratio_lo))
            if up_excess > rel_tol or lo_slack < -rel_tol:
                violations += 1
    return GibbsReport(
        checked=checked,
        violations=violations,
        max_upper_excess=max_up,
        min_lower_slack=min_lo,
        worst_ratio_deviation=worst_dev,
    )
