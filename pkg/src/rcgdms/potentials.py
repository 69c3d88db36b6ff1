"""Random locally Hölder potentials at cylinder resolution.

Potentials are exposed only through per-cylinder (sup, inf) bounds of Birkhoff
sums; pointwise evaluation at infinite words is never needed.  The workhorse
class covers potentials that depend on the leading symbol and the fiber state
only (geometric potentials of similarity systems, custom weight tables, the
zero potential); these are exact on cylinders.  Declared Hölder data widens
the bounds for general conformal instances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Callable, Optional, Sequence

import mpmath

from .driving import DrivingOrbit, DrivingSystem
from .shift import SymbolicSystem


def log_sum_exp(values) -> float:
    xs = [x for x in values]
    if not xs:
        return -math.inf
    m = max(xs)
    if m == -math.inf:
        return -math.inf
    if m == math.inf:
        return math.inf
    return m + math.log(math.fsum(math.exp(x - m) for x in xs))


@dataclass(frozen=True)
class HolderClass:
    """Oscillation class of a potential: |f(x)-f(y)| <= constant *
    d(x,y)**exponent in the symbolic word metric."""

    exponent: float
    constant: float = 0.0

    def __post_init__(self):
        if self.exponent <= 0:
            raise ValueError("Hölder exponent must be positive")
        if self.constant < 0:
            raise ValueError("Hölder constant must be nonnegative")

    def log_distortion(self) -> float:
        """log of the Birkhoff-sum distortion bound exp(v * sum_k e^{-k beta})."""
        if self.constant == 0.0:
            return 0.0
        return self.constant / (1.0 - math.exp(-self.exponent))


@dataclass(frozen=True)
class FirstSymbolPotential:
    """Potential scale * base(state, leading symbol), with optional declared
    sup/inf tables and analytic tail moments for countable alphabets.

    base gives the cylinder sup of the unscaled potential per symbol; base_inf
    (defaulting to base) the cylinder inf.  When they coincide and the Hölder
    constant is zero, all cylinder bounds are exact and sup == inf.
    """

    system: SymbolicSystem
    base: Callable[[object, int], float]
    scale: float = 1.0
    base_inf: Optional[Callable[[object, int], float]] = None
    holder: HolderClass = HolderClass(exponent=1.0, constant=0.0)
    tail_moment: Optional[Callable[[float, object], float]] = None
    base_range: Optional[Callable[[int], tuple[float, float]]] = None
    exact_base: Optional[Callable[[object, int], Fraction]] = None
    driving: Optional[DrivingSystem] = None

    # -- basic evaluation ---------------------------------------------------

    @property
    def exact_on_cylinders(self) -> bool:
        return self.holder.constant == 0.0 and self.base_inf is None

    def value(self, state, e: int) -> float:
        return self.scale * self.base(state, e)

    def value_bounds(self, state, e: int) -> tuple[float, float]:
        hi = self.base(state, e)
        lo = self.base_inf(state, e) if self.base_inf is not None else hi
        a, b = self.scale * hi, self.scale * lo
        return (a, b) if a >= b else (b, a)

    def word_sum(self, orbit: DrivingOrbit, k: int, word: Sequence[int]) -> float:
        """Exact Birkhoff sum for cylinder-constant potentials."""
        return self.scale * math.fsum(self.base(orbit.state(k + j), word[j]) for j in range(len(word)))

    def sum_bounds(
        self, orbit: DrivingOrbit, k: int, word: Sequence[int], n: Optional[int] = None
    ) -> tuple[float, float]:
        """(sup, inf) of the n-term Birkhoff sum over the cylinder of `word`.

        len(word) may exceed n; the extra symbols tighten the Hölder
        oscillation bound on the leading n terms.
        """
        m = len(word)
        n = m if n is None else n
        if n > m:
            raise ValueError("cylinder must pin down at least the summed symbols")
        hi = lo = 0.0
        for j in range(n):
            a, b = self.value_bounds(orbit.state(k + j), word[j])
            hi += a
            lo += b
        v = abs(self.scale) * self.holder.constant
        if v > 0.0:
            beta = self.holder.exponent
            osc = v * math.exp(-beta * (m - n + 1)) * (1 - math.exp(-beta * n)) / (1 - math.exp(-beta))
            hi = min(hi, lo + osc)
        return (hi, lo)

    def log_distortion(self) -> float:
        return abs(self.scale) * self.holder.log_distortion()

    def scaled(self, s: float) -> "FirstSymbolPotential":
        return replace(self, scale=float(s))

    # -- transfer-operator unit bounds ---------------------------------------

    def unit_transfer_bounds(self, state, symbols: Optional[Sequence[int]] = None) -> tuple[float, float]:
        """(log sup, log inf) over points of the transfer operator applied to 1.

        With a finite symbol set the sup/inf run over the admissible leading
        symbol of the argument; `symbols=None` means the whole alphabet
        including the analytic tail (full shifts only), where sup == inf.
        """
        if symbols is None:
            if self.system.incidence_kind != "full":
                raise ValueError("full-alphabet transfer bounds need a full shift")
            vals = [self.value(state, e) for e in self.system.edges]
            if self.system.has_tail:
                if self.tail_moment is None:
                    raise ValueError("countable alphabet needs a tail moment hook")
                vals.append(self.tail_moment(self.scale, state))
            total = log_sum_exp(vals)
            return (total, total)
        symbols = tuple(sorted(symbols))
        if self.system.incidence_kind == "full":
            total = log_sum_exp(self.value(state, e) for e in symbols)
            return (total, total)
        per_target = []
        for b in symbols:
            incoming = [self.value(state, e) for e in symbols if self.system.admissible_pair(e, b)]
            per_target.append(log_sum_exp(incoming))
        return (max(per_target), min(per_target))

    def sup_log_norm(self, symbols: Sequence[int]) -> float:
        """Uniform bound over fibers of |f| restricted to a finite symbol set."""
        worst = 0.0
        for e in symbols:
            if self.base_range is not None:
                lo, hi = self.base_range(e)
            else:
                vals = [self.base(s, e) for s in self._support_states()]
                lo, hi = min(vals), max(vals)
            worst = max(worst, abs(self.scale * lo), abs(self.scale * hi))
        return worst

    def _support_states(self):
        return self.driving.state_support() if self.driving is not None else (None,)

    # -- exact arithmetic ------------------------------------------------------

    def exact_weight_fn(self, arithmetic: str) -> Callable[[object, int], object]:
        """Per-symbol weights exp(scale * base) as Fractions or mpmath floats.

        The Fraction path requires rational base weights and an integer scale;
        it keeps sandwich margins and Gibbs brackets provably nonnegative.
        """
        if not self.exact_on_cylinders or self.exact_base is None:
            raise ValueError("exact weights need a cylinder-constant rational potential")
        if arithmetic == "fraction":
            s = self.scale
            if s != int(s):
                raise ValueError("Fraction weights need an integer scale")
            s = int(s)
            return lambda state, e: self.exact_base(state, e) ** s
        if arithmetic == "mpf":
            s = mpmath.mpf(self.scale)

            def weight(state, e):
                r = self.exact_base(state, e)
                return mpmath.power(mpmath.mpf(r.numerator) / mpmath.mpf(r.denominator), s)

            return weight
        raise ValueError(f"unknown arithmetic {arithmetic!r}")


def zero_potential(system: SymbolicSystem) -> FirstSymbolPotential:
    return FirstSymbolPotential(
        system=system,
        base=lambda state, e: 0.0,
        base_range=lambda e: (0.0, 0.0),
        exact_base=lambda state, e: Fraction(1),
    )


def table_potential(
    system: SymbolicSystem, table, driving: Optional[DrivingSystem] = None
) -> FirstSymbolPotential:
    """Custom first-symbol potential from a {state: {edge: value}} table."""
    def base(state, e):
        return float(table[state][e])

    return FirstSymbolPotential(system=system, base=base, driving=driving)


def geometric_potential(gdms) -> FirstSymbolPotential:
    """Log-derivative potential of a map system, at cylinder resolution.

    For similarity instances the value on a cylinder is exactly the sum of
    log ratios along the word, sup == inf, and the distortion factor is 1.
    Declared-bounds conformal instances get the oscillation class with
    exponent -alpha * log(contraction) and the declared constant.
    """
    kappa = gdms.contraction
    alpha = gdms.derivative_holder_exp
    lip = gdms.derivative_holder_const
    if lip > 0.0:
        constant = lip / (1.0 - kappa ** alpha) * gdms.max_diameter() ** alpha
    else:
        constant = 0.0
    holder = HolderClass(exponent=-alpha * math.log(kappa), constant=constant)

    exact = None
    if gdms.ratio_fraction is not None:
        exact = lambda state, e: gdms.ratio_fraction(e, state)

    return FirstSymbolPotential(
        system=gdms.symbolic,
        base=lambda state, e: gdms.log_ratio(e, state),
        holder=holder,
        tail_moment=gdms.tail_log_moment,
        base_range=gdms.log_ratio_range,
        exact_base=exact,
        driving=gdms.driving,
    )


# ---------------------------------------------------------------------------
# Summability
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SummabilityReport:
    scale: float
    log_upper_expectation: float  # expectation of the log transfer sup
    log_lower_expectation: float  # expectation of the log transfer inf
    summable: bool
    normal_summable: bool
    method: str
    per_state: Optional[dict] = None


def summability(
    potential: FirstSymbolPotential,
    s: Optional[float] = None,
    driving: Optional[DrivingSystem] = None,
    symbols: Optional[Sequence[int]] = None,
) -> SummabilityReport:
    """Summability flags via the marginal expectation of the log transfer sup.

    Exact when the driving marginal has closed form (all supported kinds);
    per-state values are reported for inspection.
    """
    pot = potential if s is None else potential.scaled(s)
    drv = driving if driving is not None else potential.driving
    if drv is None:
        raise ValueError("summability needs the driving system")

    per_state = {}

    def upper(state):
        hi, lo = pot.unit_transfer_bounds(state, symbols)
        per_state[state] = (hi, lo)
        return hi

    up = drv.expectation(upper)
    low = drv.expectation(lambda st: per_state[st][1] if st in per_state else pot.unit_transfer_bounds(st, symbols)[1])
    return SummabilityReport(
        scale=pot.scale,
        log_upper_expectation=up,
        log_lower_expectation=low,
        summable=up < math.inf,
        normal_summable=up < math.inf and low > -math.inf,
        method="closed-form",
        per_state=per_state,
    )


def s_infinity(
    potential: FirstSymbolPotential,
    driving: Optional[DrivingSystem] = None,
    tol: float = 1e-6,
    start: float = 1.0,
) -> float:
    """Infimum of scales at which the scaled potential is summable.

    Finite (materialized, tail-free) alphabets give -inf; otherwise bisection
    on the summability flag down to the requested tolerance.
    """
    if not potential.system.has_tail:
        return -math.inf

    def ok(s):
        return summability(potential, s=s, driving=driving).summable

    hi = start
    for _ in range(64):
        if ok(hi):
            break
        hi *= 2.0
    else:
        raise ValueError("no summable scale found")
    lo = hi - 1.0
    for _ in range(64):
        if not ok(lo):
            break
        lo = 2.0 * lo - hi
    else:
        return -math.inf
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)
