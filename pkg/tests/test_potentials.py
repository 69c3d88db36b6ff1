import math
from dataclasses import replace

import pytest

from rcgdms.driving import deterministic, sample_orbit
from rcgdms.potentials import (
    FirstSymbolPotential,
    HolderClass,
    geometric_potential,
    s_infinity,
    summability,
    zero_potential,
)
from rcgdms.shift import full_shift

LOG2 = math.log(2.0)
LOG3 = math.log(3.0)


def test_cantor_birkhoff_sum_on_cylinder(cantor):
    zeta = geometric_potential(cantor)
    orbit = sample_orbit(cantor.driving, 0)
    hi, lo = zeta.sum_bounds(orbit, 0, (0, 1))
    assert hi == lo == pytest.approx(2 * math.log(1 / 3), abs=1e-14)


def test_period2_symbol_value(period2):
    zeta = geometric_potential(period2)
    assert zeta.value("a", 0) == pytest.approx(math.log(0.5))
    assert zeta.value("b", 1) == pytest.approx(math.log(0.25))


def test_paper_symbol_value(paper):
    zeta = geometric_potential(paper)
    assert zeta.value(2, 1) == pytest.approx(-2 * LOG2)


def test_cantor_transfer_sum(cantor):
    zeta = geometric_potential(cantor)
    hi, lo = zeta.unit_transfer_bounds(0, None)
    assert math.exp(hi) == pytest.approx(2 / 3, abs=1e-14)
    assert hi == lo


def test_paper_per_fiber_transfer_bound(paper):
    zeta = geometric_potential(paper)
    for state in range(1, 41):
        hi, _ = zeta.unit_transfer_bounds(state, None)
        assert math.exp(hi) <= 0.5 + 1e-12


def test_paper_summable_at_half(paper):
    zeta = geometric_potential(paper)
    rep = summability(zeta, s=0.5)
    assert rep.summable and rep.normal_summable
    assert math.isfinite(rep.log_upper_expectation)
    # stable under deeper truncation of the driving weights
    import rcgdms.instances as inst

    deeper = inst.paper_example(weight_states=30)
    rep2 = summability(geometric_potential(deeper), s=0.5)
    assert rep.log_upper_expectation == pytest.approx(rep2.log_upper_expectation, abs=1e-10)


def test_summability_flags_divergence(paper):
    zeta = geometric_potential(paper)
    assert not summability(zeta, s=-0.25).summable
    assert summability(zeta, s=0.25).summable


def test_s_infinity_finite_alphabet(cantor):
    assert s_infinity(geometric_potential(cantor)) == -math.inf


def test_s_infinity_pure_tail(pure_tail):
    got = s_infinity(geometric_potential(pure_tail))
    assert abs(got) <= 1e-6


def test_s_infinity_paper(paper):
    got = s_infinity(geometric_potential(paper))
    assert abs(got) <= 1e-6


def test_transfer_monotone_in_scale(paper):
    zeta = geometric_potential(paper)
    grid = [0.25, 0.5, 1.0, 2.0]
    for state in (1, 2, 3):
        values = [zeta.scaled(s).unit_transfer_bounds(state, None)[0] for s in grid]
        assert all(values[i] >= values[i + 1] for i in range(len(values) - 1))


def test_restricted_transfer_bounds_golden(golden):
    zeta = geometric_potential(golden)
    hi, lo = zeta.unit_transfer_bounds(0, (0, 1))
    # incoming sums: target 0 sees both symbols, target 1 only symbol 0
    assert math.exp(hi) == pytest.approx(2 / 3)
    assert math.exp(lo) == pytest.approx(1 / 3)


def test_sup_norm_over_connector_alphabet(period2):
    zeta = geometric_potential(period2)
    assert zeta.sup_log_norm((0,)) == pytest.approx(math.log(4))
    assert zeta.scaled(0.5).sup_log_norm((0, 1)) == pytest.approx(0.5 * math.log(4))


def test_first_symbol_potential_has_no_distortion(cantor):
    zeta = geometric_potential(cantor)
    assert zeta.log_distortion() == 0.0
    assert zeta.exact_on_cylinders


def test_declared_bounds_oscillation():
    # synthetic non-similarity data: per-symbol value ranges plus a Hölder class
    sym = full_shift((0, 1))
    pot = FirstSymbolPotential(
        system=sym,
        base=lambda st, e: -1.0 if e == 0 else -2.0,
        base_inf=lambda st, e: -1.1 if e == 0 else -2.05,
        holder=HolderClass(exponent=0.7, constant=0.3),
        driving=deterministic(0),
    )
    orbit = sample_orbit(pot.driving, 0)
    word = (0, 1, 0, 1, 0, 1)
    for n in (2, 4, 6):
        hi, lo = pot.sum_bounds(orbit, 0, word, n)
        assert hi >= lo
        beta, v = 0.7, 0.3
        osc = v * sum(math.exp(-beta * (len(word) - j)) for j in range(n))
        per_symbol_width = sum(0.1 if word[j] == 0 else 0.05 for j in range(n))
        assert hi - lo <= min(per_symbol_width, osc) + 1e-12
    assert math.exp(pot.log_distortion()) >= 1.0
    # deeper cylinders pin the same partial sum more tightly
    w_hi, w_lo = pot.sum_bounds(orbit, 0, word, 2)
    n_hi, n_lo = pot.sum_bounds(orbit, 0, word[:2], 2)
    assert (w_hi - w_lo) <= (n_hi - n_lo) + 1e-12


def test_scaling_shares_tables(twoscale):
    zeta = geometric_potential(twoscale)
    half = zeta.scaled(0.5)
    assert half.value(0, 1) == pytest.approx(0.5 * zeta.value(0, 1))
    assert half.driving is zeta.driving
    # distortion scales with |s|
    assert half.log_distortion() == pytest.approx(0.5 * zeta.log_distortion())


def test_zero_potential_counts(golden):
    pot = replace(zero_potential(golden.symbolic), driving=golden.driving)
    hi, lo = pot.unit_transfer_bounds(0, (0, 1))
    assert math.exp(hi) == pytest.approx(2.0)
    assert math.exp(lo) == pytest.approx(1.0)
