import math

import numpy as np
import pytest

from rcgdms.driving import sample_orbit
from rcgdms.gdms import (
    BlockTailExample,
    check_rbsc,
    code_point,
    example_weights,
    image_of_word,
    sample_limit_set,
)

LOG2 = math.log(2.0)


def test_cantor_code_point_fixed_point(cantor):
    orbit = sample_orbit(cantor.driving, 0)
    center, half = code_point(cantor, orbit, (0, 0, 0, 0))
    assert center - half == pytest.approx(0.0, abs=1e-15)
    assert center + half == pytest.approx(3.0 ** -4, abs=1e-15)
    assert 2 * half <= cantor.contraction ** 4 * cantor.max_diameter() + 1e-15


def test_cantor_code_point_mixed_word(cantor):
    orbit = sample_orbit(cantor.driving, 0)
    lo, hi = image_of_word(cantor, orbit, (0, 1, 1, 1))
    assert hi == pytest.approx(1 / 3, abs=1e-15)
    assert lo == pytest.approx(1 / 3 - 3.0 ** -4, abs=1e-15)


def test_period2_image_length(period2):
    orbit = sample_orbit(period2.driving, 0)
    lo, hi = image_of_word(period2, orbit, (0,))
    assert hi - lo == pytest.approx(0.5)
    # second map in the composition acts at the next fiber
    lo2, hi2 = image_of_word(period2, orbit, (0, 0))
    assert hi2 - lo2 == pytest.approx(0.5 * 0.25)


def test_nesting_and_diameter_decay(twoscale):
    orbit = sample_orbit(twoscale.driving, 0)
    word = (0, 1, 0, 0, 1)
    for n in range(1, len(word)):
        outer = image_of_word(twoscale, orbit, word[:n])
        inner = image_of_word(twoscale, orbit, word[: n + 1])
        assert outer[0] - 1e-15 <= inner[0] and inner[1] <= outer[1] + 1e-15
        assert inner[1] - inner[0] <= twoscale.contraction ** (n + 1) + 1e-15


def test_diameter_matches_derivative_product(twoscale):
    # for interval similarities the image diameter is exactly the product of
    # the ratios times the space diameter
    orbit = sample_orbit(twoscale.driving, 0)
    word = (1, 0, 1)
    lo, hi = image_of_word(twoscale, orbit, word)
    expected = math.exp(
        math.fsum(twoscale.log_ratio(e, orbit.state(k)) for k, e in enumerate(word))
    )
    assert hi - lo == pytest.approx(expected, rel=1e-12)


def test_inadmissible_prefix_rejected(golden):
    orbit = sample_orbit(golden.driving, 0)
    with pytest.raises(ValueError, match="inadmissible"):
        code_point(golden, orbit, (1, 1))


def test_limit_set_depth2_exhaustive(cantor):
    orbit = sample_orbit(cantor.driving, 0)
    sample = sample_limit_set(cantor, orbit, depth=2)
    lefts = sorted(p - sample.radius_bound / 2 for p in sample.points)
    starts = [image_of_word(cantor, orbit, w)[0] for w in sample.words]
    assert sorted(starts) == pytest.approx([0.0, 2 / 9, 2 / 3, 2 / 3 + 2 / 9])
    assert len(sample.points) == 4
    assert sample.radius_bound == pytest.approx(3.0 ** -2)


def test_limit_set_depth1_count(twoscale):
    orbit = sample_orbit(twoscale.driving, 0)
    sample = sample_limit_set(twoscale, orbit, depth=1)
    assert len(sample.points) == 2


def test_random_words_reproducible(paper):
    orbit = sample_orbit(paper.driving, 0)
    a = sample_limit_set(paper, orbit, depth=3, count=64, sampler="random-words", seed=5)
    b = sample_limit_set(paper, orbit, depth=3, count=64, sampler="random-words", seed=5)
    assert a.words == b.words
    assert np.array_equal(a.points, b.points)
    c = sample_limit_set(paper, orbit, depth=3, count=64, sampler="random-words", seed=6)
    assert a.words != c.words


def test_rbsc_margins(cantor, cantor_shrunk):
    assert check_rbsc(cantor, (0, 1)) == pytest.approx(0.0, abs=1e-15)
    assert check_rbsc(cantor_shrunk, (0, 1)) == pytest.approx(0.05, abs=1e-12)


def test_rbsc_single_map_margin():
    from fractions import Fraction

    from rcgdms.driving import deterministic
    from rcgdms.gdms import similarity_system
    from rcgdms.shift import full_shift

    sys1 = similarity_system(
        full_shift((0,)),
        deterministic(0),
        {0: {0: Fraction(1, 2)}},
        {0: {0: 0.2}},
    )
    assert check_rbsc(sys1, (0,)) == pytest.approx(0.2)


def test_rbsc_paper_positive(paper):
    margin = check_rbsc(paper, tuple(range(1, 17)), fiber_samples=(1, 2, 3, 4))
    assert margin > 0


def test_paper_ratio_schedule(paper):
    # first edge contracts by 1/4 in every fiber
    assert math.exp(paper.log_ratio(1, 1)) == pytest.approx(0.25)
    assert math.exp(paper.log_ratio(1, 7)) == pytest.approx(0.25)
    # unlocked block: state 2 activates block 2 (edges 2..9) at 2^-6
    assert math.exp(paper.log_ratio(2, 2)) == pytest.approx(2.0 ** -6)
    assert math.exp(paper.log_ratio(9, 2)) == pytest.approx(2.0 ** -6)
    # locked block decays like 8^-e
    assert math.exp(paper.log_ratio(3, 1)) == pytest.approx(8.0 ** -3)
    assert math.exp(paper.log_ratio(10, 2)) == pytest.approx(8.0 ** -10)
    # state 3 unlocks block 3 (edges 10..265) at 2^-12
    assert math.exp(paper.log_ratio(10, 3)) == pytest.approx(2.0 ** -12)


def test_paper_block_boundaries():
    tail = BlockTailExample(1024)
    assert tail.bounds[:4] == [0, 1, 9, 265]
    assert tail.block_of(1) == 1
    assert tail.block_of(2) == 2
    assert tail.block_of(9) == 2
    assert tail.block_of(10) == 3
    assert tail.block_of(265) == 3
    assert tail.block_of(266) == 4


def test_paper_ru_moment():
    tail = BlockTailExample(1024)
    value, divergent = tail.ru_moment(1.0)
    assert not divergent
    assert value == pytest.approx(0.5, abs=1e-12)
    for s in (0.25, 0.5, 0.75):
        _, divergent = tail.ru_moment(s)
        assert divergent


def test_paper_tail_moment_exactness():
    # at s = 1, full transfer mass per state i is sum of 2^{-l-1} over l <= i
    # plus a vanishing geometric remainder
    tail = BlockTailExample(1024)
    for i in (1, 2, 3, 5, 8):
        materialized = math.fsum(math.exp(tail.log_ratio(e, i)) for e in range(1, 1025))
        total = materialized + math.exp(tail.log_moment(1.0, i))
        expected = math.fsum(2.0 ** -(l + 1) for l in range(1, i + 1)) + 8.0 ** -(
            sum(2 ** (k * k - 1) for k in range(1, i + 1)) + 1
        ) / (1 - 0.125)
        assert total == pytest.approx(expected, rel=1e-12)


def test_paper_contraction_and_lower_bounds(paper):
    assert paper.contraction == 0.25
    assert paper.min_log_ratio(1) == pytest.approx(-2 * LOG2)
    assert paper.min_log_ratio(5) == pytest.approx(-5 * math.log(8.0))
    lo, hi = paper.log_ratio_range(7)
    assert lo == pytest.approx(-7 * math.log(8.0))
    assert hi == pytest.approx(-(2 * 2 + 2) * LOG2)  # block-2 value once unlocked


def test_paper_weights_decay():
    states, weights = example_weights(20)
    assert states[0] == 1
    assert weights[0] > 0.9
    assert all(weights[i + 1] < weights[i] for i in range(10))
