"""Canned map systems used across tests, docs and the CLI presets."""

from __future__ import annotations

import math
from fractions import Fraction

from . import gdms
from .driving import deterministic, periodic
from .gdms import RCGDMS, similarity_system
from .shift import GeometricTail, full_shift, from_matrix


def cantor() -> RCGDMS:
    """Two maps of ratio 1/3 at the ends of [0, 1]; middle-thirds limit set."""
    sym = full_shift((0, 1))
    drv = deterministic(0)
    r = {0: {0: Fraction(1, 3), 1: Fraction(1, 3)}}
    a = {0: {0: 0.0, 1: 2.0 / 3.0}}
    return similarity_system(sym, drv, r, a, name="cantor")


def cantor_shrunk() -> RCGDMS:
    """Ratio-3/10 variant mapped into [0.05, 0.95]; boundary-separated."""
    sym = full_shift((0, 1))
    drv = deterministic(0)
    r = {0: {0: Fraction(3, 10), 1: Fraction(3, 10)}}
    a = {0: {0: 0.05, 1: 0.65}}
    return similarity_system(sym, drv, r, a, name="cantor-shrunk")


def twoscale() -> RCGDMS:
    """Full 2-shift with ratios 1/2 and 1/4; nondegenerate exponent range."""
    sym = full_shift((0, 1))
    drv = deterministic(0)
    r = {0: {0: Fraction(1, 2), 1: Fraction(1, 4)}}
    a = {0: {0: 0.0, 1: 0.75}}
    return similarity_system(sym, drv, r, a, name="twoscale")


def period2() -> RCGDMS:
    """Full 2-shift driven by a 2-cycle of fibers: ratios 1/2 on fiber "a",
    1/4 on fiber "b"."""
    sym = full_shift((0, 1))
    drv = periodic(("a", "b"))
    r = {
        "a": {0: Fraction(1, 2), 1: Fraction(1, 2)},
        "b": {0: Fraction(1, 4), 1: Fraction(1, 4)},
    }
    a = {"a": {0: 0.0, 1: 0.5}, "b": {0: 0.0, 1: 0.5}}
    return similarity_system(sym, drv, r, a, name="period2")


def golden_mean() -> RCGDMS:
    """Ratio-1/3 maps under the golden-mean incidence (no symbol 1 after 1)."""
    sym = from_matrix((0, 1), [[1, 1], [1, 0]])
    drv = deterministic(0)
    r = {0: {0: Fraction(1, 3), 1: Fraction(1, 3)}}
    a = {0: {0: 0.0, 1: 2.0 / 3.0}}
    return similarity_system(sym, drv, r, a, name="golden-mean")


def pure_tail(cutoff: int = 64) -> RCGDMS:
    """Full shift on the positive integers with ratio 8^-e on every edge.

    The scaled geometric potential is summable exactly for s > 0, so the
    summability threshold sits at 0 and the pressure blows up there.
    """
    sym = full_shift(range(1, cutoff + 1), tail=GeometricTail(ratio=0.125, start=cutoff + 1))
    drv = deterministic(0)
    log8 = math.log(8.0)

    def log_ratio(e, state):
        return -e * log8

    def offset(e, state):
        # left-to-right packing, gaps irrelevant for symbolic quantities
        return sum(8.0 ** -k for k in range(1, e)) + e * 1e-3

    def log_moment(s, state):
        if s <= 0.0:
            return math.inf
        log_q = -s * log8
        return (cutoff + 1) * log_q - math.log1p(-math.exp(log_q))

    return RCGDMS(
        symbolic=sym,
        driving=drv,
        spaces={"v": (0.0, 1.0)},
        log_ratio=log_ratio,
        offset=offset,
        contraction=0.126,
        min_log_ratio=lambda e: -e * log8,
        log_ratio_range=lambda e: (-e * log8, -e * log8),
        tail_log_moment=log_moment,
        name="pure-tail",
    )


def paper_example(cutoff: int = 1024, weight_states: int = 40) -> RCGDMS:
    return gdms.build_paper_example(cutoff=cutoff, weight_states=weight_states)


PRESETS = {
    "cantor": cantor,
    "cantor-shrunk": cantor_shrunk,
    "twoscale": twoscale,
    "period2": period2,
    "golden-mean": golden_mean,
    "pure-tail": pure_tail,
    "paper-example": paper_example,
}
