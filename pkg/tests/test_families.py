"""Named families: block structure, ladder spacers, exact floor powers."""

from __future__ import annotations

import math
from fractions import Fraction

import pytest

from sidonlab import (
    OdometerRule,
    SidonBlockRule,
    SpecError,
    builtin_spec,
    family_names,
    floor_power,
)


def test_floor_power_exact_integer_exponent():
    assert floor_power(24, Fraction(19)) == 24**19
    assert floor_power(7, Fraction(0)) == 1


def test_floor_power_fractional_exponents():
    assert floor_power(2, Fraction(1, 2)) == 1
    assert floor_power(9, Fraction(1, 2)) == 3
    assert floor_power(8, Fraction(1, 3)) == 2
    value = floor_power(5, Fraction(7, 3))
    assert value**3 <= 5**7 < (value + 1) ** 3
    assert value == 42


def test_floor_power_rejects_bad_input():
    with pytest.raises(SpecError):
        floor_power(0, Fraction(1))
    with pytest.raises(SpecError):
        floor_power(2, Fraction(-1))


def test_factorial_blocks():
    rule = SidonBlockRule(alpha=Fraction(20))
    assert rule.block_cut(1) == 2
    assert rule.block_cut(3) == 24
    assert rule.blocks(2) == [(2, 2**20), (6, 6**20)]
    assert rule.block_of_stage(1) == 1
    assert rule.block_of_stage(2**20) == 1
    assert rule.block_of_stage(2**20 + 1) == 2
    assert rule.anchor(2) == 1 + 2**20


def test_geometric_blocks():
    rule = SidonBlockRule(alpha=Fraction(1, 2), growth="geometric", geometric_base=3)
    assert [cut for cut, _ in rule.blocks(3)] == [3, 9, 27]
    assert [length for _, length in rule.blocks(3)] == [1, 3, 5]


def test_ladder_spacers_scale_with_height():
    rule = SidonBlockRule(alpha=Fraction(20))
    p1 = rule.params_for(1, 10)
    assert p1.r == 2 and p1.spacers == (100, 1000)
    p2 = rule.params_for(2, 1120)
    assert p2.spacers == (11200, 112000)
    assert rule.min_spacer_floor(1, 10) == 100
    assert rule.min_spacer_floor(5, 1120) == 11200


def test_rule_validation():
    with pytest.raises(SpecError):
        SidonBlockRule(alpha=Fraction(-1))
    with pytest.raises(SpecError):
        SidonBlockRule(alpha=Fraction(1), growth="cubic")
    with pytest.raises(SpecError):
        SidonBlockRule(alpha=Fraction(1), growth="geometric", geometric_base=1)
    with pytest.raises(SpecError):
        SidonBlockRule(alpha=Fraction(1), spacer_base=0)
    with pytest.raises(SpecError):
        OdometerRule(r=1)


def test_odometer_rule_shape():
    rule = OdometerRule(r=3)
    params = rule.params_for(4, 27)
    assert params.r == 3 and params.spacers == (0, 0, 0)
    assert rule.min_spacer_floor(4, 27) == 0


def test_builtin_specs():
    names = family_names()
    assert "factorial-sidon" in names and "odometer" in names
    stock = builtin_spec("factorial-sidon")
    assert stock.h1 == 10
    assert stock.rule.alpha == 20
    assert stock.claims == ((10, "singular"), (11, "lebesgue"), (20, "conservative"))
    alpha19 = builtin_spec("factorial-sidon-alpha19")
    assert alpha19.rule.alpha == 19
    odo = builtin_spec("odometer")
    assert odo.h1 == 1 and odo.rule.r == 2 and odo.claims is None


def test_builtin_spec_params():
    spec = builtin_spec("odometer", {"r": 5, "h1": 3})
    assert spec.h1 == 3 and spec.rule.r == 5
    blocks = builtin_spec("sidon-blocks", {"alpha": "19/2", "h1": 4})
    assert blocks.h1 == 4 and blocks.rule.alpha == Fraction(19, 2)


def test_builtin_spec_rejects_garbage():
    with pytest.raises(SpecError):
        builtin_spec("no-such-family")
    with pytest.raises(SpecError):
        builtin_spec("odometer", {"alpha": 2})
    with pytest.raises(SpecError):
        builtin_spec("sidon-blocks", {})


def test_block_cut_growth_is_summable():
    # The classifier needs sum_k R_k^-delta < infinity; factorials dominate
    # any geometric sequence, which is a quick sanity proxy.
    rule = SidonBlockRule(alpha=Fraction(2))
    cuts = [cut for cut, _ in rule.blocks(6)]
    assert cuts == [math.factorial(k + 1) for k in range(1, 7)]
    assert all(b / a >= 3 for a, b in zip(cuts, cuts[1:]))
