"""Canonical text forms for exact numbers."""

from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from sidonlab import SpecError
from sidonlab.textnum import fmt_frac, fmt_int, parse_frac, parse_int


def test_int_round_trip():
    assert parse_int(fmt_int(14049280)) == 14049280
    assert parse_int("  7 ") == 7
    assert parse_int(7) == 7


def test_int_validation():
    with pytest.raises(SpecError):
        parse_int("7.5")
    with pytest.raises(SpecError):
        parse_int(True)
    with pytest.raises(SpecError):
        parse_int(None)
    with pytest.raises(SpecError) as err:
        parse_int(1, field="stages", minimum=2)
    assert "stages" in str(err.value)


def test_frac_canonical_form():
    assert fmt_frac(Fraction(4, 2)) == "2"
    assert fmt_frac(Fraction(131, 256)) == "131/256"
    assert parse_frac("3/6") == Fraction(1, 2)
    assert parse_frac("19") == 19
    assert parse_frac(Fraction(1, 3)) == Fraction(1, 3)


def test_frac_validation():
    with pytest.raises(SpecError):
        parse_frac("1/0")
    with pytest.raises(SpecError):
        parse_frac("x/y")
    with pytest.raises(SpecError):
        parse_frac(1.5)
    with pytest.raises(SpecError):
        parse_frac(True)


@given(st.integers())
def test_int_text_round_trip(n):
    assert parse_int(fmt_int(n)) == n


@given(st.fractions())
def test_frac_text_round_trip(q):
    assert parse_frac(fmt_frac(q)) == q
