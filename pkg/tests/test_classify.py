"""Tensor-power classification: thresholds, series evidence, alpha recovery."""

from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sidonlab import (
    BlockFamily,
    ClassifyError,
    SidonBlockRule,
    block_collapsed_sums,
    builtin_spec,
    classify_power,
    classify_range,
    infer_alpha,
    parse_spec,
    series_partial_sums,
)


def test_alpha19_stock_table():
    spec = builtin_spec("factorial-sidon-alpha19")
    r10 = classify_power(spec, 10)
    assert (r10.conservative, r10.spectral) == (True, "singular")
    r11 = classify_power(spec, 11)
    assert (r11.conservative, r11.spectral) == (True, "absolutely_continuous")
    assert classify_power(spec, 20).conservative
    assert not classify_power(spec, 21).conservative


def test_boundary_values_sit_on_the_right_side():
    # d = 1 + alpha and d = 1 + alpha/2 are inclusive boundaries.
    assert classify_power(Fraction(4), 5).conservative
    assert not classify_power(Fraction(4), 6).conservative
    assert classify_power(Fraction(4), 3).spectral == "singular"
    assert classify_power(Fraction(4), 4).spectral == "absolutely_continuous"
    # Half-integer alpha puts the spectral boundary between integers.
    assert classify_power(Fraction(9, 2), 3).spectral == "singular"
    assert classify_power(Fraction(9, 2), 4).spectral == "absolutely_continuous"


def test_evidence_margins_frozen_case():
    report = classify_power(builtin_spec("factorial-sidon"), 11)
    by_kind = {ev.label.split(" ", 1)[0]: ev for ev in report.evidence}
    assert by_kind["recurrence"].margin == 10
    assert by_kind["density"].margin == 0
    assert by_kind["block"].exponent == 0
    assert by_kind["block"].margin == 0
    assert by_kind["block"].diverges
    assert report.spectral == "singular"
    assert "1 + alpha" in report.rule


def test_d_one_is_always_conservative_and_singular():
    for alpha in (Fraction(0), Fraction(1, 3), Fraction(7)):
        report = classify_power(alpha, 1)
        assert report.conservative
        assert report.spectral == "singular"


def test_claims_cross_check():
    _, disc = classify_range(builtin_spec("factorial-sidon"), [10, 11, 20])
    assert len(disc) == 1
    assert "lebesgue" in disc[0] and "singular" in disc[0] and "d=11" in disc[0]

    reports, disc = classify_range(builtin_spec("factorial-sidon-alpha19"), [10, 11, 20])
    assert disc == []
    notes = {r.d: r.annotations for r in reports}
    assert any("agrees" in note for note in notes[10])
    assert any("conditional" in note for note in notes[11])


def test_claims_override():
    _, disc = classify_range(Fraction(19), [10], claims=[(10, "singular")])
    assert disc == []
    _, disc = classify_range(Fraction(19), [11], claims=[(11, "singular")])
    assert len(disc) == 1


def test_classify_validation():
    with pytest.raises(ClassifyError):
        classify_power(Fraction(2), 0)
    with pytest.raises(ClassifyError):
        classify_power(parse_spec("h1: '2'\nstages:\n- {r: 2, spacers: [0, 0]}\n"), 2)
    with pytest.raises(ClassifyError):
        classify_range(Fraction(2), [2], claims=[(2, "mixing")])
    family = BlockFamily(alpha=Fraction(3), block_cut=lambda k: k + 1, summable=False)
    with pytest.raises(ClassifyError, match="not summable"):
        classify_power(family, 2)


def test_block_family_coercions():
    assert BlockFamily.of(Fraction(5, 2)).alpha == Fraction(5, 2)
    assert BlockFamily.of(3).alpha == 3
    assert BlockFamily.of(builtin_spec("factorial-sidon")).alpha == 20
    rule = SidonBlockRule(alpha=Fraction(7))
    assert BlockFamily.of(rule).block_cut(3) == rule.block_cut(3)


def test_series_partial_sums_integer_exponent_exact():
    sums = series_partial_sums([2] * 6, Fraction(1), 6)
    assert sums == [Fraction(k, 2) for k in range(1, 7)]
    assert series_partial_sums(lambda j: 2, Fraction(0), 4) == [1, 2, 3, 4]


def test_series_partial_sums_fractional_exponent():
    sums = series_partial_sums([4] * 3, Fraction(1, 2), 3)
    for k, value in enumerate(sums, start=1):
        assert abs(float(value) - k / 2) < 1e-12
    assert [float(a) < float(b) for a, b in zip(sums, sums[1:])] == [True, True]


def test_block_collapsed_sums_at_the_spectral_boundary():
    # At d = 1 + alpha/2 the collapsed exponent is zero; with integer alpha
    # every block contributes exactly 1, so partial sums count blocks.
    family = SidonBlockRule(alpha=Fraction(20))
    assert block_collapsed_sums(family, Fraction(20), 4) == [1, 2, 3, 4]
    fractional = block_collapsed_sums(SidonBlockRule(alpha=Fraction(39, 2)), Fraction(39, 2), 3)
    for k, value in enumerate(fractional, start=1):
        assert k - 1 < float(value) <= k


def test_infer_alpha_stock_families():
    assert infer_alpha(builtin_spec("factorial-sidon")).alpha == 20
    assert infer_alpha(builtin_spec("factorial-sidon-alpha19")).alpha == 19
    assert infer_alpha(SidonBlockRule(alpha=Fraction(1, 2))).alpha == Fraction(1, 2)


def test_infer_alpha_from_blocks():
    assert infer_alpha([(4, 2), (9, 3)]).alpha == Fraction(1, 2)
    assert infer_alpha([(2, 1), (3, 1)]).alpha == 0
    assert infer_alpha([(8, 2), (27, 3), (64, 4)]).alpha == Fraction(1, 3)


def test_infer_alpha_refusals():
    single = infer_alpha([(4, 2)])
    assert single.alpha is None and "insufficient" in single.reason
    inconsistent = infer_alpha([(24, 4), (120, 5)])
    assert inconsistent.alpha is None and "inconsistent" in inconsistent.reason
    capped = infer_alpha([(8, 2), (27, 3), (64, 4)], max_denominator=2)
    assert capped.alpha is None and "denominator" in capped.reason


def test_infer_alpha_from_explicit_stage_runs():
    spec = parse_spec(
        "h1: '2'\n"
        "stages:\n"
        "- {r: 2, spacers: [0, 0]}\n"
        "- {r: 2, spacers: [0, 0]}\n"
        "- {r: 3, spacers: [0, 0, 0]}\n"
        "- {r: 3, spacers: [0, 0, 0]}\n"
        "- {r: 3, spacers: [0, 0, 0]}\n"
    )
    inference = infer_alpha(spec)
    assert inference.alpha == 1
    assert inference.blocks == ((2, 2), (3, 3))


@settings(max_examples=120, deadline=None)
@given(
    p=st.integers(min_value=0, max_value=12),
    q=st.integers(min_value=1, max_value=5),
    d=st.integers(min_value=1, max_value=30),
)
def test_thresholds_match_inequalities(p, q, d):
    alpha = Fraction(p, q)
    report = classify_power(alpha, d)
    assert report.conservative == (d <= 1 + alpha)
    assert (report.spectral == "singular") == (d <= 1 + alpha / 2)
    # Singularity of the product spectrum forces conservativity, never the
    # other way around.
    if report.spectral == "singular":
        assert report.conservative


@settings(max_examples=60, deadline=None)
@given(
    p=st.integers(min_value=0, max_value=8),
    q=st.integers(min_value=1, max_value=4),
)
def test_infer_alpha_is_consistent_with_observed_blocks(p, q):
    # Few blocks can underdetermine alpha (1/4 and 1/3 give the same first
    # three factorial block lengths), so the contract is consistency with
    # every observed block, not recovery of the generating value.
    from sidonlab import floor_power

    alpha = Fraction(p, q)
    rule = SidonBlockRule(alpha=alpha)
    blocks = rule.blocks(3)
    inferred = infer_alpha(blocks, max_denominator=64)
    assert inferred.alpha is not None
    assert inferred.alpha.denominator <= 64
    for cut, length in blocks:
        assert floor_power(cut, inferred.alpha) == length
