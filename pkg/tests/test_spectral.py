"""Correlation tables, product powers, partial-sum trends, Fejer grids."""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sidonlab import (
    Construction,
    SpecError,
    UnstableTableError,
    autocorrelation,
    builtin_spec,
    fejer_density,
    level_set_correlation,
    orbit_count_correlation,
    power_sum_trend,
    product_correlations,
    spectral_diagnostics,
)

from conftest import explicit_construction


def test_paper_table_freezes_at_stage_two(paper_con):
    table = autocorrelation(paper_con, 1, 500)
    assert table.stable
    assert table.stabilized_at == 2
    assert table.values[0] == 1
    assert table.values[110] == Fraction(1, 2)
    assert all(table.values[m] == 0 for m in range(1, 110))
    assert all(table.values[m] == 0 for m in range(111, 501))


def test_zero_lag_only_is_the_base_measure(paper_con, odometer_con):
    assert autocorrelation(paper_con, 1, 0).values == (1,)
    assert autocorrelation(odometer_con, 1, 0).values == (1,)


def test_explicit_spec_table_is_exact_and_stable():
    con = explicit_construction(2, (2, (0, 1)))
    table = level_set_correlation(con, 1, [0, 1], 4)
    assert table.stable and table.final_stage == 2
    assert table.values == (2, Fraction(3, 2), 1, Fraction(1, 2), 0)
    # The terminal tower is the whole space, so direct counting at stage 2
    # reproduces the engine exactly.
    assert list(table.values) == orbit_count_correlation(con, [0, 1, 2, 3], 2, 4)


def test_odometer_snapshot_values(odometer_con):
    snap = autocorrelation(odometer_con, 1, 500, stage_cap=11)
    assert snap.final_stage == 11
    assert snap.stabilized_at is None
    assert snap.unstable_lags == frozenset(range(1, 501))
    for m in (0, 1, 137, 500):
        assert snap.values[m] == Fraction(1024 - m, 1024)


def test_freeze_continuation_is_invariant(paper_con):
    frozen = autocorrelation(paper_con, 1, 200)
    thawed = autocorrelation(paper_con, 1, 200, freeze=False, stage_cap=4)
    assert thawed.final_stage == 4
    assert thawed.stabilized_at == 2
    assert thawed.values == frozen.values


def test_headroom_mode_stops_at_first_tall_tower(odometer_con, paper_con):
    table = level_set_correlation(odometer_con, 1, [0], 1, mode="headroom")
    assert table.final_stage == 2
    assert table.values == (1, Fraction(1, 2))
    assert table.unstable_lags == frozenset({1})
    # Ladder spacers outrun the lag budget, so the paper family is already
    # stable when the headroom stop fires.
    stable = level_set_correlation(paper_con, 1, [0], 120, mode="headroom")
    assert stable.final_stage == 2
    assert not stable.unstable_lags


def test_size_cap_yields_flagged_snapshot(odometer_con):
    table = autocorrelation(odometer_con, 1, 8, size_cap=64)
    assert table.final_stage == 7
    assert table.unstable_lags
    assert table.values[0] == 1


def test_correlation_validation(paper_con):
    with pytest.raises(SpecError):
        autocorrelation(paper_con, 1, -1)
    with pytest.raises(SpecError):
        level_set_correlation(paper_con, 1, [], 5)
    with pytest.raises(SpecError):
        level_set_correlation(paper_con, 1, [10], 5)
    with pytest.raises(SpecError):
        level_set_correlation(paper_con, 1, [0], 5, mode="exactly")


def test_product_correlations_power_the_table(paper_con):
    table = autocorrelation(paper_con, 1, 120)
    squared = product_correlations(table, 2)
    assert squared[0] == 1
    assert squared[110] == Fraction(1, 4)
    assert all(squared[m] == 0 for m in range(1, 110))


def test_unstable_table_requires_force(odometer_con):
    snap = autocorrelation(odometer_con, 1, 16, stage_cap=6)
    with pytest.raises(UnstableTableError) as err:
        product_correlations(snap, 2)
    assert err.value.lags
    forced = product_correlations(snap, 2, force=True)
    assert forced[1] == snap.values[1] ** 2
    with pytest.raises(UnstableTableError):
        fejer_density(snap, 1, 64)
    with pytest.raises(UnstableTableError):
        power_sum_trend(snap, 1)


def test_power_sum_trend_bounded(paper_con):
    trend = power_sum_trend(autocorrelation(paper_con, 1, 500), 1)
    assert trend.exponent == 2
    assert trend.label == "apparently bounded"
    assert trend.checkpoints == (
        (125, Fraction(1, 4)),
        (250, Fraction(1, 4)),
        (375, Fraction(1, 4)),
        (500, Fraction(1, 4)),
    )
    assert trend.slopes == (Fraction(1, 500), 0, 0, 0)


def test_power_sum_trend_divergent_and_inconclusive(paper_con, odometer_con):
    snap = autocorrelation(odometer_con, 1, 64, stage_cap=8)
    assert power_sum_trend(snap, 1, force=True).label == "apparently divergent"
    # A single late spike is not a trend.
    spike = power_sum_trend(autocorrelation(paper_con, 1, 120), 1)
    assert spike.label == "inconclusive"


def test_power_sum_trend_checkpoint_validation(paper_con):
    table = autocorrelation(paper_con, 1, 120)
    with pytest.raises(SpecError):
        power_sum_trend(table, 1, (10, 10, 20))
    with pytest.raises(SpecError):
        power_sum_trend(table, 1, (0, 50))
    with pytest.raises(SpecError):
        power_sum_trend(table, 1, (50, 500))
    with pytest.raises(SpecError):
        power_sum_trend(table, 0)


def test_fejer_density_closed_form(paper_con):
    # With a single nonzero lag the density is 1 + 2(1 - 110/(M+1)) c^d cos.
    table = autocorrelation(paper_con, 1, 120)
    for d in (1, 2, 3):
        density = fejer_density(table, d, 256)
        weight = 2 * (1 - Fraction(110, 121)) * Fraction(1, 2) ** d
        theta = 2 * np.pi * np.arange(256) / 256
        expected = 1 + float(weight) * np.cos(110 * theta)
        assert np.max(np.abs(np.asarray(density.values) - expected)) < 1e-12
        assert math.isclose(density.minimum, 1 - float(weight), abs_tol=1e-9)
        assert math.isclose(density.maximum, 1 + float(weight), abs_tol=1e-9)
        assert math.isclose(density.mean, 1.0, abs_tol=1e-12)


def test_fejer_density_warns_on_aliasing(paper_con):
    table = autocorrelation(paper_con, 1, 120)
    with pytest.warns(UserWarning, match="alias"):
        fejer_density(table, 1, 64)


def test_fejer_density_validation(paper_con):
    table = autocorrelation(paper_con, 1, 10)
    with pytest.raises(SpecError):
        fejer_density(table, 1, 0)
    with pytest.raises(SpecError):
        fejer_density(table, 0, 64)


def test_spectral_diagnostics_bundle(paper_con):
    diag = spectral_diagnostics(autocorrelation(paper_con, 1, 120), 2, 512)
    assert diag.power_sum_d == Fraction(1, 4)
    assert diag.power_sum_2d == Fraction(1, 16)
    assert 0 < diag.concentration <= 1
    assert diag.concentration_quantile == 0.01
    assert diag.trend.exponent == 4
    with pytest.raises(SpecError):
        spectral_diagnostics(
            autocorrelation(paper_con, 1, 10), 1, 64, quantile=0.0
        )


def test_correlations_never_exceed_zero_lag(paper_con, odometer_con):
    for con in (paper_con, odometer_con):
        table = autocorrelation(con, 1, 64, stage_cap=8, freeze=False)
        for m in range(1, 65):
            assert 0 <= table.values[m] <= table.values[0]


@settings(max_examples=40, deadline=None)
@given(
    r=st.integers(min_value=2, max_value=4),
    h1=st.integers(min_value=1, max_value=4),
    max_lag=st.integers(min_value=0, max_value=24),
)
def test_snapshot_matches_direct_counting(r, h1, max_lag):
    from sidonlab import levels_of_base

    con = Construction(builtin_spec("odometer", {"r": r, "h1": h1}))
    table = autocorrelation(con, 1, max_lag, stage_cap=5)
    stage = table.final_stage
    oracle = orbit_count_correlation(
        con, levels_of_base(con, 1, stage), stage, max_lag
    )
    assert list(table.values) == oracle
