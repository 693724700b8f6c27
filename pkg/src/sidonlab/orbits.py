"""Symbolic orbits of individual points under the transformation.

A point is addressed as a pair ``(stage K, level l)`` with ``0 <= l < h_K``,
plus a digit rule that answers, for any stage ``j >= K``, which column of
tower ``j`` the point sits in inside tower ``j+1``.  Digit rules are pure
functions of the stage index, so materializing a digit twice always gives
the same answer and points can be compared by re-addressing them into a
common tower.

Forward motion adds one level; at the top of the current tower the point is
re-addressed one stage up (level ``o_K(i_K) + l``) until headroom appears.
Backward motion is symmetric around level 0.  A point whose digits are all 1
sits on the global base, where no predecessor is materialized: backward
motion there raises ``LeftMaterializedSpaceError`` instead of inventing
history, and the mirrored forward case (all digits at the last zero-spacer
column) is capped the same way.

``iterate`` moves by whole in-tower jumps, so moving by ``m`` costs time in
the number of tower crossings, not ``|m|``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Protocol, runtime_checkable

from .construction import Construction
from .errors import (
    DigitsExhaustedError,
    LeftMaterializedSpaceError,
    SpecError,
)

DEFAULT_STAGE_SLACK = 96


@runtime_checkable
class DigitRule(Protocol):
    def digit(self, stage: int, r: int) -> int: ...


@dataclass(frozen=True)
class ConstantDigits:
    """Always the same column; the default column 1 follows the leftmost copies."""

    i: int = 1

    def __post_init__(self) -> None:
        if self.i < 1:
            raise SpecError(f"column digit must be >= 1, got {self.i}")

    def digit(self, stage: int, r: int) -> int:
        if not (1 <= self.i <= r):
            raise SpecError(f"constant digit {self.i} invalid at stage {stage} with r={r}")
        return self.i


@dataclass(frozen=True)
class ListDigits:
    """Explicit digits for stages ``start_stage, start_stage + 1, ...``."""

    start_stage: int
    digits: tuple[int, ...]

    def digit(self, stage: int, r: int) -> int:
        idx = stage - self.start_stage
        if idx < 0:
            raise SpecError(f"digit list starts at stage {self.start_stage}, asked for {stage}")
        if idx >= len(self.digits):
            raise DigitsExhaustedError(stage)
        d = self.digits[idx]
        if not (1 <= d <= r):
            raise SpecError(f"digit {d} out of range 1..{r} at stage {stage}")
        return d


@dataclass(frozen=True)
class SeededDigits:
    """Pseudorandom but reproducible digits: a pure function of (seed, stage).

    Seeding a fresh generator with a string keys the digit to the pair, so
    query order never matters.
    """

    seed: int

    def digit(self, stage: int, r: int) -> int:
        return random.Random(f"{self.seed}:{stage}").randrange(1, r + 1)


def digit_rule_from_config(value, seed: int, start_stage: int) -> DigitRule:
    """Digit rule from config shorthand: "seeded", "constant:<i>", or a digit list."""

    if isinstance(value, (list, tuple)):
        digits = tuple(int(d) for d in value)
        if any(d < 1 for d in digits):
            raise SpecError("explicit digits must be >= 1")
        return ListDigits(start_stage=start_stage, digits=digits)
    if value == "seeded":
        return SeededDigits(seed=seed)
    if isinstance(value, str) and value.startswith("constant:"):
        try:
            i = int(value.split(":", 1)[1])
        except ValueError as exc:
            raise SpecError(f"bad constant digit in {value!r}") from exc
        if i < 1:
            raise SpecError(f"constant digit must be >= 1, got {i}")
        return ConstantDigits(i=i)
    raise SpecError(
        f"unknown digit rule {value!r}; use 'seeded', 'constant:<i>', or a list of digits"
    )


@dataclass(frozen=True)
class OrbitPoint:
    stage: int
    level: int
    digits: DigitRule

    def __post_init__(self) -> None:
        if self.stage < 1 or self.level < 0:
            raise SpecError(f"invalid orbit address (stage={self.stage}, level={self.level})")


def _check_level(con: Construction, p: OrbitPoint) -> None:
    h = con.stage(p.stage).h
    if p.level >= h:
        raise SpecError(f"level {p.level} outside tower {p.stage} of height {h}")


def ascend(con: Construction, p: OrbitPoint) -> OrbitPoint:
    """Re-address one stage up, materializing the stage digit."""

    geom = con.stage(p.stage)
    if geom.r is None or geom.offsets is None:
        # The spec ends here; the digit needed to go higher does not exist.
        raise DigitsExhaustedError(p.stage)
    i = p.digits.digit(p.stage, geom.r)
    return OrbitPoint(stage=p.stage + 1, level=geom.offsets[i - 1] + p.level, digits=p.digits)


def readdress(con: Construction, p: OrbitPoint, J: int) -> OrbitPoint:
    if J < p.stage:
        raise SpecError(f"cannot re-address down from stage {p.stage} to {J}")
    _check_level(con, p)
    while p.stage < J:
        p = ascend(con, p)
    return p


def step(con: Construction, p: OrbitPoint, *, max_stage: int | None = None) -> OrbitPoint:
    return iterate(con, p, 1, max_stage=max_stage)


def inverse_step(con: Construction, p: OrbitPoint, *, max_stage: int | None = None) -> OrbitPoint:
    return iterate(con, p, -1, max_stage=max_stage)


def iterate(
    con: Construction, p: OrbitPoint, m: int, *, max_stage: int | None = None
) -> OrbitPoint:
    """Exact image of ``p`` under the ``m``-th power (``m`` of either sign)."""

    _check_level(con, p)
    if max_stage is None:
        max_stage = p.stage + DEFAULT_STAGE_SLACK
    stage, level = p.stage, p.level
    while m != 0:
        h = con.stage(stage).h
        if m > 0:
            room = h - 1 - level
            if room == 0:
                if stage >= max_stage:
                    raise LeftMaterializedSpaceError(stage, "forward")
                q = ascend(con, OrbitPoint(stage, level, p.digits))
                stage, level = q.stage, q.level
                continue
            take = min(m, room)
            level += take
            m -= take
        else:
            if level == 0:
                if stage >= max_stage:
                    raise LeftMaterializedSpaceError(stage, "backward")
                q = ascend(con, OrbitPoint(stage, level, p.digits))
                stage, level = q.stage, q.level
                continue
            take = min(-m, level)
            level -= take
            m += take
    return OrbitPoint(stage=stage, level=level, digits=p.digits)


def product_iterate(
    con: Construction, points: tuple[OrbitPoint, ...], m: int, *, max_stage: int | None = None
) -> tuple[OrbitPoint, ...]:
    """Image of a point of the d-fold product under the diagonal power."""

    return tuple(iterate(con, p, m, max_stage=max_stage) for p in points)


def same_point(con: Construction, a: OrbitPoint, b: OrbitPoint) -> bool:
    """Address-invariant equality (assumes both share one digit rule)."""

    J = max(a.stage, b.stage)
    return readdress(con, a, J).level == readdress(con, b, J).level


@dataclass(frozen=True)
class LevelSet:
    """A union of full-width levels of one tower."""

    stage: int
    levels: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.stage < 1:
            raise SpecError(f"stage must be >= 1, got {self.stage}")
        if not self.levels:
            raise SpecError("level set must not be empty")
        if list(self.levels) != sorted(set(self.levels)):
            raise SpecError("levels must be sorted and distinct")
        if self.levels[0] < 0:
            raise SpecError("levels must be nonnegative")


def level_set_measure(con: Construction, A: LevelSet) -> Fraction:
    geom = con.stage(A.stage)
    if A.levels[-1] >= geom.h:
        raise SpecError(f"level {A.levels[-1]} outside tower {A.stage} of height {geom.h}")
    return len(A.levels) * geom.w


@dataclass(frozen=True)
class ReturnStatistics:
    """Exact return proportions of a product box over a level set.

    ``proportions[m]`` is ``(mu(A meet T^-m A) / mu(A)) ** d``: the measure
    fraction of the box ``A x ... x A`` returning to itself under the
    diagonal ``m``-th power, evaluated at ``stage``.
    """

    d: int
    max_lag: int
    stage: int
    measure: Fraction
    proportions: tuple[Fraction, ...]
    unstable_lags: frozenset[int]


def return_statistics(
    con: Construction,
    A: LevelSet,
    d: int,
    M: int,
    *,
    size_cap: int | None = None,
    stage_cap: int | None = None,
) -> ReturnStatistics:
    """Return-time proportions of the ``d``-fold product box over ``A``.

    ``A`` is re-addressed to the first stage with ``h >= max(A) + M`` so that
    every lag up to ``M`` stays inside one tower, then the product structure
    factors the count exactly: the proportion at lag ``m`` is the one-
    dimensional ratio raised to the ``d``-th power.
    """

    from . import spectral

    if d < 1:
        raise SpecError(f"power must be >= 1, got {d}")
    table = spectral.level_set_correlation(
        con,
        A.stage,
        A.levels,
        M,
        mode="headroom",
        size_cap=size_cap,
        stage_cap=stage_cap,
    )
    c0 = table.values[0]
    proportions = tuple((c / c0) ** d for c in table.values)
    return ReturnStatistics(
        d=d,
        max_lag=M,
        stage=table.final_stage,
        measure=c0,
        proportions=proportions,
        unstable_lags=table.unstable_lags,
    )


def orbit_count_correlation(
    con: Construction, levels: list[int] | tuple[int, ...], stage: int, M: int
) -> list[Fraction]:
    """Correlations ``mu(A meet T^-m A)`` by direct orbit counting.

    For each start level, pushes a point forward by ``m`` through the orbit
    machinery and tests membership; levels whose orbit would leave tower
    ``stage`` before time ``m`` contribute nothing at that lag.  Serves as
    the independent cross-check for the pair-count route.
    """

    geom = con.stage(stage)
    h = geom.h
    member = set(levels)
    digits = ConstantDigits(1)
    out = [Fraction(0)] * (M + 1)
    for l in levels:
        if l >= h:
            raise SpecError(f"level {l} outside tower {stage} of height {h}")
        top = min(M, h - 1 - l)
        point = OrbitPoint(stage=stage, level=l, digits=digits)
        for m in range(0, top + 1):
            q = iterate(con, point, m)
            assert q.stage == stage
            if q.level in member:
                out[m] += geom.w
    return out
