"""Tower geometry of rank-one cutting-and-stacking constructions.

A construction starts from a single interval (tower of height ``h_1`` and
width 1).  At stage ``j`` the tower of ``h_j`` levels is cut into ``r_j``
columns of equal width, ``s_j(i) >= 0`` spacer levels are added on top of
column ``i``, and the columns are stacked left to right.  Everything here is
exact: heights and spacer counts are arbitrary-precision integers, widths and
measures are rationals.

The recurrence implemented is

    h_{j+1} = r_j * h_j + sum_i s_j(i)
    o_j(1) = 0,  o_j(i+1) = o_j(i) + h_j + s_j(i)
    w_{j+1} = w_j / r_j

where ``o_j(i)`` is the level of tower ``j+1`` at which the ``i``-th copy of
tower ``j`` starts.  The first copy sits at the bottom, so spacers only ever
appear above a copy, and the top spacer block of the last column is included
in the new height.
"""

from __future__ import annotations

import threading
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Protocol, runtime_checkable

from .errors import CapExceededError, SpecError, StageUnavailableError

DEFAULT_LEVEL_CAP = 1 << 20


@dataclass(frozen=True)
class StageParams:
    """Cutting parameters of one stage: the cut count and the spacer vector."""

    r: int
    spacers: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.r < 1:
            raise SpecError(f"cut count must be >= 1, got {self.r}")
        if len(self.spacers) != self.r:
            raise SpecError(
                f"spacer vector has {len(self.spacers)} entries for {self.r} columns"
            )
        for i, s in enumerate(self.spacers, start=1):
            if s < 0:
                raise SpecError(f"spacer s({i}) = {s} is negative")


@runtime_checkable
class StageRule(Protocol):
    """Source of per-stage cutting parameters.

    ``params_for`` may depend on the current height (spacer rules frequently
    scale with ``h_j``) and returns ``None`` when the rule defines no further
    stages.  ``min_spacer_floor`` returns a lower bound valid for the minimum
    spacer of *every* stage ``>= j`` given ``h_j``, or ``None`` when no such
    bound is known; correlation freezing relies on it.
    """

    def params_for(self, j: int, h: int) -> StageParams | None: ...

    def min_spacer_floor(self, j: int, h: int) -> int | None: ...


@dataclass(frozen=True)
class ExplicitStages:
    """A finite, literal list of stage parameters (stage 1 first)."""

    stages: tuple[StageParams, ...]

    def params_for(self, j: int, h: int) -> StageParams | None:
        if 1 <= j <= len(self.stages):
            return self.stages[j - 1]
        return None

    def min_spacer_floor(self, j: int, h: int) -> int | None:
        remaining = self.stages[j - 1 :]
        if not remaining:
            return None
        return min(min(st.spacers) for st in remaining)


@dataclass(frozen=True)
class ConstructionSpec:
    """Initial height plus the rule that yields each stage's parameters.

    ``label`` identifies the spec in reports.  ``claims`` optionally records
    outcome claims shipped with a stock construction as ``(power, outcome)``
    pairs; the classifier cross-checks them and reports disagreements.
    """

    h1: int
    rule: StageRule
    label: str = "explicit"
    claims: tuple[tuple[int, str], ...] | None = None

    def __post_init__(self) -> None:
        if self.h1 < 1:
            raise SpecError(f"h1 must be >= 1, got {self.h1}")


@dataclass(frozen=True)
class StageGeometry:
    """Exact geometry of tower ``j`` together with its cutting parameters.

    ``r``, ``spacers`` and ``offsets`` describe the transition from stage
    ``j`` to ``j+1``; they are ``None`` on the terminal stage of a finite
    spec.  ``offsets`` holds ``o_j(1..r_j)``.
    """

    j: int
    h: int
    w: Fraction
    r: int | None
    spacers: tuple[int, ...] | None
    offsets: tuple[int, ...] | None

    @property
    def measure(self) -> Fraction:
        return self.h * self.w

    def next_height(self) -> int:
        if self.r is None or self.spacers is None:
            raise StageUnavailableError(self.j)
        return self.r * self.h + sum(self.spacers)


def _offsets(h: int, params: StageParams) -> tuple[int, ...]:
    out = [0]
    for s in params.spacers[:-1]:
        out.append(out[-1] + h + s)
    return tuple(out)


def _with_params(j: int, h: int, w: Fraction, spec: ConstructionSpec) -> StageGeometry:
    params = spec.rule.params_for(j, h)
    if params is None:
        return StageGeometry(j=j, h=h, w=w, r=None, spacers=None, offsets=None)
    if params.r == 1:
        warnings.warn(
            f"stage {j} has a single column; the stage only appends spacers",
            stacklevel=3,
        )
    return StageGeometry(
        j=j, h=h, w=w, r=params.r, spacers=params.spacers, offsets=_offsets(h, params)
    )


def expand_stage(spec: ConstructionSpec, prev: StageGeometry) -> StageGeometry:
    """Geometry of stage ``prev.j + 1`` from stage ``prev.j``.

    Raises ``StageUnavailableError`` when ``prev`` carries no cutting
    parameters (the spec ended).
    """

    if prev.r is None or prev.spacers is None or prev.offsets is None:
        raise StageUnavailableError(prev.j)
    h_next = prev.r * prev.h + sum(prev.spacers)
    # Consistency of the offset chain with the height recurrence.
    assert prev.offsets[0] == 0
    assert prev.offsets[-1] + prev.h + prev.spacers[-1] == h_next
    return _with_params(prev.j + 1, h_next, prev.w / prev.r, spec)


class Construction:
    """Lazy, memoized stage chain for one spec.

    Thread-safe for concurrent readers; an optional stage cache (see
    ``sidonlab.cache``) persists geometry across processes.
    """

    def __init__(self, spec: ConstructionSpec, cache=None):
        self.spec = spec
        self._cache = cache
        self._stages: dict[int, StageGeometry] = {}
        self._lock = threading.RLock()

    def stage(self, j: int) -> StageGeometry:
        if j < 1:
            raise SpecError(f"stage index must be >= 1, got {j}")
        with self._lock:
            got = self._stages.get(j)
            if got is not None:
                return got
            top = max(self._stages) if self._stages else 0
            if top == 0:
                geom = self._load_or_compute(1, None)
                self._stages[1] = geom
                top = 1
            while top < j:
                geom = self._load_or_compute(top + 1, self._stages[top])
                self._stages[top + 1] = geom
                top += 1
            return self._stages[j]

    def _load_or_compute(self, j: int, prev: StageGeometry | None) -> StageGeometry:
        if self._cache is not None:
            got = self._cache.get(self.spec, j)
            if got is not None:
                return got
        if j == 1:
            geom = _with_params(1, self.spec.h1, Fraction(1), self.spec)
        else:
            assert prev is not None
            geom = expand_stage(self.spec, prev)
        if self._cache is not None:
            self._cache.put(self.spec, j, geom)
        return geom

    def max_stage(self) -> int | None:
        """Largest stage with defined geometry, ``None`` when unbounded."""

        if isinstance(self.spec.rule, ExplicitStages):
            return len(self.spec.rule.stages) + 1
        return None


def tower_heights(con: Construction, J: int) -> list[int]:
    """Heights ``h_1 .. h_J``."""

    if J < 1:
        raise SpecError(f"J must be >= 1, got {J}")
    return [con.stage(j).h for j in range(1, J + 1)]


def stage_measure(con: Construction, j: int) -> Fraction:
    """Exact measure ``h_j * w_j`` of the stage-``j`` tower."""

    return con.stage(j).measure


def levels_of_base(
    con: Construction, j0: int, J: int, cap: int = DEFAULT_LEVEL_CAP
) -> list[int]:
    """Sorted levels of tower ``J`` that make up the stage-``j0`` base ``E_{j0}``.

    ``E_{j0}`` is the bottom level of tower ``j0``; in tower ``J >= j0`` it
    splits into ``prod_{j0 <= j < J} r_j`` slices, one level each.  Refuses
    with ``CapExceededError`` before materializing more than ``cap`` levels.
    """

    if j0 < 1 or J < j0:
        raise SpecError(f"need 1 <= j0 <= J, got j0={j0}, J={J}")
    count = 1
    for j in range(j0, J):
        geom = con.stage(j)
        if geom.r is None:
            raise StageUnavailableError(geom.j)
        count *= geom.r
        if count > cap:
            raise CapExceededError("level count", count, cap, hint="lower J or raise cap")
    levels = [0]
    for j in range(j0, J):
        offsets = con.stage(j).offsets
        assert offsets is not None
        levels = sorted(o + l for o in offsets for l in levels)
    return levels
