"""Shared fixtures: stock constructions reused across test modules."""

from __future__ import annotations

import pytest

from sidonlab import (
    Construction,
    ConstructionSpec,
    ExplicitStages,
    StageParams,
    builtin_spec,
)


@pytest.fixture(scope="session")
def paper_con() -> Construction:
    return Construction(builtin_spec("factorial-sidon"))


@pytest.fixture(scope="session")
def alpha19_con() -> Construction:
    return Construction(builtin_spec("factorial-sidon-alpha19"))


@pytest.fixture(scope="session")
def odometer_con() -> Construction:
    return Construction(builtin_spec("odometer"))


def explicit_construction(h1: int, *stages: tuple[int, tuple[int, ...]]) -> Construction:
    """Build a finite construction from (r, spacers) pairs."""
    params = tuple(StageParams(r=r, spacers=tuple(s)) for r, s in stages)
    return Construction(ConstructionSpec(h1=h1, rule=ExplicitStages(params)))
