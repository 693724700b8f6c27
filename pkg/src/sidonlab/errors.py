"""Exception types shared across the package.

Every structured failure carries enough context to act on: which stage was
missing, which cap was exceeded and by how much, which lag is unstable.
"""

from __future__ import annotations


class SidonLabError(Exception):
    """Base class for all package errors."""


class SpecError(SidonLabError):
    """A construction spec or experiment config is malformed.

    ``field`` points at the offending key (dotted path), ``line`` at the
    source line when the underlying parser reports one.
    """

    def __init__(self, message: str, *, field: str | None = None, line: int | None = None):
        self.field = field
        self.line = line
        where = []
        if field is not None:
            where.append(f"field {field!r}")
        if line is not None:
            where.append(f"line {line}")
        suffix = f" ({', '.join(where)})" if where else ""
        super().__init__(message + suffix)


class StageUnavailableError(SidonLabError):
    """The spec does not define parameters for the requested stage."""

    def __init__(self, stage: int, message: str | None = None):
        self.stage = stage
        super().__init__(message or f"stage {stage} has no defined cutting parameters")


class CapExceededError(SidonLabError):
    """A result-size or work cap would be exceeded.

    ``kind`` names the guarded quantity, ``requested`` the exact size the
    operation would need, ``cap`` the configured limit.
    """

    def __init__(self, kind: str, requested: int, cap: int, hint: str | None = None):
        self.kind = kind
        self.requested = requested
        self.cap = cap
        msg = f"{kind} would need {requested} > cap {cap}"
        if hint:
            msg += f"; {hint}"
        super().__init__(msg)


class DigitsExhaustedError(SidonLabError):
    """An explicit digit list ran out while re-addressing an orbit point."""

    def __init__(self, stage: int):
        self.stage = stage
        super().__init__(f"digit list exhausted: stage {stage} needs a column digit")


class LeftMaterializedSpaceError(SidonLabError):
    """Orbit motion left the part of the space the digits describe."""

    def __init__(self, stage: int, direction: str):
        self.stage = stage
        self.direction = direction
        super().__init__(
            f"orbit left the materialized space moving {direction} at stage {stage}"
        )


class UnstableTableError(SidonLabError):
    """A correlation table with unstable lags was used where exact limits are required."""

    def __init__(self, lags: frozenset[int]):
        self.lags = lags
        shown = sorted(lags)[:8]
        more = "..." if len(lags) > 8 else ""
        super().__init__(
            f"correlation table has {len(lags)} unstable lag(s) {shown}{more}; "
            "raise the stage cap or pass force=True to accept snapshot values"
        )


class ClassifyError(SidonLabError):
    """The classifier's hypotheses do not apply to the given family or power."""


class CacheCorruptionError(SidonLabError):
    """A cache record failed its checksum."""

    def __init__(self, path: str):
        self.path = path
        super().__init__(f"cache record failed checksum: {path}")
