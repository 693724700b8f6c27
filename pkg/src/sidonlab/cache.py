"""Persistent stage-geometry cache shared across processes.

Stage geometry is pure arithmetic, so entries are keyed by the canonical
hash of the construction spec plus the stage index; any spec that
serializes identically reuses them.  Each entry is one JSON file carrying
its own checksum.  Files that fail to parse or to verify are treated as
cache misses and reported through a warning, never as answers.  Writes go
through a directory-wide file lock and an atomic rename, so concurrent
runs can share one cache directory.

Point ``SIDONLAB_CACHE`` at a directory to enable the cache from the
command line and the service without touching call sites.
"""

from __future__ import annotations

import hashlib
import json
import os
import warnings
from fractions import Fraction
from pathlib import Path

from filelock import FileLock

from .construction import ConstructionSpec, StageGeometry

_FORMAT = 1


def _checksum(payload: dict) -> str:
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("ascii")).hexdigest()


class StageCache:
    """File-backed map from (spec hash, stage) to stage geometry."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self._lock = FileLock(str(self.directory / ".lock"))
        self._spec_hashes: dict[int, str] = {}
        self.hits = 0
        self.misses = 0
        self.writes = 0
        self.corrupt = 0

    def _spec_hash(self, spec: ConstructionSpec) -> str:
        got = self._spec_hashes.get(id(spec))
        if got is None:
            from .specfile import spec_sha256

            got = spec_sha256(spec)
            self._spec_hashes[id(spec)] = got
        return got

    def _path(self, sha: str, j: int) -> Path:
        return self.directory / f"{sha[:24]}-{j:05d}.json"

    def get(self, spec: ConstructionSpec, j: int) -> StageGeometry | None:
        sha = self._spec_hash(spec)
        path = self._path(sha, j)
        try:
            raw = path.read_text("ascii")
        except OSError:
            self.misses += 1
            return None
        try:
            doc = json.loads(raw)
            payload = doc["payload"]
            if doc["checksum"] != _checksum(payload):
                raise ValueError("checksum mismatch")
            if payload["format"] != _FORMAT or payload["spec"] != sha or payload["stage"] != j:
                raise ValueError("entry does not match its key")
            num, den = payload["w"]
            geom = StageGeometry(
                j=j,
                h=int(payload["h"]),
                w=Fraction(int(num), int(den)),
                r=None if payload["r"] is None else int(payload["r"]),
                spacers=None if payload["spacers"] is None else tuple(payload["spacers"]),
                offsets=None if payload["offsets"] is None else tuple(payload["offsets"]),
            )
        except (ValueError, KeyError, TypeError) as exc:
            warnings.warn(f"discarding corrupt cache entry {path}: {exc}", stacklevel=2)
            self.corrupt += 1
            self.misses += 1
            return None
        self.hits += 1
        return geom

    def put(self, spec: ConstructionSpec, j: int, geom: StageGeometry) -> None:
        sha = self._spec_hash(spec)
        payload = {
            "format": _FORMAT,
            "spec": sha,
            "stage": j,
            "h": geom.h,
            "w": [geom.w.numerator, geom.w.denominator],
            "r": geom.r,
            "spacers": None if geom.spacers is None else list(geom.spacers),
            "offsets": None if geom.offsets is None else list(geom.offsets),
        }
        doc = {"payload": payload, "checksum": _checksum(payload)}
        path = self._path(sha, j)
        tmp = path.with_suffix(".tmp")
        with self._lock:
            tmp.write_text(json.dumps(doc, sort_keys=True), "ascii")
            os.replace(tmp, path)
        self.writes += 1

    def stats(self) -> dict[str, int]:
        return {
            "hits": self.hits,
            "misses": self.misses,
            "writes": self.writes,
            "corrupt": self.corrupt,
        }


def cache_from_env() -> StageCache | None:
    """Cache configured through ``SIDONLAB_CACHE``, or ``None`` if unset."""

    where = os.environ.get("SIDONLAB_CACHE", "").strip()
    if not where:
        return None
    return StageCache(where)
