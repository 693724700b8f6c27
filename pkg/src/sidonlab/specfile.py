"""Reading and writing construction specs.

Spec files are plain-text key-value documents with nested sections (YAML
subset).  An explicit spec lists stages literally::

    h1: '10'
    stages:
    - r: 2
      spacers: ['100', '1000']

A family spec names a built-in rule and its parameters::

    h1: '1'
    family:
      name: odometer
      r: 2

All integers may be quoted exact decimal strings (required once they exceed
what a reader should eyeball), rationals are ``'p/q'`` strings.  The
canonical serializer sorts keys and re-emits every number in its canonical
text form, so equal specs always produce byte-identical text and a stable
content hash.
"""

from __future__ import annotations

import hashlib

import yaml

from .construction import ConstructionSpec, ExplicitStages, StageParams
from .errors import SpecError
from .families import SidonBlockRule, OdometerRule, builtin_spec
from .textnum import fmt_frac, fmt_int, parse_int


def mapping_to_spec(doc) -> ConstructionSpec:
    """Build a ``ConstructionSpec`` from a parsed mapping."""

    if not isinstance(doc, dict):
        raise SpecError(f"spec document must be a mapping, got {type(doc).__name__}")
    unknown = set(doc) - {"h1", "stages", "family"}
    if unknown:
        raise SpecError(f"unknown spec key(s) {sorted(unknown)}")
    has_stages = "stages" in doc
    has_family = "family" in doc
    if has_stages == has_family:
        raise SpecError("spec needs exactly one of 'stages' or 'family'")

    if has_family:
        fam = doc["family"]
        if not isinstance(fam, dict) or "name" not in fam:
            raise SpecError("family section needs a 'name'", field="family.name")
        fam = dict(fam)
        name = fam.pop("name")
        if "h1" in doc:
            fam["h1"] = doc["h1"]
        return builtin_spec(name, fam)

    if "h1" not in doc:
        raise SpecError("explicit spec needs h1", field="h1")
    h1 = parse_int(doc["h1"], field="h1", minimum=1)
    raw_stages = doc["stages"]
    if not isinstance(raw_stages, list) or not raw_stages:
        raise SpecError("stages must be a non-empty list", field="stages")
    stages = []
    for idx, st in enumerate(raw_stages, start=1):
        where = f"stages[{idx}]"
        if not isinstance(st, dict):
            raise SpecError("stage entry must be a mapping", field=where)
        extra = set(st) - {"r", "spacers"}
        if extra:
            raise SpecError(f"unknown stage key(s) {sorted(extra)}", field=where)
        if "r" not in st or "spacers" not in st:
            raise SpecError("stage entry needs 'r' and 'spacers'", field=where)
        r = parse_int(st["r"], field=f"{where}.r", minimum=1)
        raw_spacers = st["spacers"]
        if not isinstance(raw_spacers, list):
            raise SpecError("spacers must be a list", field=f"{where}.spacers")
        spacers = tuple(
            parse_int(s, field=f"{where}.spacers[{i}]", minimum=0)
            for i, s in enumerate(raw_spacers, start=1)
        )
        try:
            stages.append(StageParams(r=r, spacers=spacers))
        except SpecError as e:
            raise SpecError(str(e), field=where) from None
    return ConstructionSpec(h1=h1, rule=ExplicitStages(tuple(stages)), label="explicit")


def parse_spec(text: str) -> ConstructionSpec:
    """Parse spec text; errors carry the line (syntax) or field (semantics)."""

    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as e:
        line = None
        mark = getattr(e, "problem_mark", None)
        if mark is not None:
            line = mark.line + 1
        raise SpecError(f"spec is not well-formed: {e}", line=line) from None
    return mapping_to_spec(doc)


def spec_to_mapping(spec: ConstructionSpec) -> dict:
    """Canonical plain mapping for a spec (inverse of ``mapping_to_spec``)."""

    rule = spec.rule
    if isinstance(rule, ExplicitStages):
        return {
            "h1": fmt_int(spec.h1),
            "stages": [
                {"r": fmt_int(st.r), "spacers": [fmt_int(s) for s in st.spacers]}
                for st in rule.stages
            ],
        }
    if isinstance(rule, OdometerRule):
        return {
            "h1": fmt_int(spec.h1),
            "family": {"name": "odometer", "r": fmt_int(rule.r)},
        }
    if isinstance(rule, SidonBlockRule):
        if spec.label in ("factorial-sidon", "factorial-sidon-alpha19"):
            return {"h1": fmt_int(spec.h1), "family": {"name": spec.label}}
        return {
            "h1": fmt_int(spec.h1),
            "family": {
                "name": "sidon-blocks",
                "alpha": fmt_frac(rule.alpha),
                "growth": rule.growth,
                "geometric_base": fmt_int(rule.geometric_base),
                "spacer_base": fmt_int(rule.spacer_base),
            },
        }
    raise SpecError(f"cannot serialize rule of type {type(rule).__name__}")


def canonical_spec_text(spec: ConstructionSpec) -> str:
    return yaml.safe_dump(
        spec_to_mapping(spec), sort_keys=True, default_flow_style=False, width=100000
    )


def spec_sha256(spec: ConstructionSpec) -> str:
    return hashlib.sha256(canonical_spec_text(spec).encode("utf-8")).hexdigest()
