"""Batch runs: a YAML config in, a directory of artifacts out.

A config names one construction spec and a list of tasks.  Each task renders
one TSV artifact whose comment header records the tool version, the task
parameters, the run seed and the spec hash, so an artifact is
self-describing.  ``manifest.json`` lists every artifact with its SHA-256
and status; it contains no timestamps and is serialized with sorted keys,
so identical configs produce byte-identical bundles.  Wall-clock timings
and cache counters land in ``runstats.json``, a sidecar that is
deliberately excluded from the manifest and from any determinism claim.

Config grammar (YAML mapping):

    spec:   inline construction spec (same grammar as spec files)
    seed:   optional integer, default 0 (feeds seeded digit rules)
    cache:  optional stage-cache directory
    tasks:  nonempty list of task mappings, each with a ``task`` key

Tasks and their parameters:

    heights    stages
    sidon      stages, pair_cap?
    classify   powers (list)
    correlate  max_lag, stage?, stage_cap?, size_cap?
    spectrum   max_lag, power, grid, stage?, force?, stage_cap?, size_cap?
    orbit      steps, start_stage?, start_level?, digits?
                 (digits: "seeded", "constant:<i>", or a list of digits)
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from . import classify, sidon, spectral
from ._version import __version__
from .cache import StageCache
from .construction import Construction, ConstructionSpec
from .errors import SidonLabError, SpecError
from .orbits import OrbitPoint, digit_rule_from_config, step
from .specfile import canonical_spec_text, mapping_to_spec, spec_sha256, spec_to_mapping
from .textnum import fmt_frac, parse_int

_TASK_KEYS = {
    "heights": {"stages"},
    "sidon": {"stages", "pair_cap"},
    "classify": {"powers"},
    "correlate": {"max_lag", "stage", "stage_cap", "size_cap"},
    "spectrum": {"max_lag", "power", "grid", "stage", "force", "stage_cap", "size_cap"},
    "orbit": {"steps", "start_stage", "start_level", "digits"},
}


@dataclass
class TaskSpec:
    kind: str
    params: dict


@dataclass
class ExperimentConfig:
    spec: ConstructionSpec
    tasks: list[TaskSpec]
    seed: int = 0
    cache_dir: str | None = None


def parse_config(text: str) -> ExperimentConfig:
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        raise SpecError(f"config is not valid YAML: {exc}", line=line) from exc
    return mapping_to_config(doc)


def mapping_to_config(doc: object) -> ExperimentConfig:
    if not isinstance(doc, dict):
        raise SpecError("config must be a mapping")
    unknown = set(doc) - {"spec", "tasks", "seed", "cache"}
    if unknown:
        raise SpecError(f"unknown config keys: {', '.join(sorted(unknown))}")
    if "spec" not in doc:
        raise SpecError("config needs a spec", field="spec")
    spec = mapping_to_spec(doc["spec"])
    raw_tasks = doc.get("tasks")
    if not isinstance(raw_tasks, list) or not raw_tasks:
        raise SpecError("config needs a nonempty task list", field="tasks")
    tasks = [_parse_task(i, t) for i, t in enumerate(raw_tasks)]
    seed = parse_int(doc.get("seed", 0), field="seed", minimum=0)
    cache_dir = doc.get("cache")
    if cache_dir is not None and not isinstance(cache_dir, str):
        raise SpecError("cache must be a directory path", field="cache")
    return ExperimentConfig(spec=spec, tasks=tasks, seed=seed, cache_dir=cache_dir)


def _parse_task(i: int, raw: object) -> TaskSpec:
    where = f"tasks[{i}]"
    if not isinstance(raw, dict):
        raise SpecError("task must be a mapping", field=where)
    kind = raw.get("task")
    if kind not in _TASK_KEYS:
        known = ", ".join(sorted(_TASK_KEYS))
        raise SpecError(f"unknown task {kind!r} (known: {known})", field=f"{where}.task")
    params = {k: v for k, v in raw.items() if k != "task"}
    unknown = set(params) - _TASK_KEYS[kind]
    if unknown:
        raise SpecError(
            f"unknown keys for task {kind}: {', '.join(sorted(unknown))}", field=where
        )
    _validate_task(kind, params, where)
    return TaskSpec(kind=kind, params=params)


def _validate_task(kind: str, params: dict, where: str) -> None:
    def want(key: str, minimum: int, default: int | None = None) -> None:
        if key in params:
            params[key] = parse_int(params[key], field=f"{where}.{key}", minimum=minimum)
        elif default is not None:
            params[key] = default
        else:
            raise SpecError(f"task {kind} needs {key}", field=f"{where}.{key}")

    if kind == "heights":
        want("stages", 1)
    elif kind == "sidon":
        want("stages", 1)
        if "pair_cap" in params:
            want("pair_cap", 1)
    elif kind == "classify":
        powers = params.get("powers")
        if not isinstance(powers, list) or not powers:
            raise SpecError("classify needs a list of powers", field=f"{where}.powers")
        params["powers"] = [
            parse_int(p, field=f"{where}.powers[{k}]", minimum=1) for k, p in enumerate(powers)
        ]
    elif kind == "correlate":
        want("max_lag", 0)
        want("stage", 1, default=1)
        if "stage_cap" in params:
            want("stage_cap", 1)
        if "size_cap" in params:
            want("size_cap", 1)
    elif kind == "spectrum":
        want("max_lag", 0)
        want("power", 1)
        want("grid", 1)
        want("stage", 1, default=1)
        if "stage_cap" in params:
            want("stage_cap", 1)
        if "size_cap" in params:
            want("size_cap", 1)
        if "force" in params and not isinstance(params["force"], bool):
            raise SpecError("force must be a boolean", field=f"{where}.force")
    elif kind == "orbit":
        want("steps", 1)
        want("start_stage", 1, default=1)
        want("start_level", 0, default=0)
        digits = params.setdefault("digits", "seeded")
        if isinstance(digits, list):
            params["digits"] = [
                parse_int(d, field=f"{where}.digits[{k}]", minimum=1)
                for k, d in enumerate(digits)
            ]
        elif isinstance(digits, str):
            if digits != "seeded" and not digits.startswith("constant:"):
                raise SpecError(
                    "digits must be 'seeded', 'constant:<i>', or a list",
                    field=f"{where}.digits",
                )
            if digits.startswith("constant:"):
                parse_int(digits.split(":", 1)[1], field=f"{where}.digits", minimum=1)
        else:
            raise SpecError("digits must be a string or a list", field=f"{where}.digits")


def _fmt_cell(value: object) -> str:
    if value is None:
        return "-"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if hasattr(value, "denominator"):
        return fmt_frac(value)
    return str(value)


def _fmt_params(params: dict) -> str:
    parts = []
    for key in sorted(params):
        v = params[key]
        if isinstance(v, list):
            parts.append(f"{key}={','.join(str(x) for x in v)}")
        else:
            parts.append(f"{key}={v}")
    return " ".join(parts) if parts else "-"


class _Tsv:
    def __init__(self, meta: list[tuple[str, str]], columns: list[str]):
        self.meta = [f"# {k}: {v}" for k, v in meta]
        self.header = "\t".join(columns)
        self.rows: list[str] = []

    def row(self, *cells: object) -> None:
        self.rows.append("\t".join(_fmt_cell(c) for c in cells))

    def comment(self, key: str, value: str) -> None:
        self.meta.append(f"# {key}: {value}")

    def text(self) -> str:
        return "\n".join(self.meta + [self.header] + self.rows) + "\n"


def _run_heights(con: Construction, params: dict, tsv: _Tsv) -> None:
    for j in range(1, params["stages"] + 1):
        geom = con.stage(j)
        spacers = None if geom.spacers is None else ",".join(str(s) for s in geom.spacers)
        tsv.row(j, geom.h, geom.w, geom.measure, geom.r, spacers)


def _run_sidon(con: Construction, params: dict, tsv: _Tsv) -> None:
    kwargs = {}
    if "pair_cap" in params:
        kwargs["pair_cap"] = params["pair_cap"]
    for verdict in sidon.check_construction(con, params["stages"], **kwargs):
        witness = None
        if verdict.witness is not None:
            m, (a, ta), (b, tb) = verdict.witness
            witness = f"shift={m};windows=({a}->{ta}),({b}->{tb})"
        tsv.row(verdict.stage, verdict.is_sidon, verdict.margin, witness)


def _run_classify(con: Construction, params: dict, tsv: _Tsv) -> list[str]:
    reports, discrepancies = classify.classify_range(con.spec, params["powers"])
    for rep in reports:
        margins = {e.label.split(" ", 1)[0]: e.margin for e in rep.evidence}
        tsv.row(
            rep.d,
            "conservative" if rep.conservative else "dissipative",
            rep.spectral,
            margins.get("recurrence"),
            margins.get("density"),
            margins.get("block"),
        )
    for note in discrepancies:
        tsv.comment("discrepancy", note)
    return discrepancies


def _run_correlate(con: Construction, params: dict, tsv: _Tsv) -> None:
    kwargs = {}
    for key in ("stage_cap", "size_cap"):
        if key in params:
            kwargs[key] = params[key]
    table = spectral.autocorrelation(con, params["stage"], params["max_lag"], **kwargs)
    tsv.comment("final-stage", str(table.final_stage))
    tsv.comment(
        "stabilized-at", "-" if table.stabilized_at is None else str(table.stabilized_at)
    )
    for m, c in enumerate(table.values):
        tsv.row(m, c, m not in table.unstable_lags)


def _run_spectrum(con: Construction, params: dict, tsv: _Tsv) -> None:
    kwargs = {}
    for key in ("stage_cap", "size_cap"):
        if key in params:
            kwargs[key] = params[key]
    table = spectral.autocorrelation(con, params["stage"], params["max_lag"], **kwargs)
    density = spectral.fejer_density(
        table, params["power"], params["grid"], force=params.get("force", False)
    )
    tsv.comment("mean", repr(density.mean))
    tsv.comment("minimum", repr(density.minimum))
    tsv.comment("maximum", repr(density.maximum))
    for t, value in enumerate(density.values):
        tsv.row(t, repr(2.0 * t / density.grid_size) + "*pi", value)


def _run_orbit(con: Construction, params: dict, seed: int, tsv: _Tsv) -> None:
    rule = digit_rule_from_config(params["digits"], seed, params["start_stage"])
    point = OrbitPoint(
        stage=params["start_stage"], level=params["start_level"], digits=rule
    )
    tsv.row(0, point.stage, point.level)
    for n in range(1, params["steps"] + 1):
        point = step(con, point)
        tsv.row(n, point.stage, point.level)


_CLASSIFY_COLUMNS = [
    "power",
    "recurrence",
    "spectral",
    "recurrence_margin",
    "density_margin",
    "block_singularity_margin",
]
_COLUMNS = {
    "heights": ["stage", "height", "width", "measure", "cut", "spacers"],
    "sidon": ["stage", "sidon", "margin", "witness"],
    "classify": _CLASSIFY_COLUMNS,
    "correlate": ["lag", "correlation", "stable"],
    "spectrum": ["index", "angle", "density"],
    "orbit": ["step", "stage", "level"],
}


@dataclass
class RunResult:
    out_dir: Path
    manifest: dict
    runstats: dict
    files: dict[str, Path] = field(default_factory=dict)

    @property
    def failed_tasks(self) -> list[str]:
        return [
            f"task {e['index']} ({e['task']}): {e['error']}"
            for e in self.manifest["tasks"]
            if e["status"] == "error"
        ]


def run_experiment(
    config: ExperimentConfig, out_dir: str | Path, *, cache: StageCache | None = None
) -> RunResult:
    """Execute every task and write the bundle under ``out_dir``.

    A task that raises a structured error is recorded in the manifest with
    status "error" and does not abort the remaining tasks.
    """

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if cache is None and config.cache_dir is not None:
        cache = StageCache(config.cache_dir)
    con = Construction(config.spec, cache=cache)
    sha = spec_sha256(config.spec)

    entries = []
    files: dict[str, Path] = {}
    timings: dict[str, float] = {}
    for index, task in enumerate(config.tasks, start=1):
        artifact = f"{index:02d}_{task.kind}.tsv"
        meta = [
            ("generator", f"sidonlab {__version__}"),
            ("task", task.kind),
            ("params", _fmt_params(task.params)),
            ("seed", str(config.seed)),
            ("spec-sha256", sha),
        ]
        tsv = _Tsv(meta, _COLUMNS[task.kind])
        entry = {
            "index": index,
            "task": task.kind,
            "params": _jsonable(task.params),
            "artifact": artifact,
        }
        started = time.perf_counter()
        try:
            if task.kind == "heights":
                _run_heights(con, task.params, tsv)
            elif task.kind == "sidon":
                _run_sidon(con, task.params, tsv)
            elif task.kind == "classify":
                entry["discrepancies"] = _run_classify(con, task.params, tsv)
            elif task.kind == "correlate":
                _run_correlate(con, task.params, tsv)
            elif task.kind == "spectrum":
                _run_spectrum(con, task.params, tsv)
            elif task.kind == "orbit":
                _run_orbit(con, task.params, config.seed, tsv)
        except SidonLabError as exc:
            entry["status"] = "error"
            entry["error"] = str(exc)
            entry["artifact"] = None
            entry["sha256"] = None
        else:
            text = tsv.text()
            path = out / artifact
            path.write_text(text, "utf-8")
            files[artifact] = path
            entry["status"] = "ok"
            entry["sha256"] = hashlib.sha256(text.encode("utf-8")).hexdigest()
        timings[artifact] = round(time.perf_counter() - started, 6)
        entries.append(entry)

    manifest = {
        "format": 1,
        "generator": "sidonlab",
        "version": __version__,
        "seed": config.seed,
        "spec": spec_to_mapping(config.spec),
        "spec-sha256": sha,
        "tasks": entries,
    }
    manifest_text = json.dumps(manifest, sort_keys=True, indent=2) + "\n"
    manifest_path = out / "manifest.json"
    manifest_path.write_text(manifest_text, "utf-8")
    files["manifest.json"] = manifest_path

    # Timings and cache hit rates are observability data, not results; they
    # stay out of the manifest so bundles from equal configs are
    # byte-identical.
    runstats = {
        "timings": timings,
        "cache": None if cache is None else cache.stats(),
    }
    (out / "runstats.json").write_text(
        json.dumps(runstats, sort_keys=True, indent=2) + "\n", "utf-8"
    )
    return RunResult(out_dir=out, manifest=manifest, runstats=runstats, files=files)


def _jsonable(params: dict) -> dict:
    out = {}
    for key, value in sorted(params.items()):
        out[key] = value if not isinstance(value, list) else list(value)
    return out


def config_for_spec_text(spec: ConstructionSpec) -> str:
    """Canonical YAML for a bare spec, handy for seeding new configs."""

    return canonical_spec_text(spec)
