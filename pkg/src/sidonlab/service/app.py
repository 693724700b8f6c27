"""HTTP service exposing the laboratory over JSON.

Every computational endpoint is a POST that carries the construction spec
in the request body, so the service itself is stateless; an optional
stage-geometry cache (``SIDONLAB_CACHE`` or an injected ``StageCache``)
is the only shared state.  Handlers are synchronous on purpose: the work
is CPU-bound exact arithmetic, and the framework's worker threads provide
all the concurrency that is useful here.

Structured failures map to structured responses: malformed specs and
parameters give 422, refusals (caps, unstable tables, leaving the
materialized space) give 409, both with ``{"error": {"type", "message"}}``
bodies.
"""

from __future__ import annotations

import tempfile
from pathlib import Path

from fastapi import FastAPI
from fastapi.responses import JSONResponse

from .. import classify, sidon, spectral
from .._version import __version__
from ..cache import StageCache, cache_from_env
from ..construction import Construction
from ..errors import ClassifyError, SidonLabError, SpecError
from ..experiment import mapping_to_config, run_experiment
from ..families import family_names
from ..orbits import (
    LevelSet,
    OrbitPoint,
    digit_rule_from_config,
    iterate,
    return_statistics,
)
from ..specfile import canonical_spec_text, mapping_to_spec, spec_sha256
from ..textnum import fmt_frac
from . import schemas as S


def _q(value) -> str:
    return fmt_frac(value)


def create_app(
    cache: StageCache | None = None, *, use_env_cache: bool = True
) -> FastAPI:
    if cache is None and use_env_cache:
        cache = cache_from_env()

    app = FastAPI(
        title="sidonlab",
        version=__version__,
        description="Exact rank-one construction laboratory",
    )

    def con_of(spec_doc: dict) -> Construction:
        return Construction(mapping_to_spec(spec_doc), cache=cache)

    @app.exception_handler(SidonLabError)
    def _structured_error(request, exc: SidonLabError):
        status = 422 if isinstance(exc, (SpecError, ClassifyError)) else 409
        body = S.ErrorResponse(
            error=S.ErrorInfo(type=type(exc).__name__, message=str(exc))
        )
        return JSONResponse(status_code=status, content=body.model_dump())

    @app.get("/v1/health", response_model=S.HealthResponse)
    def health() -> S.HealthResponse:
        return S.HealthResponse(status="ok", version=__version__)

    @app.get("/v1/families", response_model=S.FamiliesResponse)
    def families() -> S.FamiliesResponse:
        return S.FamiliesResponse(families=family_names())

    @app.post("/v1/spec/canonical", response_model=S.CanonicalSpecResponse)
    def canonical(req: S.SpecEnvelope) -> S.CanonicalSpecResponse:
        spec = mapping_to_spec(req.spec)
        return S.CanonicalSpecResponse(
            canonical=canonical_spec_text(spec), sha256=spec_sha256(spec)
        )

    @app.post("/v1/heights", response_model=S.HeightsResponse)
    def heights(req: S.HeightsRequest) -> S.HeightsResponse:
        con = con_of(req.spec)
        rows = []
        for j in range(1, req.stages + 1):
            geom = con.stage(j)
            rows.append(
                S.StageRow(
                    stage=j,
                    height=str(geom.h),
                    width=_q(geom.w),
                    measure=_q(geom.measure),
                    cut=geom.r,
                    spacers=None
                    if geom.spacers is None
                    else [str(s) for s in geom.spacers],
                )
            )
        return S.HeightsResponse(stages=rows)

    @app.post("/v1/sidon", response_model=S.SidonResponse)
    def sidon_check(req: S.SidonRequest) -> S.SidonResponse:
        con = con_of(req.spec)
        kwargs = {} if req.pair_cap is None else {"pair_cap": req.pair_cap}
        verdicts = sidon.check_construction(con, req.stages, **kwargs)
        rows = []
        for v in verdicts:
            witness = None
            if v.witness is not None:
                m, (a, ta), (b, tb) = v.witness
                witness = S.SidonWitness(
                    shift=str(m),
                    first=S.WindowRef(source=a, target=ta),
                    second=S.WindowRef(source=b, target=tb),
                )
            rows.append(
                S.SidonVerdictRow(
                    stage=v.stage,
                    is_sidon=v.is_sidon,
                    margin=None if v.margin is None else str(v.margin),
                    witness=witness,
                )
            )
        failure = sidon.first_failure(verdicts)
        return S.SidonResponse(
            verdicts=rows, first_failure=None if failure is None else failure.stage
        )

    @app.post("/v1/classify", response_model=S.ClassifyResponse)
    def classify_powers(req: S.ClassifyRequest) -> S.ClassifyResponse:
        spec = mapping_to_spec(req.spec)
        claims = None if req.claims is None else tuple((d, c) for d, c in req.claims)
        reports, discrepancies = classify.classify_range(
            spec, req.powers, claims=claims
        )
        rows = [
            S.ClassifyRow(
                power=r.d,
                alpha=_q(r.alpha),
                conservative=r.conservative,
                spectral=r.spectral,
                rule=r.rule,
                evidence=[
                    S.EvidenceRow(
                        label=e.label,
                        exponent=_q(e.exponent),
                        margin=_q(e.margin),
                        diverges=e.diverges,
                        implication=e.implication,
                    )
                    for e in r.evidence
                ],
                annotations=list(r.annotations),
            )
            for r in reports
        ]
        return S.ClassifyResponse(reports=rows, discrepancies=discrepancies)

    @app.post("/v1/infer-alpha", response_model=S.InferAlphaResponse)
    def infer_alpha(req: S.InferAlphaRequest) -> S.InferAlphaResponse:
        if (req.spec is None) == (req.blocks is None):
            raise SpecError("provide exactly one of spec or blocks")
        source = (
            mapping_to_spec(req.spec) if req.spec is not None else list(req.blocks)
        )
        result = classify.infer_alpha(
            source,
            max_denominator=req.max_denominator,
            block_count=req.block_count,
        )
        return S.InferAlphaResponse(
            alpha=None if result.alpha is None else _q(result.alpha),
            blocks=[(str(r), str(length)) for r, length in result.blocks],
            reason=result.reason,
        )

    @app.post("/v1/orbit", response_model=S.OrbitResponse)
    def orbit(req: S.OrbitRequest) -> S.OrbitResponse:
        con = con_of(req.spec)
        rule = digit_rule_from_config(req.digits, req.seed, req.start_stage)
        point = OrbitPoint(stage=req.start_stage, level=req.start_level, digits=rule)
        move = 1 if req.direction == "forward" else -1
        rows = [S.OrbitPointRow(step=0, stage=point.stage, level=str(point.level))]
        for n in range(1, req.steps + 1):
            point = iterate(con, point, move, max_stage=req.max_stage)
            rows.append(
                S.OrbitPointRow(step=n, stage=point.stage, level=str(point.level))
            )
        return S.OrbitResponse(points=rows)

    @app.post("/v1/correlate", response_model=S.CorrelateResponse)
    def correlate(req: S.CorrelateRequest) -> S.CorrelateResponse:
        con = con_of(req.spec)
        table = spectral.autocorrelation(
            con,
            req.stage,
            req.max_lag,
            stage_cap=req.stage_cap,
            size_cap=req.size_cap,
        )
        return S.CorrelateResponse(
            base_stage=table.base_stage,
            max_lag=table.max_lag,
            final_stage=table.final_stage,
            stabilized_at=table.stabilized_at,
            values=[_q(c) for c in table.values],
            unstable_lags=sorted(table.unstable_lags),
        )

    @app.post("/v1/spectrum", response_model=S.SpectrumResponse)
    def spectrum(req: S.SpectrumRequest) -> S.SpectrumResponse:
        con = con_of(req.spec)
        table = spectral.autocorrelation(
            con,
            req.stage,
            req.max_lag,
            stage_cap=req.stage_cap,
            size_cap=req.size_cap,
        )
        diag = spectral.spectral_diagnostics(
            table, req.power, req.grid, quantile=req.quantile, force=req.force
        )
        return S.SpectrumResponse(
            power=req.power,
            max_lag=table.max_lag,
            stable=table.stable,
            density=S.DensityInfo(
                grid_size=diag.density.grid_size,
                mean=diag.density.mean,
                minimum=diag.density.minimum,
                maximum=diag.density.maximum,
                values=list(diag.density.values),
            ),
            trend=S.TrendInfo(
                label=diag.trend.label,
                exponent=diag.trend.exponent,
                checkpoints=[
                    S.TrendCheckpoint(lag=k, partial_sum=_q(v))
                    for k, v in diag.trend.checkpoints
                ],
                slopes=[_q(s) for s in diag.trend.slopes],
            ),
            power_sum_d=_q(diag.power_sum_d),
            power_sum_2d=_q(diag.power_sum_2d),
            concentration=diag.concentration,
            concentration_quantile=diag.concentration_quantile,
        )

    @app.post("/v1/return-stats", response_model=S.ReturnStatsResponse)
    def return_stats(req: S.ReturnStatsRequest) -> S.ReturnStatsResponse:
        con = con_of(req.spec)
        A = LevelSet(stage=req.stage, levels=tuple(sorted(set(req.levels))))
        stats = return_statistics(
            con,
            A,
            req.power,
            req.max_lag,
            size_cap=req.size_cap,
            stage_cap=req.stage_cap,
        )
        return S.ReturnStatsResponse(
            power=stats.d,
            max_lag=stats.max_lag,
            stage=stats.stage,
            measure=_q(stats.measure),
            proportions=[_q(p) for p in stats.proportions],
            unstable_lags=sorted(stats.unstable_lags),
        )

    @app.post("/v1/run", response_model=S.RunResponse)
    def run(req: S.RunRequest) -> S.RunResponse:
        config = mapping_to_config(req.config)
        with tempfile.TemporaryDirectory() as tmp:
            result = run_experiment(config, tmp, cache=cache)
            files = {
                p.name: p.read_text("utf-8")
                for p in sorted(Path(tmp).iterdir())
                if p.is_file()
            }
        return S.RunResponse(files=files, failed=result.failed_tasks)

    return app
