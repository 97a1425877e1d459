"""FastAPI service exposing the toolkit over HTTP.

All functionality flows through these endpoints; the CLI is a thin
client and external training loops can call the buffer-style endpoints
(/moments, /loss) directly. Errors surface as a structured envelope
{"error": {"kind", "message"}} with kind one of usage/data/numeric.
"""

from __future__ import annotations

import json
from importlib import metadata
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import bench as bench_mod
from .. import data as data_mod
from .. import synth as synth_mod
from .. import trainer as trainer_mod
from ..errors import CalfError, DataError
from ..losses import LossConfig, loss_forward, loss_gradient, parse_kind
from ..moments import compute_moments, corpus_areas
from ..selector import select_loss
from . import schemas as sc

API_PREFIX = "/api/v1"


def _loss_config(model: sc.LossConfigModel | None) -> LossConfig:
    if model is None:
        return LossConfig()
    return LossConfig(**model.model_dump())


def _moments_response(summary) -> sc.MomentsResponse:
    return sc.MomentsResponse(**summary.as_dict())


def _metric_record(rep, sample_id=None) -> sc.MetricRecord:
    d = rep.as_dict()
    return sc.MetricRecord(id=sample_id, **d)


def create_app() -> FastAPI:
    app = FastAPI(title="calf", docs_url="/docs")

    @app.exception_handler(CalfError)
    async def calf_error_handler(request: Request, exc: CalfError):
        return JSONResponse(
            status_code=400,
            content={"error": {"kind": exc.kind, "message": str(exc)}},
        )

    @app.exception_handler(ValueError)
    async def value_error_handler(request: Request, exc: ValueError):
        return JSONResponse(
            status_code=400,
            content={"error": {"kind": "usage", "message": str(exc)}},
        )

    @app.get(API_PREFIX + "/health")
    def health():
        return {"status": "ok"}

    @app.get(API_PREFIX + "/version", response_model=sc.VersionResponse)
    def version():
        try:
            pkg_version = metadata.version("calf")
        except metadata.PackageNotFoundError:
            pkg_version = "0.0.0"
        return sc.VersionResponse(name="calf", version=pkg_version, abi_version=sc.ABI_VERSION)

    @app.post(API_PREFIX + "/moments", response_model=sc.MomentsResponse)
    def moments(req: sc.MomentsRequest):
        return _moments_response(compute_moments(req.areas))

    @app.post(API_PREFIX + "/select", response_model=sc.SelectResponse)
    def select(req: sc.SelectRequest):
        return sc.SelectResponse(selected_loss=select_loss(req.skewness, req.kurtosis_excess).value)

    @app.post(API_PREFIX + "/loss", response_model=sc.LossResponse, response_model_exclude_none=True)
    def loss(req: sc.LossRequest):
        kind = parse_kind(req.kind)
        if len(req.p) != req.width * req.height or len(req.y) != req.width * req.height:
            raise DataError(
                f"buffer length mismatch: expected {req.width * req.height} values "
                f"(got p={len(req.p)}, y={len(req.y)})"
            )
        p = np.asarray(req.p, dtype=np.float64).reshape(req.height, req.width)
        y = np.asarray(req.y, dtype=np.float64).reshape(req.height, req.width)
        cfg = _loss_config(req.config)
        if req.want_gradient:
            res = loss_gradient(kind, p, y, cfg)
            return sc.LossResponse(
                kind=kind.value, value=res.value, gradient=res.gradient.reshape(-1).tolist()
            )
        return sc.LossResponse(kind=kind.value, value=loss_forward(kind, p, y, cfg))

    @app.post(API_PREFIX + "/analyze", response_model=sc.AnalyzeResponse)
    def analyze(req: sc.AnalyzeRequest):
        corpus = data_mod.ingest(req.manifest)
        summary = compute_moments(corpus_areas(corpus.samples, include_empty=req.include_empty))
        if req.force_loss is not None:
            selected = parse_kind(req.force_loss)
            forced = True
        else:
            selected = select_loss(summary.skewness, summary.kurtosis_excess)
            forced = False
        return sc.AnalyzeResponse(
            n_samples=len(corpus),
            n_present=len(corpus.present),
            moments=_moments_response(summary),
            selected_loss=selected.value,
            forced=forced,
        )

    @app.post(API_PREFIX + "/generate", response_model=sc.GenerateResponse)
    def generate(req: sc.GenerateRequest):
        spec = synth_mod.SynthSpec(
            count=req.count,
            width=req.width,
            height=req.height,
            roi_fraction=req.roi_fraction,
            regime=req.regime,
            noise_sigma=req.noise_sigma,
            contrast=req.contrast,
            seed=req.seed,
        )
        corpus = synth_mod.generate(spec, req.out_dir)
        present_areas = corpus_areas(corpus.samples, include_empty=False)
        summary = compute_moments(present_areas) if present_areas else None
        return sc.GenerateResponse(
            manifest=str((Path(req.out_dir) / "manifest.jsonl").resolve()),
            count=len(corpus),
            n_present=len(corpus.present),
            moments=_moments_response(summary) if summary else None,
            selected_loss=select_loss(summary.skewness, summary.kurtosis_excess).value
            if summary
            else None,
        )

    @app.post(API_PREFIX + "/train", response_model=sc.TrainResponse)
    def train(req: sc.TrainRequest):
        corpus = data_mod.ingest(req.manifest)
        if req.ratio is not None:
            corpus = data_mod.apply_ratio(corpus, data_mod.RatioSpec(ratio=req.ratio, seed=req.seed))
        loss_name = req.loss.strip().lower()
        loss = trainer_mod.AUTO if loss_name in (trainer_mod.AUTO, "calf") else parse_kind(loss_name)
        cfg = trainer_mod.TrainConfig(
            epochs=req.epochs,
            learning_rate=req.learning_rate,
            batch_size=req.batch_size,
            loss=loss,
            seed=req.seed,
            loss_config=_loss_config(req.config),
            threshold=req.threshold,
            include_empty=req.include_empty,
        )
        model, history = trainer_mod.calf_train(corpus, cfg)
        payload = sc.ModelPayload(
            weights=[float(w) for w in model.weights],
            feature_version=trainer_mod.FEATURE_VERSION,
        )
        if req.model_out:
            trainer_mod.save_model(model, req.model_out)
        if req.history_out:
            out = Path(req.history_out)
            out.parent.mkdir(parents=True, exist_ok=True)
            out.write_text(_history_json(history) + "\n")
        return sc.TrainResponse(
            model=payload,
            selected_loss=history.selected_loss.value,
            moments_at_selection=_moments_response(history.moments_at_selection)
            if history.moments_at_selection
            else None,
            epoch_losses=list(history.epoch_losses),
            n_train=len(corpus),
        )

    @app.post(API_PREFIX + "/evaluate", response_model=sc.EvaluateResponse)
    def evaluate(req: sc.EvaluateRequest):
        corpus = data_mod.ingest(req.manifest)
        if req.model is None and req.model_path is None:
            raise DataError("evaluate needs a model payload or model_path")
        model = trainer_mod.load_model(
            req.model.model_dump() if req.model is not None else req.model_path
        )
        aggregate, per_image = trainer_mod.evaluate(model, corpus, req.threshold)
        return sc.EvaluateResponse(
            aggregate=_metric_record(aggregate),
            per_image=[_metric_record(rep, sid) for sid, rep in per_image],
        )

    @app.post(API_PREFIX + "/bench", response_model=sc.BenchResponse, response_model_exclude_none=True)
    def bench(req: sc.BenchRequest):
        corpus = data_mod.ingest(req.manifest)
        rows = bench_mod.run_bench(
            corpus,
            req.ratios,
            req.losses,
            seed=req.seed,
            epochs=req.epochs,
            learning_rate=req.learning_rate,
            batch_size=req.batch_size,
            test_fraction=req.test_fraction,
            threshold=req.threshold,
            loss_config=_loss_config(req.config),
            include_empty=req.include_empty,
        )
        return sc.BenchResponse(rows=[sc.BenchRow(**row) for row in rows])

    return app


def _history_json(history) -> str:
    return json.dumps(
        {
            "selected_loss": history.selected_loss.value,
            "moments_at_selection": history.moments_at_selection.as_dict()
            if history.moments_at_selection
            else None,
            "epoch_losses": list(history.epoch_losses),
        }
    )


app = create_app()
