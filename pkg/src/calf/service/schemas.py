"""Request/response models for the HTTP service."""

from __future__ import annotations

from pydantic import BaseModel, Field

ABI_VERSION = 1


class VersionResponse(BaseModel):
    name: str
    version: str
    abi_version: int


class ErrorDetail(BaseModel):
    kind: str
    message: str


class ErrorResponse(BaseModel):
    error: ErrorDetail


class MomentsRequest(BaseModel):
    areas: list[float]


class MomentsResponse(BaseModel):
    n: int
    mean: float
    std: float
    skewness: float
    kurtosis_excess: float


class SelectRequest(BaseModel):
    skewness: float
    kurtosis_excess: float


class SelectResponse(BaseModel):
    selected_loss: str


class LossConfigModel(BaseModel):
    clamp_eps: float = 1e-7
    dice_eps: float = 1e-6
    focal_gamma: float = 2.0
    focal_alpha: float = 0.25
    tversky_alpha: float = 0.3
    tversky_beta: float = 0.7


class LossRequest(BaseModel):
    kind: str
    width: int = Field(gt=0)
    height: int = Field(gt=0)
    p: list[float]
    y: list[float]
    want_gradient: bool = False
    config: LossConfigModel | None = None


class LossResponse(BaseModel):
    kind: str
    value: float
    gradient: list[float] | None = None


class AnalyzeRequest(BaseModel):
    manifest: str
    include_empty: bool = False
    force_loss: str | None = None


class AnalyzeResponse(BaseModel):
    n_samples: int
    n_present: int
    moments: MomentsResponse
    selected_loss: str
    forced: bool = False


class GenerateRequest(BaseModel):
    out_dir: str
    count: int
    width: int = 64
    height: int = 64
    roi_fraction: float = 0.7
    regime: str | None = None
    noise_sigma: float = 8.0
    contrast: float = 60.0
    seed: int = 0


class GenerateResponse(BaseModel):
    manifest: str
    count: int
    n_present: int
    moments: MomentsResponse | None = None
    selected_loss: str | None = None


class ModelPayload(BaseModel):
    weights: list[float]
    feature_version: int


class TrainRequest(BaseModel):
    manifest: str
    loss: str = "auto"
    ratio: float | None = None
    epochs: int = 20
    learning_rate: float = 10.0
    batch_size: int = 1
    seed: int = 42
    threshold: float = 0.5
    include_empty: bool = False
    config: LossConfigModel | None = None
    model_out: str | None = None
    history_out: str | None = None


class TrainResponse(BaseModel):
    model: ModelPayload
    selected_loss: str
    moments_at_selection: MomentsResponse | None = None
    epoch_losses: list[float]
    n_train: int


class MetricRecord(BaseModel):
    id: str | None = None
    dsc: float
    accuracy: float
    mae: float
    sensitivity: float
    specificity: float
    precision: float
    tp: int
    fp: int
    tn: int
    fn: int
    conventions: list[str] = []


class EvaluateRequest(BaseModel):
    manifest: str
    model: ModelPayload | None = None
    model_path: str | None = None
    threshold: float = 0.5


class EvaluateResponse(BaseModel):
    aggregate: MetricRecord
    per_image: list[MetricRecord]


class BenchRequest(BaseModel):
    manifest: str
    ratios: list[float]
    losses: list[str]
    seed: int = 42
    epochs: int = 20
    learning_rate: float = 10.0
    batch_size: int = 1
    test_fraction: float = 0.2
    threshold: float = 0.5
    include_empty: bool = False
    config: LossConfigModel | None = None


class BenchRow(BaseModel):
    loss: str
    display: str
    ratio: float
    skipped: str | None = None
    selected_loss: str | None = None
    n_train: int | None = None
    n_test: int | None = None
    accuracy: float | None = None
    dsc: float | None = None
    specificity: float | None = None
    sensitivity: float | None = None
    precision: float | None = None
    mae: float | None = None


class BenchResponse(BaseModel):
    rows: list[BenchRow]
