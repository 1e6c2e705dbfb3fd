import json
import os
from pathlib import Path

import pydantic
from pydantic import BaseModel, ConfigDict, Field, field_validator

from mdtnet.core.exceptions import ConfigurationError
from mdtnet.core.validation import describe_errors
from mdtnet.fen import DEFAULT_CONTENT_LAYERS, FenConfig
from mdtnet.loss import LossWeights
from mdtnet.model import ModelConfig

RESOLVED_CONFIG_NAME = "resolved-config.json"


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True, allow_inf_nan=False)


class DataSettings(_Section):
    size: tuple[int, int] | None = None  # (height, width); None keeps the source images' size
    holdout: int = Field(default=0, ge=0)
    seed: int = Field(default=0, ge=0)


class TrainSettings(_Section):
    # target domain names; None trains towards every domain except the source
    targets: tuple[str, ...] | None = None
    total_iters: int = Field(default=3000, ge=1)
    batch: int = Field(default=4, ge=1)
    base_lr: float = Field(default=1e-3, gt=0)
    decay_factor: float = Field(default=0.1, gt=0)
    decay_at: float = Field(default=0.5, gt=0, lt=1)
    seed: int = Field(default=0, ge=0)
    checkpoint_every: int = Field(default=1000, ge=0)


class EvalSettings(_Section):
    embedder: str = "fen:relu4_1"
    lam: float = 1.0
    layers: tuple[str, ...] = DEFAULT_CONTENT_LAYERS
    batch: int = Field(default=8, ge=1)

    @field_validator("embedder")
    @classmethod
    def _embedder_form(cls, value: str) -> str:
        kind, _, rest = value.partition(":")
        if kind not in ("fen", "inception") or not rest:
            raise ValueError("embedder must look like fen:LAYER or inception:FILE")
        return value


class RunConfigFile(_Section):
    """Everything a run needs; every section and field is optional."""

    data: DataSettings = Field(default_factory=DataSettings)
    model: ModelConfig = Field(default_factory=ModelConfig)
    fen: FenConfig = Field(default_factory=FenConfig)
    train: TrainSettings = Field(default_factory=TrainSettings)
    loss: LossWeights = Field(default_factory=LossWeights)
    eval: EvalSettings = Field(default_factory=EvalSettings)


def load_run_config(path: str | os.PathLike[str] | None) -> RunConfigFile:
    """
    Parse a JSON run configuration; None gives the defaults.

    Raises:
        ConfigurationError: Unreadable file, malformed JSON (with line and
            column) or schema violations (with field paths).
    """
    if path is None:
        return RunConfigFile()
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(
            f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    try:
        return RunConfigFile.model_validate(raw)
    except pydantic.ValidationError as exc:
        raise ConfigurationError(f"{path}: {describe_errors(exc)}") from exc


def write_resolved_config(config: RunConfigFile, out_dir: Path) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / RESOLVED_CONFIG_NAME
    path.write_text(json.dumps(config.model_dump(mode="json"), indent=2, sort_keys=True) + "\n")
    return path
