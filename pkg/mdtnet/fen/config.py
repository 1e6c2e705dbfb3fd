from pathlib import Path
from typing import Annotated, Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .layers import DEFAULT_CONTENT_LAYERS, DEFAULT_DOMAIN_LAYERS, FenVariant, layer_table


class PretrainedWeights(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: Literal["pretrained-file"] = "pretrained-file"
    path: Path


class RandomWeights(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: Literal["random-seeded"] = "random-seeded"
    seed: int = 42


WeightsSource = Annotated[PretrainedWeights | RandomWeights, Field(discriminator="kind")]


class FenConfig(BaseModel):
    """Which VGG stack to use, where its weights come from and which layers feed the losses."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    variant: FenVariant = "vgg16"
    weights: WeightsSource = Field(default_factory=RandomWeights)
    content_layers: tuple[str, ...] = DEFAULT_CONTENT_LAYERS
    domain_layers: tuple[str, ...] = DEFAULT_DOMAIN_LAYERS

    @model_validator(mode="after")
    def _check_layers(self) -> "FenConfig":
        if not self.content_layers:
            raise ValueError("content_layers must not be empty")
        if not self.domain_layers:
            raise ValueError("domain_layers must not be empty")
        table = layer_table(self.variant)
        unknown = [n for n in (*self.content_layers, *self.domain_layers) if n not in table]
        if unknown:
            raise ValueError(f"unknown {self.variant} layer(s): {', '.join(unknown)}")
        return self
