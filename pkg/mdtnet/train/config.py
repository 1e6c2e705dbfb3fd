from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from mdtnet.loss import LossWeights


class TrainConfig(BaseModel):
    """One training run: a source domain translated into one or more targets."""

    model_config = ConfigDict(extra="forbid", frozen=True, allow_inf_nan=False)

    source_domain: int = Field(ge=0)
    target_domains: tuple[int, ...]
    total_iters: int = Field(ge=1)
    batch: int = Field(default=4, ge=1)
    base_lr: float = Field(default=1e-3, gt=0)
    decay_factor: float = Field(default=0.1, gt=0)
    decay_at: float = Field(default=0.5, gt=0, lt=1)
    seed: int = Field(default=0, ge=0)
    weights: LossWeights = Field(default_factory=LossWeights)
    checkpoint_every: int = Field(default=1000, ge=0)  # 0 keeps only the final checkpoint

    @field_validator("target_domains")
    @classmethod
    def _targets(cls, value: tuple[int, ...]) -> tuple[int, ...]:
        if not value:
            raise ValueError("at least one target domain is required")
        if len(set(value)) != len(value):
            raise ValueError(f"duplicate target domains in {list(value)}")
        if any(d < 0 for d in value):
            raise ValueError("domain ids must be >= 0")
        return value

    @model_validator(mode="after")
    def _source_not_a_target(self) -> "TrainConfig":
        if self.source_domain in self.target_domains:
            raise ValueError(f"source domain {self.source_domain} is also listed as a target")
        return self
