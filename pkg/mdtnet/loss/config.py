import math

from pydantic import BaseModel, ConfigDict, Field, field_validator

DEFAULT_ALPHA = 100.0


class LossWeights(BaseModel):
    """
    Weights of the combined objective.

    `alpha` holds per-domain overrides keyed by domain id; domains without an
    entry use `default_alpha`. `lambda_content_on_transfer` adds a content term
    on the transferred images when nonzero.
    """

    model_config = ConfigDict(extra="forbid", frozen=True, allow_inf_nan=False)

    alpha: dict[int, float] = Field(default_factory=dict)
    default_alpha: float = Field(default=DEFAULT_ALPHA, gt=0)
    lambda_content_on_transfer: float = Field(default=0.0, ge=0)

    @field_validator("alpha")
    @classmethod
    def _positive_alphas(cls, value: dict[int, float]) -> dict[int, float]:
        for domain_id, weight in value.items():
            if not math.isfinite(weight) or weight <= 0:
                raise ValueError(f"alpha for domain {domain_id} must be finite and > 0")
        return value

    def alpha_for(self, domain_id: int) -> float:
        return self.alpha.get(domain_id, self.default_alpha)
