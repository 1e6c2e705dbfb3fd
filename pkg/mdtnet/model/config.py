from typing import Literal

from pydantic import BaseModel, ConfigDict, Field

TransferVariant = Literal["dense", "single_conv"]


class ModelConfig(BaseModel):
    """
    Shape of the generator: encoder/decoder widths, number of scales and the
    per-domain transfer modules.

    `residual_output=False` and `transfer_variant="single_conv"` are the two
    architectural ablations; everything else is a capacity knob.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    base_channels: int = Field(default=32, ge=1)
    scales: Literal[2, 3] = 3
    transfer_depth: int = Field(default=3, ge=1)
    transfer_growth: int = Field(default=16, ge=1)
    n_domains: int = Field(default=1, ge=1)
    residual_output: bool = True
    transfer_variant: TransferVariant = "dense"

    def channel_plan(self) -> list[int]:
        """Channels at each encoder scale, doubling from `base_channels`."""
        return [self.base_channels * 2**s for s in range(self.scales)]

    @property
    def size_divisor(self) -> int:
        return 2 ** (self.scales - 1)

    def with_domains(self, n_domains: int) -> "ModelConfig":
        """A validated copy with a different number of domains."""
        return type(self).model_validate({**self.model_dump(), "n_domains": n_domains})
