from dataclasses import dataclass
from functools import cache
from typing import Literal

from torchvision.models.vgg import cfgs

FenVariant = Literal["vgg16", "vgg19"]

# torchvision's configuration keys for the two stock VGG stacks
PLAN_KEYS: dict[str, str] = {"vgg16": "D", "vgg19": "E"}

DEFAULT_CONTENT_LAYERS = ("relu4_1",)
DEFAULT_DOMAIN_LAYERS = ("relu1_2", "relu2_2", "relu3_2", "relu4_2")


@dataclass(frozen=True)
class LayerSite:
    """Where a named activation lives inside the VGG `features` stack."""

    name: str
    index: int
    channels: int
    pools_before: int


@cache
def layer_table(variant: str) -> dict[str, LayerSite]:
    """
    Map relu<block>_<conv> names to their position in the variant's feature stack.

    Indices follow torchvision's layout: every conv is followed by its ReLU and
    every "M" entry is a 2x2 max-pool.
    """
    if variant not in PLAN_KEYS:
        raise KeyError(f"unknown FEN variant '{variant}'")
    table: dict[str, LayerSite] = {}
    index = 0
    block, conv, pools = 1, 0, 0
    for entry in cfgs[PLAN_KEYS[variant]]:
        if entry == "M":
            index += 1
            block += 1
            conv = 0
            pools += 1
            continue
        conv += 1
        name = f"relu{block}_{conv}"
        table[name] = LayerSite(name=name, index=index + 1, channels=int(entry), pools_before=pools)
        index += 2
    return table


def parameter_shapes(variant: str) -> dict[str, tuple[int, ...]]:
    """Expected `features.<i>.weight/bias` shapes for the full variant stack."""
    shapes: dict[str, tuple[int, ...]] = {}
    in_channels = 3
    index = 0
    for entry in cfgs[PLAN_KEYS[variant]]:
        if entry == "M":
            index += 1
            continue
        out_channels = int(entry)
        shapes[f"features.{index}.weight"] = (out_channels, in_channels, 3, 3)
        shapes[f"features.{index}.bias"] = (out_channels,)
        in_channels = out_channels
        index += 2
    return shapes
