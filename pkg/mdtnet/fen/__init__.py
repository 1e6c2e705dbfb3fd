from .config import FenConfig, PretrainedWeights, RandomWeights, WeightsSource
from .extractor import (
    IMAGENET_MEAN,
    IMAGENET_STD,
    FeatureExtractor,
    extract,
    import_torchvision_weights,
    load_fen,
    save_fen_weights,
)
from .gram import FeatureMap, GramMatrix, gram, gram_matrix
from .layers import (
    DEFAULT_CONTENT_LAYERS,
    DEFAULT_DOMAIN_LAYERS,
    FenVariant,
    LayerSite,
    layer_table,
    parameter_shapes,
)


__all__ = [
    "DEFAULT_CONTENT_LAYERS",
    "DEFAULT_DOMAIN_LAYERS",
    "IMAGENET_MEAN",
    "IMAGENET_STD",
    "FeatureExtractor",
    "FeatureMap",
    "FenConfig",
    "FenVariant",
    "GramMatrix",
    "LayerSite",
    "PretrainedWeights",
    "RandomWeights",
    "WeightsSource",
    "extract",
    "gram",
    "gram_matrix",
    "import_torchvision_weights",
    "layer_table",
    "load_fen",
    "parameter_shapes",
    "save_fen_weights",
]
