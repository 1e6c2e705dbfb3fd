from .exceptions import (
    CheckpointError,
    ConfigMismatchError,
    ConfigurationError,
    DatasetError,
    EmbedderMismatchError,
    ImageDecodeError,
    InsufficientSamplesError,
    ManifestMismatchError,
    MDTNetError,
    NonFiniteLossError,
    NumericalError,
    ShapeError,
    UnknownDomainError,
    ValidationError,
)
from .seeding import (
    config_hash,
    fixed_execution_mode,
    philox,
    seeded_torch,
    stable_hash,
    stream_seed,
)
from .validation import build_config, describe_errors

__all__ = [
    "CheckpointError",
    "ConfigMismatchError",
    "ConfigurationError",
    "DatasetError",
    "EmbedderMismatchError",
    "ImageDecodeError",
    "InsufficientSamplesError",
    "ManifestMismatchError",
    "MDTNetError",
    "NonFiniteLossError",
    "NumericalError",
    "ShapeError",
    "UnknownDomainError",
    "ValidationError",
    "build_config",
    "config_hash",
    "describe_errors",
    "fixed_execution_mode",
    "philox",
    "seeded_torch",
    "stable_hash",
    "stream_seed",
]
