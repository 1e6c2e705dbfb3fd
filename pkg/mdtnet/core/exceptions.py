class MDTNetError(Exception):
    """Base exception for MDTNet."""

    pass


class ConfigurationError(MDTNetError):
    """Raised when there is a configuration error."""

    pass


class ValidationError(MDTNetError, ValueError):
    """Raised when an argument fails validation."""

    pass


class DatasetError(MDTNetError):
    """Raised when a dataset directory cannot be used."""

    pass


class ImageDecodeError(MDTNetError):
    """Raised when an image file cannot be decoded."""

    def __init__(self, path: object, reason: str = "") -> None:
        self.path = path
        message = f"cannot decode image {path}"
        if reason:
            message = f"{message}: {reason}"
        super().__init__(message)


class ShapeError(MDTNetError, ValueError):
    """Raised when tensor shapes do not fit together."""

    pass


class UnknownDomainError(MDTNetError, KeyError):
    """Raised when a domain id or name is not known to a model or corpus."""

    def __str__(self) -> str:
        # KeyError quotes its argument; keep the plain message.
        return str(self.args[0]) if self.args else "unknown domain"


class ManifestMismatchError(MDTNetError):
    """Raised when an archive manifest does not match what the loader expects."""

    pass


class ConfigMismatchError(ManifestMismatchError, ConfigurationError):
    """Raised when a checkpoint was written under a different model or FEN configuration."""

    pass


class NonFiniteLossError(MDTNetError, FloatingPointError):
    """Raised when a loss component is NaN or infinite."""

    def __init__(self, component: str, value: float) -> None:
        self.component = component
        self.value = value
        super().__init__(f"non-finite loss in component '{component}': {value}")


class EmbedderMismatchError(MDTNetError, ValueError):
    """Raised when embedding sets from different embedders are compared."""

    pass


class InsufficientSamplesError(MDTNetError, ValueError):
    """Raised when a statistic needs more samples than were given."""

    pass


class NumericalError(MDTNetError, ArithmeticError):
    """Raised when a numerical routine fails to produce a valid result."""

    pass


class CheckpointError(MDTNetError, OSError):
    """Raised when a checkpoint cannot be written."""

    pass
