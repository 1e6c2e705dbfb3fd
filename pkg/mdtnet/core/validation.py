from collections.abc import Callable
from typing import Any, TypeVar

import pydantic

from .exceptions import ConfigurationError

ModelT = TypeVar("ModelT", bound=pydantic.BaseModel)


def describe_errors(exc: pydantic.ValidationError) -> str:
    """Render pydantic errors as `field.path: message` lines."""
    lines = []
    for error in exc.errors():
        loc = ".".join(str(part) for part in error["loc"]) or "<root>"
        lines.append(f"{loc}: {error['msg']}")
    return "; ".join(lines)


def build_config(factory: Callable[..., ModelT], /, **values: Any) -> ModelT:
    """
    Construct a configuration model, translating pydantic failures into ConfigurationError.

    Parameters:
        factory: A pydantic model class (or any callable that raises pydantic.ValidationError).
        **values: Field values forwarded to the factory.

    Returns:
        The validated configuration instance.
    """
    try:
        return factory(**values)
    except pydantic.ValidationError as exc:
        raise ConfigurationError(describe_errors(exc)) from exc
