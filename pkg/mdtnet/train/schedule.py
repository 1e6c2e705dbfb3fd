import math
from collections.abc import Hashable, Mapping
from dataclasses import dataclass
from typing import TypeVar

from mdtnet.core.exceptions import ValidationError

from .config import TrainConfig

K = TypeVar("K", bound=Hashable)

ADAM_BETAS = (0.9, 0.999)
ADAM_EPS = 1e-8


def lr_at(iteration: int, cfg: TrainConfig) -> float:
    """Step schedule: `base_lr` until `decay_at * total_iters`, then scaled by `decay_factor`."""
    if iteration < cfg.decay_at * cfg.total_iters:
        return cfg.base_lr
    return cfg.base_lr * cfg.decay_factor


@dataclass(frozen=True)
class IterationBudget:
    epochs: int
    total_iters: int


def balance_iterations(
    domain_sizes: Mapping[K, int],
    reference_epochs: Mapping[K, int] | None = None,
    *,
    budget: int | None = None,
    batch: int = 1,
) -> dict[K, IterationBudget]:
    """
    Per-domain epoch counts that give every domain a comparable number of iterations.

    With `reference_epochs` the given epochs are used as-is. Otherwise every
    domain gets round(budget / size) epochs (at least one), so small domains
    are revisited more often. Iterations are epochs * ceil(size / batch).

    Raises:
        ValidationError: Non-positive sizes or batch, or neither epochs nor a budget given.
    """
    if batch < 1:
        raise ValidationError(f"batch must be >= 1, got {batch}")
    for domain, size in domain_sizes.items():
        if size < 1:
            raise ValidationError(f"domain {domain!r} has size {size}; sizes must be >= 1")

    plan: dict[K, IterationBudget] = {}
    for domain, size in domain_sizes.items():
        if reference_epochs is not None:
            if domain not in reference_epochs:
                raise ValidationError(f"no reference epochs for domain {domain!r}")
            epochs = reference_epochs[domain]
        elif budget is not None:
            if budget < 1:
                raise ValidationError(f"budget must be >= 1, got {budget}")
            epochs = max(1, round(budget / size))
        else:
            raise ValidationError("either reference_epochs or budget is required")
        plan[domain] = IterationBudget(epochs=epochs, total_iters=epochs * math.ceil(size / batch))
    return plan
