import hashlib
import json
from collections.abc import Iterator
from contextlib import contextmanager
from typing import Any

import numpy as np
import torch
from pydantic import BaseModel


def philox(*keys: int) -> np.random.Generator:
    """
    Build a counter-based generator keyed by a tuple of non-negative integers.

    The same key tuple always yields the same stream, independent of call
    order or of any other generator in the process.
    """
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(list(keys))))


def stream_seed(*keys: int) -> int:
    """Derive a 63-bit integer seed from a tuple of integer keys."""
    state = np.random.SeedSequence(list(keys)).generate_state(1, dtype=np.uint64)
    return int(state[0] >> np.uint64(1))


def stable_hash(payload: Any) -> int:
    """Hash a JSON-serializable payload to a non-negative 32-bit integer."""
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:4], "little")


def config_hash(*configs: BaseModel) -> str:
    """SHA-256 over the canonical JSON of one or more configuration models."""
    payload = [config.model_dump(mode="json") for config in configs]
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


@contextmanager
def seeded_torch(seed: int) -> Iterator[None]:
    """Run a block with torch's global RNG seeded, restoring the previous state after."""
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(seed)
        yield


def fixed_execution_mode() -> None:
    """Ask torch for deterministic kernels so repeated runs are bitwise comparable."""
    torch.use_deterministic_algorithms(True, warn_only=True)
