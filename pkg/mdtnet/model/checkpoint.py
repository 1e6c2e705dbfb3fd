import logging
import os
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import torch

from mdtnet.core.exceptions import (
    CheckpointError,
    ConfigMismatchError,
    ManifestMismatchError,
    UnknownDomainError,
)
from mdtnet.core.seeding import config_hash, seeded_torch
from mdtnet.fen.config import FenConfig
from mdtnet.io import read_archive, write_archive

from .config import ModelConfig
from .generator import Generator

logger = logging.getLogger(__name__)

CHECKPOINT_FORMAT = "mdtnet-checkpoint"
CHECKPOINT_VERSION = 1

_PARAM_PREFIX = "model."
_OPTIM_PREFIX = "optim."


@dataclass
class Checkpoint:
    """A generator restored from disk together with the run facts stored beside it."""

    model: Generator
    model_config: ModelConfig
    fen_config: FenConfig
    iteration: int
    domain_names: list[str]
    source: int | None = None
    targets: list[int] = field(default_factory=list)
    optimizer_state: dict[str, dict[str, torch.Tensor]] = field(default_factory=dict)
    metadata: dict[str, Any] = field(default_factory=dict)

    @property
    def config_hash(self) -> str:
        return str(self.metadata.get("config_hash", ""))

    def domain_id(self, name: str) -> int:
        if name not in self.domain_names:
            raise UnknownDomainError(
                f"unknown domain '{name}' (checkpoint domains: {', '.join(self.domain_names)})"
            )
        return self.domain_names.index(name)


def _optimizer_tensors(
    model: Generator, optimizer: torch.optim.Optimizer
) -> dict[str, torch.Tensor]:
    tensors = {}
    for name, param in model.named_parameters():
        for key, value in optimizer.state.get(param, {}).items():
            if isinstance(value, torch.Tensor):
                tensors[f"{_OPTIM_PREFIX}{name}.{key}"] = value
    return tensors


def save_checkpoint(
    path: str | os.PathLike[str],
    model: Generator,
    fen_config: FenConfig,
    *,
    iteration: int,
    domain_names: Sequence[str],
    source: int | None = None,
    targets: Sequence[int] = (),
    optimizer: torch.optim.Optimizer | None = None,
    extra: Mapping[str, Any] | None = None,
) -> Path:
    """
    Write parameters, optional Adam state and run facts to a tensor archive.

    Raises:
        CheckpointError: The archive could not be written.
    """
    tensors = {f"{_PARAM_PREFIX}{k}": v for k, v in model.state_dict().items()}
    if optimizer is not None:
        tensors.update(_optimizer_tensors(model, optimizer))

    metadata = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "model_config": model.config.model_dump(mode="json"),
        "fen_config": fen_config.model_dump(mode="json"),
        "config_hash": config_hash(model.config, fen_config),
        "iteration": iteration,
        "domain_names": list(domain_names),
        "source": source,
        "targets": list(targets),
        **dict(extra or {}),
    }
    try:
        written = write_archive(path, tensors, metadata)
    except OSError as exc:
        raise CheckpointError(f"cannot write checkpoint {path}: {exc}") from exc
    logger.info(f"Saved checkpoint {written} at iteration {iteration}")
    return written


def load_checkpoint(
    path: str | os.PathLike[str],
    *,
    model_config: ModelConfig | None = None,
    fen_config: FenConfig | None = None,
    override: bool = False,
) -> Checkpoint:
    """
    Restore a generator from a checkpoint archive.

    When the caller supplies `model_config` or `fen_config`, the stored config
    hash is compared with theirs (a missing one is taken from the file). A
    mismatch is refused unless `override` is set, in which case the stored
    configs are used and a warning is logged. Without either config the check
    is skipped and an info message says so.

    Raises:
        ConfigMismatchError: The stored hash differs from the supplied configs.
        ManifestMismatchError: Not a checkpoint, or parameters that do not fit
            the stored architecture.
    """
    archive = read_archive(path)
    meta = archive.metadata
    if meta.get("format") != CHECKPOINT_FORMAT:
        raise ManifestMismatchError(f"{path} is not an mdtnet checkpoint")

    stored_model = ModelConfig.model_validate(meta["model_config"])
    stored_fen = FenConfig.model_validate(meta["fen_config"])
    if model_config is None and fen_config is None:
        logger.info(f"No run config supplied for {path}; config hash not checked")
    else:
        expected = config_hash(model_config or stored_model, fen_config or stored_fen)
        if meta.get("config_hash") != expected:
            message = (
                f"checkpoint config hash mismatch for {path}: "
                f"stored {meta.get('config_hash')}, expected {expected}"
            )
            if not override:
                raise ConfigMismatchError(message)
            logger.warning(f"{message}; continuing because override was requested")

    # initial weights come from a private RNG and are replaced below
    with seeded_torch(0):
        model = Generator(stored_model)
    state = model.state_dict()
    params = {
        key[len(_PARAM_PREFIX) :]: value
        for key, value in archive.tensors.items()
        if key.startswith(_PARAM_PREFIX)
    }
    missing = sorted(state.keys() - params.keys())
    unexpected = sorted(params.keys() - state.keys())
    if missing or unexpected:
        raise ManifestMismatchError(
            f"checkpoint {path} does not fit its architecture "
            f"(missing: {missing[:3]}, unexpected: {unexpected[:3]})"
        )
    for key, value in params.items():
        if value.shape != state[key].shape:
            raise ManifestMismatchError(
                f"checkpoint {path}: '{key}' has shape {tuple(value.shape)}, "
                f"expected {tuple(state[key].shape)}"
            )
    model.load_state_dict(params)

    optimizer_state: dict[str, dict[str, torch.Tensor]] = {}
    for key, value in archive.tensors.items():
        if key.startswith(_OPTIM_PREFIX):
            name, _, slot = key[len(_OPTIM_PREFIX) :].rpartition(".")
            optimizer_state.setdefault(name, {})[slot] = value

    return Checkpoint(
        model=model,
        model_config=stored_model,
        fen_config=stored_fen,
        iteration=int(meta.get("iteration", 0)),
        domain_names=list(meta.get("domain_names", [])),
        source=meta.get("source"),
        targets=list(meta.get("targets", [])),
        optimizer_state=optimizer_state,
        metadata=meta,
    )


def restore_optimizer(
    optimizer: torch.optim.Optimizer,
    model: Generator,
    state: Mapping[str, Mapping[str, torch.Tensor]],
) -> None:
    """Put per-parameter optimizer slots saved by `save_checkpoint` back in place."""
    for name, param in model.named_parameters():
        if name in state:
            optimizer.state[param] = {
                slot: value.clone().to(param.device) if value.dim() else value.clone()
                for slot, value in state[name].items()
            }
