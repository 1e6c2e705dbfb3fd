import logging
import os
import time
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import torch
from torch.utils.data import DataLoader

from mdtnet.core.exceptions import ConfigurationError, UnknownDomainError, ValidationError
from mdtnet.data import DomainDataset, check_size, image_size, iteration_loader
from mdtnet.fen import DEFAULT_CONTENT_LAYERS, DEFAULT_DOMAIN_LAYERS, FenConfig, load_fen
from mdtnet.loss import DomainTransfer, LossReport, TransferOutputs, total_loss
from mdtnet.model import (
    Generator,
    ModelConfig,
    build_model,
    load_checkpoint,
    restore_optimizer,
    save_checkpoint,
)
from mdtnet.plugins import JsonLinesLogPlugin, Plugin, PluginManager, TrainingHook
from mdtnet.types import FeatureExtractorProtocol, ImageBatch

from .config import TrainConfig
from .schedule import ADAM_BETAS, ADAM_EPS, lr_at

logger = logging.getLogger(__name__)

TIMING_WINDOW = 100
CHECKPOINT_DIR = "checkpoints"
FINAL_CHECKPOINT = "final.mdt"


@dataclass(frozen=True)
class LogEntry:
    iteration: int
    report: LossReport
    lr: float


@dataclass
class TrainLog:
    """What a run recorded: loss reports, wall-clock timings and checkpoints."""

    entries: list[LogEntry] = field(default_factory=list)
    # (iterations completed, seconds spent on the last TIMING_WINDOW of them)
    timings: list[tuple[int, float]] = field(default_factory=list)
    checkpoints: list[Path] = field(default_factory=list)
    final_checkpoint: Path | None = None

    def append(self, iteration: int, report: LossReport, lr: float) -> None:
        if self.entries and iteration <= self.entries[-1].iteration:
            raise ValidationError(
                f"iteration {iteration} does not follow {self.entries[-1].iteration}"
            )
        self.entries.append(LogEntry(iteration=iteration, report=report, lr=lr))

    @property
    def totals(self) -> list[float]:
        return [entry.report.total for entry in self.entries]


def make_optimizer(model: Generator, cfg: TrainConfig) -> torch.optim.Adam:
    return torch.optim.Adam(model.parameters(), lr=cfg.base_lr, betas=ADAM_BETAS, eps=ADAM_EPS)


def training_step(
    state: Generator,
    fen: FeatureExtractorProtocol,
    batch_source: ImageBatch,
    target_batches: Mapping[int, ImageBatch],
    cfg: TrainConfig,
    *,
    optimizer: torch.optim.Optimizer,
    iteration: int = 0,
    content_layers: Sequence[str] = DEFAULT_CONTENT_LAYERS,
    domain_layers: Sequence[str] = DEFAULT_DOMAIN_LAYERS,
) -> LossReport:
    """
    One joint update of the identity branch and every target branch.

    The source batch is encoded once; its reconstruction and its translation
    into each target domain feed the combined objective, and a single Adam
    step is taken at `lr_at(iteration, cfg)`. Transfer modules of domains that
    are not targets receive no gradient and are left untouched.

    Returns:
        The loss report computed before the update.

    Raises:
        ConfigurationError: A configured target domain has no batch.
        NonFiniteLossError: A loss component is not finite; no update is applied.
    """
    missing = [d for d in cfg.target_domains if d not in target_batches]
    if missing:
        raise ConfigurationError(f"missing target batch for domain(s) {missing}")

    lr = lr_at(iteration, cfg)
    for group in optimizer.param_groups:
        group["lr"] = lr

    state.train()
    optimizer.zero_grad(set_to_none=True)
    feats = state.encode(batch_source)
    reconstruction = state.decode(feats, batch_source)
    transfers = [
        DomainTransfer(
            domain_id=d,
            reference=target_batches[d],
            generated=state.decode(state.apply_transfer(feats, d), batch_source),
        )
        for d in cfg.target_domains
    ]
    report = total_loss(
        fen,
        TransferOutputs(source=batch_source, reconstruction=reconstruction, transfers=transfers),
        cfg.weights,
        content_layers,
        domain_layers,
    )
    assert report.objective is not None
    report.objective.backward()
    optimizer.step()
    report.objective = None
    return report


class Trainer:
    """Holds the model, its optimizer and the FEN for a sequence of training steps."""

    def __init__(
        self,
        model: Generator,
        fen: FeatureExtractorProtocol,
        cfg: TrainConfig,
        content_layers: Sequence[str] = DEFAULT_CONTENT_LAYERS,
        domain_layers: Sequence[str] = DEFAULT_DOMAIN_LAYERS,
    ):
        self.model = model
        self.fen = fen
        self.cfg = cfg
        self.content_layers = tuple(content_layers)
        self.domain_layers = tuple(domain_layers)
        self.optimizer = make_optimizer(model, cfg)

    def step(
        self, iteration: int, batch_source: ImageBatch, target_batches: Mapping[int, ImageBatch]
    ) -> LossReport:
        return training_step(
            self.model,
            self.fen,
            batch_source,
            target_batches,
            self.cfg,
            optimizer=self.optimizer,
            iteration=iteration,
            content_layers=self.content_layers,
            domain_layers=self.domain_layers,
        )


def _by_id(datasets: Sequence[DomainDataset], cfg: TrainConfig) -> dict[int, DomainDataset]:
    by_id = {d.domain_id: d for d in datasets}
    for domain_id in (cfg.source_domain, *cfg.target_domains):
        if domain_id not in by_id:
            raise UnknownDomainError(
                f"unknown domain {domain_id} (datasets: "
                f"{', '.join(f'{d.domain_id}={d.name}' for d in datasets)})"
            )
    return by_id


def train(
    cfg: TrainConfig,
    datasets: Sequence[DomainDataset],
    model_cfg: ModelConfig,
    fen_cfg: FenConfig,
    out_dir: str | os.PathLike[str],
    *,
    size: tuple[int, int] | None = None,
    resume: str | os.PathLike[str] | None = None,
    plugins: Sequence[Plugin] = (),
    num_workers: int = 0,
    fen: FeatureExtractorProtocol | None = None,
    extra_metadata: Mapping[str, Any] | None = None,
) -> tuple[Generator, TrainLog]:
    """
    Run `cfg.total_iters` training steps and write checkpoints under `out_dir`.

    Batches for step k are drawn from streams keyed by (seed, domain id, k), so
    a run resumed from a checkpoint continues exactly as an uninterrupted run
    would. The JSON-lines log is flushed line by line and closed even when a
    step or a checkpoint write fails.

    Returns:
        The trained generator and the run's TrainLog.
    """
    out_dir = Path(out_dir)
    by_id = _by_id(datasets, cfg)
    highest = max(cfg.source_domain, *cfg.target_domains)
    if highest >= model_cfg.n_domains:
        raise ConfigurationError(
            f"model has {model_cfg.n_domains} domains but the run uses domain {highest}"
        )

    source = by_id[cfg.source_domain]
    size = check_size(
        tuple(size) if size is not None else image_size(source.image_paths[0]),
        multiple=model_cfg.size_divisor,
    )
    fen = fen if fen is not None else load_fen(fen_cfg)

    start = 0
    if resume is not None:
        checkpoint = load_checkpoint(resume, model_config=model_cfg, fen_config=fen_cfg)
        model = checkpoint.model
        start = checkpoint.iteration
        trainer = Trainer(model, fen, cfg, fen_cfg.content_layers, fen_cfg.domain_layers)
        restore_optimizer(trainer.optimizer, model, checkpoint.optimizer_state)
        logger.info(f"Resuming from {resume} at iteration {start}")
    else:
        model = build_model(model_cfg, cfg.seed)
        trainer = Trainer(model, fen, cfg, fen_cfg.content_layers, fen_cfg.domain_layers)

    alphas = {d: cfg.weights.alpha_for(d) for d in cfg.target_domains}
    logger.info(
        f"Training {source.name} -> {[by_id[d].name for d in cfg.target_domains]}: "
        f"{cfg.total_iters} iters, batch {cfg.batch}, size {size[0]}x{size[1]}, "
        f"lr {cfg.base_lr} x{cfg.decay_factor} at {cfg.decay_at:.0%}, "
        f"Adam betas {ADAM_BETAS} eps {ADAM_EPS}, alpha {alphas}, "
        f"lambda_content_on_transfer {cfg.weights.lambda_content_on_transfer}"
    )

    domain_names = [d.name for d in sorted(datasets, key=lambda d: d.domain_id)]
    metadata = {
        "train_config": cfg.model_dump(mode="json"),
        "image_size": list(size),
        **dict(extra_metadata or {}),
    }

    def checkpoint_to(path: Path, iteration: int) -> Path:
        written = save_checkpoint(
            path,
            model,
            fen_cfg,
            iteration=iteration,
            domain_names=domain_names,
            source=cfg.source_domain,
            targets=cfg.target_domains,
            optimizer=trainer.optimizer,
            extra=metadata,
        )
        log.checkpoints.append(written)
        manager.execute_hook(TrainingHook.CHECKPOINT, iteration, written)
        return written

    def loader(dataset: DomainDataset) -> DataLoader[torch.Tensor]:
        return iteration_loader(
            dataset,
            cfg.batch,
            cfg.seed,
            size,
            start=start,
            stop=cfg.total_iters,
            num_workers=num_workers,
        )

    log = TrainLog()
    manager = PluginManager([JsonLinesLogPlugin(), *plugins])
    manager.execute_hook(TrainingHook.TRAIN_START, cfg, out_dir, start)
    try:
        window_start = time.perf_counter()
        batches = zip(
            range(start, cfg.total_iters),
            loader(source),
            *(loader(by_id[d]) for d in cfg.target_domains),
            strict=True,
        )
        for iteration, batch_source, *target_list in batches:
            target_batches = dict(zip(cfg.target_domains, target_list, strict=True))
            report = trainer.step(iteration, batch_source, target_batches)
            lr = lr_at(iteration, cfg)
            log.append(iteration, report, lr)
            manager.execute_hook(TrainingHook.STEP_END, iteration, report, lr)

            done = iteration + 1
            if done % TIMING_WINDOW == 0:
                elapsed = time.perf_counter() - window_start
                log.timings.append((done, elapsed))
                logger.info(
                    f"iter {done}/{cfg.total_iters} total {report.total:.4f} "
                    f"({elapsed:.1f}s / {TIMING_WINDOW} iters)"
                )
                window_start = time.perf_counter()
            if cfg.checkpoint_every and done % cfg.checkpoint_every == 0 and done < cfg.total_iters:
                checkpoint_to(out_dir / CHECKPOINT_DIR / f"step-{done}.mdt", done)

        log.final_checkpoint = checkpoint_to(out_dir / FINAL_CHECKPOINT, cfg.total_iters)
    finally:
        manager.execute_hook(TrainingHook.TRAIN_END, log)
    return model, log
