import json
import logging
import shutil
from collections.abc import Iterator
from contextlib import contextmanager
from enum import Enum
from pathlib import Path
from typing import Annotated

import torch
import typer
from rich.console import Console
from rich.logging import RichHandler

from mdtnet.async_patterns import ParallelExecutor, workers_from_env
from mdtnet.core.exceptions import (
    ConfigurationError,
    DatasetError,
    MDTNetError,
    UnknownDomainError,
    ValidationError,
)
from mdtnet.core.seeding import fixed_execution_mode
from mdtnet.core.validation import build_config
from mdtnet.data import (
    IMG_EXTS,
    DomainStyle,
    check_size,
    default_domain_names,
    default_styles,
    export_synthetic,
    find_domain,
    image_size,
    load_image,
    mask_paths,
    save_image,
    scan_dataset,
    split_holdout,
)
from mdtnet.fen import import_torchvision_weights, load_fen
from mdtnet.io import read_manifest
from mdtnet.metrics import MetricsReport, evaluate_direction, parse_embedder, write_reports
from mdtnet.model import Checkpoint, load_checkpoint
from mdtnet.train import TrainConfig, train

from .config import RunConfigFile, load_run_config, write_resolved_config

logger = logging.getLogger("mdtnet.cli")

app = typer.Typer(
    name="mdtnet",
    help="Multi-domain image transfer: synthesize data, train, translate, evaluate.",
    no_args_is_help=True,
    add_completion=False,
)
err_console = Console(stderr=True)

USAGE_EXIT = 2
FAILURE_EXIT = 1


class Ablation(str, Enum):
    none = "none"
    no_residual = "no-residual"
    single_conv = "single-conv"
    vgg19 = "vgg19"


@contextmanager
def exit_codes() -> Iterator[None]:
    """Map library errors to exit codes: 2 for usage/config problems, 1 otherwise."""
    try:
        yield
    except (ConfigurationError, ValidationError, UnknownDomainError) as exc:
        err_console.print(f"[bold red]error:[/] {exc}")
        raise typer.Exit(USAGE_EXIT) from exc
    except MDTNetError as exc:
        err_console.print(f"[bold red]failed:[/] {exc}")
        raise typer.Exit(FAILURE_EXIT) from exc


def configure_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=err_console, show_path=False)],
        force=True,
    )


def parse_size(text: str) -> tuple[int, int]:
    height, sep, width = text.lower().partition("x")
    if not sep or not height.isdigit() or not width.isdigit():
        raise ValidationError(f"size must look like HxW, got '{text}'")
    return int(height), int(width)


def apply_ablation(config: RunConfigFile, ablation: Ablation) -> RunConfigFile:
    if ablation is Ablation.no_residual:
        return config.model_copy(
            update={"model": config.model.model_copy(update={"residual_output": False})}
        )
    if ablation is Ablation.single_conv:
        return config.model_copy(
            update={"model": config.model.model_copy(update={"transfer_variant": "single_conv"})}
        )
    if ablation is Ablation.vgg19:
        return config.model_copy(
            update={"fen": config.fen.model_copy(update={"variant": "vgg19"})}
        )
    return config


def _open_checkpoint(path: Path, config: Path | None, override: bool) -> Checkpoint:
    if config is None:
        return load_checkpoint(path, override=override)
    run = load_run_config(config)
    metadata, _, _ = read_manifest(path)
    n_domains = max(len(metadata.get("domain_names", [])), 1)
    return load_checkpoint(
        path,
        model_config=run.model.with_domains(n_domains),
        fen_config=run.fen,
        override=override,
    )


@app.callback()
def main_callback(
    verbose: Annotated[bool, typer.Option("--verbose", "-v", help="Log at DEBUG level.")] = False,
) -> None:
    configure_logging(verbose)


@app.command()
def synth(
    out: Annotated[Path, typer.Option("--out", help="Directory to write the corpus to.")],
    domains: Annotated[int, typer.Option("--domains", min=1)] = 3,
    per_domain: Annotated[int, typer.Option("--per-domain", min=1)] = 200,
    size: Annotated[str, typer.Option("--size", help="Image size as HxW.")] = "64x64",
    seed: Annotated[int, typer.Option("--seed", min=0)] = 0,
    style_file: Annotated[
        Path | None, typer.Option("--style-file", help="JSON list of per-domain styles.")
    ] = None,
    force: Annotated[bool, typer.Option("--force", help="Replace a non-empty --out.")] = False,
) -> None:
    """Write a synthetic multi-domain corpus with structure and fluid masks."""
    with exit_codes():
        shape = check_size(parse_size(size))
        if style_file is not None:
            try:
                raw = json.loads(style_file.read_text(encoding="utf-8"))
                styles = [build_config(DomainStyle, **entry) for entry in raw]
            except (OSError, json.JSONDecodeError, TypeError) as exc:
                raise ConfigurationError(f"cannot read styles from {style_file}: {exc}") from exc
            if len(styles) != domains:
                raise ConfigurationError(
                    f"{style_file} defines {len(styles)} styles for {domains} domains"
                )
        else:
            styles = default_styles(domains, seed)

        if out.exists() and any(out.iterdir()):
            if not force:
                raise ConfigurationError(f"{out} is not empty; pass --force to replace it")
            shutil.rmtree(out)

        executor = ParallelExecutor(limit=max(1, workers_from_env()))
        datasets = export_synthetic(
            out, styles, per_domain, shape, seed, default_domain_names(domains), executor
        )
        logger.info(f"Wrote {sum(d.count for d in datasets)} images to {out}")


@app.command("train")
def train_command(
    data: Annotated[Path, typer.Option("--data", help="Dataset root, one subdirectory per domain.")],
    source: Annotated[str, typer.Option("--source", help="Name of the source domain.")],
    out: Annotated[Path, typer.Option("--out", help="Run directory.")],
    config: Annotated[Path | None, typer.Option("--config", help="JSON run configuration.")] = None,
    ablation: Annotated[Ablation, typer.Option("--ablation")] = Ablation.none,
    resume: Annotated[
        Path | None, typer.Option("--resume", help="Continue from this checkpoint.")
    ] = None,
) -> None:
    """Train one source domain towards its target domains."""
    with exit_codes():
        run = apply_ablation(load_run_config(config), ablation)
        datasets = scan_dataset(data)
        source_set = find_domain(datasets, source)
        target_names = run.train.targets or tuple(
            d.name for d in datasets if d.name != source_set.name
        )
        targets = [find_domain(datasets, name) for name in target_names]

        training_sets = []
        holdout: dict[str, list[str]] = {}
        for dataset in datasets:
            kept, held = split_holdout(dataset, run.data.holdout, run.data.seed)
            training_sets.append(kept)
            if held is not None:
                holdout[dataset.name] = [p.name for p in held.image_paths]

        size = check_size(
            run.data.size or image_size(source_set.image_paths[0]),
            multiple=run.model.size_divisor,
        )
        resolved = run.model_copy(
            update={
                "model": run.model.with_domains(len(datasets)),
                "train": run.train.model_copy(update={"targets": tuple(target_names)}),
                "data": run.data.model_copy(update={"size": size}),
            }
        )
        train_cfg = build_config(
            TrainConfig,
            source_domain=source_set.domain_id,
            target_domains=tuple(t.domain_id for t in targets),
            total_iters=run.train.total_iters,
            batch=run.train.batch,
            base_lr=run.train.base_lr,
            decay_factor=run.train.decay_factor,
            decay_at=run.train.decay_at,
            seed=run.train.seed,
            weights=run.loss,
            checkpoint_every=run.train.checkpoint_every,
        )
        write_resolved_config(resolved, out)
        logger.info(f"Ablation: {ablation.value}; resolved config in {out}")

        fixed_execution_mode()
        _, log = train(
            train_cfg,
            training_sets,
            resolved.model,
            resolved.fen,
            out,
            size=size,
            resume=resume,
            num_workers=workers_from_env(),
            extra_metadata={
                "run_config": resolved.model_dump(mode="json"),
                "ablation": ablation.value,
                "holdout": holdout,
            },
        )
        logger.info(f"Final checkpoint: {log.final_checkpoint}")


def _input_images(path: Path) -> list[Path]:
    if path.is_file():
        return [path]
    if not path.is_dir():
        raise DatasetError(f"input not found: {path}")
    images = sorted(p for p in path.iterdir() if p.is_file() and p.suffix.lower() in IMG_EXTS)
    if not images:
        raise DatasetError(f"no images in {path}")
    return images


@app.command()
def translate(
    checkpoint: Annotated[Path, typer.Option("--checkpoint", help="Trained checkpoint.")],
    input_path: Annotated[Path, typer.Option("--in", help="Image file or directory.")],
    out: Annotated[Path, typer.Option("--out", help="Output directory.")],
    targets: Annotated[
        str, typer.Option("--targets", help="Comma-separated domain names, or 'all'.")
    ] = "all",
    copy_masks: Annotated[
        bool, typer.Option("--copy-masks", help="Copy source masks next to the outputs.")
    ] = False,
    config: Annotated[
        Path | None, typer.Option("--config", help="Check the checkpoint against this config.")
    ] = None,
    override: Annotated[
        bool, typer.Option("--override", help="Accept a config hash mismatch.")
    ] = False,
) -> None:
    """Translate images into every requested target domain, no reference images needed."""
    with exit_codes():
        ckpt = _open_checkpoint(checkpoint, config, override)
        if targets == "all":
            ids = ckpt.targets or [
                i for i in range(len(ckpt.domain_names)) if i != ckpt.source
            ]
        else:
            ids = [ckpt.domain_id(name.strip()) for name in targets.split(",") if name.strip()]
        if not ids:
            raise ConfigurationError("no target domains selected")

        model = ckpt.model.eval()
        written = 0
        for path in _input_images(input_path):
            image = load_image(path)
            with torch.no_grad():
                outputs = model.translate_all(image, ids)
            for domain_id, result in outputs.items():
                target_dir = out / ckpt.domain_names[domain_id]
                save_image(result[0], target_dir / f"{path.stem}.png")
                written += 1
                if copy_masks:
                    for mask in mask_paths(path):
                        if mask.is_file():
                            (target_dir / mask.parent.name).mkdir(parents=True, exist_ok=True)
                            shutil.copy2(mask, target_dir / mask.parent.name / mask.name)
        logger.info(f"Wrote {written} translated images to {out}")


@app.command("eval")
def eval_command(
    checkpoint: Annotated[Path, typer.Option("--checkpoint", help="Trained checkpoint.")],
    data: Annotated[Path, typer.Option("--data", help="Dataset root.")],
    source: Annotated[str, typer.Option("--source", help="Name of the source domain.")],
    out: Annotated[Path, typer.Option("--out", help="Directory for JSON and CSV reports.")],
    embedder: Annotated[
        str | None, typer.Option("--embedder", help="fen:LAYER or inception:FILE.")
    ] = None,
    config: Annotated[Path | None, typer.Option("--config", help="JSON run configuration.")] = None,
    holdout_only: Annotated[
        bool, typer.Option("--holdout-only", help="Use only images held out from training.")
    ] = False,
    override: Annotated[bool, typer.Option("--override")] = False,
) -> None:
    """Score every source -> target direction stored in a checkpoint."""
    with exit_codes():
        ckpt = _open_checkpoint(checkpoint, config, override)
        if config is not None:
            run = load_run_config(config)
        else:
            run = build_config(RunConfigFile, **ckpt.metadata.get("run_config", {}))
        spec = embedder or run.eval.embedder

        datasets = scan_dataset(data)
        source_set = find_domain(datasets, source)
        if holdout_only:
            held = set(ckpt.metadata.get("holdout", {}).get(source_set.name, []))
            if not held:
                raise ConfigurationError(f"checkpoint records no held-out images for {source}")
            source_set = source_set.model_copy(
                update={"image_paths": tuple(p for p in source_set.image_paths if p.name in held)}
            )
        size = tuple(ckpt.metadata.get("image_size") or image_size(source_set.image_paths[0]))

        fen = load_fen(ckpt.fen_config, extra_layers=run.eval.layers)
        embed_with = parse_embedder(spec, ckpt.fen_config, fen)
        num_workers = workers_from_env()

        reports: list[MetricsReport] = []
        for domain_id in ckpt.targets:
            name = ckpt.domain_names[domain_id]
            try:
                target_set = find_domain(datasets, name)
            except UnknownDomainError:
                logger.warning(f"No data for target domain {name} under {data}; skipping")
                continue
            reports.append(
                evaluate_direction(
                    ckpt.model,
                    source_set,
                    target_set,
                    fen,
                    embed_with,
                    target_domain=domain_id,
                    size=(int(size[0]), int(size[1])),
                    layers=run.eval.layers,
                    lam=run.eval.lam,
                    batch=run.eval.batch,
                    num_workers=num_workers,
                )
            )
        if not reports:
            raise DatasetError("no direction could be evaluated")
        _, csv_path = write_reports(reports, out)
        logger.info(f"Wrote {len(reports)} direction report(s) and {csv_path}")


@app.command("fen-import")
def fen_import(
    state_dict: Annotated[Path, typer.Option("--state-dict", help="Local torchvision VGG .pth file.")],
    out: Annotated[Path, typer.Option("--out", help="Archive to write.")],
    variant: Annotated[str, typer.Option("--variant")] = "vgg16",
) -> None:
    """Convert a locally stored torchvision VGG state dict into a FEN weight archive."""
    with exit_codes():
        if variant not in ("vgg16", "vgg19"):
            raise ConfigurationError(f"unknown FEN variant '{variant}'")
        try:
            weights = torch.load(state_dict, map_location="cpu", weights_only=True)
        except (OSError, RuntimeError) as exc:
            raise ConfigurationError(f"cannot read {state_dict}: {exc}") from exc
        path = import_torchvision_weights(weights, variant, out)
        logger.info(f"Wrote {variant} FEN weights to {path}")


def main() -> None:
    app()
