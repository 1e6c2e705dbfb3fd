from .datasets import (
    DomainDataset,
    DomainImages,
    SeededBatchSampler,
    find_domain,
    iteration_loader,
    load_images,
    load_masks,
    mask_paths,
    sample_batch,
    sample_indices,
    scan_dataset,
    split_holdout,
)
from .images import (
    IMG_EXTS,
    check_image_batch,
    check_size,
    image_size,
    load_image,
    save_image,
)
from .synthetic import (
    DEFAULT_STYLES,
    NEUTRAL_STYLE,
    DomainStyle,
    SyntheticSample,
    default_domain_names,
    default_styles,
    domain_geometry_seed,
    export_synthetic,
    generate_synthetic,
)

__all__ = [
    "DEFAULT_STYLES",
    "IMG_EXTS",
    "NEUTRAL_STYLE",
    "DomainDataset",
    "DomainImages",
    "DomainStyle",
    "SeededBatchSampler",
    "SyntheticSample",
    "check_image_batch",
    "check_size",
    "default_domain_names",
    "default_styles",
    "domain_geometry_seed",
    "export_synthetic",
    "find_domain",
    "generate_synthetic",
    "image_size",
    "iteration_loader",
    "load_image",
    "load_images",
    "load_masks",
    "mask_paths",
    "sample_batch",
    "sample_indices",
    "save_image",
    "scan_dataset",
    "split_holdout",
]
