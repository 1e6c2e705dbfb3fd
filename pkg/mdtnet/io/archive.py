"""
Flat tensor archive.

Layout::

    [8 bytes]  little-endian u64, length N of the JSON manifest
    [N bytes]  UTF-8 JSON manifest
    [...]      raw tensor bytes, concatenated in manifest order

The manifest is ``{"metadata": {...}, "tensors": [{"name", "dtype", "shape",
"offset", "nbytes"}, ...]}``; offsets are relative to the start of the data
section. dtypes are numpy type strings (``"<f4"``, ``"<f8"``, ...).
"""

import json
import logging
import os
import struct
from collections.abc import Mapping
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import torch

from mdtnet.core.exceptions import ManifestMismatchError

logger = logging.getLogger(__name__)

_HEADER = struct.Struct("<Q")


@dataclass(frozen=True)
class TensorEntry:
    name: str
    dtype: str
    shape: tuple[int, ...]
    offset: int
    nbytes: int


@dataclass
class Archive:
    """An archive read back from disk: tensors plus free-form metadata."""

    tensors: dict[str, torch.Tensor]
    metadata: dict[str, Any] = field(default_factory=dict)
    entries: dict[str, TensorEntry] = field(default_factory=dict)


def write_archive(
    path: str | os.PathLike[str],
    tensors: Mapping[str, torch.Tensor],
    metadata: Mapping[str, Any] | None = None,
) -> Path:
    """
    Write tensors and metadata to a flat archive, atomically.

    The file is first written next to the destination and then renamed, so a
    failed write never leaves a truncated archive behind.

    Returns:
        The destination path.
    """
    path = Path(path)
    arrays: list[tuple[str, np.ndarray]] = []
    entries = []
    offset = 0
    for name, tensor in tensors.items():
        array = np.ascontiguousarray(tensor.detach().cpu().numpy())
        entries.append(
            {
                "name": name,
                "dtype": array.dtype.str,
                "shape": list(array.shape),
                "offset": offset,
                "nbytes": array.nbytes,
            }
        )
        arrays.append((name, array))
        offset += array.nbytes

    manifest = json.dumps(
        {"metadata": dict(metadata or {}), "tensors": entries}, sort_keys=True
    ).encode()

    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    try:
        with open(tmp, "wb") as fh:
            fh.write(_HEADER.pack(len(manifest)))
            fh.write(manifest)
            for _, array in arrays:
                fh.write(array.tobytes())
        os.replace(tmp, path)
    finally:
        if tmp.exists():
            tmp.unlink()
    logger.debug(f"Wrote archive {path} ({len(entries)} tensors, {offset} bytes)")
    return path


def read_manifest(path: str | os.PathLike[str]) -> tuple[dict[str, Any], list[TensorEntry], int]:
    """Read only the manifest of an archive; returns (metadata, entries, data_start)."""
    with open(path, "rb") as fh:
        raw_len = fh.read(_HEADER.size)
        if len(raw_len) != _HEADER.size:
            raise ManifestMismatchError(f"{path} is not a tensor archive (truncated header)")
        (length,) = _HEADER.unpack(raw_len)
        raw = fh.read(length)
    try:
        manifest = json.loads(raw.decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ManifestMismatchError(f"{path} has an unreadable manifest") from exc

    entries = [
        TensorEntry(
            name=item["name"],
            dtype=item["dtype"],
            shape=tuple(item["shape"]),
            offset=int(item["offset"]),
            nbytes=int(item["nbytes"]),
        )
        for item in manifest.get("tensors", [])
    ]
    return manifest.get("metadata", {}), entries, _HEADER.size + length


def read_archive(path: str | os.PathLike[str]) -> Archive:
    """Read every tensor of an archive into memory (CPU tensors, bitwise as written)."""
    metadata, entries, data_start = read_manifest(path)
    with open(path, "rb") as fh:
        fh.seek(data_start)
        data = fh.read()

    tensors: dict[str, torch.Tensor] = {}
    for entry in entries:
        chunk = data[entry.offset : entry.offset + entry.nbytes]
        if len(chunk) != entry.nbytes:
            raise ManifestMismatchError(
                f"{path}: tensor '{entry.name}' is truncated "
                f"({len(chunk)} of {entry.nbytes} bytes)"
            )
        array = np.frombuffer(chunk, dtype=np.dtype(entry.dtype)).reshape(entry.shape)
        tensors[entry.name] = torch.from_numpy(array.copy())

    return Archive(
        tensors=tensors,
        metadata=metadata,
        entries={entry.name: entry for entry in entries},
    )
