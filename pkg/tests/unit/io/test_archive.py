import pytest
import torch

from mdtnet.core import ManifestMismatchError
from mdtnet.io import read_archive, read_manifest, write_archive


def test_round_trip_is_bitwise(tmp_path):
    tensors = {
        "a": torch.randn(3, 4),
        "b": torch.arange(5, dtype=torch.int64),
        "scalar": torch.tensor(2.5, dtype=torch.float64),
    }
    path = write_archive(tmp_path / "x.mdt", tensors, {"kind": "test", "n": 3})
    archive = read_archive(path)

    assert archive.metadata == {"kind": "test", "n": 3}
    assert list(archive.tensors) == ["a", "b", "scalar"]
    for name, tensor in tensors.items():
        assert archive.tensors[name].dtype == tensor.dtype
        assert torch.equal(archive.tensors[name], tensor)


def test_manifest_lists_offsets(tmp_path):
    path = write_archive(tmp_path / "x.mdt", {"a": torch.zeros(2), "b": torch.zeros(3)})
    _, entries, _ = read_manifest(path)
    assert [(e.name, e.offset, e.nbytes) for e in entries] == [("a", 0, 8), ("b", 8, 12)]
    assert entries[1].shape == (3,)


def test_truncated_archive_is_rejected(tmp_path):
    path = write_archive(tmp_path / "x.mdt", {"a": torch.ones(100)})
    path.write_bytes(path.read_bytes()[:-10])
    with pytest.raises(ManifestMismatchError, match="truncated"):
        read_archive(path)


def test_not_an_archive(tmp_path):
    path = tmp_path / "junk.mdt"
    path.write_bytes(b"\x01")
    with pytest.raises(ManifestMismatchError):
        read_manifest(path)


def test_no_temporary_file_left_behind(tmp_path):
    write_archive(tmp_path / "x.mdt", {"a": torch.ones(1)})
    assert sorted(p.name for p in tmp_path.iterdir()) == ["x.mdt"]
