from .archive import Archive, TensorEntry, read_archive, read_manifest, write_archive

__all__ = ["Archive", "TensorEntry", "read_archive", "read_manifest", "write_archive"]
