import json
import os
from typing import Any

import fsspec  # type: ignore

from core import constants, utils


class StorageBackend:
    """
    Storage abstraction over fsspec for instances, results, traces and bench output.

    Configuration:
        Environment variables:
        - STORAGE_ROOT: Root directory for relative local paths (default: '.')

        Plain and file:// paths are local; relative ones are resolved against STORAGE_ROOT:
        - Input: "runs/line5/result.json"
        - Output: "file:///<STORAGE_ROOT>/runs/line5/result.json"

        Any other fsspec URL (memory://, gs://, ...) is used as given.
    """
    def __init__(self, root: str = constants.STORAGE_ROOT):
        """
        Args:
            root: Directory relative local paths are resolved against
        """
        self.root = root

    def is_local(self, path: str) -> bool:
        return path.startswith(constants.LOCAL_SCHEME) or "://" not in path

    def strip_scheme(self, path: str) -> str:
        """
        Remove the storage scheme from a path.

        Args:
            path: Path with or without a scheme

        Returns:
            Path without any scheme prefix
        """
        if "://" in path:
            return path.split("://", 1)[1]
        return path

    def _local_path(self, path: str) -> str:
        path = self.strip_scheme(path)
        if not os.path.isabs(path):
            path = os.path.join(self.root, path)
        return os.path.abspath(path)

    def get_uri(self, path: str) -> str:
        """
        Complete URI for a path.

        Args:
            path: Local path (relative or absolute), file:// URI or any fsspec URL

        Returns:
            file:// URI with an absolute path for local paths, the input otherwise
        """
        if self.is_local(path):
            return f"{constants.LOCAL_SCHEME}{self._local_path(path)}"
        return path

    def ensure_parent_directory(self, file_path: str) -> None:
        """
        Make sure the parent directory of a file exists. Only local paths need it.

        Args:
            file_path: File path or URI whose parent should exist
        """
        if not self.is_local(file_path):
            return
        parent = os.path.dirname(self._local_path(file_path))
        if parent:
            os.makedirs(parent, exist_ok=True)

    def file_exists(self, file_path: str) -> bool:
        fs, path = fsspec.core.url_to_fs(self.get_uri(file_path))
        return fs.exists(path)

    def read_text(self, file_path: str) -> str:
        uri = self.get_uri(file_path)
        try:
            with fsspec.open(uri, 'r', encoding='utf-8') as handle:
                return handle.read()
        except Exception as e:
            raise Exception(f"Unable to read {uri}: {e}") from e

    def write_text(self, file_path: str, content: str) -> str:
        """
        Write a text file, creating local parent directories as needed.

        Returns:
            The URI written to
        """
        uri = self.get_uri(file_path)
        self.ensure_parent_directory(file_path)
        try:
            with fsspec.open(uri, 'w', encoding='utf-8', newline='\n') as handle:
                handle.write(content)
        except Exception as e:
            raise Exception(f"Unable to write {uri}: {e}") from e
        utils.logger.debug(f"Wrote {len(content)} characters to {uri}")
        return uri

    def read_json(self, file_path: str) -> Any:
        content = self.read_text(file_path)
        try:
            return json.loads(content)
        except json.JSONDecodeError as e:
            raise Exception(f"Invalid JSON in {file_path}: {e}") from e

    def write_json(self, file_path: str, payload: Any) -> str:
        return self.write_text(file_path, json.dumps(payload, indent=2) + "\n")

    def write_jsonl(self, file_path: str, records: list[dict]) -> str:
        return self.write_text(file_path, "".join(json.dumps(record) + "\n" for record in records))


# Global storage backend instance, rooted at STORAGE_ROOT
storage = StorageBackend()
