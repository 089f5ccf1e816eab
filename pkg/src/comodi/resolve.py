"""Descriptor and artifact resolution chains used by the CLI and serve API.

A descriptor resolver maps (name, version) to a ComponentDescriptor and
raises ``LookupError`` for unknown components; chains try each source
in order (builtins first, then local descriptor files, then the
registry).  The artifact resolver turns a descriptor's implementation
into the object its backend needs: the registered callable for
builtins, a local file path for subprocess/plugin artifacts
(``file://`` locators, plain paths searched across configured
directories, or ``http(s)://`` URLs fetched into a cache).
"""

from __future__ import annotations

import hashlib
import tempfile
import urllib.request
from pathlib import Path
from typing import Callable, Iterable

from .builtins import BuiltinCatalog
from .httpjson import NetworkError
from .model import ComponentDescriptor, GlobalName, Version, parse_descriptor
from .registry import RegistryClient, RegistryError

__all__ = [
    "ChainResolver",
    "FileResolver",
    "RegistryResolver",
    "StandardArtifactResolver",
]


class ChainResolver:
    def __init__(self, resolvers: Iterable[Callable[[GlobalName, Version],
                                                    ComponentDescriptor]]):
        self.resolvers = tuple(resolvers)

    def __call__(self, name: GlobalName, version: Version) -> ComponentDescriptor:
        for resolver in self.resolvers:
            try:
                return resolver(name, version)
            except LookupError:
                continue
        raise LookupError(f"{name}@{version} is not resolvable")


class FileResolver:
    """Resolve descriptors from ``*.comodi.json`` files in a directory."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)

    def __call__(self, name: GlobalName, version: Version) -> ComponentDescriptor:
        if self.directory.is_dir():
            for path in sorted(self.directory.glob("*.comodi.json")):
                try:
                    descriptor = parse_descriptor(path.read_text(encoding="utf-8"))
                except (OSError, ValueError):
                    continue
                if descriptor.name == name and descriptor.version == version:
                    return descriptor
        raise LookupError(f"{name}@{version} not found in {self.directory}")


class RegistryResolver:
    def __init__(self, client: RegistryClient):
        self.client = client

    def __call__(self, name: GlobalName, version: Version) -> ComponentDescriptor:
        try:
            return self.client.fetch(str(name), str(version)).descriptor
        except RegistryError as exc:
            if exc.code == "NOT_FOUND":
                raise LookupError(str(exc)) from exc
            raise


class StandardArtifactResolver:
    """Map a descriptor's implementation to its backend artifact object."""

    def __init__(self, catalog: BuiltinCatalog | None = None,
                 search_dirs: Iterable[str | Path] = (),
                 cache_dir: str | Path | None = None):
        self.catalog = catalog
        self.search_dirs = tuple(Path(d) for d in search_dirs)
        self.cache_dir = Path(cache_dir) if cache_dir is not None \
            else Path(tempfile.gettempdir()) / "comodi-artifacts"

    def __call__(self, descriptor: ComponentDescriptor) -> object:
        impl = descriptor.implementation
        if impl is None:
            raise LookupError(f"{descriptor.key()} has no implementation")
        if impl.backend == "builtin":
            if self.catalog is None:
                raise LookupError("no builtin catalog configured")
            return self.catalog.artifact(descriptor)
        locator = impl.artifact
        if not locator:
            raise LookupError(f"{descriptor.key()} has an empty artifact locator")
        if locator.startswith("file://"):
            path = Path(locator[len("file://"):])
            if path.exists():
                return path
            raise LookupError(f"artifact not found: {locator}")
        if locator.startswith(("http://", "https://")):
            return self._download(locator)
        path = Path(locator)
        if path.is_absolute():
            if path.exists():
                return path
            raise LookupError(f"artifact not found: {locator}")
        for base in self.search_dirs:
            candidate = base / path
            if candidate.exists():
                return candidate
        raise LookupError(f"artifact {locator!r} not found in "
                          f"{[str(d) for d in self.search_dirs]}")

    def _download(self, url: str) -> Path:
        self.cache_dir.mkdir(parents=True, exist_ok=True)
        cached = self.cache_dir / hashlib.sha256(url.encode("utf-8")).hexdigest()
        if not cached.exists():
            try:
                with urllib.request.urlopen(url, timeout=60) as resp:
                    data = resp.read()
            except OSError as exc:
                raise NetworkError(url, str(exc)) from exc
            tmp = cached.with_suffix(".part")
            tmp.write_bytes(data)
            tmp.replace(cached)
        return cached
