"""File-backed cache of circle profiles.

One JSON document maps "n|grid_mult|tol" to an entry holding the profile, the
tool version that produced it and a creation time. Entries from another tool
version never hit. Access is serialized through a lock file, and writes go to
a temporary file that replaces the cache atomically.
"""

from __future__ import annotations

import json
import os
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path

from filelock import FileLock

from . import __version__
from .circle import CircleProfile
from .numtheory import SquarefreeOdd

ENV_VAR = "CYCLO_EXTREMAL_CACHE_DIR"
CACHE_FILE = "circle_profiles.json"


def default_cache_dir() -> Path:
    env = os.environ.get(ENV_VAR)
    if env:
        return Path(env)
    base = os.environ.get("XDG_CACHE_HOME") or Path.home() / ".cache"
    return Path(base) / "cyclo-extremal"


def cache_key(n: int, grid_mult: int, tol: float) -> str:
    return f"{n}|{grid_mult}|{tol!r}"


@dataclass(frozen=True)
class CacheEntry:
    key: str
    value: CircleProfile
    created_at: float
    tool_version: str

    def to_json(self) -> dict:
        return {
            "profile": self.value.to_json(),
            "created_at": self.created_at,
            "tool_version": self.tool_version,
        }

    @classmethod
    def from_json(cls, key: str, data: dict) -> CacheEntry:
        return cls(key, CircleProfile.from_json(data["profile"]), data["created_at"], data["tool_version"])


class ProfileCache:
    def __init__(self, directory: Path | str | None = None, version: str = __version__) -> None:
        self.dir = Path(directory) if directory is not None else default_cache_dir()
        self.path = self.dir / CACHE_FILE
        self.version = version
        self._lock = FileLock(str(self.path) + ".lock")

    def _read(self) -> dict:
        try:
            return json.loads(self.path.read_text())
        except FileNotFoundError:
            return {}

    def _write(self, data: dict) -> None:
        fd, tmp = tempfile.mkstemp(dir=self.dir, prefix=".cache-", suffix=".json")
        try:
            with os.fdopen(fd, "w") as fh:
                json.dump(data, fh, indent=1, sort_keys=True)
            os.replace(tmp, self.path)
        except BaseException:
            os.unlink(tmp)
            raise

    def get(self, n: SquarefreeOdd, grid_mult: int, tol: float) -> CircleProfile | None:
        if not self.path.exists():
            return None
        self.dir.mkdir(parents=True, exist_ok=True)
        with self._lock:
            raw = self._read().get(cache_key(n.value, grid_mult, tol))
        if raw is None or raw.get("tool_version") != self.version:
            return None
        return CircleProfile.from_json(raw["profile"], n)

    def put(self, profile: CircleProfile, tol: float) -> None:
        self.dir.mkdir(parents=True, exist_ok=True)
        key = cache_key(profile.n.value, profile.grid_mult, tol)
        entry = CacheEntry(key, profile, time.time(), self.version)
        with self._lock:
            data = self._read()
            data[key] = entry.to_json()
            self._write(data)

    def entries(self) -> list[CacheEntry]:
        if not self.path.exists():
            return []
        with self._lock:
            data = self._read()
        return [CacheEntry.from_json(k, v) for k, v in sorted(data.items())]
