"""On-disk cache of the base connected moments, shared by every operator of the same ``p``.

One JSON file per ``(p, n_max, version)``; each carries a SHA-256 checksum of
its payload and is recomputed when the checksum does not match.
"""
from __future__ import annotations

import hashlib
import json
import logging
import os
from pathlib import Path
from typing import Optional

from . import __version__
from .moments import base_connected_moments, rational_from_str, rational_to_str

log = logging.getLogger(__name__)

CACHE_ENV = "STRESSMOMENTS_CACHE"


def default_cache_dir() -> Path:
    env = os.environ.get(CACHE_ENV)
    if env:
        return Path(env)
    return Path.home() / ".cache" / "stressmoments"


def _checksum(payload: dict) -> str:
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def _path(cache_dir: Path, p: int, n_max: int) -> Path:
    return cache_dir / f"base-p{p}-n{n_max}-v{__version__}.json"


def _read(path: Path, p: int) -> Optional[list]:
    try:
        data = json.loads(path.read_text())
        payload = data["payload"]
        if data.get("checksum") != _checksum(payload) or payload["p"] != p:
            raise ValueError("checksum mismatch")
        return [rational_from_str(s) for s in payload["connected"]]
    except (OSError, ValueError, KeyError, TypeError) as exc:
        log.warning("discarding cache file %s: %s", path, exc)
        return None


def cached_base_connected(p: int, n_max: int, cache_dir: Optional[Path] = None,
                          stats: Optional[dict] = None) -> list:
    """Base connected moments ``[C_0..C_n_max]``, read from or written to the cache.

    Any cached file with a larger ``n_max`` for the same ``p`` also serves.
    ``stats`` (if given) gets ``{"hit": bool}``.
    """
    cache_dir = Path(cache_dir) if cache_dir is not None else default_cache_dir()
    candidates = []
    if cache_dir.is_dir():
        for f in cache_dir.glob(f"base-p{p}-n*-v{__version__}.json"):
            try:
                n = int(f.name.split("-n")[1].split("-v")[0])
            except ValueError:
                continue
            if n >= n_max:
                candidates.append((n, f))
    for n, f in sorted(candidates):
        values = _read(f, p)
        if values is not None and len(values) == n + 1:
            if stats is not None:
                stats["hit"] = True
            return values[:n_max + 1]
    values = base_connected_moments(p, n_max)
    payload = {"p": p, "n_max": n_max, "version": __version__,
               "connected": [rational_to_str(c) for c in values]}
    try:
        cache_dir.mkdir(parents=True, exist_ok=True)
        path = _path(cache_dir, p, n_max)
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps({"checksum": _checksum(payload), "payload": payload}))
        tmp.replace(path)
    except OSError as exc:
        log.warning("could not write cache in %s: %s", cache_dir, exc)
    if stats is not None:
        stats["hit"] = False
    return values
