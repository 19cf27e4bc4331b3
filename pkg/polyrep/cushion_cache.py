import json
import logging
import os
import tempfile
import time
from fractions import Fraction
from pathlib import Path

from polyrep.errors import ParseError
from polyrep.paths import get_default_cache_dir
from polyrep.poly import SparsePoly, format_rational

logger = logging.getLogger(__name__)

CACHE_FILE_NAME = "kappa_cache.json"
DEFAULT_MAX_ENTRIES = 64


def cache_key(delta: Fraction, rho: Fraction, m: int, max_degree: int) -> str:
    return f"{format_rational(delta)}|{format_rational(rho)}|{m}|{max_degree}"


class CushionCache:
    """Certified cushion polynomials on disk, keyed by their parameters and degree cap."""

    def __init__(self, cache_file: Path | None = None, max_entries: int = DEFAULT_MAX_ENTRIES):
        self.cache_file = cache_file if cache_file is not None else get_default_cache_dir() / CACHE_FILE_NAME
        self.max_entries = max_entries

    @classmethod
    def in_dir(cls, cache_dir: str | os.PathLike[str], max_entries: int = DEFAULT_MAX_ENTRIES) -> "CushionCache":
        return cls(Path(cache_dir) / CACHE_FILE_NAME, max_entries)

    def load_all(self) -> dict[str, dict]:
        if not self.cache_file.exists():
            return {}
        try:
            with open(self.cache_file, "r") as f:
                data = json.load(f)
            if not isinstance(data, dict):
                raise ValueError("cache root is not an object")
            return data
        except (json.JSONDecodeError, IOError, ValueError) as e:
            logger.warning("Could not load cushion cache, starting fresh: %s", e)
            return {}

    def save_all(self, entries: dict[str, dict]) -> None:
        self.cache_file.parent.mkdir(parents=True, exist_ok=True)
        newest = sorted(entries.items(), key=lambda item: item[1].get("timestamp", 0), reverse=True)
        limited = dict(newest[: self.max_entries])
        with tempfile.NamedTemporaryFile("w", dir=self.cache_file.parent, delete=False) as f:
            json.dump(limited, f, indent=2)
            temp_file = Path(f.name)
        os.replace(temp_file, self.cache_file)
        logger.debug("Saved %d cushion polynomials to cache", len(limited))

    def get(self, key: str) -> SparsePoly | None:
        entry = self.load_all().get(key)
        if entry is None:
            return None
        try:
            return SparsePoly.from_json(entry["poly"])
        except (KeyError, TypeError, ValueError, ParseError) as e:
            logger.warning("Ignoring corrupt cushion cache entry %s: %s", key, e)
            return None

    def put(self, key: str, poly: SparsePoly) -> None:
        entries = self.load_all()
        entries[key] = {"timestamp": time.time(), "degree": poly.degree, "poly": poly.to_json()}
        self.save_all(entries)
