import hashlib
import logging
from pathlib import Path
from typing import Any, Callable, Optional, Sequence

from config import CACHE_DIR, CACHE_ENABLED
from data_io import read_null_distribution, write_null_distribution
from exceptions import CacheError, InputDataError
from null_distribution import NullDistribution

logger = logging.getLogger(__name__)


def generate_cache_key(*args: Any, **kwargs: Any) -> str:
    """Generate a stable key from the given arguments; keyword order does not matter."""
    combined = repr((args, sorted(kwargs.items())))
    return hashlib.sha256(combined.encode()).hexdigest()


def null_cache_key(
    method: str,
    k: int,
    weights: Sequence[float],
    reps: int,
    grid: Optional[int],
    seed: int,
    order: str = "simple",
    sizes: Sequence[int] = (),
    statistic: str = "Tn",
) -> str:
    """
    Key of a cached null distribution. Weights are rounded to 1e-9 so that
    proportions computed along different paths share an entry.
    """
    return generate_cache_key(
        method=method,
        statistic=statistic,
        k=int(k),
        weights=tuple(round(float(w), 9) for w in weights),
        sizes=tuple(int(s) for s in sizes),
        order=order,
        reps=int(reps),
        grid=None if grid is None else int(grid),
        seed=int(seed),
    )


class NullDistributionCache:
    """
    A directory of null distributions in their plain-text format, one file
    per key. Failures are logged and reported as misses, never raised.
    """

    def __init__(
        self,
        cache_dir: Optional[str] = None,
        key_prefix: str = "null-",
        enabled: bool = CACHE_ENABLED,
    ):
        """
        Initialize the cache.

        Args:
            cache_dir: Directory holding the files (created on first write)
            key_prefix: Prefix for every file name
            enabled: When False every lookup misses and nothing is written
        """
        self.cache_dir = Path(cache_dir or CACHE_DIR)
        self.key_prefix = key_prefix
        self.enabled = enabled

    def _get_path(self, key: str) -> Path:
        return self.cache_dir / f"{self.key_prefix}{key}.txt"

    def get(self, key: str, default: Any = None) -> Any:
        """
        Get a cached null distribution.

        Returns:
            The cached distribution, or default if absent or unreadable
        """
        if not self.enabled:
            return default

        path = self._get_path(key)
        if not path.is_file():
            logger.info(f"Cache miss for key {key[:12]}")
            return default

        try:
            dist = read_null_distribution(path)
        except InputDataError as e:
            logger.error(f"Cache get failed for key {key[:12]}: {str(e)}")
            return default
        except CacheError as e:
            logger.warning(f"Ignoring corrupt cache file {path}: {str(e)}")
            return default
        logger.info(f"Cache hit for key {key[:12]} ({dist.method}, reps={dist.reps})")
        return dist

    def set(self, key: str, dist: NullDistribution) -> bool:
        """
        Store a null distribution.

        Returns:
            True if written, False otherwise
        """
        if not self.enabled:
            return False

        path = self._get_path(key)
        try:
            write_null_distribution(path, dist)
            logger.info(f"Cached null distribution under key {key[:12]} in {self.cache_dir}")
            return True
        except OSError as e:
            logger.error(f"Cache set failed for key {key[:12]}: {str(e)}")
            return False

    def delete(self, *keys: str) -> int:
        """
        Delete one or more entries.

        Returns:
            Number of files removed
        """
        deleted = 0
        for key in keys:
            try:
                self._get_path(key).unlink()
                deleted += 1
            except FileNotFoundError:
                continue
            except OSError as e:
                logger.error(f"Failed to delete cache key {key[:12]}: {str(e)}")
        return deleted

    def exists(self, key: str) -> bool:
        return self.enabled and self._get_path(key).is_file()

    def get_or_create(self, key: str, factory: Callable[[], NullDistribution]) -> NullDistribution:
        """Return the cached distribution for key, simulating and storing it on a miss."""
        cached = self.get(key)
        if cached is not None:
            return cached
        dist = factory()
        self.set(key, dist)
        return dist
