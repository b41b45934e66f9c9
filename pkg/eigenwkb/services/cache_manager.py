from cachetools import TTLCache
from typing import Any, Callable, Dict, Hashable, Optional, Tuple
import logging

from eigenwkb.config import settings

logger = logging.getLogger(__name__)

# (kind, operator content hash, *rest), e.g. ("eigenpair", "3f2a...", 40)
CacheKey = Tuple[Hashable, ...]


class CacheManager:
    """Results keyed by operator content hash: exact eigenpairs and branch
    contexts, shared by the CLI, the harness and the API."""

    def __init__(self, maxsize: int = None, ttl: int = None):
        self.cache = TTLCache(maxsize=maxsize or settings.CACHE_MAXSIZE, ttl=ttl or settings.CACHE_TTL)
        self.hits: Dict[Hashable, int] = {}
        self.misses: Dict[Hashable, int] = {}

    def get(self, key: CacheKey) -> Optional[Any]:
        """Get value from cache"""
        return self.cache.get(key)

    def set(self, key: CacheKey, value: Any) -> None:
        """Set value in cache"""
        self.cache[key] = value

    def get_or_compute(self, key: CacheKey, compute: Callable[[], Any]) -> Any:
        kind = key[0]
        value = self.cache.get(key)
        if value is not None:
            self.hits[kind] = self.hits.get(kind, 0) + 1
            logger.debug("cache hit for %s", key)
            return value
        self.misses[kind] = self.misses.get(kind, 0) + 1
        value = compute()
        self.cache[key] = value
        return value

    def stats(self) -> Dict[str, Dict[Hashable, int]]:
        return {"hits": dict(self.hits), "misses": dict(self.misses), "size": len(self.cache)}

    def clear(self) -> None:
        """Clear all cache"""
        self.cache.clear()
        self.hits.clear()
        self.misses.clear()


# Global cache instance
cache_manager = CacheManager()
