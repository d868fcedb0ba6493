"""
Cache service

Process-local cache of validated games keyed by the digest of their game
configuration. Building and validating a game enumerates every (player, joint
action, context) cost, so sweep cells sharing a game reuse one GameSpec.
"""

import logging
from collections import OrderedDict
from threading import Lock
from typing import Optional

from ..config import settings
from ..models.game import GameSpec

logger = logging.getLogger(__name__)


class GameCache:
    """Least-recently-used cache of GameSpec objects"""

    def __init__(self, max_entries: int = 32):
        """
        Initialize the cache

        Args:
            max_entries: Entries kept before the least recently used is evicted
        """
        self._games: "OrderedDict[str, GameSpec]" = OrderedDict()
        self._lock = Lock()
        self._max_entries = max(1, max_entries)
        self._hits = 0
        self._misses = 0

    def get(self, key: str) -> Optional[GameSpec]:
        """
        Get a cached game

        Args:
            key: Game config digest

        Returns:
            The game, or None if absent
        """
        with self._lock:
            game = self._games.get(key)
            if game is None:
                self._misses += 1
                return None
            self._games.move_to_end(key)
            self._hits += 1
        logger.debug("game cache hit %s", key[:12])
        return game

    def set(self, key: str, game: GameSpec) -> None:
        """Store a game, evicting the least recently used entry when full"""
        with self._lock:
            self._games[key] = game
            self._games.move_to_end(key)
            while len(self._games) > self._max_entries:
                self._games.popitem(last=False)

    def clear(self) -> None:
        """Drop every entry and reset the counters"""
        with self._lock:
            self._games.clear()
            self._hits = 0
            self._misses = 0

    def get_stats(self) -> dict:
        """
        Cache statistics

        Returns:
            entries, hits and misses
        """
        with self._lock:
            return {
                "total_entries": len(self._games),
                "hits": self._hits,
                "misses": self._misses,
            }


# Global cache instance
_global_cache = None


def get_cache() -> GameCache:
    """
    Get the process-wide game cache

    Returns:
        Global GameCache instance
    """
    global _global_cache
    if _global_cache is None:
        _global_cache = GameCache(settings.GAME_CACHE_SIZE)
    return _global_cache
