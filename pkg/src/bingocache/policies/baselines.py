"""Baseline replacement policies: FIFO, LRU, LFU, RND and MPC."""
import collections

import numpy as np

from bingocache.config import raise_error
from bingocache.policies.abstract import CachePolicy
from bingocache.policies.heap import ScoredHeapCache


class FIFOPolicy(CachePolicy):
    name = "FIFO"

    def __init__(self, capacity):
        super().__init__(capacity)
        self._store = collections.OrderedDict()

    def __contains__(self, file):
        return file in self._store

    def residents(self):
        return list(self._store)

    @property
    def occupancy(self):
        return len(self._store)

    def _serve(self, user, file):
        if file in self._store:
            return True
        if len(self._store) >= self.capacity:
            self._store.popitem(last=False)
            self.evictions += 1
        self._store[file] = None
        return False


class LRUPolicy(FIFOPolicy):
    name = "LRU"

    def _serve(self, user, file):
        if file in self._store:
            self._store.move_to_end(file)
            return True
        return super()._serve(user, file)


class LFUPolicy(CachePolicy):
    """Evicts the resident with the lowest all-time request count, least recent first."""

    name = "LFU"

    def __init__(self, capacity):
        super().__init__(capacity)
        self.counts = collections.defaultdict(int)
        self.cache = ScoredHeapCache(capacity)

    def __contains__(self, file):
        return file in self.cache

    def residents(self):
        return self.cache.files()

    @property
    def occupancy(self):
        return len(self.cache)

    def _serve(self, user, file):
        self.counts[file] += 1
        count = self.counts[file]
        if file in self.cache:
            self.cache.update_key(file, count)
            return True
        if self.cache.full:
            self.cache.pop_min()
            self.evictions += 1
        self.cache.insert(file, count)
        return False


class RNDPolicy(CachePolicy):
    name = "RND"

    def __init__(self, capacity, rng=None):
        super().__init__(capacity)
        self.rng = np.random.default_rng() if rng is None else rng
        self._items = []
        self._index = {}

    def __contains__(self, file):
        return file in self._index

    def residents(self):
        return list(self._items)

    @property
    def occupancy(self):
        return len(self._items)

    def _serve(self, user, file):
        if file in self._index:
            return True
        if len(self._items) >= self.capacity:
            victim = int(self.rng.integers(len(self._items)))
            last = self._items.pop()
            evicted = self._items[victim] if victim < len(self._items) else last
            del self._index[evicted]
            if evicted != last:
                self._items[victim] = last
                self._index[last] = victim
            self.evictions += 1
        self._index[file] = len(self._items)
        self._items.append(file)
        return False


def _top_files(popularity, count):
    if hasattr(popularity, "top"):
        return popularity.top(count)
    probabilities = np.asarray(popularity, dtype=np.float64)
    return np.argsort(-probabilities, kind="stable")[:count] + 1


class MPCPolicy(CachePolicy):
    """Statically holds the ``capacity`` most popular files and never admits others."""

    name = "MPC"

    def __init__(self, capacity, popularity):
        super().__init__(capacity)
        if popularity is None:
            raise_error(ValueError, "MPC needs the true popularity distribution.")
        self._residents = frozenset(int(f) for f in _top_files(popularity, capacity))

    def __contains__(self, file):
        return file in self._residents

    def residents(self):
        return sorted(self._residents)

    @property
    def occupancy(self):
        return len(self._residents)

    def _serve(self, user, file):
        return file in self._residents


def make_fifo(capacity):
    return FIFOPolicy(capacity)


def make_lru(capacity):
    return LRUPolicy(capacity)


def make_lfu(capacity):
    return LFUPolicy(capacity)


def make_rnd(capacity, rng):
    return RNDPolicy(capacity, rng)


def make_mpc(capacity, popularity):
    return MPCPolicy(capacity, popularity)
