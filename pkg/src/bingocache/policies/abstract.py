import abc
import enum

import numpy as np

from bingocache.config import raise_error


class Outcome(enum.Enum):
    HIT = "hit"
    MISS = "miss"


class CachePolicy(abc.ABC):
    """Cache of ``capacity`` equally sized files serving ``(user, file)`` requests."""

    name = None

    def __init__(self, capacity):
        if capacity < 1:
            raise_error(ValueError, f"Cache capacity must be positive, got {capacity}.")
        self.capacity = int(capacity)
        self.hits = 0
        self.misses = 0
        self.evictions = 0

    @abc.abstractmethod
    def _serve(self, user, file):  # pragma: no cover
        """Serve one request and return ``True`` on a hit."""
        raise_error(NotImplementedError)

    @abc.abstractmethod
    def __contains__(self, file):  # pragma: no cover
        raise_error(NotImplementedError)

    @abc.abstractmethod
    def residents(self):  # pragma: no cover
        """Files currently cached."""
        raise_error(NotImplementedError)

    @property
    def occupancy(self):
        return len(self.residents())

    def on_request(self, user, file):
        if self._serve(user, file):
            self.hits += 1
            return Outcome.HIT
        self.misses += 1
        return Outcome.MISS

    def run(self, trace):
        """Serve a whole trace and return the per-request hit mask."""
        hits = np.zeros(len(trace), dtype=bool)
        serve = self._serve
        for i, (user, file) in enumerate(zip(trace.user.tolist(), trace.file.tolist())):
            hits[i] = serve(user, file)
        nhits = int(hits.sum())
        self.hits += nhits
        self.misses += len(trace) - nhits
        return hits

    def __repr__(self):
        return f"{self.__class__.__name__}(capacity={self.capacity})"
