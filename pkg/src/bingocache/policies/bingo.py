"""Community-driven caching engine.

Requests are logged in chunks of ``chunk_size``; at every chunk boundary the
log is turned into a user graph whose communities become the structure used
during the next chunk. A missed file accumulates distinct requesters until
``xi`` of them are known, then the community driving its demand is
identified and the file is offered to a score-keyed min-heap cache with
score ``|community| - xi``. Hits by community members decrement the score.
"""
import concurrent.futures
import dataclasses
import enum
import json
import os
from typing import Optional

from bingocache.community import RequestLog, build_graph, detect_communities
from bingocache.config import (
    DEFAULT_BETA,
    DEFAULT_CAPACITY,
    DEFAULT_CHUNK_SIZE,
    DEFAULT_MIN_COMMUNITY_SIZE,
    DEFAULT_PENDING_CAP,
    DEFAULT_PHI_MAX,
    DEFAULT_RHO,
    DEFAULT_STALENESS,
    DEFAULT_XI,
    log,
    raise_error,
)
from bingocache.identifier import PendingFile, identify
from bingocache.policies.abstract import CachePolicy
from bingocache.policies.heap import ScoredHeapCache


@dataclasses.dataclass(frozen=True)
class EngineConfig:
    capacity: int = DEFAULT_CAPACITY
    chunk_size: int = DEFAULT_CHUNK_SIZE
    beta: int = DEFAULT_BETA
    xi: int = DEFAULT_XI
    rho: int = DEFAULT_RHO
    # resident files idle for more than ``staleness`` requests are purged,
    # non-resident state idle that long is forgotten at chunk boundaries
    staleness: int = DEFAULT_STALENESS
    min_size: int = DEFAULT_MIN_COMMUNITY_SIZE
    phi_max: float = DEFAULT_PHI_MAX
    max_community_size: Optional[int] = None
    pending_cap: int = DEFAULT_PENDING_CAP
    background_detection: bool = False
    graph_dump_dir: Optional[str] = None

    def validate(self):
        if self.capacity < 1:
            raise_error(ValueError, f"Cache capacity must be positive, got {self.capacity}.")
        if self.chunk_size < 1:
            raise_error(ValueError, f"Chunk size must be positive, got {self.chunk_size}.")
        if self.beta < 1:
            raise_error(ValueError, f"Edge threshold must be at least 1, got {self.beta}.")
        if self.xi < 1:
            raise_error(ValueError, f"Identification trigger must be at least 1, got {self.xi}.")
        if self.rho < 1:
            raise_error(ValueError, f"Candidate stop size must be at least 1, got {self.rho}.")
        if self.staleness < 1:
            raise_error(ValueError, f"Staleness window must be positive, got {self.staleness}.")
        if self.pending_cap < self.xi:
            raise_error(
                ValueError,
                f"Pending cap {self.pending_cap} cannot be smaller than xi={self.xi}.",
            )
        if not 0 <= self.phi_max <= 1:
            raise_error(ValueError, f"Conductance threshold must lie in [0, 1], got {self.phi_max}.")
        return self

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def to_dict(self):
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data):
        names = {field.name for field in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise_error(ValueError, f"Unknown engine config keys: {sorted(unknown)}.")
        return cls(**data)

    @classmethod
    def from_json(cls, path):
        with open(path) as file:
            return cls.from_dict(json.load(file))


class Admission(enum.Enum):
    ADMITTED = "admitted"
    DENIED = "denied"


class FileState:
    """Per-file engine state.

    ``score`` is the heap key while resident, ``served`` counts requests by
    members of the identified community since identification and
    ``expected`` is the number of such requests anticipated at
    identification time.
    """

    __slots__ = (
        "file",
        "score",
        "initial_score",
        "member_hits",
        "last_request",
        "served",
        "expected",
        "community",
        "community_size",
        "members",
        "pending",
    )

    def __init__(self, file, pending_cap=DEFAULT_PENDING_CAP):
        self.file = file
        self.score = 0
        self.initial_score = 0
        self.member_hits = 0
        self.last_request = -1
        self.served = 0
        self.expected = 0
        self.community = None
        self.community_size = 0
        self.members = None
        self.pending = PendingFile(file, pending_cap)

    @property
    def identified(self):
        return self.community is not None

    def recency(self, now):
        return now - self.last_request


@dataclasses.dataclass
class RetainedRecord:
    file: int
    community: int
    community_size: int
    members: frozenset
    served: int
    expected: int


def score(identification, xi, retained: Optional[RetainedRecord] = None) -> int:
    """Admission score of a file given its identification outcome.

    A retained record scores ``|community| - served``, never more than a fresh
    identification of the same community would.
    """
    if not identification.identified:
        return 1
    fresh = identification.size - xi
    if retained is not None:
        return max(1, min(identification.size - retained.served, fresh))
    return max(1, fresh)


class BingoPolicy(CachePolicy):
    """Community-aware caching engine.

    Args:
        config (EngineConfig): engine parameters.
        structure (EstimatedStructure): initial community structure. ``None``
            means no structure until the first chunk boundary.
        detect (bool): re-estimate the structure at chunk boundaries. Oracle
            runs pass the ground truth as ``structure`` and ``detect=False``.
    """

    name = "BINGO"

    def __init__(self, config: EngineConfig, structure=None, detect=True):
        config.validate()
        super().__init__(config.capacity)
        self.config = config
        self.cache = ScoredHeapCache(config.capacity)
        self.structure = structure
        self.detect = detect
        self.request_log = RequestLog()
        self.files = {}
        self.retained = {}
        self.now = -1
        self.clock = 0
        self.admissions = 0
        self.denials = 0
        self.purges = 0
        self.expirations = 0
        self.identifications = 0
        self.boundaries = 0
        self._executor = None
        self._pending_structure = None

    def __contains__(self, file):
        return file in self.cache

    def residents(self):
        return self.cache.files()

    @property
    def occupancy(self):
        return len(self.cache)

    def counters(self):
        return {
            "hits": self.hits,
            "misses": self.misses,
            "admissions": self.admissions,
            "denials": self.denials,
            "evictions": self.evictions,
            "purges": self.purges,
            "expirations": self.expirations,
            "identifications": self.identifications,
            "retained": len(self.retained),
            "boundaries": self.boundaries,
        }

    def _state(self, file):
        state = self.files.get(file)
        if state is None:
            state = FileState(file, self.config.pending_cap)
            self.files[file] = state
        return state

    def _serve(self, user, file):
        self.now = self.clock
        self.clock += 1
        self.request_log.append(user, file)
        if file in self.cache:
            self._serve_hit(self.files[file], user)
            hit = True
        else:
            self._serve_miss(self._state(file), user)
            hit = False
        if self.clock % self.config.chunk_size == 0:
            self.chunk_boundary()
        return hit

    def _serve_hit(self, state, user):
        state.last_request = self.now
        if state.members is None or user not in state.members:
            return
        state.member_hits += 1
        state.served += 1
        if state.score > 0:
            state.score -= 1
            self.cache.update_key(state.file, state.score)
        self.serve_completion(state.file)

    def _serve_miss(self, state, user):
        state.last_request = self.now
        record = self.retained.get(state.file)
        if record is not None and user in record.members:
            record.served += 1
            if self.serve_completion(state.file):
                # all anticipated demand met: a new wave starts from scratch
                state.pending = PendingFile(state.file, self.config.pending_cap)
                return
        state.pending.add(user)
        if len(state.pending) >= self.config.xi or record is not None:
            self._identify_and_admit(state, record)

    def _identify_and_admit(self, state, record):
        result = identify(state.pending.users(), self.structure, self.config.rho)
        if result.identified:
            self.identifications += 1
        retained = record if result.identified else None
        if retained is not None and retained.members != self.structure.members(result.community):
            # demand now attributed to another community, its progress does not carry over
            del self.retained[state.file]
            retained = None
        file_score = score(result, self.config.xi, retained)
        if self.admit(state.file, file_score) is Admission.ADMITTED:
            state.score = state.initial_score = file_score
            state.member_hits = 0
            if result.identified:
                state.community = result.community
                state.community_size = result.size
                state.members = self.structure.members(result.community)
                state.served = retained.served if retained else 0
                state.expected = retained.expected if retained else max(0, result.size - self.config.xi)
            else:
                state.community = None
                state.community_size = 0
                state.members = None
                state.served = state.expected = 0
            self.retained.pop(state.file, None)
        elif result.identified:
            served = retained.served if retained else 0
            expected = retained.expected if retained else max(0, result.size - self.config.xi)
            if served < expected:
                self.retained[state.file] = RetainedRecord(
                    state.file,
                    result.community,
                    result.size,
                    self.structure.members(result.community),
                    served,
                    expected,
                )

    def _release(self, file):
        """Bookkeeping for a file leaving the cache before its demand is met."""
        state = self.files[file]
        if state.identified and state.served < state.expected:
            self.retained[file] = RetainedRecord(
                file,
                state.community,
                state.community_size,
                state.members,
                state.served,
                state.expected,
            )

    def _purge_stale(self):
        for file in self.cache.files():
            if self.files[file].recency(self.now) > self.config.staleness:
                self.cache.remove(file)
                self._release(file)
                self.purges += 1
                log.debug("Purged stale file %d at request %d.", file, self.now)

    def _expire_idle(self):
        """Forget non-resident files, and their retained records, idle beyond the window."""
        idle = [
            file
            for file, state in self.files.items()
            if state.recency(self.now) > self.config.staleness and file not in self.cache
        ]
        for file in idle:
            del self.files[file]
            self.retained.pop(file, None)
        self.expirations += len(idle)

    def admit(self, file, file_score):
        """Offer ``file`` to the cache with ``file_score`` after a stale sweep."""
        self._purge_stale()
        if not self.cache.full:
            self.cache.insert(file, file_score)
            self.admissions += 1
            return Admission.ADMITTED
        if file_score > self.cache.peek_min().key:
            evicted = self.cache.replace_min(file, file_score)
            self._release(evicted)
            self.evictions += 1
            self.admissions += 1
            return Admission.ADMITTED
        self.denials += 1
        return Admission.DENIED

    def serve_completion(self, file):
        """Drop the retained record of ``file`` once its expected demand is served."""
        record = self.retained.get(file)
        if record is not None and record.served >= record.expected:
            del self.retained[file]
            return True
        return False

    def _estimate(self, users, files, chunk):
        graph = build_graph((users, files), self.config.beta)
        if self.config.graph_dump_dir is not None:
            os.makedirs(self.config.graph_dump_dir, exist_ok=True)
            graph.write_edgelist(os.path.join(self.config.graph_dump_dir, f"chunk_{chunk}.edges"))
        return detect_communities(
            graph,
            min_size=self.config.min_size,
            phi_max=self.config.phi_max,
            max_size=self.config.max_community_size,
        )

    def chunk_boundary(self):
        """Close the current chunk and swap in the structure estimated from it.

        With ``background_detection`` the estimation runs on a worker thread
        and its result is swapped in at the following boundary.
        """
        self.boundaries += 1
        users, files = self.request_log.snapshot()
        self.request_log.clear()
        self._expire_idle()
        if not self.detect:
            return
        chunk = self.boundaries
        if self.config.background_detection:
            if self._executor is None:
                self._executor = concurrent.futures.ThreadPoolExecutor(max_workers=1)
            if self._pending_structure is not None:
                self.structure = self._pending_structure.result()
            self._pending_structure = self._executor.submit(self._estimate, users, files, chunk)
        else:
            self.structure = self._estimate(users, files, chunk)
        log.debug(
            "Chunk %d closed after %d requests: %s.",
            chunk,
            len(users),
            self.structure,
        )

    def close(self):
        if self._executor is not None:
            self._executor.shutdown(wait=True)
            self._executor = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
