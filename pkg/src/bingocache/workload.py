"""Synthetic community structures and the batch-based request arrival process.

Community memberships follow an affiliation (user-community bipartite) model:
community sizes are drawn from a truncated power law and members are sampled
uniformly. Requests are emitted by ``batch_size`` concurrently active
sessions, each one being a community requesting a single Zipf-distributed
file, mixed with individual (noise) requests.
"""
import dataclasses
import hashlib
import json
from typing import Iterable, Iterator, NamedTuple, Sequence

import numpy as np
import pandas as pd

from bingocache.config import (
    DEFAULT_ALPHA,
    DEFAULT_BATCH_SIZE,
    DEFAULT_MAX_SIZE,
    DEFAULT_MIN_SIZE,
    DEFAULT_NOISE_RATE,
    DEFAULT_NUM_COMMUNITIES,
    DEFAULT_NUM_FILES,
    DEFAULT_NUM_USERS,
    DEFAULT_SIZE_EXPONENT,
    DEFAULT_TOTAL_REQUESTS,
    NOISE_ORIGIN,
    log,
    raise_error,
)

CHURN_MODES = ("dissolve", "migrate")
TRACE_COLUMNS = ("seq", "user", "file", "origin")


@dataclasses.dataclass(frozen=True)
class WorkloadConfig:
    num_users: int = DEFAULT_NUM_USERS
    num_communities: int = DEFAULT_NUM_COMMUNITIES
    size_exponent: float = DEFAULT_SIZE_EXPONENT
    min_size: int = DEFAULT_MIN_SIZE
    max_size: int = DEFAULT_MAX_SIZE
    batch_size: int = DEFAULT_BATCH_SIZE
    noise_rate: float = DEFAULT_NOISE_RATE
    total_requests: int = DEFAULT_TOTAL_REQUESTS
    churn_interval: int = 0
    churn_mode: str = "dissolve"
    alpha: float = DEFAULT_ALPHA
    num_files: int = DEFAULT_NUM_FILES
    disjoint: bool = False
    seed: int = 0

    def validate(self):
        if self.num_users < 1:
            raise_error(ValueError, f"Number of users must be positive, got {self.num_users}.")
        if self.num_communities < 1:
            raise_error(
                ValueError,
                f"Number of communities must be positive, got {self.num_communities}.",
            )
        if self.min_size < 2:
            raise_error(ValueError, f"Minimum community size must be at least 2, got {self.min_size}.")
        if self.min_size > self.max_size:
            raise_error(
                ValueError,
                f"Community size bounds are inverted: [{self.min_size}, {self.max_size}].",
            )
        if self.max_size > self.num_users:
            raise_error(
                ValueError,
                f"Maximum community size {self.max_size} exceeds the number of users {self.num_users}.",
            )
        if self.batch_size < 1:
            raise_error(ValueError, f"Batch size must be positive, got {self.batch_size}.")
        if not 0 <= self.noise_rate <= 1:
            raise_error(ValueError, f"Noise rate must lie in [0, 1], got {self.noise_rate}.")
        if self.total_requests < 0:
            raise_error(ValueError, f"Total requests cannot be negative, got {self.total_requests}.")
        if self.churn_interval < 0:
            raise_error(ValueError, f"Churn interval cannot be negative, got {self.churn_interval}.")
        if self.churn_mode not in CHURN_MODES:
            raise_error(ValueError, f"Unknown churn mode {self.churn_mode}.")
        if self.alpha < 0:
            raise_error(ValueError, f"Zipf exponent must be non-negative, got {self.alpha}.")
        if self.num_files < 1:
            raise_error(ValueError, f"Number of files must be positive, got {self.num_files}.")
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
            raise_error(ValueError, f"Unknown workload config keys: {sorted(unknown)}.")
        return cls(**data)

    @classmethod
    def from_json(cls, path):
        with open(path) as file:
            return cls.from_dict(json.load(file))


@dataclasses.dataclass(frozen=True)
class CommunityStructure:
    """Overlapping communities over users ``0..num_users-1``.

    Community ids are the dense positions in ``communities``.
    """

    communities: tuple
    num_users: int

    def __post_init__(self):
        communities = tuple(frozenset(int(u) for u in members) for members in self.communities)
        for cid, members in enumerate(communities):
            if not members:
                raise_error(ValueError, f"Community {cid} is empty.")
            if min(members) < 0 or max(members) >= self.num_users:
                raise_error(
                    ValueError,
                    f"Community {cid} has members outside [0, {self.num_users}).",
                )
        object.__setattr__(self, "communities", communities)

    @property
    def num_communities(self):
        return len(self.communities)

    def members(self, community):
        """Sorted member array of a community."""
        return np.array(sorted(self.communities[community]), dtype=np.int64)

    def sizes(self):
        return np.array([len(c) for c in self.communities], dtype=np.int64)

    def replace_community(self, community, members):
        communities = list(self.communities)
        communities[community] = members
        return CommunityStructure(tuple(communities), self.num_users)

    def save(self, path):
        """Write one community per line as whitespace separated user ids."""
        with open(path, "w") as file:
            for members in self.communities:
                file.write(" ".join(str(u) for u in sorted(members)) + "\n")

    @classmethod
    def load(cls, path, num_users=None):
        with open(path) as file:
            communities = [
                frozenset(int(u) for u in line.split()) for line in file if line.strip()
            ]
        if num_users is None:
            num_users = 1 + max((max(c) for c in communities), default=-1)
        return cls(tuple(communities), num_users)


@dataclasses.dataclass(frozen=True, eq=False)
class ZipfPopularity:
    """Zipf popularity over file ranks ``1..num_files``."""

    alpha: float
    num_files: int
    probabilities: np.ndarray
    cdf: np.ndarray

    def probability(self, file):
        return float(self.probabilities[file - 1])

    def top(self, count):
        """Ids of the ``count`` most popular files, ties broken by lower id."""
        order = np.argsort(-self.probabilities, kind="stable")
        return order[:count] + 1


class Request(NamedTuple):
    seq: int
    user: int
    file: int
    origin: int


@dataclasses.dataclass(frozen=True, eq=False)
class Trace:
    """Columnar request trace.

    ``origin`` holds the generating community id, or ``NOISE_ORIGIN`` for
    individual requests. It exists for evaluation only and is never handed
    to a cache policy.
    """

    seq: np.ndarray
    user: np.ndarray
    file: np.ndarray
    origin: np.ndarray

    def __post_init__(self):
        columns = [np.ascontiguousarray(getattr(self, name), dtype=np.int64) for name in TRACE_COLUMNS]
        if len({len(c) for c in columns}) > 1:
            raise_error(ValueError, "Trace columns have different lengths.")
        if len(columns[0]) > 1 and not np.all(np.diff(columns[0]) > 0):
            raise_error(ValueError, "Trace sequence numbers must be strictly increasing.")
        for name, column in zip(TRACE_COLUMNS, columns):
            object.__setattr__(self, name, column)

    def __len__(self):
        return len(self.seq)

    def __iter__(self) -> Iterator[Request]:
        for values in zip(
            self.seq.tolist(), self.user.tolist(), self.file.tolist(), self.origin.tolist()
        ):
            yield Request(*values)

    @classmethod
    def from_requests(cls, requests: Iterable[Sequence[int]]):
        rows = [tuple(r) for r in requests]
        if not rows:
            return cls.empty()
        return cls(*(np.array(column, dtype=np.int64) for column in zip(*rows)))

    @classmethod
    def empty(cls):
        return cls(*(np.empty(0, dtype=np.int64) for _ in TRACE_COLUMNS))

    def digest(self):
        """Sha256 over the column bytes, used to check that policies share a trace."""
        sha = hashlib.sha256()
        for name in TRACE_COLUMNS:
            sha.update(getattr(self, name).astype("<i8").tobytes())
        return sha.hexdigest()

    def noise_fraction(self):
        if not len(self):
            return 0.0
        return float(np.mean(self.origin == NOISE_ORIGIN))

    def to_frame(self):
        return pd.DataFrame({name: getattr(self, name) for name in TRACE_COLUMNS})

    def to_csv(self, path):
        self.to_frame().to_csv(path, index=False)

    @classmethod
    def from_csv(cls, path):
        frame = pd.read_csv(path, dtype=np.int64)
        if tuple(frame.columns) != TRACE_COLUMNS:
            raise_error(
                ValueError,
                f"Trace file {path} must have header {','.join(TRACE_COLUMNS)}.",
            )
        return cls(*(frame[name].to_numpy() for name in TRACE_COLUMNS))


def _community_sizes(config, rng, count):
    support = np.arange(config.min_size, config.max_size + 1)
    weights = support.astype(np.float64) ** -config.size_exponent
    return rng.choice(support, size=count, p=weights / weights.sum())


def _sample_members(config, rng, size):
    return rng.choice(config.num_users, size=size, replace=False)


def generate_structure(config: WorkloadConfig, rng) -> CommunityStructure:
    """Draw ``num_communities`` communities with power-law sizes and uniform members."""
    config.validate()
    sizes = _community_sizes(config, rng, config.num_communities)
    if config.disjoint:
        if sizes.sum() > config.num_users:
            raise_error(
                ValueError,
                f"Disjoint communities need {sizes.sum()} users but only "
                f"{config.num_users} are available.",
            )
        users = rng.permutation(config.num_users)
        bounds = np.cumsum(sizes)[:-1]
        communities = np.split(users[: sizes.sum()], bounds)
    else:
        communities = [_sample_members(config, rng, size) for size in sizes]
    structure = CommunityStructure(tuple(communities), config.num_users)
    log.debug(
        "Generated %d communities over %d users (mean size %.1f).",
        structure.num_communities,
        config.num_users,
        sizes.mean(),
    )
    return structure


def zipf_popularity(alpha: float, num_files: int) -> ZipfPopularity:
    if alpha < 0:
        raise_error(ValueError, f"Zipf exponent must be non-negative, got {alpha}.")
    if num_files < 1:
        raise_error(ValueError, f"Number of files must be positive, got {num_files}.")
    ranks = np.arange(1, num_files + 1, dtype=np.float64)
    weights = ranks**-alpha
    probabilities = weights / weights.sum()
    cdf = np.cumsum(probabilities)
    cdf[-1] = 1.0
    return ZipfPopularity(alpha, num_files, probabilities, cdf)


def sample_files(pop: ZipfPopularity, rng, size):
    """Inverse-CDF sampling of ``size`` file ids."""
    index = np.searchsorted(pop.cdf, rng.random(size), side="right")
    return np.minimum(index, pop.num_files - 1).astype(np.int64) + 1


def sample_file(pop: ZipfPopularity, rng) -> int:
    index = int(np.searchsorted(pop.cdf, rng.random(), side="right"))
    return min(index, pop.num_files - 1) + 1


class _Session:
    """One active community session: a single file and the members yet to request it."""

    __slots__ = ("community", "file", "members", "cursor")

    def __init__(self, community, file, members):
        self.community = community
        self.file = file
        self.members = members.tolist()
        self.cursor = 0

    def next_user(self):
        user = self.members[self.cursor]
        self.cursor += 1
        return user

    @property
    def exhausted(self):
        return self.cursor >= len(self.members)


def _perturb(communities, config, rng):
    community = int(rng.integers(len(communities)))
    members = communities[community]
    if config.churn_mode == "dissolve":
        size = int(_community_sizes(config, rng, 1)[0])
        communities[community] = np.sort(_sample_members(config, rng, size))
        log.debug("Community %d dissolved and regenerated with %d members.", community, size)
        return
    outsiders = np.setdiff1d(np.arange(config.num_users), members, assume_unique=True)
    if len(outsiders):
        leaving = members[rng.integers(len(members))]
        joining = outsiders[rng.integers(len(outsiders))]
        members = np.sort(np.append(members[members != leaving], joining))
        communities[community] = members
        log.debug("User %d left and user %d joined community %d.", leaving, joining, community)


def simulate_requests(
    structure: CommunityStructure, pop: ZipfPopularity, config: WorkloadConfig, rng
) -> Trace:
    """Emit ``total_requests`` requests from ``batch_size`` concurrent sessions.

    Each event is, with probability ``noise_rate``, an individual request of a
    uniform user for a Zipf file; otherwise the next member of a uniformly
    chosen active session requests that session's file. Exhausted sessions are
    replaced immediately by a fresh one.
    """
    if structure.num_communities == 0 and config.batch_size >= 1:
        raise_error(ValueError, "Cannot simulate sessions over a structure without communities.")
    total = config.total_requests
    if total == 0:
        return Trace.empty()

    communities = [structure.members(c) for c in range(structure.num_communities)]

    def new_session():
        community = int(rng.integers(len(communities)))
        file = sample_file(pop, rng)
        return _Session(community, file, rng.permutation(communities[community]))

    sessions = [new_session() for _ in range(config.batch_size)]
    noise = (rng.random(total) < config.noise_rate).tolist()
    picks = rng.integers(config.batch_size, size=total).tolist()
    noise_users = rng.integers(structure.num_users, size=total).tolist()
    noise_files = sample_files(pop, rng, total).tolist()

    users = np.empty(total, dtype=np.int64)
    files = np.empty(total, dtype=np.int64)
    origins = np.empty(total, dtype=np.int64)
    churn = config.churn_interval
    for i in range(total):
        if churn and i and i % churn == 0:
            _perturb(communities, config, rng)
        if noise[i]:
            users[i] = noise_users[i]
            files[i] = noise_files[i]
            origins[i] = NOISE_ORIGIN
            continue
        session = sessions[picks[i]]
        users[i] = session.next_user()
        files[i] = session.file
        origins[i] = session.community
        if session.exhausted:
            sessions[picks[i]] = new_session()
    return Trace(np.arange(total, dtype=np.int64), users, files, origins)
