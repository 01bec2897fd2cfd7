import collections
import itertools

import numpy as np

from bingocache.config import NOISE_ORIGIN
from bingocache.workload import Trace


def make_trace(files, users=None, origins=None):
    files = list(files)
    n = len(files)
    users = list(range(n)) if users is None else list(users)
    origins = [NOISE_ORIGIN] * n if origins is None else list(origins)
    return Trace(np.arange(n), users, files, origins)


def session_trace(sessions):
    """Trace of back-to-back sessions given as ``(file, members)`` pairs."""
    users, files, origins = [], [], []
    for community, (file, members) in enumerate(sessions):
        users.extend(members)
        files.extend([file] * len(members))
        origins.extend([community] * len(members))
    return make_trace(files, users, origins)


def common_file_weights(pairs):
    files_of = collections.defaultdict(set)
    for user, file in pairs:
        files_of[user].add(file)
    weights = {}
    for u, v in itertools.combinations(sorted(files_of), 2):
        weight = len(files_of[u] & files_of[v])
        if weight:
            weights[(u, v)] = weight
    return files_of, weights


def reference_identify(requesters, structure, rho):
    """Community id picked by the prefix-intersection rule, or None."""
    users = sorted(
        {u for u in requesters if structure.membership_of(u)},
        key=lambda u: (-len(structure.membership_of(u)), u),
    )
    if not users:
        return None
    prefixes = [set(structure.membership_of(users[0]))]
    for user in users[1:]:
        prefixes.append(prefixes[-1] & set(structure.membership_of(user)))
    final = prefixes[-1]
    for k, prefix in enumerate(prefixes):
        if not prefix:
            final = prefixes[k - 1]
            break
        if len(prefix) <= rho:
            final = prefix
            break
    return min(final, key=lambda c: (-structure.size(c), c))


class LinearScanCache:
    """Unsorted reference for the scored heap: every minimum is a linear scan."""

    def __init__(self, capacity):
        self.capacity = capacity
        self.entries = {}
        self.clock = 0

    def _tick(self):
        self.clock += 1
        return self.clock

    @property
    def full(self):
        return len(self.entries) >= self.capacity

    def min_file(self):
        return min(self.entries, key=lambda f: self.entries[f])

    def min_key(self):
        return self.entries[self.min_file()][0]

    def insert(self, file, key):
        self.entries[file] = (key, self._tick())

    def replace_min(self, file, key):
        victim = self.min_file()
        del self.entries[victim]
        self.entries[file] = (key, self._tick())
        return victim

    def update_key(self, file, key):
        self.entries[file] = (key, self._tick())

    def pop_min(self):
        victim = self.min_file()
        key, _ = self.entries.pop(victim)
        return victim, key

    def remove(self, file):
        key, _ = self.entries.pop(file)
        return file, key
