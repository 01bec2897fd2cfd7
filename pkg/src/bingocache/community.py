"""User-user graphs built from request logs and conductance-based community detection."""
import dataclasses
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy import sparse

from bingocache.config import DEFAULT_MIN_COMMUNITY_SIZE, DEFAULT_PHI_MAX, log, raise_error
from bingocache.custom_operators import ops


class RequestLog:
    """(user, file) pairs logged during one chunk."""

    def __init__(self):
        self._users = []
        self._files = []

    @classmethod
    def from_pairs(cls, pairs: Iterable[Sequence[int]]):
        request_log = cls()
        for user, file in pairs:
            request_log.append(user, file)
        return request_log

    def append(self, user, file):
        self._users.append(user)
        self._files.append(file)

    def __len__(self):
        return len(self._users)

    def snapshot(self):
        """Immutable copy of the logged columns as ``(users, files)``."""
        users = np.array(self._users, dtype=np.int64)
        files = np.array(self._files, dtype=np.int64)
        users.flags.writeable = False
        files.flags.writeable = False
        return users, files

    def clear(self):
        self._users = []
        self._files = []


def _as_columns(request_log):
    if isinstance(request_log, RequestLog):
        return request_log.snapshot()
    if isinstance(request_log, tuple) and len(request_log) == 2 and hasattr(request_log[0], "shape"):
        return np.asarray(request_log[0], dtype=np.int64), np.asarray(request_log[1], dtype=np.int64)
    return RequestLog.from_pairs(request_log).snapshot()


@dataclasses.dataclass(frozen=True, eq=False)
class UserGraph:
    """Weighted undirected user graph.

    ``users`` holds the sorted user ids of the nodes and ``adjacency`` the
    symmetric CSR weight matrix over node indices, with an empty diagonal.
    """

    users: np.ndarray
    adjacency: sparse.csr_matrix

    @classmethod
    def from_edges(cls, edges, users=None):
        """Graph from ``(u, v, w)`` triples; ``users`` adds isolated nodes."""
        edges = list(edges)
        nodes = set(users or ())
        for u, v, _ in edges:
            nodes.update((u, v))
        node_ids = np.array(sorted(nodes), dtype=np.int64)
        n = len(node_ids)
        if not edges:
            return cls(node_ids, sparse.csr_matrix((n, n), dtype=np.int64))
        u, v, w = (np.array(column, dtype=np.int64) for column in zip(*edges))
        if np.any(u == v):
            raise_error(ValueError, "Self-loops are not allowed in a user graph.")
        rows = np.searchsorted(node_ids, np.concatenate([u, v]))
        cols = np.searchsorted(node_ids, np.concatenate([v, u]))
        adjacency = sparse.csr_matrix(
            (np.concatenate([w, w]), (rows, cols)), shape=(n, n), dtype=np.int64
        )
        adjacency.sort_indices()
        return cls(node_ids, adjacency)

    @property
    def num_nodes(self):
        return len(self.users)

    @property
    def num_edges(self):
        return self.adjacency.nnz // 2

    def degrees(self):
        """Weighted degree (volume) of every node."""
        return np.asarray(self.adjacency.sum(axis=1), dtype=np.int64).ravel()

    def index_of(self, user):
        index = int(np.searchsorted(self.users, user))
        if index >= len(self.users) or self.users[index] != user:
            raise_error(KeyError, f"User {user} is not a node of the graph.")
        return index

    def weight(self, u, v):
        return int(self.adjacency[self.index_of(u), self.index_of(v)])

    def edges(self):
        """Iterate over ``(u, v, w)`` with ``u < v``."""
        upper = sparse.triu(self.adjacency, k=1).tocoo()
        order = np.lexsort((upper.col, upper.row))
        for row, col, weight in zip(upper.row[order], upper.col[order], upper.data[order]):
            yield int(self.users[row]), int(self.users[col]), int(weight)

    def write_edgelist(self, path):
        with open(path, "w") as file:
            for u, v, w in self.edges():
                file.write(f"{u} {v} {w}\n")


class EstimatedStructure:
    """Immutable overlapping community structure with a user membership index."""

    __slots__ = ("_communities", "_membership")

    def __init__(self, communities=()):
        self._communities = tuple(frozenset(int(u) for u in c) for c in communities)
        membership = {}
        for cid, members in enumerate(self._communities):
            for user in members:
                membership.setdefault(user, []).append(cid)
        self._membership = {user: tuple(ids) for user, ids in membership.items()}

    @classmethod
    def from_structure(cls, structure):
        return cls(structure.communities)

    @property
    def communities(self):
        return self._communities

    @property
    def num_communities(self):
        return len(self._communities)

    def __len__(self):
        return len(self._communities)

    def __eq__(self, other):
        if not isinstance(other, EstimatedStructure):
            return NotImplemented
        return self._communities == other._communities

    def __hash__(self):
        return hash(self._communities)

    def __repr__(self):
        return f"EstimatedStructure({self.num_communities} communities)"

    def size(self, community):
        return len(self._communities[community])

    def members(self, community):
        return self._communities[community]

    def membership_of(self, user):
        return self._membership.get(user, ())


def membership_of(structure: EstimatedStructure, user) -> list:
    """Sorted ids of the communities containing ``user``."""
    return list(structure.membership_of(user))


def build_graph(request_log, beta: int) -> UserGraph:
    """Common-file user graph of a request log, pruned of edges lighter than ``beta``.

    Edge weights count distinct files requested by both users, computed as
    the product of the binary user-file incidence matrix with its transpose.
    """
    if beta < 1:
        raise_error(ValueError, f"Edge threshold must be at least 1, got {beta}.")
    users, files = _as_columns(request_log)
    if len(users) == 0:
        return UserGraph.from_edges(())
    pairs = np.unique(np.stack([users, files], axis=1), axis=0)
    nodes, rows = np.unique(pairs[:, 0], return_inverse=True)
    catalog, cols = np.unique(pairs[:, 1], return_inverse=True)
    incidence = sparse.csr_matrix(
        (np.ones(len(pairs), dtype=np.int64), (rows.ravel(), cols.ravel())),
        shape=(len(nodes), len(catalog)),
    )
    common = (incidence @ incidence.T).tocsr()
    common = (common - sparse.diags(common.diagonal())).tocsr()
    common.data[common.data < beta] = 0
    common.eliminate_zeros()
    common.sort_indices()
    return UserGraph(nodes.astype(np.int64), common.astype(np.int64))


def conductance(graph: UserGraph, node_set) -> float:
    """Weighted cut of ``node_set`` over the smaller of the two side volumes."""
    if graph.num_edges == 0:
        raise_error(ValueError, "Conductance is undefined on a graph without edges.")
    index = np.unique([graph.index_of(u) for u in node_set]).astype(np.int64)
    if len(index) == 0 or len(index) == graph.num_nodes:
        raise_error(ValueError, "Conductance needs a non-empty proper subset of the nodes.")
    degrees = graph.degrees()
    total = int(degrees.sum())
    volume = int(degrees[index].sum())
    internal = int(graph.adjacency[index][:, index].sum())
    cut = volume - internal
    if cut == 0:
        return 0.0
    return cut / min(volume, total - volume)


def detect_communities(
    graph: UserGraph,
    min_size: int = DEFAULT_MIN_COMMUNITY_SIZE,
    phi_max: float = DEFAULT_PHI_MAX,
    max_size: Optional[int] = None,
) -> EstimatedStructure:
    """Overlapping communities by greedy seed-set expansion.

    Seeds are visited by decreasing weighted degree (ties: smaller user id).
    Each seed is grown one neighbor at a time, always taking the neighbor
    that gives the lowest ``cut / volume``, and the growth stops at the
    first local minimum of that score. A connected component made of
    several communities is therefore never returned whole. The final set
    is accepted when it has at least ``min_size`` members and conductance
    at most ``phi_max``. Seeds already inside an accepted community are
    skipped, but expansions may still reach covered nodes, so communities
    can overlap.
    """
    if graph.num_edges == 0:
        return EstimatedStructure()
    adjacency = graph.adjacency
    degrees = graph.degrees()
    total = int(degrees.sum())
    indptr = adjacency.indptr.astype(np.int64)
    indices = adjacency.indices.astype(np.int64)
    weights = adjacency.data.astype(np.int64)
    limit = graph.num_nodes if max_size is None else int(max_size)

    order = np.lexsort((np.arange(graph.num_nodes), -degrees))
    covered = np.zeros(graph.num_nodes, dtype=bool)
    accepted = []
    seen = set()
    for seed in order:
        if degrees[seed] == 0:
            break
        if covered[seed]:
            continue
        nodes, cuts, volumes = ops.expand_seed(indptr, indices, weights, degrees, int(seed), limit)
        cut, volume = int(cuts[-1]), int(volumes[-1])
        # a zero cut is conductance 0 even when the set spans the whole graph
        phi = 0.0 if cut == 0 else cut / min(volume, total - volume)
        if len(nodes) < min_size or phi > phi_max:
            continue
        community = frozenset(graph.users[nodes].tolist())
        if community in seen:
            continue
        seen.add(community)
        accepted.append(community)
        covered[nodes] = True
    log.debug(
        "Detected %d communities on a graph with %d nodes and %d edges.",
        len(accepted),
        graph.num_nodes,
        graph.num_edges,
    )
    return EstimatedStructure(accepted)


def _best_match_f1(source, target):
    if not source:
        return 1.0 if not target else 0.0
    if not target:
        return 0.0
    scores = []
    for community in source:
        scores.append(
            max(2 * len(community & other) / (len(community) + len(other)) for other in target)
        )
    return float(np.mean(scores))


def average_f1(truth, estimate) -> float:
    """Symmetric best-match F1 between two community structures."""
    truth = [frozenset(c) for c in truth.communities]
    estimate = [frozenset(c) for c in estimate.communities]
    return 0.5 * (_best_match_f1(truth, estimate) + _best_match_f1(estimate, truth))
