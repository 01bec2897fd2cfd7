import numpy as np
from numba import njit


@njit(
    "int64[:,:](int64[:], int64[:], int64[:], int64[:], int64, int64)",
    cache=True,
)
def expand_seed(indptr, indices, weights, degrees, seed, max_size):
    """Greedy set expansion from ``seed`` down to the first local minimum.

    The set is scored by ``cut / volume``. At every step the frontier node
    giving the lowest score is the candidate (ties go to the smaller node
    index); it is added only when it strictly lowers the score, otherwise
    the expansion stops. Returns a ``(3, steps)`` array holding, per step,
    the node added and the cut and volume of the prefix ending with it.
    """
    nnodes = degrees.shape[0]
    limit = min(max_size, nnodes)
    in_set = np.zeros(nnodes, dtype=np.bool_)
    links = np.zeros(nnodes, dtype=np.int64)
    frontier = np.empty(nnodes, dtype=np.int64)
    frontier_pos = np.full(nnodes, -1, dtype=np.int64)
    nfrontier = 0
    path = np.empty((3, limit), dtype=np.int64)
    cut = 0
    volume = 0
    node = seed
    for step in range(limit):
        in_set[node] = True
        cut += degrees[node] - 2 * links[node]
        volume += degrees[node]
        path[0, step] = node
        path[1, step] = cut
        path[2, step] = volume

        pos = frontier_pos[node]
        if pos >= 0:
            nfrontier -= 1
            last = frontier[nfrontier]
            frontier[pos] = last
            frontier_pos[last] = pos
            frontier_pos[node] = -1
        for p in range(indptr[node], indptr[node + 1]):
            neighbor = indices[p]
            if in_set[neighbor]:
                continue
            links[neighbor] += weights[p]
            if frontier_pos[neighbor] < 0:
                frontier[nfrontier] = neighbor
                frontier_pos[neighbor] = nfrontier
                nfrontier += 1

        best = -1
        best_cut = 0
        best_volume = 1
        for i in range(nfrontier):
            candidate = frontier[i]
            new_cut = cut + degrees[candidate] - 2 * links[candidate]
            new_volume = volume + degrees[candidate]
            if best < 0:
                best, best_cut, best_volume = candidate, new_cut, new_volume
                continue
            lhs = new_cut * best_volume
            rhs = best_cut * new_volume
            if lhs < rhs or (lhs == rhs and candidate < best):
                best, best_cut, best_volume = candidate, new_cut, new_volume
        # local minimum: the best candidate does not lower cut / volume
        if best < 0 or best_cut * volume >= cut * best_volume:
            return path[:, : step + 1].copy()
        node = best
    return path
