"""Identification of the community driving the demand for a file."""
from typing import NamedTuple, Optional

from bingocache.config import DEFAULT_PENDING_CAP, raise_error


class IdentificationResult(NamedTuple):
    community: Optional[int] = None
    size: int = 0

    @property
    def identified(self):
        return self.community is not None


UNIDENTIFIED = IdentificationResult()


class PendingFile:
    """Distinct users that requested a file not yet cached, in arrival order.

    At most ``cap`` requesters are kept; the oldest is dropped first.
    """

    __slots__ = ("file", "requesters", "request_count", "cap")

    def __init__(self, file, cap=DEFAULT_PENDING_CAP):
        self.file = file
        self.requesters = {}
        self.request_count = 0
        self.cap = cap

    def add(self, user):
        self.request_count += 1
        if user in self.requesters:
            return
        if len(self.requesters) >= self.cap:
            del self.requesters[next(iter(self.requesters))]
        self.requesters[user] = None

    def __len__(self):
        return len(self.requesters)

    def users(self):
        return list(self.requesters)


def identify(requesters, structure, rho: int) -> IdentificationResult:
    """Intersect the requesters' communities down to at most ``rho`` candidates.

    Requesters without estimated memberships are ignored. The remaining ones
    are visited by decreasing membership count (ties: smaller user id). An
    intersection that would leave no candidate is not applied and ends the
    procedure. The largest remaining candidate wins (ties: smaller id).
    """
    if rho < 1:
        raise_error(ValueError, f"Candidate stop size must be at least 1, got {rho}.")
    requesters = list(dict.fromkeys(requesters))
    if not requesters:
        raise_error(ValueError, "Cannot identify a community without requesters.")
    if structure is None:
        return UNIDENTIFIED

    ranked = []
    for user in requesters:
        memberships = structure.membership_of(user)
        if memberships:
            ranked.append((-len(memberships), user, memberships))
    if not ranked:
        return UNIDENTIFIED
    ranked.sort(key=lambda item: (item[0], item[1]))

    candidates = set(ranked[0][2])
    for _, _, memberships in ranked[1:]:
        if len(candidates) <= rho:
            break
        narrowed = candidates.intersection(memberships)
        if not narrowed:
            break
        candidates = narrowed

    community = min(candidates, key=lambda c: (-structure.size(c), c))
    return IdentificationResult(community, structure.size(community))
