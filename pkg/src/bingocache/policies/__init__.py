from bingocache.config import POLICY_NAMES, raise_error
from bingocache.policies.abstract import CachePolicy, Outcome
from bingocache.policies.baselines import (
    FIFOPolicy,
    LFUPolicy,
    LRUPolicy,
    MPCPolicy,
    RNDPolicy,
    make_fifo,
    make_lfu,
    make_lru,
    make_mpc,
    make_rnd,
)
from bingocache.policies.bingo import (
    Admission,
    BingoPolicy,
    EngineConfig,
    FileState,
    RetainedRecord,
    score,
)
from bingocache.policies.heap import HeapEntry, HeapInsert, ScoredHeapCache


def construct_policy(
    name,
    capacity,
    popularity=None,
    rng=None,
    engine_config=None,
    structure=None,
    detect=True,
):
    """Build a fresh policy instance by name."""
    name = name.upper()
    if name not in POLICY_NAMES:
        raise_error(KeyError, f"Unknown policy {name}, choose from {', '.join(POLICY_NAMES)}.")
    if name == "BINGO":
        config = EngineConfig() if engine_config is None else engine_config
        return BingoPolicy(config.replace(capacity=capacity), structure=structure, detect=detect)
    if name == "MPC":
        return make_mpc(capacity, popularity)
    if name == "RND":
        return make_rnd(capacity, rng)
    return {"FIFO": make_fifo, "LRU": make_lru, "LFU": make_lfu}[name](capacity)
