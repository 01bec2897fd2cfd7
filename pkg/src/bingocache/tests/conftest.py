import numpy as np
import pytest

from bingocache.policies import construct_policy
from bingocache.workload import zipf_popularity

BASELINES = ["FIFO", "LRU", "LFU", "MPC", "RND"]


@pytest.fixture
def popularity():
    yield zipf_popularity(0.8, 1000)


@pytest.fixture
def policy(policy_name, capacity, popularity):
    yield construct_policy(
        policy_name, capacity, popularity=popularity, rng=np.random.default_rng(1234)
    )


def pytest_generate_tests(metafunc):
    if "policy_name" in metafunc.fixturenames:
        metafunc.parametrize("policy_name", BASELINES)
    if "capacity" in metafunc.fixturenames:
        metafunc.parametrize("capacity", [1, 3, 20])
