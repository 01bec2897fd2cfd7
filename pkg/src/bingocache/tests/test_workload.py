import collections
import itertools

import numpy as np
import pytest
from scipy import optimize

from bingocache.config import NOISE_ORIGIN
from bingocache.workload import (
    CommunityStructure,
    Trace,
    WorkloadConfig,
    generate_structure,
    sample_file,
    sample_files,
    simulate_requests,
    zipf_popularity,
)


def test_zipf_uniform():
    pop = zipf_popularity(0.0, 4)
    np.testing.assert_allclose(pop.probabilities, [0.25] * 4)


def test_zipf_alpha_one():
    pop = zipf_popularity(1.0, 3)
    np.testing.assert_allclose(pop.probabilities, np.array([6, 3, 2]) / 11)
    assert pop.probability(1) == pytest.approx(6 / 11)


def test_zipf_single_file():
    pop = zipf_popularity(2.0, 1)
    np.testing.assert_allclose(pop.probabilities, [1.0])


def test_zipf_large_catalog():
    pop = zipf_popularity(0.8, 10**6)
    assert abs(pop.probabilities.sum() - 1) < 1e-9
    assert np.all(np.diff(pop.probabilities) <= 0)
    assert pop.cdf[-1] == 1.0
    np.testing.assert_array_equal(pop.top(3), [1, 2, 3])


@pytest.mark.parametrize("alpha,num_files", [(-0.1, 10), (0.8, 0)])
def test_zipf_rejects_invalid(alpha, num_files):
    with pytest.raises(ValueError):
        zipf_popularity(alpha, num_files)


def test_sample_uniform_frequencies():
    pop = zipf_popularity(0.0, 3)
    samples = sample_files(pop, np.random.default_rng(0), 3 * 10**5)
    frequencies = np.bincount(samples, minlength=4)[1:] / len(samples)
    np.testing.assert_allclose(frequencies, [1 / 3] * 3, atol=0.01)


def test_sample_single_file():
    pop = zipf_popularity(1.2, 1)
    rng = np.random.default_rng(0)
    assert all(sample_file(pop, rng) == 1 for _ in range(100))


def test_sample_matches_zipf():
    pop = zipf_popularity(1.2, 100)
    samples = sample_files(pop, np.random.default_rng(1), 10**6)
    frequencies = np.bincount(samples, minlength=101)[1:] / len(samples)
    assert np.abs(frequencies - pop.probabilities).sum() < 0.01


def test_sample_file_in_range():
    pop = zipf_popularity(0.8, 50)
    rng = np.random.default_rng(2)
    files = [sample_file(pop, rng) for _ in range(1000)]
    assert min(files) >= 1
    assert max(files) <= 50


def test_single_community_covers_all_users():
    config = WorkloadConfig(num_users=5, num_communities=1, min_size=5, max_size=5)
    structure = generate_structure(config, np.random.default_rng(0))
    assert structure.communities == (frozenset(range(5)),)


def test_two_large_communities_overlap():
    config = WorkloadConfig(num_users=10, num_communities=2, min_size=6, max_size=6)
    structure = generate_structure(config, np.random.default_rng(0))
    first, second = structure.communities
    assert len(first & second) >= 2


def test_community_sizes_within_bounds():
    config = WorkloadConfig(num_users=500, num_communities=100, min_size=10, max_size=50)
    structure = generate_structure(config, np.random.default_rng(3))
    sizes = structure.sizes()
    assert sizes.min() >= 10
    assert sizes.max() <= 50
    for members in structure.communities:
        assert all(0 <= u < 500 for u in members)


def test_community_sizes_follow_power_law():
    config = WorkloadConfig(
        num_users=2000, num_communities=50, size_exponent=2.5, min_size=10, max_size=200
    )
    sizes = np.concatenate(
        [generate_structure(config, np.random.default_rng(seed)).sizes() for seed in range(100)]
    )
    support = np.arange(10, 201, dtype=np.float64)
    log_sizes = np.log(sizes).sum()

    def negative_log_likelihood(tau):
        return tau * log_sizes + len(sizes) * np.log((support**-tau).sum())

    fit = optimize.minimize_scalar(negative_log_likelihood, bounds=(1.01, 5.0), method="bounded")
    assert abs(fit.x - 2.5) <= 0.5


def test_disjoint_structure():
    config = WorkloadConfig(
        num_users=2000, num_communities=40, min_size=10, max_size=50, disjoint=True
    )
    structure = generate_structure(config, np.random.default_rng(4))
    for first, second in itertools.combinations(structure.communities, 2):
        assert not first & second


@pytest.mark.parametrize(
    "changes",
    [
        {"min_size": 20, "max_size": 10},
        {"num_communities": 0},
        {"max_size": 5000},
        {"noise_rate": 1.5},
        {"churn_mode": "shuffle"},
    ],
)
def test_invalid_workload_config(changes):
    with pytest.raises(ValueError):
        generate_structure(WorkloadConfig().replace(**changes), np.random.default_rng(0))


def test_workload_config_rejects_unknown_keys():
    with pytest.raises(ValueError):
        WorkloadConfig.from_dict({"num_users": 10, "users": 10})
    config = WorkloadConfig.from_dict({"num_users": 10, "max_size": 10})
    assert config.num_users == 10
    assert WorkloadConfig.from_dict(config.to_dict()) == config


def test_structure_rejects_out_of_range_members():
    with pytest.raises(ValueError):
        CommunityStructure(({0, 1, 5},), num_users=5)
    with pytest.raises(ValueError):
        CommunityStructure((set(),), num_users=5)


def test_structure_save_and_load(tmp_path):
    structure = CommunityStructure(({0, 2, 4}, {1, 2}), num_users=6)
    path = tmp_path / "structure.txt"
    structure.save(path)
    assert path.read_text() == "0 2 4\n1 2\n"
    assert CommunityStructure.load(path, num_users=6) == structure


def single_community_config(**changes):
    config = WorkloadConfig(
        num_users=3,
        num_communities=1,
        min_size=3,
        max_size=3,
        batch_size=1,
        noise_rate=0.0,
        total_requests=6,
    )
    return config.replace(**changes)


def test_single_session_runs_back_to_back():
    structure = CommunityStructure(({0, 1, 2},), num_users=3)
    trace = simulate_requests(
        structure, zipf_popularity(0.8, 1000), single_community_config(), np.random.default_rng(0)
    )
    assert len(trace) == 6
    assert set(trace.user[:3].tolist()) == {0, 1, 2}
    assert set(trace.user[3:].tolist()) == {0, 1, 2}
    assert len(set(trace.file[:3].tolist())) == 1
    assert len(set(trace.file[3:].tolist())) == 1
    assert np.all(trace.origin == 0)
    np.testing.assert_array_equal(trace.seq, np.arange(6))


def test_zero_requests():
    structure = CommunityStructure(({0, 1, 2},), num_users=3)
    trace = simulate_requests(
        structure,
        zipf_popularity(0.8, 10),
        single_community_config(total_requests=0),
        np.random.default_rng(0),
    )
    assert len(trace) == 0
    assert trace.noise_fraction() == 0.0


def generate(config, seed):
    rng = np.random.default_rng(seed)
    structure = generate_structure(config, rng)
    trace = simulate_requests(structure, zipf_popularity(config.alpha, config.num_files), config, rng)
    return structure, trace


def test_at_most_batch_size_sessions_in_progress():
    config = WorkloadConfig(
        num_users=20,
        num_communities=5,
        min_size=3,
        max_size=8,
        batch_size=2,
        noise_rate=0.0,
        total_requests=10**4,
        alpha=0.0,
    )
    structure, trace = generate(config, 0)
    sizes = structure.sizes()
    open_sessions = collections.Counter()
    for request in trace:
        key = (request.origin, request.file)
        open_sessions[key] += 1
        if open_sessions[key] == sizes[request.origin]:
            del open_sessions[key]
        assert len(open_sessions) <= 2


def test_sessions_request_each_member_once():
    config = WorkloadConfig(
        num_users=100,
        num_communities=10,
        min_size=3,
        max_size=20,
        batch_size=4,
        noise_rate=0.0,
        total_requests=5000,
        alpha=0.0,
    )
    structure, trace = generate(config, 1)
    requesters = collections.defaultdict(list)
    for request in trace:
        requesters[(request.origin, request.file)].append(request.user)
    for (origin, _), users in requesters.items():
        members = structure.communities[origin]
        assert len(users) == len(set(users))
        assert set(users) <= members
        if len(users) == len(members):
            assert set(users) == members


def test_same_seed_same_trace():
    config = WorkloadConfig(num_users=200, max_size=50, total_requests=2000)
    _, first = generate(config, 5)
    _, second = generate(config, 5)
    _, other = generate(config, 6)
    assert first.digest() == second.digest()
    assert first.digest() != other.digest()


def test_noise_fraction():
    config = WorkloadConfig(num_users=500, max_size=50, noise_rate=0.1, total_requests=10**5)
    _, trace = generate(config, 2)
    assert abs(trace.noise_fraction() - 0.1) <= 0.02
    noise = trace.origin == NOISE_ORIGIN
    assert np.all(trace.user[noise] < 500)


def test_fully_noisy_trace():
    config = WorkloadConfig(num_users=50, max_size=20, noise_rate=1.0, total_requests=500)
    _, trace = generate(config, 0)
    assert trace.noise_fraction() == 1.0


@pytest.mark.parametrize("mode", ["dissolve", "migrate"])
def test_churn_changes_session_members(mode):
    config = WorkloadConfig(
        num_users=100,
        num_communities=2,
        min_size=5,
        max_size=10,
        batch_size=1,
        noise_rate=0.0,
        total_requests=2000,
        churn_interval=100,
        churn_mode=mode,
    )
    structure, trace = generate(config, 3)
    outside = [
        request.user not in structure.communities[request.origin] for request in trace
    ]
    assert any(outside)
    assert not any(outside[:100])


def test_trace_rejects_unordered_sequence():
    with pytest.raises(ValueError):
        Trace(np.array([0, 2, 1]), np.zeros(3), np.ones(3), np.zeros(3))
    with pytest.raises(ValueError):
        Trace(np.arange(3), np.zeros(2), np.ones(3), np.zeros(3))


def test_trace_csv(tmp_path):
    config = WorkloadConfig(num_users=100, max_size=30, total_requests=300)
    _, trace = generate(config, 0)
    path = tmp_path / "trace.csv"
    trace.to_csv(path)
    assert path.read_text().splitlines()[0] == "seq,user,file,origin"
    assert Trace.from_csv(path).digest() == trace.digest()


def test_trace_csv_requires_header(tmp_path):
    path = tmp_path / "trace.csv"
    path.write_text("seq,user,file\n0,1,2\n")
    with pytest.raises(ValueError):
        Trace.from_csv(path)
