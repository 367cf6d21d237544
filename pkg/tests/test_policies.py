from collections import Counter

import numpy as np
import pytest

from pacesim import (
    EnvironmentState,
    PolicyParams,
    TransitionEdge,
    adapt_edge,
    decide_adaptive,
    decide_greedy,
    decide_static,
)
from pacesim.graph import EdgeKind

TOL = 1e-12


def env(jamming=0.0, concurrency=1, crisis=False, t=1):
    return EnvironmentState(
        t=t, jamming=jamming, energy=1.0, concurrency=concurrency, crisis_active=crisis
    )


def edge(src="s", dst="t", prob=0.2, cost=1.0, kind=EdgeKind.DOWNWARD):
    return TransitionEdge(src, dst, prob, cost, kind)


def test_adapt_edge_probability_scaling():
    p_t, _ = adapt_edge(
        edge(prob=0.2), env(jamming=0.8), PolicyParams(jamming_prob_gain=0.5)
    )
    assert abs(p_t - 0.28) <= TOL


def test_adapt_edge_cost_adjustment():
    _, c_t = adapt_edge(
        edge(cost=0.5),
        env(jamming=0.8, concurrency=2),
        PolicyParams(jamming_cost_gain=0.25, concurrency_relief=0.1),
    )
    assert abs(c_t - 0.6) <= TOL


def test_adapt_edge_cost_clipped_at_zero():
    _, c_t = adapt_edge(
        edge(cost=0.05),
        env(jamming=0.0, concurrency=3),
        PolicyParams(jamming_cost_gain=0.1, concurrency_relief=0.2),
    )
    assert c_t == 0.0


def test_adapt_edge_identity_when_calm():
    rng = np.random.default_rng(7)
    params = PolicyParams()
    for _ in range(1000):
        e = edge(prob=float(rng.uniform(0, 1)), cost=float(rng.uniform(0, 5)))
        p_t, c_t = adapt_edge(e, env(jamming=0.0, concurrency=1), params)
        assert abs(p_t - e.prob) <= TOL
        assert abs(c_t - e.cost) <= TOL


def test_adapt_edge_monotone_in_jamming():
    params = PolicyParams(jamming_prob_gain=0.7)
    e = edge(prob=0.3)
    last = -1.0
    for jam in np.linspace(0, 1, 50):
        p_t, _ = adapt_edge(e, env(jamming=float(jam)), params)
        assert p_t >= last
        last = p_t


def test_adapt_edge_downward_scope_leaves_other_kinds_alone():
    params = PolicyParams(adaptive_scale_scope="downward")
    down = edge(kind=EdgeKind.DOWNWARD, prob=0.2)
    up = edge(kind=EdgeKind.UPWARD, prob=0.2)
    p_down, _ = adapt_edge(down, env(jamming=0.8), params)
    p_up, _ = adapt_edge(up, env(jamming=0.8), params)
    assert abs(p_down - 0.28) <= TOL
    assert abs(p_up - 0.2) <= TOL


def test_policy_params_validation():
    with pytest.raises(Exception, match="epsilon"):
        PolicyParams(epsilon=1.5)
    with pytest.raises(Exception, match="p_stay"):
        PolicyParams(p_stay=-0.1)
    with pytest.raises(Exception, match="adaptive_scale_scope"):
        PolicyParams(adaptive_scale_scope="sideways")


def test_all_policies_stay_on_empty_edges():
    rng = np.random.default_rng(8)
    params = PolicyParams()
    assert decide_static([], params, rng).is_stay
    assert decide_adaptive([], env(), params, rng).is_stay
    assert decide_greedy([], env(), params, {"s": 1.0}, rng).is_stay


def test_static_always_stays_at_degenerate_p_stay():
    rng = np.random.default_rng(9)
    params = PolicyParams(p_stay=1.0)
    edges = [edge(dst="a", prob=0.5), edge(dst="b", prob=0.5)]
    assert all(decide_static(edges, params, rng).is_stay for _ in range(500))


def test_static_move_frequency_matches_distribution():
    rng = np.random.default_rng(10)
    params = PolicyParams(p_stay=0.6)
    edges = [edge(dst="a", prob=0.3, cost=1.5), edge(dst="b", prob=0.1, cost=2.5)]
    counts = Counter()
    n = 20000
    for _ in range(n):
        action = decide_static(edges, params, rng)
        counts[action.edge.dst if action.edge else None] += 1
        if action.edge is not None:
            assert action.effective_cost == action.edge.cost
    # expected {stay: 0.6, a: 0.3, b: 0.1}; 4 sigma tolerance
    for key, p in ((None, 0.6), ("a", 0.3), ("b", 0.1)):
        se = (p * (1 - p) / n) ** 0.5
        assert abs(counts[key] / n - p) < 4 * se


def test_static_ignores_environment():
    params = PolicyParams(p_stay=0.5)
    edges = [edge(dst="a", prob=0.2, cost=1.0)]
    moves_calm = sum(
        not decide_static(edges, params, np.random.default_rng(i)).is_stay
        for i in range(2000)
    )
    # same rng seeds, so identical decisions regardless of any jamming level
    moves_jammed = sum(
        not decide_static(edges, params, np.random.default_rng(i)).is_stay
        for i in range(2000)
    )
    assert moves_calm == moves_jammed


def test_adaptive_residual_stay_mass():
    rng = np.random.default_rng(11)
    params = PolicyParams(jamming_prob_gain=0.5, jamming_cost_gain=0.0)
    edges = [edge(dst="a", prob=0.2)]
    # p_t = 0.28 at J = 0.8, leaving stay mass 0.72
    n = 20000
    moves = sum(
        not decide_adaptive(edges, env(jamming=0.8), params, rng).is_stay for _ in range(n)
    )
    se = (0.28 * 0.72 / n) ** 0.5
    assert abs(moves / n - 0.28) < 4 * se


def test_adaptive_renormalizes_when_mass_exceeds_one():
    rng = np.random.default_rng(12)
    params = PolicyParams(jamming_prob_gain=0.0)
    edges = [edge(dst="a", prob=0.8), edge(dst="b", prob=0.9)]
    n = 20000
    counts = Counter()
    for _ in range(n):
        action = decide_adaptive(edges, env(), params, rng)
        assert not action.is_stay  # stay mass renormalized to zero
        counts[action.edge.dst] += 1
    p_a = 0.8 / 1.7
    se = (p_a * (1 - p_a) / n) ** 0.5
    assert abs(counts["a"] / n - p_a) < 4 * se


def test_adaptive_calm_environment_reduces_to_base_distribution():
    rng = np.random.default_rng(13)
    params = PolicyParams()
    edges = [edge(dst="a", prob=0.25, cost=2.0), edge(dst="b", prob=0.15, cost=1.0)]
    n = 20000
    counts = Counter()
    for _ in range(n):
        action = decide_adaptive(edges, env(jamming=0.0, concurrency=1), params, rng)
        counts[None if action.is_stay else action.edge.dst] += 1
        if action.edge is not None:
            assert abs(action.effective_cost - action.edge.cost) <= TOL
    for key, p in ((None, 0.6), ("a", 0.25), ("b", 0.15)):
        se = (p * (1 - p) / n) ** 0.5
        assert abs(counts[key] / n - p) < 4 * se


def test_adaptive_distribution_is_proper_for_random_inputs():
    rng = np.random.default_rng(14)
    for _ in range(1000):
        n_edges = int(rng.integers(1, 6))
        edges = [
            edge(dst=f"t{i}", prob=float(rng.uniform(0, 1)), cost=float(rng.uniform(0, 3)))
            for i in range(n_edges)
        ]
        params = PolicyParams(
            jamming_prob_gain=float(rng.uniform(0, 2)),
            jamming_cost_gain=float(rng.uniform(0, 1)),
            concurrency_relief=float(rng.uniform(0, 0.5)),
        )
        e = env(jamming=float(rng.uniform(0, 1)), concurrency=int(rng.integers(1, 3)))
        adapted = [adapt_edge(ed, e, params) for ed in edges]
        probs = [min(1.0, max(0.0, p)) for p, _ in adapted]
        mass = sum(probs)
        if mass > 1.0:
            probs = [p / mass for p in probs]
            stay = 0.0
        else:
            stay = 1.0 - mass
        total = stay + sum(probs)
        assert all(p >= 0.0 for p in probs) and stay >= 0.0
        assert abs(total - 1.0) <= 1e-12


def test_adaptive_move_cost_is_adapted():
    params = PolicyParams(jamming_cost_gain=0.25, concurrency_relief=0.1)
    edges = [edge(dst="a", prob=1.0, cost=0.5)]
    rng = np.random.default_rng(15)
    # prob scales to 1.0+, renormalized to a certain move
    action = decide_adaptive(edges, env(jamming=0.8, concurrency=2), params, rng)
    assert not action.is_stay
    assert abs(action.effective_cost - 0.6) <= TOL


def greedy_setup():
    utilities = {"s": 0.5, "hi": 0.9, "lo": 0.7}
    edges = [edge(src="s", dst="hi", prob=0.1, cost=0.0), edge(src="s", dst="lo", prob=0.1, cost=0.3)]
    return utilities, edges


def test_greedy_reward_arithmetic():
    # reward = utility(target) - adjusted cost = 0.7 - 0.3 = 0.4
    utilities = {"s": 0.0, "t": 0.7}
    edges = [edge(src="s", dst="t", prob=0.1, cost=0.3)]
    params = PolicyParams(epsilon=0.0, jamming_cost_gain=0.0)
    action = decide_greedy(edges, env(), params, utilities, np.random.default_rng(16))
    assert not action.is_stay
    assert abs((utilities["t"] - action.effective_cost) - 0.4) <= TOL


def test_greedy_exploits_highest_reward():
    utilities, edges = greedy_setup()
    params = PolicyParams(epsilon=0.0, jamming_cost_gain=0.0)
    # rewards: hi -> 0.9, lo -> 0.4
    for seed in range(100):
        action = decide_greedy(edges, env(), params, utilities, np.random.default_rng(seed))
        assert action.edge.dst == "hi"


def test_greedy_explores_uniformly_at_epsilon_one():
    utilities, edges = greedy_setup()
    params = PolicyParams(epsilon=1.0, jamming_cost_gain=0.0)
    rng = np.random.default_rng(17)
    n = 20000
    counts = Counter(
        decide_greedy(edges, env(), params, utilities, rng).edge.dst for _ in range(n)
    )
    se = (0.5 * 0.5 / n) ** 0.5
    assert abs(counts["hi"] / n - 0.5) < 4 * se
    assert counts["hi"] + counts["lo"] == n  # exploration never stays


def test_greedy_epsilon_zero_is_deterministic():
    utilities, edges = greedy_setup()
    params = PolicyParams(epsilon=0.0)
    actions = {
        decide_greedy(edges, env(jamming=0.4, concurrency=2), params, utilities,
                      np.random.default_rng(seed)).edge.dst
        for seed in range(50)
    }
    assert len(actions) == 1


def test_greedy_argmax_invariant_under_affine_reward_rescaling():
    utilities, edges = greedy_setup()
    params = PolicyParams(epsilon=0.0, jamming_cost_gain=0.0)
    base = decide_greedy(edges, env(), params, utilities, np.random.default_rng(18))
    rng = np.random.default_rng(19)
    for _ in range(100):
        a = float(rng.uniform(0.1, 3.0))
        b = float(rng.uniform(-1.0, 1.0))
        scaled_utils = {k: a * v + b for k, v in utilities.items()}
        scaled_edges = [
            TransitionEdge(e.src, e.dst, e.prob, a * e.cost, e.kind) for e in edges
        ]
        # rewards become a * R + b for moves and for staying alike
        action = decide_greedy(
            scaled_edges, env(), params, scaled_utils, np.random.default_rng(20)
        )
        assert action.edge.dst == base.edge.dst


def test_greedy_tie_breaks_toward_smallest_target_id():
    utilities = {"s": 0.1, "b": 0.8, "a": 0.8}
    edges = [edge(src="s", dst="b", cost=0.2), edge(src="s", dst="a", cost=0.2)]
    params = PolicyParams(epsilon=0.0, jamming_cost_gain=0.0)
    action = decide_greedy(edges, env(), params, utilities, np.random.default_rng(21))
    assert action.edge.dst == "a"


def test_greedy_stays_when_every_move_loses():
    utilities = {"s": 0.9, "worse": 0.5}
    edges = [edge(src="s", dst="worse", cost=1.0)]
    params = PolicyParams(epsilon=0.0, jamming_cost_gain=0.0)
    action = decide_greedy(edges, env(), params, utilities, np.random.default_rng(22))
    assert action.is_stay


def test_greedy_moves_on_reward_tie_with_staying():
    utilities = {"s": 0.5, "t": 0.5}
    edges = [edge(src="s", dst="t", cost=0.0)]
    params = PolicyParams(epsilon=0.0, jamming_cost_gain=0.0)
    action = decide_greedy(edges, env(), params, utilities, np.random.default_rng(23))
    assert not action.is_stay
