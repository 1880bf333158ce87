import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cdam.dynamics import (
    ModelParams,
    NetworkState,
    PatternMatrix,
    energy,
    init_state,
    overlap,
    overlaps_all,
    pearson,
    pearson_all,
    run,
    softmax_beta,
    update_step,
)
from cdam.errors import (
    ContractError,
    EnergyUndefinedError,
    NumericDivergenceError,
    UndefinedCorrelationError,
)
from cdam.graphs import MemoryGraph, adjacency_coupling, build_cycle, normalize
from oracles import (
    naive_energy_directed,
    naive_energy_undirected,
    naive_pearson,
    naive_update,
)


def random_instance(rng, n_max=20, p_max=5):
    n = int(rng.integers(3, n_max + 1))
    p = int(rng.integers(2, p_max + 1))
    xi = rng.uniform(0, 1, (n, p))
    directed = bool(rng.integers(2))
    edges = []
    for i in range(p):
        for j in range(p):
            if (directed or i < j) and i != j and rng.random() < 0.5:
                edges.append((i, j, float(rng.uniform(0.5, 2.0))))
    if directed and rng.random() < 0.3:
        edges.append((0, 0, 1.0))
    graph = MemoryGraph(p, tuple(edges), directed=directed)
    params = ModelParams(
        a=float(rng.normal()), h=float(rng.normal()),
        beta=float(rng.uniform(0.1, 3.0)), eta=float(rng.uniform(0.01, 1.0)),
    )
    sigma = rng.normal(0, 1, n)
    return xi, graph, params, sigma


class TestSoftmax:
    def test_uniform(self):
        assert np.allclose(softmax_beta(np.zeros(3), 1.0), 1 / 3)

    def test_analytic_two_entries(self):
        s = softmax_beta(np.array([math.log(2), 0.0]), 1.0)
        assert np.allclose(s, [2 / 3, 1 / 3])

    def test_saturation(self):
        s = softmax_beta(np.array([1.0, 0.0]), 100.0)
        assert s[0] >= 1 - 1e-10

    def test_overflow_safe(self):
        s = softmax_beta(np.array([1e8, 0.0]), 1.0)
        assert np.all(np.isfinite(s))

    @settings(max_examples=50, deadline=None)
    @given(
        z=st.lists(st.floats(-30, 30), min_size=1, max_size=10),
        beta=st.floats(0.01, 10),
        shift=st.floats(-30, 30),
    )
    def test_properties(self, z, beta, shift):
        # positivity holds while beta * spread stays under the exp underflow
        z = np.array(z)
        s = softmax_beta(z, beta)
        assert np.all(s > 0)
        assert abs(s.sum() - 1.0) < 1e-12
        assert np.allclose(s, softmax_beta(z + shift, beta))  # shift invariance

    def test_extreme_gap_saturates_cleanly(self):
        s = softmax_beta(np.array([0.0, 1000.0]), 10.0)
        assert np.all(s >= 0) and abs(s.sum() - 1.0) < 1e-12
        assert s[1] == pytest.approx(1.0)


class TestPatternMatrix:
    def test_mean_load_is_column_mean(self):
        rng = np.random.default_rng(0)
        pm = PatternMatrix(rng.uniform(0, 1, (50, 7)))
        assert np.max(np.abs(pm.mean_load - pm.values.mean(axis=1))) < 1e-12

    def test_nonfinite_rejected(self):
        with pytest.raises(ContractError):
            PatternMatrix(np.array([[1.0, np.inf]]))

    def test_values_frozen(self):
        pm = PatternMatrix(np.ones((3, 2)))
        with pytest.raises(ValueError):
            pm.values[0, 0] = 2.0


class TestUpdateStep:
    def test_matches_oracle_on_seeded_instances(self):
        rng = np.random.default_rng(7)
        for _ in range(25):
            xi, graph, params, sigma = random_instance(rng)
            m = normalize(graph)
            got = update_step(NetworkState(sigma.copy(), 0), PatternMatrix(xi), m, params)
            want = naive_update(
                list(sigma), [list(xi[:, mu]) for mu in range(xi.shape[1])],
                [list(row) for row in m.matrix],
                params.a, params.h, params.beta, params.eta,
            )
            assert np.max(np.abs(got.sigma - np.array(want))) < 1e-10
            assert got.t == 1

    def test_input_state_unmodified(self):
        rng = np.random.default_rng(1)
        xi = rng.uniform(0, 1, (10, 3))
        state = NetworkState(rng.normal(0, 1, 10), 0)
        before = state.sigma.copy()
        update_step(state, PatternMatrix(xi), normalize(build_cycle(3)), ModelParams())
        assert np.array_equal(state.sigma, before)

    def test_zero_drive_decays_to_zero(self):
        # a = h = 0 leaves only the leak, so the state contracts to zero
        rng = np.random.default_rng(2)
        xi = rng.uniform(0, 1, (20, 4))
        pm = PatternMatrix(xi)
        m = normalize(build_cycle(4))
        params = ModelParams(a=0.0, h=0.0, eta=0.5)
        state = NetworkState(rng.normal(0, 1, 20), 0)
        expected = state.sigma * 0.5
        stepped = update_step(state, pm, m, params)
        assert np.allclose(stepped.sigma, expected)
        for _ in range(200):
            state = update_step(state, pm, m, params)
        assert np.max(np.abs(state.sigma)) < 1e-12

    def test_single_pattern_store_decays(self):
        # p = 1: the only pattern equals the mean load, so retrieval vanishes
        xi = np.random.default_rng(3).uniform(0, 1, (15, 1))
        pm = PatternMatrix(xi)
        m = normalize(MemoryGraph(1, ((0, 0, 1.0),), directed=True))
        state = NetworkState(xi[:, 0].copy(), 0)
        for _ in range(300):
            state = update_step(state, pm, m, ModelParams(a=1.0, h=0.0, eta=0.3))
        assert np.max(np.abs(state.sigma)) < 1e-6

    def test_dimension_mismatch(self):
        pm = PatternMatrix(np.ones((4, 3)))
        with pytest.raises(ContractError):
            update_step(NetworkState(np.ones(5), 0), pm, normalize(build_cycle(3)), ModelParams())
        with pytest.raises(ContractError):
            update_step(NetworkState(np.ones(4), 0), pm, normalize(build_cycle(4)), ModelParams())

    def test_balanced_fixed_point_is_centered_pattern(self):
        # a=1, h=0: the attractor is the triggered pattern minus the mean load
        rng = np.random.default_rng(4)
        xi = rng.uniform(0, 1, (400, 6))
        pm = PatternMatrix(xi)
        m = normalize(build_cycle(6))
        state = NetworkState(xi[:, 2].copy(), 0)
        for _ in range(400):
            state = update_step(state, pm, m, ModelParams(a=1.0, h=0.0, eta=0.2))
        assert np.max(np.abs(state.sigma - (xi[:, 2] - pm.mean_load))) < 1e-8


class TestRun:
    def test_exact_step_count_with_zero_tol(self):
        rng = np.random.default_rng(5)
        pm = PatternMatrix(rng.uniform(0, 1, (30, 4)))
        trace = run(init_state(pm, 0, seed=1), pm, normalize(build_cycle(4)),
                    ModelParams(), max_steps=101, fixed_point_tol=0.0)
        assert trace.steps == 101
        assert trace.correlations.shape[0] == 102
        assert trace.termination == "max-steps"

    def test_tiny_eta_hits_fixed_point_immediately(self):
        rng = np.random.default_rng(6)
        pm = PatternMatrix(rng.uniform(0, 1, (30, 4)))
        trace = run(init_state(pm, 0, seed=1), pm, normalize(build_cycle(4)),
                    ModelParams(eta=1e-12), max_steps=50, fixed_point_tol=1e-6)
        assert trace.termination == "fixed-point"
        assert trace.steps == 1

    def test_auto_retrieval_wins_argmax(self):
        rng = np.random.default_rng(7)
        pm = PatternMatrix(rng.uniform(0, 1, (1000, 8)))
        trace = run(init_state(pm, 3, c=1.0, seed=2), pm, normalize(build_cycle(8)),
                    ModelParams(a=1.0, h=0.0))
        final_r = trace.correlations[-1]
        assert int(np.argmax(final_r)) == 3

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_divergence_detected(self):
        rng = np.random.default_rng(19)
        pm = PatternMatrix(rng.uniform(0.5, 1.0, (4, 2)) * 1e160)
        m = normalize(MemoryGraph(2, ((0, 1, 1.0),), directed=False))
        with pytest.raises(NumericDivergenceError):
            run(NetworkState(rng.uniform(0.5, 1.0, 4) * 1e160, 0), pm, m,
                ModelParams(a=1e10, h=0.0, eta=1.0), max_steps=10)

    def test_max_steps_validation(self):
        pm = PatternMatrix(np.ones((3, 2)) * 0.5)
        m = normalize(MemoryGraph(2, ((0, 1, 1.0),), directed=False))
        with pytest.raises(ContractError):
            run(NetworkState(np.zeros(3), 0), pm, m, ModelParams(), max_steps=0)


class TestMeasures:
    def test_overlap_zero_state(self):
        pm = PatternMatrix(np.random.default_rng(0).uniform(0, 1, (10, 2)))
        assert overlap(NetworkState(np.zeros(10), 0), 0, pm) == 0.0

    def test_overlap_law_of_large_numbers(self):
        rng = np.random.default_rng(8)
        pm = PatternMatrix(rng.uniform(0, 1, (10000, 2)))
        val = overlap(NetworkState(pm.values[:, 0].copy(), 0), 0, pm)
        assert abs(val - 1 / 3) < 0.02

    def test_overlap_linearity(self):
        rng = np.random.default_rng(9)
        pm = PatternMatrix(rng.uniform(0, 1, (100, 3)))
        base = overlap(NetworkState(pm.values[:, 1].copy(), 0), 1, pm)
        scaled = overlap(NetworkState(2.5 * pm.values[:, 1], 0), 1, pm)
        assert abs(scaled - 2.5 * base) < 1e-12

    def test_pearson_identity_and_negative_affine(self):
        rng = np.random.default_rng(10)
        pm = PatternMatrix(rng.uniform(0, 1, (50, 2)))
        assert pearson(NetworkState(pm.values[:, 0].copy(), 0), 0, pm) == pytest.approx(1.0)
        flipped = NetworkState(-2.0 * pm.values[:, 0] + 5.0, 0)
        assert pearson(flipped, 0, pm) == pytest.approx(-1.0)

    def test_pearson_independent_vectors_small(self):
        rng = np.random.default_rng(11)
        pm = PatternMatrix(rng.uniform(0, 1, (1000, 3)))
        state = NetworkState(rng.uniform(0, 1, 1000), 0)
        for mu in range(3):
            assert abs(pearson(state, mu, pm)) < 0.1

    def test_pearson_matches_stdlib_oracle(self):
        rng = np.random.default_rng(12)
        pm = PatternMatrix(rng.uniform(0, 1, (40, 4)))
        state = NetworkState(rng.normal(0, 1, 40), 0)
        for mu in range(4):
            want = naive_pearson(list(state.sigma), list(pm.values[:, mu]))
            assert pearson(state, mu, pm) == pytest.approx(want, abs=1e-12)
        assert np.allclose(pearson_all(state, pm),
                           [pearson(state, mu, pm) for mu in range(4)])

    def test_zero_variance_raises(self):
        pm = PatternMatrix(np.random.default_rng(0).uniform(0, 1, (10, 2)))
        with pytest.raises(UndefinedCorrelationError):
            pearson(NetworkState(np.ones(10), 0), 0, pm)
        flat = PatternMatrix(np.column_stack([np.ones(10), np.arange(10.0)]))
        with pytest.raises(UndefinedCorrelationError):
            pearson(NetworkState(np.arange(10.0), 0), 0, flat)

    def test_index_range(self):
        pm = PatternMatrix(np.random.default_rng(0).uniform(0, 1, (10, 2)))
        state = NetworkState(np.arange(10.0), 0)
        with pytest.raises(ContractError):
            overlap(state, 2, pm)
        with pytest.raises(ContractError):
            pearson(state, -1, pm)


class TestEnergy:
    def test_single_pattern_collapses_to_minus_m_squared(self):
        rng = np.random.default_rng(13)
        xi = rng.uniform(0, 1, (20, 1))
        pm = PatternMatrix(xi)
        g = MemoryGraph(1, (), directed=False)
        state = NetworkState(xi[:, 0].copy(), 0)
        m = overlap(state, 0, pm)
        val = energy(state, pm, g, ModelParams(a=1.0, h=0.0, beta=1.0))
        assert val == pytest.approx(-m * m)

    def test_directed_degenerate_raises(self):
        pm = PatternMatrix(np.random.default_rng(0).uniform(0, 1, (10, 2)))
        g = MemoryGraph(2, ((0, 1, 1.0),), directed=True)
        state = NetworkState(np.zeros(10), 0)
        with pytest.raises(EnergyUndefinedError):
            energy(state, pm, g, ModelParams(a=0.0, h=0.0))

    def test_matches_oracles(self):
        rng = np.random.default_rng(14)
        for _ in range(25):
            xi, graph, params, sigma = random_instance(rng, n_max=8, p_max=4)
            pm = PatternMatrix(xi)
            state = NetworkState(sigma, 0)
            cols = [list(xi[:, mu]) for mu in range(xi.shape[1])]
            if graph.directed:
                try:
                    want = naive_energy_directed(
                        list(sigma), cols, graph.edges, params.a, params.h, params.beta
                    )
                except ValueError:
                    with pytest.raises(EnergyUndefinedError):
                        energy(state, pm, graph, params)
                    continue
            else:
                want = naive_energy_undirected(
                    list(sigma), cols, [list(r) for r in normalize(graph).matrix],
                    params.a, params.h, params.beta,
                )
            assert energy(state, pm, graph, params) == pytest.approx(want, abs=1e-10)

    def test_empty_edge_set_drops_hetero_term(self):
        rng = np.random.default_rng(15)
        pm = PatternMatrix(rng.uniform(0, 1, (10, 3)))
        state = NetworkState(rng.normal(0, 1, 10), 0)
        lonely = MemoryGraph(3, (), directed=False)
        with_h = energy(state, pm, lonely, ModelParams(a=1.0, h=5.0))
        without_h = energy(state, pm, lonely, ModelParams(a=1.0, h=0.0))
        assert with_h == pytest.approx(without_h)

    def test_graph_size_mismatch(self):
        pm = PatternMatrix(np.random.default_rng(0).uniform(0, 1, (10, 3)))
        with pytest.raises(ContractError):
            energy(NetworkState(np.zeros(10), 0), pm, build_cycle(4), ModelParams())


class TestInitState:
    def test_noiseless_is_exact(self):
        pm = PatternMatrix(np.random.default_rng(0).uniform(0, 1, (30, 3)))
        state = init_state(pm, 1, c=0.0, seed=5)
        assert np.array_equal(state.sigma, pm.values[:, 1])
        assert state.t == 0

    def test_unit_noise_bounded(self):
        pm = PatternMatrix(np.random.default_rng(0).uniform(0, 1, (500, 2)))
        state = init_state(pm, 0, c=1.0, seed=5)
        assert np.max(np.abs(state.sigma - pm.values[:, 0])) <= 0.5

    def test_deterministic(self):
        pm = PatternMatrix(np.random.default_rng(0).uniform(0, 1, (30, 3)))
        a = init_state(pm, 2, c=1.0, seed=9)
        b = init_state(pm, 2, c=1.0, seed=9)
        assert np.array_equal(a.sigma, b.sigma)

    def test_validation(self):
        pm = PatternMatrix(np.ones((5, 2)) * 0.5)
        with pytest.raises(ContractError):
            init_state(pm, 2)
        with pytest.raises(ContractError):
            init_state(pm, 0, c=-1.0)


class TestModelParams:
    def test_positive_constraints(self):
        with pytest.raises(ContractError):
            ModelParams(beta=0.0)
        with pytest.raises(ContractError):
            ModelParams(eta=-0.1)

    def test_signs_unrestricted(self):
        ModelParams(a=-5.0, h=-3.0)


class TestTheoryProperties:
    def test_pure_hetero_one_step_successor(self):
        # a=0, h>0, out-degree one, hard softmax, full step: one-hop retrieval
        rng = np.random.default_rng(16)
        pm = PatternMatrix(rng.uniform(0, 1, (500, 10)))
        m = normalize(build_cycle(10, directed=True))
        params = ModelParams(a=0.0, h=1.0, beta=50.0, eta=1.0)
        for mu in (0, 4, 9):
            state = update_step(NetworkState(pm.values[:, mu].copy(), 0), pm, m, params)
            assert int(np.argmax(pearson_all(state, pm))) == (mu + 1) % 10

    def test_no_pure_retrieval_with_mixed_hebbian(self):
        # a, h > 0 and a non-isolated trigger co-activates a graph neighbor
        rng = np.random.default_rng(17)
        pm = PatternMatrix(rng.uniform(0, 1, (1000, 30)))
        g = build_cycle(30)
        m = normalize(g)
        trace = run(init_state(pm, 7, c=1.0, seed=3), pm, m, ModelParams(a=0.5, h=0.5))
        final_r = trace.correlations[-1]
        assert int(np.argmax(final_r)) == 7
        assert max(final_r[u] for u in g.neighbors(7)) > 0.2

    def test_connected_component_retrieval(self):
        # h > a >= 0: activation reaches the trigger's whole component and
        # never leaks into the other one; n large enough that baseline
        # cross-pattern correlation noise sits below the 0.05 leak bound
        rng = np.random.default_rng(18)
        pm = PatternMatrix(rng.uniform(0, 1, (8000, 12)))
        edges = [(i, i + 1, 1.0) for i in range(5)] + [(i, i + 1, 1.0) for i in range(6, 11)]
        g = MemoryGraph(12, tuple(edges), directed=False)
        m = normalize(g)
        params = ModelParams(a=0.0, h=1.0)
        state = init_state(pm, 1, c=1.0, seed=5)
        reached = np.zeros(12, dtype=bool)
        leaked = False
        for _ in range(101):
            state = update_step(state, pm, m, params)
            r = pearson_all(state, pm)
            reached |= np.abs(r) > 0.1
            # signed bound: the complement must never be positively retrieved
            # (mean-load centering makes it mildly anti-correlated instead)
            leaked = leaked or np.any(r[6:] > 0.05)
        assert reached[:6].all()
        assert not leaked
