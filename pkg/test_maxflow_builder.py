"""Tests for the maximum flow program family and its augmenting-flow subroutine."""

from fractions import Fraction

import pytest

from maapnet.compiler import compile_program, sequentialize
from maapnet.errors import ArityError
from maapnet.generators import SplitMix64, random_flow_network, random_residual_instance
from maapnet.graphs import FlowNetwork
from maapnet.maap_core import complexity, interpret
from maapnet.maxflow_builder import (build_find_augmenting_flow, build_maxflow_program,
                                     build_maxflow_value_program, flow_value)
from maapnet.numeric import Mode
from maapnet.oracles import (UNREACHABLE, arcs_on_length_k_paths, check_flow, edmonds_karp,
                             residual_distances)
from maapnet.relu_net import evaluate, stats


def diamond():
    net = FlowNetwork.from_arcs(4, [(1, 2), (1, 3), (2, 3), (2, 4), (3, 4)])
    nu = net.capacity_vector({(1, 2): 3, (1, 3): 2, (2, 3): 1, (2, 4): 2, (3, 4): 3})
    return net, nu


def test_single_arc():
    net = FlowNetwork.from_arcs(2, [(1, 2)])
    prog = build_maxflow_program(net)
    assert interpret(prog, [5, 0]) == [5]
    assert interpret(prog, [0, 4]) == [0]


def test_diamond():
    net, nu = diamond()
    x = interpret(build_maxflow_program(net), list(nu))
    assert check_flow(net, nu, x).feasible
    assert flow_value(net, x) == 5


def test_value_program():
    net, nu = diamond()
    out = interpret(build_maxflow_value_program(net), list(nu))
    assert out[-1] == 5
    assert len(out) == len(net.forward_arcs) + 1


@pytest.mark.parametrize("n", range(2, 6))
def test_matches_edmonds_karp(n):
    rng = SplitMix64(300 + n)
    for _ in range(8 if n < 5 else 3):
        net, nu = random_flow_network(rng, n)
        x = interpret(build_maxflow_program(net), list(nu))
        assert check_flow(net, nu, x).feasible
        assert flow_value(net, x) == edmonds_karp(net, nu)[1]


@pytest.mark.parametrize("n", [3, 4])
def test_compiled_network(n):
    rng = SplitMix64(400 + n)
    for _ in range(3):
        net, nu = random_flow_network(rng, n)
        prog = build_maxflow_program(net)
        relu = compile_program(prog)
        d, w, s = complexity(prog)
        depth, width, size = stats(relu)
        assert depth <= d + 1 and width <= w and size <= s
        assert evaluate(relu, list(nu), Mode.RATIONAL) == interpret(prog, list(nu))


def test_positive_homogeneity():
    net, nu = diamond()
    prog = build_maxflow_program(net)
    x = interpret(prog, list(nu))
    for factor in (Fraction(1, 2), Fraction(2), Fraction(3)):
        assert interpret(prog, [factor * c for c in nu]) == [factor * v for v in x]


@pytest.mark.parametrize("n", range(3, 6))
def test_ledger_bounds(n):
    rng = SplitMix64(500 + n)
    net, _ = random_flow_network(rng, n)
    d, w, s = complexity(build_maxflow_program(net))
    m = net.m
    assert w <= 4 * n * n
    assert d <= 4 * n * n * m * m
    assert s <= 16 * n * n * m * m


@pytest.mark.parametrize("n", range(3, 6))
def test_sequential_variant(n):
    rng = SplitMix64(600 + n)
    net, nu = random_flow_network(rng, n)
    prog = build_maxflow_program(net)
    seq = build_maxflow_program(net, sequential=True)
    assert seq == sequentialize(prog)
    full, narrow = complexity(prog), complexity(seq)
    assert narrow.w <= 4
    assert narrow.d <= 4 * full.d
    assert narrow.s <= 2 * full.s
    for caps in [nu] + [[Fraction(rng.randint(0, 10)) for _ in net.arcs] for _ in range(2)]:
        assert interpret(seq, list(caps)) == interpret(prog, list(caps))


def test_path_length_range():
    net, _ = diamond()
    with pytest.raises(ArityError):
        build_find_augmenting_flow(net, 0)
    with pytest.raises(ArityError):
        build_find_augmenting_flow(net, 4)


def test_no_flow_when_paths_are_longer_than_k():
    net, nu = diamond()
    assert residual_distances(net, nu)[net.t] == 2
    assert all(flow == 0 for flow in interpret(build_find_augmenting_flow(net, 1), list(nu)))
    assert any(flow != 0 for flow in interpret(build_find_augmenting_flow(net, 2), list(nu)))


def residual_instances(k, count, seed):
    """Residual instances whose s-t distance is at least k."""
    rng = SplitMix64(seed)
    found = 0
    while found < count:
        net, c = random_residual_instance(rng, k + 2, k, extra_probability=0.15)
        dist = residual_distances(net, c)[net.t]
        if dist is not UNREACHABLE and dist < k:
            continue
        found += 1
        yield net, c, dist


@pytest.mark.parametrize("k", range(1, 5))
def test_augmenting_flow_contract(k):
    for net, c, dist in residual_instances(k, 10, 700 + k):
        y = interpret(build_find_augmenting_flow(net, k), list(c))
        level = set(arcs_on_length_k_paths(net, c, k))
        saturated = False
        for (v, w), flow in zip(net.forward_arcs, y):
            assert -c[net.arc_index(w, v)] <= flow <= c[net.arc_index(v, w)]
            if flow > 0:
                assert (v, w) in level
                saturated |= flow == c[net.arc_index(v, w)]
            elif flow < 0:
                assert (w, v) in level
                saturated |= -flow == c[net.arc_index(w, v)]
        if dist == k:
            assert saturated
        else:
            assert all(flow == 0 for flow in y)


@pytest.mark.parametrize("k", range(1, 5))
def test_push_and_cleanup_bookkeeping(k):
    for net, c, dist in residual_instances(k, 5, 800 + k):
        prog = build_find_augmenting_flow(net, k)
        snapshots = {}

        def observe(label, state):
            if label in ("push", "cleanup"):
                snapshots[label] = dict(state)

        interpret(prog, list(c), observer=observe)
        s = net.s
        push = snapshots["push"]
        for u in range(1, net.n):
            inflow = sum(push[f"z[{v},{u}]"] for v in net.predecessors[u])
            outflow = sum(push[f"z[{u},{w}]"] for w in net.successors[u])
            excess = sum(push[f"Y[{i},{u}]"] for i in range(1, k + 1))
            if u == s:
                excess -= push[f"a[{k},{s}]"]
            assert inflow - outflow == excess

        cleanup = snapshots["cleanup"]
        for u in range(1, net.n):
            for i in range(1, k + 1):
                if u == s and i == k:
                    continue
                assert cleanup[f"Y[{i},{u}]"] == 0


def test_two_disjoint_paths():
    net = FlowNetwork.from_arcs(4, [(1, 2), (1, 3), (2, 4), (3, 4)])
    nu = net.capacity_vector({(1, 2): 3, (1, 3): 2, (2, 4): 2, (3, 4): 3})
    x = interpret(build_maxflow_program(net), list(nu))
    assert check_flow(net, nu, x).feasible
    assert flow_value(net, x) == 4 == edmonds_karp(net, nu)[1]


def test_single_path_pushes_its_bottleneck():
    net = FlowNetwork.from_arcs(3, [(1, 2), (2, 3)])
    c = net.capacity_vector({(1, 2): 5, (2, 3): 3})
    assert c == (5, 0, 3, 0)
    prog = build_find_augmenting_flow(net, 2)
    assert interpret(prog, list(c)) == [3, 3]
    fattest = {}
    interpret(prog, list(c), observer=lambda label, state: fattest.update(dict(state)))
    assert fattest["a[1,2]"] == 3
    assert fattest["a[2,1]"] == 3


def residual_of(net, state):
    return [state[f"c[{u},{v}]"] for u, v in net.arcs]


def flow_of(net, state):
    return [state[f"x[{u},{v}]"] for u, v in net.forward_arcs]


@pytest.mark.parametrize("n", range(3, 6))
def test_flow_stays_feasible_after_every_round(n):
    rng = SplitMix64(900 + n)
    for _ in range(3):
        net, nu = random_flow_network(rng, n)
        values = []

        def observe(label, state):
            if label != "augment":
                return
            x = flow_of(net, state)
            assert check_flow(net, nu, x).feasible
            for (u, v), flow in zip(net.forward_arcs, x):
                assert state[f"c[{u},{v}]"] == nu[net.arc_index(u, v)] - flow
                assert state[f"c[{v},{u}]"] == nu[net.arc_index(v, u)] + flow
            values.append(flow_value(net, x))

        interpret(build_maxflow_program(net), list(nu), observer=observe)
        assert len(values) == (n - 1) * net.m
        assert values == sorted(values)


@pytest.mark.parametrize("n", range(3, 6))
def test_each_phase_removes_short_paths(n):
    rng = SplitMix64(1000 + n)
    for _ in range(3):
        net, nu = random_flow_network(rng, n)
        distances = []

        def observe(label, state):
            if label == "phase":
                distances.append(residual_distances(net, residual_of(net, state))[net.t])

        interpret(build_maxflow_program(net), list(nu), observer=observe)
        assert len(distances) == n - 1
        for k, dist in enumerate(distances, start=1):
            assert dist is UNREACHABLE or dist > k
        assert distances[-1] is UNREACHABLE


def test_eight_nodes_with_paths_of_four_arcs():
    rng = SplitMix64(1100)
    checked = 0
    while checked < 5:
        net, c = random_residual_instance(rng, 8, 4, extra_probability=0.1)
        if residual_distances(net, c)[net.t] != 4:
            continue
        checked += 1
        y = interpret(build_find_augmenting_flow(net, 4), list(c))
        level = set(arcs_on_length_k_paths(net, c, 4))
        saturated = False
        for (v, w), flow in zip(net.forward_arcs, y):
            assert -c[net.arc_index(w, v)] <= flow <= c[net.arc_index(v, w)]
            if flow > 0:
                assert (v, w) in level
                saturated |= flow == c[net.arc_index(v, w)]
            elif flow < 0:
                assert (w, v) in level
                saturated |= -flow == c[net.arc_index(w, v)]
        assert saturated
        assert flow_value(net, y) > 0
