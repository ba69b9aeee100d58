"""Tests for the minimum spanning tree program family."""

from fractions import Fraction

import pytest

from maapnet.compiler import compile_program
from maapnet.errors import ArityError, BigMTooSmallError, DisconnectedGraphError
from maapnet.generators import SplitMix64, random_weights
from maapnet.graphs import EdgeWeightVector, UndirectedGraph
from maapnet.maap_core import Complexity, complexity, interpret
from maapnet.mst_builder import build_mst_program, is_connected, mst_input_vector, mst_ledger
from maapnet.numeric import Mode, relative_close
from maapnet.oracles import brute_force_mst, kruskal
from maapnet.relu_net import evaluate, probe_line, stats


def test_two_vertices():
    prog = build_mst_program(2)
    assert interpret(prog, [7]) == [7]
    assert complexity(prog) == Complexity(0, 0, 0)


def test_triangle():
    assert interpret(build_mst_program(3), [1, 2, 3]) == [3]
    assert interpret(build_mst_program(3), [5, 1, 1]) == [2]


def test_needs_two_vertices():
    with pytest.raises(ArityError):
        build_mst_program(1)


@pytest.mark.parametrize("n", range(2, 9))
def test_ledger_closed_form(n):
    assert complexity(build_mst_program(n)) == mst_ledger(n)


def test_ledger_values():
    assert mst_ledger(4) == Complexity(5, 12, 52)
    assert mst_ledger(8).w == 84


@pytest.mark.parametrize("n", [8, 9, 10])
def test_ledger_growth(n):
    small, large = mst_ledger(n), mst_ledger(2 * n)
    assert large.s <= 9 * small.s
    assert large.w <= 5 * small.w


def test_depth_grows_like_n_log_n():
    def ratio(n):
        return mst_ledger(n).d / (n * (n - 1).bit_length())

    bound = 2 * ratio(4)
    assert all(ratio(n) <= bound for n in range(4, 33))


@pytest.mark.parametrize("n", range(2, 7))
def test_matches_kruskal_and_brute_force(n):
    rng = SplitMix64(100 + n)
    prog = build_mst_program(n)
    for _ in range(20):
        x = random_weights(rng, n)
        value = interpret(prog, list(x.weights))[0]
        assert value == kruskal(x)
        if n <= 5:
            assert value == brute_force_mst(x)


@pytest.mark.parametrize("n", range(3, 7))
def test_compiled_network(n):
    rng = SplitMix64(200 + n)
    prog = build_mst_program(n)
    net = compile_program(prog)
    d, w, s = complexity(prog)
    depth, width, size = stats(net)
    assert depth <= d + 1 and width <= w and size <= s
    for _ in range(10):
        x = random_weights(rng, n)
        expected = kruskal(x)
        assert evaluate(net, list(x.weights), Mode.RATIONAL) == [expected]
        forwarded = evaluate(net, [float(v) for v in x.weights], Mode.FLOAT)[0]
        assert relative_close(forwarded, expected, 1e-6)


def test_positive_homogeneity():
    rng = SplitMix64(5)
    prog = build_mst_program(5)
    for _ in range(10):
        x = random_weights(rng, 5)
        value = interpret(prog, list(x.weights))[0]
        for factor in (Fraction(1, 2), Fraction(2), Fraction(3)):
            assert interpret(prog, list(x.scaled(factor).weights))[0] == factor * value


def test_relabeling_invariance():
    rng = SplitMix64(6)
    prog = build_mst_program(5)
    for _ in range(10):
        x = random_weights(rng, 5)
        perm = [1, 2, 3, 4, 5]
        rng.shuffle(perm)
        assert interpret(prog, list(x.relabeled(perm).weights)) == interpret(prog, list(x.weights))


def test_negative_weights():
    x = EdgeWeightVector.of(4, [-1, 2, -3, 4, 0, -2])
    assert interpret(build_mst_program(4), list(x.weights)) == [kruskal(x)]


def test_continuity_probe():
    rng = SplitMix64(12)
    net = compile_program(build_mst_program(4))
    for _ in range(5):
        x = [float(v) for v in random_weights(rng, 4).weights]
        u = [float(v) - 0.5 for v in random_weights(rng, 4).weights]
        assert probe_line(net, x, u, samples=100).continuous


def test_input_vector_packs_missing_edges():
    path = UndirectedGraph.of(3, [(1, 2, 1), (2, 3, 2)])
    x = mst_input_vector(path)
    assert x.weights == (1, 7, 2)
    assert interpret(build_mst_program(3), list(x.weights)) == [3]


def test_input_vector_errors():
    path = UndirectedGraph.of(3, [(1, 2, 1), (2, 3, 2)])
    with pytest.raises(BigMTooSmallError):
        mst_input_vector(path, big_M=4)
    with pytest.raises(DisconnectedGraphError):
        mst_input_vector(UndirectedGraph.of(3, [(1, 2, 1)]))
    assert not is_connected(UndirectedGraph.of(3, [(1, 2, 1)]))
    assert is_connected(path)
