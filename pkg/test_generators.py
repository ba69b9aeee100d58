"""Tests for the seeded generator and the random instance builders."""

from fractions import Fraction

import pytest

from maapnet.generators import (SplitMix64, derive_seed, random_flow_network, random_net,
                                random_program, random_residual_instance, random_weights)
from maapnet.maap_core import serialize_program, validate_program
from maapnet.relu_net import serialize_net, validate_net


def test_splitmix_reference_value():
    assert SplitMix64(0).next_u64() == 0xE220A8397B1DCDAF


def test_streams_are_reproducible():
    a, b = SplitMix64(42), SplitMix64(42)
    assert [a.next_u64() for _ in range(5)] == [b.next_u64() for _ in range(5)]
    assert derive_seed(1, 3, 0) == derive_seed(1, 3, 0)
    assert derive_seed(1, 3, 0) != derive_seed(1, 3, 1)
    assert derive_seed(1, 3, 0) != derive_seed(2, 3, 0)


def test_bounded_draws():
    rng = SplitMix64(9)
    for _ in range(200):
        assert 0 <= rng.randbelow(7) < 7
        assert -3 <= rng.randint(-3, 3) <= 3
        assert 0.0 <= rng.random() < 1.0
    with pytest.raises(ValueError):
        rng.randbelow(0)


def test_random_weights():
    x = random_weights(SplitMix64(1), 5)
    assert len(x.weights) == 10
    assert all(0 <= w <= 1 and (w * 1000).denominator == 1 for w in x.weights)


def test_random_flow_network():
    rng = SplitMix64(2)
    for n in range(2, 8):
        net, nu = random_flow_network(rng, n)
        assert net.n == n and net.m >= 2
        assert all(c == int(c) and 0 <= c <= 10 for c in nu)


def test_random_residual_instance_keeps_a_positive_path():
    rng = SplitMix64(3)
    net, c = random_residual_instance(rng, 6, 3)
    assert any(c[net.arc_index(*arc)] > 0 for arc in net.arcs if arc[0] == net.s)
    with pytest.raises(ValueError):
        random_residual_instance(rng, 4, 4)


def test_random_objects_are_valid_and_deterministic():
    for seed in range(5):
        prog = random_program(SplitMix64(seed))
        net = random_net(SplitMix64(seed))
        assert validate_program(prog) == []
        assert validate_net(net) == []
        assert serialize_program(prog) == serialize_program(random_program(SplitMix64(seed)))
        assert serialize_net(net) == serialize_net(random_net(SplitMix64(seed)))


def test_random_rationals_are_fractions():
    x = random_weights(SplitMix64(4), 3)
    assert all(isinstance(w, Fraction) for w in x.weights)
