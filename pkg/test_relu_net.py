"""Tests for ReLU networks: forward pass, statistics, validation and documents."""

from fractions import Fraction

import pytest

from maapnet.errors import DimensionMismatchError, DocumentParseError, NetValidationError
from maapnet.compiler import compile_program
from maapnet.generators import SplitMix64, random_input, random_net
from maapnet.mst_builder import build_mst_program
from maapnet.numeric import Mode
from maapnet.relu_net import (Arc, Neuron, NetStats, ReluNet, Role, deserialize_net,
                              ensure_valid_net, evaluate, forward, longest_path, min2_net,
                              net_from_layers,
                              probe_line, serialize_net, stats, validate_net)


def codes(net):
    return {v.code for v in validate_net(net)}


def neurons(*layout):
    return tuple(Neuron(i, layer, Fraction(0), role) for i, (layer, role) in enumerate(layout))


IN, HID, OUT = Role.INPUT, Role.HIDDEN, Role.OUTPUT


def test_min2_values():
    net = min2_net()
    assert evaluate(net, [3, 5]) == [3]
    assert evaluate(net, [5, 3]) == [3]
    assert evaluate(net, [-2, -2]) == [-2]
    assert evaluate(net, [3.0, 5.0]) == [3.0]


def test_min2_stats():
    net = min2_net()
    assert stats(net) == NetStats(2, 1, 1)
    assert longest_path(net) == 2
    assert validate_net(net) == []


def test_forward_trace_applies_relu_to_hidden_only():
    net = min2_net()
    out, trace = forward(net, [5, 3])
    assert out == [3]
    assert trace.activations[2] == -2
    assert trace.outputs[2] == 0


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        evaluate(min2_net(), [1])


def test_float_forward_matches_exact():
    rng = SplitMix64(21)
    for _ in range(20):
        net = random_net(rng, n_inputs=3, hidden_layers=3, max_width=4, n_outputs=2)
        x = random_input(rng, 3)
        exact = evaluate(net, x, Mode.RATIONAL)
        approx = evaluate(net, [float(v) for v in x], Mode.FLOAT)
        assert approx == pytest.approx([float(v) for v in exact], rel=1e-9, abs=1e-9)


def test_random_nets_are_valid():
    rng = SplitMix64(2)
    for _ in range(30):
        net = random_net(rng, hidden_layers=rng.randint(1, 4))
        assert validate_net(net) == []
        assert longest_path(net) == net.depth


def test_cycle_is_reported():
    net = ReluNet(
        neurons((0, IN), (1, HID), (1, HID), (2, OUT)),
        (Arc(0, 1, Fraction(1)), Arc(1, 2, Fraction(1)), Arc(2, 1, Fraction(1)),
         Arc(2, 3, Fraction(1)), Arc(1, 3, Fraction(1))),
    )
    assert {"cycle", "layer-order"} <= codes(net)


def test_dangling_arc():
    net = ReluNet(neurons((0, IN), (1, OUT)), (Arc(0, 5, Fraction(1)),))
    assert "dangling-arc" in codes(net)


def test_output_with_outgoing_arc():
    net = ReluNet(
        neurons((0, IN), (1, OUT), (2, OUT)),
        (Arc(0, 1, Fraction(1)), Arc(1, 2, Fraction(1))),
    )
    assert "output-set" in codes(net)


def test_empty_hidden_layer():
    net = ReluNet(
        neurons((0, IN), (2, HID), (3, OUT)),
        (Arc(0, 1, Fraction(1)), Arc(1, 2, Fraction(1))),
    )
    assert "empty-layer" in codes(net)
    with pytest.raises(NetValidationError):
        ensure_valid_net(net)


def test_hidden_neuron_needs_input_and_consumer():
    net = ReluNet(neurons((0, IN), (1, HID), (1, HID), (2, OUT)), (Arc(0, 1, Fraction(1)), Arc(1, 3, Fraction(1))))
    found = {(v.code, v.location) for v in validate_net(net)}
    assert ("no-incoming", "neurons[2]") in found
    assert ("output-set", "neurons[2]") in found


def test_document_roundtrip():
    rng = SplitMix64(8)
    for _ in range(5):
        net = random_net(rng)
        data = serialize_net(net)
        again = deserialize_net(data)
        assert again == net
        assert serialize_net(again) == data


def test_document_errors():
    with pytest.raises(DocumentParseError):
        deserialize_net(b"")
    with pytest.raises(DocumentParseError):
        deserialize_net(b'{"format": "relu-net", "neurons": [{"id": 0, "layer": 0, "role": "bogus"}]}')
    with pytest.raises(NetValidationError):
        deserialize_net(b'{"format": "relu-net", "neurons": [{"id": 0, "layer": 0, "role": "input"}, '
                        b'{"id": 1, "layer": 1, "role": "output"}], '
                        b'"arcs": [{"src": 1, "dst": 0, "weight": "1"}]}')


def test_probe_finds_kink_but_no_jump():
    result = probe_line(min2_net(), [0.0, 0.0], [1.0, -1.0], samples=200)
    assert result.breakpoints >= 1
    assert result.continuous


def test_probe_on_random_nets():
    rng = SplitMix64(4)
    for _ in range(5):
        net = random_net(rng)
        x = [float(v) for v in random_input(rng, 2)]
        u = [float(v) for v in random_input(rng, 2, low=-1, high=1)]
        assert probe_line(net, x, u, samples=100).continuous


def test_concatenated_min_networks():
    # min{min{x1, x2}, x3}: the second hidden neuron reads the first
    net = net_from_layers(
        3,
        [[(0, [(1, 1), (0, -1)])], [(0, [(2, 1), (1, -1), (3, 1)])]],
        [(0, [(2, 1), (4, -1)])],
    )
    assert validate_net(net) == []
    assert stats(net) == NetStats(3, 1, 2)
    assert evaluate(net, [4, 2, 3]) == [2]
    assert evaluate(net, [1, 5, 3]) == [1]


def test_bias_only_network():
    net = net_from_layers(0, [], [(7, [])])
    assert validate_net(net) == []
    assert stats(net) == NetStats(1, 0, 0)
    assert evaluate(net, []) == [7]


def test_output_layer_must_match_longest_path():
    net = ReluNet(
        neurons((0, IN), (1, HID), (2, HID), (3, OUT)),
        (Arc(0, 1, Fraction(1)), Arc(0, 2, Fraction(1)), Arc(1, 3, Fraction(1)), Arc(2, 3, Fraction(1))),
    )
    assert codes(net) == {"depth"}
    assert stats(net).depth == longest_path(net) == 2
    with pytest.raises(NetValidationError):
        ensure_valid_net(net)


def test_compiled_mst_document_roundtrip():
    net = compile_program(build_mst_program(5))
    data = serialize_net(net)
    again = deserialize_net(data)
    assert again == net
    assert again.meta == net.meta
    assert serialize_net(again) == data
