"""
Seeded random instances.

All randomness in maapnet flows through SplitMix64 so that every generated
instance is reproducible from a single 64-bit seed on any platform.
"""

import logging
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from .graphs import EdgeWeightVector, FlowNetwork, complete_pairs
from .maap_core import AffineExpr, Instruction, MaapProgram, ProgramBuilder
from .relu_net import ReluNet, net_from_layers

logger = logging.getLogger("maapnet.generators")

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def _mix(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


class SplitMix64:
    """64-bit SplitMix generator."""

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN_GAMMA) & MASK64
        return _mix(self.state)

    def randbelow(self, n: int) -> int:
        """Uniform integer in [0, n), rejection sampled."""
        if n <= 0:
            raise ValueError("randbelow needs a positive bound")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            value = self.next_u64()
            if value < limit:
                return value % n

    def randint(self, low: int, high: int) -> int:
        """Uniform integer in [low, high]."""
        return low + self.randbelow(high - low + 1)

    def random(self) -> float:
        """Uniform float in [0, 1)."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def chance(self, p: float) -> bool:
        return self.random() < p

    def choice(self, items: Sequence):
        return items[self.randbelow(len(items))]

    def shuffle(self, items: List) -> None:
        for i in range(len(items) - 1, 0, -1):
            j = self.randbelow(i + 1)
            items[i], items[j] = items[j], items[i]


def derive_seed(seed: int, *parts: int) -> int:
    """Seed of a sub-stream, e.g. derive_seed(seed, size, index)."""
    state = seed & MASK64
    for part in parts:
        state = _mix((state + GOLDEN_GAMMA * (part + 1)) & MASK64)
    return state


def random_rational(rng: SplitMix64, denominator: int = 1000) -> Fraction:
    """k / denominator with k uniform in [0, denominator]."""
    return Fraction(rng.randint(0, denominator), denominator)


def random_weights(rng: SplitMix64, n: int) -> EdgeWeightVector:
    return EdgeWeightVector(n, tuple(random_rational(rng) for _ in complete_pairs(n)))


def random_flow_network(rng: SplitMix64, n: int, arc_probability: float = 0.5,
                        max_capacity: int = 10) -> Tuple[FlowNetwork, Tuple[Fraction, ...]]:
    """
    Random digraph on n nodes with integer capacities in [0, max_capacity].

    Each ordered pair becomes an arc with probability arc_probability; at
    least one arc is always present. Reverse arcs not drawn get capacity 0.
    """
    capacities = {}
    for u in range(1, n + 1):
        for v in range(1, n + 1):
            if u != v and rng.chance(arc_probability):
                capacities[(u, v)] = rng.randint(0, max_capacity)
    if not capacities:
        capacities[(1, n)] = rng.randint(0, max_capacity)
    net = FlowNetwork.from_arcs(n, capacities)
    return net, net.capacity_vector(capacities)


def random_residual_instance(rng: SplitMix64, n: int, k: int, extra_probability: float = 0.3,
                             max_capacity: int = 10) -> Tuple[FlowNetwork, Tuple[Fraction, ...]]:
    """
    Residual network built around one s-t path of k arcs.

    The path runs through k-1 distinct random inner nodes and gets positive
    capacities; further arcs appear with extra_probability and may shorten
    the distance. Every arc, reverses included, gets a random residual
    capacity in [0, max_capacity].
    """
    if not 1 <= k <= n - 1:
        raise ValueError(f"k must lie in [1, {n - 1}], got {k}")
    inner = list(range(2, n))
    rng.shuffle(inner)
    path = [1] + inner[:k - 1] + [n]
    arcs = set(zip(path, path[1:]))
    for u in range(1, n + 1):
        for v in range(1, n + 1):
            if u != v and rng.chance(extra_probability):
                arcs.add((u, v))
    net = FlowNetwork.from_arcs(n, arcs)
    on_path = set(zip(path, path[1:]))
    residual = tuple(
        Fraction(rng.randint(1 if arc in on_path else 0, max_capacity)) for arc in net.arcs
    )
    return net, residual


def random_program(rng: SplitMix64, n_inputs: int = 3, statements: int = 8,
                   max_terms: int = 4) -> MaapProgram:
    """
    Random valid program mixing every instruction form.

    Parallel blocks write fresh variables only and read variables defined
    before the block, so they are write-disjoint by construction.
    """
    b = ProgramBuilder()
    inputs = [b.var(f"in[{i}]") for i in range(n_inputs)]
    defined: List[int] = list(inputs)

    def coefficient() -> Fraction:
        return Fraction(rng.choice([-2, -1, -1, 1, 1, 2, 3]), rng.choice([1, 1, 2]))

    def expr(pool: List[int]) -> AffineExpr:
        count = rng.randint(1, min(3, len(pool)))
        picks = [rng.choice(pool) for _ in range(count)]
        constant = Fraction(rng.randint(-4, 4), 2) if rng.chance(0.3) else 0
        return AffineExpr.of(constant, [(coefficient(), v) for v in picks])

    def assignment(target: int, pool: List[int]) -> Instruction:
        kind = rng.randbelow(4)
        if kind == 0:
            return b.assign(target, expr(pool))
        terms = [expr(pool) for _ in range(rng.randint(2, max_terms))]
        if rng.chance(0.2):
            terms = [expr(pool), 0]
        return b.assign_max(target, terms) if kind % 2 else b.assign_min(target, terms)

    body: List[Instruction] = []
    for _ in range(statements):
        shape = rng.randbelow(5)
        if shape <= 1:
            target = b.fresh("v")
            body.append(assignment(target, defined))
            defined.append(target)
        elif shape == 2:
            pool = list(defined)
            blocks = []
            written = []
            for _ in range(rng.randint(2, 3)):
                target = b.fresh("p")
                local = b.fresh("l")
                blocks.append(b.sequence(
                    [assignment(local, pool), assignment(target, pool + [local])],
                    local=[local],
                ))
                written.append(target)
            body.append(b.do_parallel(blocks) if rng.chance(0.5) else b.for_do_parallel(blocks))
            defined.extend(written)
        elif shape == 3:
            target = b.fresh("acc")
            body.append(b.assign(target, b.expr(rng.choice(defined))))
            defined.append(target)
            iterations = [assignment(target, defined) for _ in range(rng.randint(1, 3))]
            body.append(b.for_do(iterations))
        else:
            candidates = [v for v in defined if v not in inputs]
            target = rng.choice(candidates) if candidates else b.fresh("v")
            body.append(assignment(target, defined))
            if target not in defined:
                defined.append(target)

    outputs = [v for v in defined if v not in inputs][-3:] or [defined[-1]]
    return b.build(inputs, outputs, body, meta={"problem": "random"})


def random_net(rng: SplitMix64, n_inputs: int = 2, hidden_layers: int = 2, max_width: int = 3,
               n_outputs: int = 1) -> ReluNet:
    """
    Random valid network.

    Every hidden neuron reads at least one neuron of the layer below and feeds
    at least one later neuron, so the output layer index is the longest path.
    Weights and biases are multiples of 1/4 in [-2, 2].
    """
    def value(nonzero: bool = True) -> Fraction:
        while True:
            v = Fraction(rng.randint(-8, 8), 4)
            if v or not nonzero:
                return v

    sizes = [rng.randint(1, max_width) for _ in range(hidden_layers)]
    first_id = [n_inputs]
    for size in sizes:
        first_id.append(first_id[-1] + size)
    output_ids = list(range(first_id[-1], first_id[-1] + n_outputs))

    # incoming sources per neuron id, by construction always earlier ids
    sources = {nid: {} for nid in range(n_inputs, output_ids[-1] + 1)}
    for index, size in enumerate(sizes):
        earlier = list(range(first_id[index]))
        for nid in range(first_id[index], first_id[index] + size):
            for src in earlier:
                if rng.chance(0.5):
                    sources[nid][src] = value()
            previous = earlier[first_id[index - 1]:] if index else earlier
            if not any(src in sources[nid] for src in previous):
                sources[nid][rng.choice(previous)] = value()
    for nid in output_ids:
        for src in range(first_id[-1]):
            if rng.chance(0.4):
                sources[nid][src] = value()
    # every hidden neuron needs a consumer
    for index, size in enumerate(sizes):
        later = list(range(first_id[index + 1], output_ids[-1] + 1))
        for nid in range(first_id[index], first_id[index] + size):
            if not any(nid in sources[other] for other in later):
                sources[rng.choice(later)][nid] = value()

    layers = []
    for index, size in enumerate(sizes):
        layers.append([
            (value(nonzero=False), list(sources[nid].items()))
            for nid in range(first_id[index], first_id[index] + size)
        ])
    outputs = [(value(nonzero=False), list(sources[nid].items())) for nid in output_ids]
    return net_from_layers(n_inputs, layers, outputs, meta={"problem": "random"})


def random_input(rng: SplitMix64, size: int, low: int = -5, high: int = 5,
                 denominator: Optional[int] = 4) -> List[Fraction]:
    return [Fraction(rng.randint(low * denominator, high * denominator), denominator) for _ in range(size)]
