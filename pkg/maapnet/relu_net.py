"""
ReLU neural networks

A network is a layered weighted DAG. Layer 0 holds the input neurons, the
last layer k holds the output neurons and everything in between applies
sigma(z) = max{0, z}. Arcs may skip layers, they only have to go forward.

Key features:
- Immutable ReluNet with neurons stored by id (ids are 0..N-1)
- Exact forward pass over rationals and a numpy forward pass over floats
- depth / width / size statistics and structural validation
- Line probe checking continuity along random directions
- `.relu.json` serialization through maapnet.schemas
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import cached_property
from typing import Any, Dict, Iterable, List, Mapping, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from pydantic import ValidationError as PydanticValidationError

from .errors import DimensionMismatchError, NetValidationError
from .maap_core import Violation, load_json, schema_error
from .numeric import (Mode, Number, check_exact, coerce, format_rational,
                      infer_mode, parse_rational)
from .schemas import ArcDoc, NetDocument, NeuronDoc

logger = logging.getLogger("maapnet.relu_net")


class Role(str, Enum):
    INPUT = "input"
    HIDDEN = "hidden"
    OUTPUT = "output"


@dataclass(frozen=True)
class Neuron:
    id: int
    layer: int
    bias: Fraction
    role: Role


@dataclass(frozen=True)
class Arc:
    src: int
    dst: int
    weight: Fraction


class NetStats(NamedTuple):
    depth: int
    width: int
    size: int


class ForwardTrace(NamedTuple):
    """Activation a(v) and output o(v) of every neuron, indexed by id."""
    activations: List[Number]
    outputs: List[Number]


@dataclass(frozen=True)
class ReluNet:
    neurons: Tuple[Neuron, ...]
    arcs: Tuple[Arc, ...]
    meta: Mapping[str, Any] = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        # arcs are kept grouped by target
        object.__setattr__(self, "arcs", tuple(sorted(self.arcs, key=lambda a: (a.dst, a.src))))

    @cached_property
    def input_ids(self) -> Tuple[int, ...]:
        return tuple(n.id for n in self.neurons if n.role is Role.INPUT)

    @cached_property
    def output_ids(self) -> Tuple[int, ...]:
        return tuple(n.id for n in self.neurons if n.role is Role.OUTPUT)

    @cached_property
    def depth(self) -> int:
        """Index k of the output layer; equals the longest path length of a valid net."""
        return max((n.layer for n in self.neurons), default=0) or 1

    @cached_property
    def layer_sizes(self) -> List[int]:
        sizes = [0] * (self.depth + 1)
        for neuron in self.neurons:
            sizes[neuron.layer] += 1
        return sizes

    @cached_property
    def incoming(self) -> Dict[int, List[Arc]]:
        into: Dict[int, List[Arc]] = {n.id: [] for n in self.neurons}
        for arc in self.arcs:
            into.setdefault(arc.dst, []).append(arc)
        return into

    @cached_property
    def out_degree(self) -> Dict[int, int]:
        degree = {n.id: 0 for n in self.neurons}
        for arc in self.arcs:
            degree[arc.src] = degree.get(arc.src, 0) + 1
        return degree

    @cached_property
    def _exact_plan(self) -> List[Tuple[int, Fraction, bool, Tuple[Tuple[int, Fraction], ...]]]:
        order = sorted((n for n in self.neurons if n.role is not Role.INPUT), key=lambda n: (n.layer, n.id))
        return [
            (n.id, n.bias, n.role is Role.HIDDEN, tuple((a.src, a.weight) for a in self.incoming[n.id]))
            for n in order
        ]

    @cached_property
    def _float_plan(self) -> List[Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]]:
        layer_of = {n.id: n.layer for n in self.neurons}
        plan = []
        for layer in range(1, self.depth + 1):
            members = [n for n in self.neurons if n.layer == layer]
            if not members:
                continue
            position = {n.id: i for i, n in enumerate(members)}
            arcs = [a for a in self.arcs if layer_of.get(a.dst) == layer]
            plan.append((
                np.array([n.id for n in members], dtype=np.int64),
                np.array([float(n.bias) for n in members], dtype=np.float64),
                np.array([n.role is Role.HIDDEN for n in members], dtype=bool),
                np.array([a.src for a in arcs], dtype=np.int64),
                np.array([position[a.dst] for a in arcs], dtype=np.int64),
                np.array([float(a.weight) for a in arcs], dtype=np.float64),
            ))
        return plan


def net_from_layers(n_inputs: int,
                    layers: Sequence[Sequence[Tuple[object, Iterable[Tuple[int, object]]]]],
                    outputs: Sequence[Tuple[object, Iterable[Tuple[int, object]]]],
                    meta: Optional[Mapping[str, Any]] = None) -> ReluNet:
    """
    Build a network layer by layer.

    Args:
        n_inputs: number of input neurons (ids 0..n_inputs-1)
        layers: hidden layers in order, each a list of (bias, [(src id, weight), ...]);
            ids continue layer by layer
        outputs: output neurons as (bias, [(src id, weight), ...]), placed on the
            layer after the last hidden one

    Returns:
        The assembled network (not validated)
    """
    neurons: List[Neuron] = [Neuron(i, 0, Fraction(0), Role.INPUT) for i in range(n_inputs)]
    arcs: List[Arc] = []

    def add(layer: int, role: Role, bias: object, sources: Iterable[Tuple[int, object]]) -> None:
        nid = len(neurons)
        neurons.append(Neuron(nid, layer, Fraction(bias), role))
        arcs.extend(Arc(src, nid, Fraction(w)) for src, w in sources)

    for index, layer in enumerate(layers, start=1):
        for bias, sources in layer:
            add(index, Role.HIDDEN, bias, sources)
    for bias, sources in outputs:
        add(len(layers) + 1, Role.OUTPUT, bias, sources)
    return ReluNet(tuple(neurons), tuple(arcs), dict(meta or {}))


def min2_net() -> ReluNet:
    """The two-input minimum: h = sigma(x2 - x1), y = x2 - h."""
    return net_from_layers(2, [[(0, [(1, 1), (0, -1)])]], [(0, [(1, 1), (2, -1)])],
                           meta={"problem": "min2"})


# ---------------------------------------------------------------------------
# Statistics and validation
# ---------------------------------------------------------------------------

def stats(net: ReluNet) -> NetStats:
    """Depth as the longest path length (at least 1), width and size over the hidden layers."""
    hidden = net.layer_sizes[1:net.depth]
    return NetStats(max(1, longest_path(net)), max(hidden, default=0), sum(hidden))


def longest_path(net: ReluNet) -> int:
    """Number of arcs on a longest directed path (0 without arcs)."""
    length = {n.id: 0 for n in net.neurons}
    for nid, _, _, sources in net._exact_plan:
        length[nid] = max((length[src] + 1 for src, _ in sources), default=0)
    return max(length.values(), default=0)


def validate_net(net: ReluNet) -> List[Violation]:
    """All structural violations of net; an empty list means it is valid."""
    violations: List[Violation] = []
    ids = [n.id for n in net.neurons]
    if ids != list(range(len(ids))):
        violations.append(Violation("id", "neuron ids must be 0..N-1 in order", "neurons"))
        return violations
    by_id = {n.id: n for n in net.neurons}

    for i, arc in enumerate(net.arcs):
        where = f"arcs[{i}]"
        if arc.src not in by_id or arc.dst not in by_id:
            violations.append(Violation("dangling-arc", f"arc {arc.src}->{arc.dst} names a missing neuron", where))
            continue
        if by_id[arc.dst].layer <= by_id[arc.src].layer:
            violations.append(Violation(
                "layer-order",
                f"arc {arc.src}->{arc.dst} goes from layer {by_id[arc.src].layer} to {by_id[arc.dst].layer}",
                where))
    if any(v.code == "dangling-arc" for v in violations):
        return violations

    # Kahn's algorithm; leftovers sit on a cycle
    indegree = {nid: 0 for nid in by_id}
    successors: Dict[int, List[int]] = {nid: [] for nid in by_id}
    for arc in net.arcs:
        indegree[arc.dst] += 1
        successors[arc.src].append(arc.dst)
    queue = [nid for nid, d in indegree.items() if d == 0]
    seen = 0
    while queue:
        nid = queue.pop()
        seen += 1
        for nxt in successors[nid]:
            indegree[nxt] -= 1
            if indegree[nxt] == 0:
                queue.append(nxt)
    if seen != len(by_id):
        violations.append(Violation("cycle", "the arc relation has a cycle", "arcs"))

    k = net.depth
    for neuron in net.neurons:
        where = f"neurons[{neuron.id}]"
        outdeg = net.out_degree[neuron.id]
        if neuron.role is Role.INPUT:
            if neuron.layer != 0:
                violations.append(Violation("layer-order", f"input neuron on layer {neuron.layer}", where))
            if neuron.bias != 0:
                violations.append(Violation("input-bias", "input neurons carry no bias", where))
            if net.incoming[neuron.id]:
                violations.append(Violation("input-arc", "input neuron has incoming arcs", where))
            continue
        if neuron.layer == 0:
            violations.append(Violation("layer-order", f"{neuron.role.value} neuron on layer 0", where))
        if neuron.role is Role.OUTPUT:
            if outdeg:
                violations.append(Violation("output-set", "output neuron has outgoing arcs", where))
            if neuron.layer != k:
                violations.append(Violation("output-set", f"output neuron on layer {neuron.layer}, not {k}", where))
        else:
            if outdeg == 0:
                violations.append(Violation("output-set", "hidden neuron has out-degree 0", where))
            if not net.incoming[neuron.id]:
                violations.append(Violation("no-incoming", "hidden neuron has no incoming arcs", where))

    if not any(v.code in ("layer-order", "cycle") for v in violations):
        path = longest_path(net)
        if max(1, path) != k:
            violations.append(Violation("depth", f"output layer is {k} but the longest path has {path} arc(s)", "neurons"))

    for layer in range(1, k):
        if net.layer_sizes[layer] == 0:
            violations.append(Violation("empty-layer", f"hidden layer {layer} is empty", "neurons"))
    return violations


def ensure_valid_net(net: ReluNet) -> ReluNet:
    violations = validate_net(net)
    if violations:
        raise NetValidationError(
            f"invalid network ({len(violations)} violation(s)): {violations[0]}", violations)
    return net


# ---------------------------------------------------------------------------
# Forward pass
# ---------------------------------------------------------------------------

def forward(net: ReluNet, x: Sequence[object], mode: Optional[Mode] = None) -> Tuple[List[Number], ForwardTrace]:
    """
    Evaluate net on x.

    Hidden neurons apply ReLU, output neurons return their raw activation.
    In RATIONAL mode the computation is exact; FLOAT mode runs on numpy arrays.
    """
    if len(x) != len(net.input_ids):
        raise DimensionMismatchError(f"network expects {len(net.input_ids)} inputs, got {len(x)}")
    mode = mode or infer_mode(x)
    values = coerce(list(x), mode)
    if mode is Mode.FLOAT:
        return _forward_float(net, values)

    size = len(net.neurons)
    act: List[Any] = [Fraction(0)] * size
    out: List[Any] = [Fraction(0)] * size
    for nid, value in zip(net.input_ids, values):
        act[nid] = out[nid] = value
    for nid, bias, hidden, sources in net._exact_plan:
        total = bias
        for src, weight in sources:
            if weight == 1:
                total += out[src]
            elif weight == -1:
                total -= out[src]
            else:
                total += weight * out[src]
        act[nid] = total
        out[nid] = total if not hidden or total > 0 else Fraction(0)
    result = [check_exact(out[nid]) for nid in net.output_ids]
    return result, ForwardTrace(act, out)


def _forward_float(net: ReluNet, values: List[float]) -> Tuple[List[float], ForwardTrace]:
    size = len(net.neurons)
    act = np.zeros(size, dtype=np.float64)
    out = np.zeros(size, dtype=np.float64)
    inputs = np.array(net.input_ids, dtype=np.int64)
    if inputs.size:
        act[inputs] = values
        out[inputs] = values
    for ids, bias, hidden, src, dst, weight in net._float_plan:
        layer_act = bias.copy()
        np.add.at(layer_act, dst, weight * out[src])
        act[ids] = layer_act
        out[ids] = np.where(hidden, np.maximum(layer_act, 0.0), layer_act)
    result = [float(out[nid]) for nid in net.output_ids]
    return result, ForwardTrace(act.tolist(), out.tolist())


def evaluate(net: ReluNet, x: Sequence[object], mode: Optional[Mode] = None) -> List[Number]:
    """forward() without the trace."""
    return forward(net, x, mode)[0]


class ProbeResult(NamedTuple):
    breakpoints: int
    jumps: int

    @property
    def continuous(self) -> bool:
        return self.jumps == 0


def probe_line(net: ReluNet, x: Sequence[float], direction: Sequence[float],
               samples: int = 1000, tol: float = 1e-9, output: int = 0) -> ProbeResult:
    """
    Sample t -> forward(x + t u)[output] on [-1, 1].

    A sample whose value deviates from the interpolation of its neighbours
    counts as a breakpoint. Each interval next to a breakpoint is bisected;
    a gap that does not close as the interval shrinks counts as a jump.
    """
    base = np.asarray(x, dtype=np.float64)
    u = np.asarray(direction, dtype=np.float64)

    def f(t: float) -> float:
        return evaluate(net, (base + t * u).tolist(), Mode.FLOAT)[output]

    ts = np.linspace(-1.0, 1.0, samples)
    values = [f(t) for t in ts]
    scale = max(1.0, max(abs(v) for v in values))
    breakpoints = 0
    suspicious = set()
    for i in range(1, samples - 1):
        if abs(values[i] - (values[i - 1] + values[i + 1]) / 2) > tol * scale:
            breakpoints += 1
            suspicious.update((i - 1, i))

    jumps = 0
    for i in sorted(suspicious):
        lo, hi, f_lo, f_hi = ts[i], ts[i + 1], values[i], values[i + 1]
        for _ in range(40):
            mid = (lo + hi) / 2
            f_mid = f(mid)
            if abs(f_mid - f_lo) >= abs(f_hi - f_mid):
                hi, f_hi = mid, f_mid
            else:
                lo, f_lo = mid, f_mid
        if abs(f_hi - f_lo) > tol * scale:
            jumps += 1
    return ProbeResult(breakpoints, jumps)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def serialize_net(net: ReluNet) -> bytes:
    doc = NetDocument.construct(
        format="relu-net",
        neurons=[
            NeuronDoc.construct(id=n.id, layer=n.layer, bias=format_rational(n.bias),
                                bias_float=float(n.bias), role=n.role.value)
            for n in net.neurons
        ],
        arcs=[
            ArcDoc.construct(src=a.src, dst=a.dst, weight=format_rational(a.weight),
                             weight_float=float(a.weight))
            for a in net.arcs
        ],
        meta=dict(net.meta) if net.meta else None,
    )
    return (doc.json(indent=2, exclude_none=True) + "\n").encode("utf-8")


def deserialize_net(data) -> ReluNet:
    """Parse a `.relu.json` document; invalid networks raise NetValidationError."""
    raw = load_json(data)
    try:
        doc = NetDocument.parse_obj(raw)
    except PydanticValidationError as e:
        raise schema_error(e)
    neurons = tuple(
        Neuron(n.id, n.layer, parse_rational(n.bias), Role(n.role))
        for n in sorted(doc.neurons, key=lambda n: n.id)
    )
    arcs = tuple(Arc(a.src, a.dst, parse_rational(a.weight)) for a in doc.arcs)
    return ensure_valid_net(ReluNet(neurons, arcs, dict(doc.meta or {})))


def canonical_arcs(net: ReluNet) -> List[Tuple[int, int, Fraction]]:
    return sorted((a.src, a.dst, a.weight) for a in net.arcs)
