"""
Reference algorithms used as ground truth.

Every oracle runs in exact rational arithmetic and favours the obvious
implementation over the fast one.
"""

import itertools
import logging
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple, Union

import networkx as nx

from .errors import SizeLimitError
from .graphs import EdgeWeightVector, FlowNetwork, UnionFind

logger = logging.getLogger("maapnet.oracles")

BRUTE_FORCE_MST_LIMIT = 7
BRUTE_FORCE_CUT_LIMIT = 12


class _Unreachable:
    """Distance of a node that cannot be reached."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "UNREACHABLE"

    def __reduce__(self):
        return (_Unreachable, ())


UNREACHABLE = _Unreachable()
Distance = Union[int, _Unreachable]


# ---------------------------------------------------------------------------
# Minimum spanning tree
# ---------------------------------------------------------------------------

def kruskal(x: EdgeWeightVector) -> Fraction:
    """MST value of K_n with weights x."""
    sets = UnionFind(x.n)
    total = Fraction(0)
    taken = 0
    for i, j, w in sorted(x.edges(), key=lambda e: (e[2], e[0], e[1])):
        if sets.union(i, j):
            total += w
            taken += 1
            if taken == x.n - 1:
                break
    return total


def _prufer_edges(sequence: Sequence[int], n: int) -> List[Tuple[int, int]]:
    degree = [1] * (n + 1)
    for v in sequence:
        degree[v] += 1
    edges = []
    for v in sequence:
        leaf = next(u for u in range(1, n + 1) if degree[u] == 1)
        edges.append((leaf, v))
        degree[leaf] -= 1
        degree[v] -= 1
    u, w = [v for v in range(1, n + 1) if degree[v] == 1]
    edges.append((u, w))
    return edges


def brute_force_mst(x: EdgeWeightVector) -> Fraction:
    """Minimum over all n^(n-2) spanning trees, enumerated by Pruefer sequences."""
    if x.n > BRUTE_FORCE_MST_LIMIT:
        raise SizeLimitError(f"brute force MST is limited to n <= {BRUTE_FORCE_MST_LIMIT}, got {x.n}")
    if x.n == 2:
        return x.weights[0]
    best = None
    for sequence in itertools.product(range(1, x.n + 1), repeat=x.n - 2):
        value = sum((x.weight(u, v) for u, v in _prufer_edges(sequence, x.n)), Fraction(0))
        if best is None or value < best:
            best = value
    return best


# ---------------------------------------------------------------------------
# Maximum flow
# ---------------------------------------------------------------------------

def residual_distances(net: FlowNetwork, c: Sequence[Fraction]) -> Dict[int, Distance]:
    """BFS distance from s over arcs with c_e > 0; UNREACHABLE otherwise."""
    return _bfs(net, c, net.s, reverse=False)


def distances_to_sink(net: FlowNetwork, c: Sequence[Fraction]) -> Dict[int, Distance]:
    return _bfs(net, c, net.t, reverse=True)


def _bfs(net: FlowNetwork, c: Sequence[Fraction], root: int, reverse: bool) -> Dict[int, Distance]:
    dist: Dict[int, Distance] = {v: UNREACHABLE for v in range(1, net.n + 1)}
    dist[root] = 0
    queue = deque([root])
    while queue:
        u = queue.popleft()
        neighbours = net.predecessors[u] if reverse else net.successors[u]
        for v in neighbours:
            arc = (v, u) if reverse else (u, v)
            if c[net.arc_index(*arc)] > 0 and dist[v] is UNREACHABLE:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def edmonds_karp(net: FlowNetwork, nu: Sequence[Fraction]) -> Tuple[Tuple[Fraction, ...], Fraction]:
    """
    Maximum s-t flow by shortest augmenting paths.

    Returns:
        (flow on every forward arc, flow value)
    """
    c = [Fraction(v) for v in nu]
    s, t = net.s, net.t
    while True:
        parent: Dict[int, int] = {s: 0}
        queue = deque([s])
        while queue and t not in parent:
            u = queue.popleft()
            for v in net.successors[u]:
                if v not in parent and c[net.arc_index(u, v)] > 0:
                    parent[v] = u
                    queue.append(v)
        if t not in parent:
            break
        path = []
        v = t
        while v != s:
            path.append((parent[v], v))
            v = parent[v]
        bottleneck = min(c[net.arc_index(u, v)] for u, v in path)
        for u, v in path:
            c[net.arc_index(u, v)] -= bottleneck
            c[net.arc_index(v, u)] += bottleneck
    flow = tuple(Fraction(nu[net.arc_index(u, v)]) - c[net.arc_index(u, v)] for u, v in net.forward_arcs)
    return flow, flow_value_of(net, flow)


def flow_value_of(net: FlowNetwork, x: Sequence[Fraction]) -> Fraction:
    """Net flow out of s for a flow indexed by the forward arcs."""
    value = Fraction(0)
    for (u, v), y in zip(net.forward_arcs, x):
        if u == net.s:
            value += y
        elif v == net.s:
            value -= y
    return value


@dataclass
class FlowReport:
    feasible: bool
    violations: List[str] = field(default_factory=list)


def check_flow(net: FlowNetwork, nu: Sequence[Fraction], x: Sequence[Fraction]) -> FlowReport:
    """Capacity bounds -nu_vu <= x_uv <= nu_uv and conservation at every v not in {s, t}."""
    violations = []
    balance = {v: Fraction(0) for v in range(1, net.n + 1)}
    for (u, v), y in zip(net.forward_arcs, x):
        upper = nu[net.arc_index(u, v)]
        lower = -nu[net.arc_index(v, u)]
        if y > upper:
            violations.append(f"arc {u}->{v}: flow {y} exceeds capacity {upper}")
        if y < lower:
            violations.append(f"arc {u}->{v}: flow {y} below {lower} (reverse capacity)")
        balance[u] -= y
        balance[v] += y
    for v in range(1, net.n + 1):
        if v not in (net.s, net.t) and balance[v] != 0:
            violations.append(f"node {v}: inflow minus outflow is {balance[v]}")
    return FlowReport(not violations, violations)


def brute_force_min_cut(net: FlowNetwork, nu: Sequence[Fraction]) -> Fraction:
    """Minimum capacity over all s-t cuts, enumerating the 2^(n-2) source sides."""
    if net.n > BRUTE_FORCE_CUT_LIMIT:
        raise SizeLimitError(f"brute force min cut is limited to n <= {BRUTE_FORCE_CUT_LIMIT}, got {net.n}")
    inner = list(range(2, net.n))
    best = None
    for mask in range(1 << len(inner)):
        side = {net.s} | {v for bit, v in enumerate(inner) if mask >> bit & 1}
        value = sum((nu[i] for i, (u, v) in enumerate(net.arcs) if u in side and v not in side), Fraction(0))
        if best is None or value < best:
            best = value
    return best


def arcs_on_length_k_paths(net: FlowNetwork, c: Sequence[Fraction], k: int) -> List[Tuple[int, int]]:
    """
    Residual arcs uv with dist(s, u) + 1 + dist(v, t) == k.

    When dist(s, t) == k these are exactly the arcs on shortest s-t paths;
    when dist(s, t) > k the list is empty.
    """
    from_s = residual_distances(net, c)
    to_t = distances_to_sink(net, c)
    arcs = []
    for i, (u, v) in enumerate(net.arcs):
        if c[i] > 0 and from_s[u] is not UNREACHABLE and to_t[v] is not UNREACHABLE:
            if from_s[u] + 1 + to_t[v] == k:
                arcs.append((u, v))
    return arcs


def reference_max_flow_value(net: FlowNetwork, nu: Sequence[Fraction]) -> Fraction:
    """
    Max-flow value computed by networkx.

    Capacities are scaled to integers by the common denominator so the
    result stays exact.
    """
    caps = [Fraction(cap) for cap in nu]
    scale = 1
    for cap in caps:
        scale = scale * cap.denominator // math.gcd(scale, cap.denominator)
    graph = nx.DiGraph()
    graph.add_nodes_from(range(1, net.n + 1))
    for (u, v), cap in zip(net.arcs, caps):
        graph.add_edge(u, v, capacity=int(cap * scale))
    value = nx.maximum_flow_value(graph, net.s, net.t)
    return Fraction(int(value), scale)
