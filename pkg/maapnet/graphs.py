"""
Graph types shared by the builders, the oracles and the CLI.

- EdgeWeightVector: weights of the complete graph K_n, one per pair i < j in
  lexicographic order (the input of the MST program)
- UndirectedGraph: an arbitrary weighted edge list, UnionFind over its vertices
- FlowNetwork: a digraph closed under arc reversal with s = 1 and t = n;
  capacity and residual vectors are tuples indexed by its canonical arc order,
  flow vectors by its forward arcs (i < j)

Text formats (1-indexed vertices, `#` starts a comment):

    n m undirected              n m directed source=1 sink=n
    u v weight                  u v capacity
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Dict, Iterable, List, Tuple

from .errors import ArityError, DocumentParseError, GraphFormatError
from .numeric import format_rational, parse_rational

logger = logging.getLogger("maapnet.graphs")

Pair = Tuple[int, int]


def complete_pairs(n: int) -> List[Pair]:
    """All pairs (i, j) with 1 <= i < j <= n in lexicographic order."""
    return [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]


@dataclass(frozen=True)
class EdgeWeightVector:
    n: int
    weights: Tuple[Fraction, ...]

    def __post_init__(self):
        if self.n < 2:
            raise ArityError(f"a weight vector needs n >= 2 vertices, got {self.n}")
        expected = self.n * (self.n - 1) // 2
        if len(self.weights) != expected:
            raise ArityError(f"K_{self.n} has {expected} edges, got {len(self.weights)} weights")

    @classmethod
    def of(cls, n: int, weights: Iterable) -> "EdgeWeightVector":
        return cls(n, tuple(Fraction(w) for w in weights))

    @cached_property
    def pairs(self) -> List[Pair]:
        return complete_pairs(self.n)

    def weight(self, i: int, j: int) -> Fraction:
        if i > j:
            i, j = j, i
        # offset of row i plus position inside the row
        index = (i - 1) * (2 * self.n - i) // 2 + (j - i - 1)
        return self.weights[index]

    def edges(self) -> List[Tuple[int, int, Fraction]]:
        return [(i, j, w) for (i, j), w in zip(self.pairs, self.weights)]

    def scaled(self, factor: Fraction) -> "EdgeWeightVector":
        return EdgeWeightVector(self.n, tuple(w * factor for w in self.weights))

    def relabeled(self, perm: List[int]) -> "EdgeWeightVector":
        """Weights after renaming vertex v to perm[v - 1]."""
        moved: Dict[Pair, Fraction] = {}
        for (i, j), w in zip(self.pairs, self.weights):
            a, b = perm[i - 1], perm[j - 1]
            moved[(min(a, b), max(a, b))] = w
        return EdgeWeightVector(self.n, tuple(moved[p] for p in self.pairs))


@dataclass(frozen=True)
class UndirectedGraph:
    n: int
    edges: Tuple[Tuple[int, int, Fraction], ...]

    def __post_init__(self):
        seen = set()
        for u, v, _ in self.edges:
            if not (1 <= u <= self.n and 1 <= v <= self.n):
                raise GraphFormatError(f"edge {u}-{v} has an endpoint outside 1..{self.n}")
            if u == v:
                raise GraphFormatError(f"self-loop at vertex {u}")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise GraphFormatError(f"duplicate edge {key[0]}-{key[1]}")
            seen.add(key)

    @classmethod
    def of(cls, n: int, edges: Iterable[Tuple[int, int, object]]) -> "UndirectedGraph":
        return cls(n, tuple((u, v, Fraction(w)) for u, v, w in edges))

    def weight_map(self) -> Dict[Pair, Fraction]:
        return {(min(u, v), max(u, v)): w for u, v, w in self.edges}


class UnionFind:
    """Disjoint sets over 1..n with path halving and union by size."""

    def __init__(self, n: int):
        self.parent = list(range(n + 1))
        self.size = [1] * (n + 1)

    def find(self, v: int) -> int:
        while self.parent[v] != v:
            self.parent[v] = self.parent[self.parent[v]]
            v = self.parent[v]
        return v

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return True


@dataclass(frozen=True)
class FlowNetwork:
    """
    Fixed topology of a max-flow instance.

    arcs is sorted lexicographically and closed under reversal; s = 1, t = n.
    """
    n: int
    arcs: Tuple[Pair, ...]
    _index: Dict[Pair, int] = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if self.n < 2:
            raise ArityError(f"a flow network needs n >= 2 nodes, got {self.n}")
        for u, v in self.arcs:
            if u == v:
                raise GraphFormatError(f"self-loop at node {u}")
            if not (1 <= u <= self.n and 1 <= v <= self.n):
                raise GraphFormatError(f"arc {u}->{v} has an endpoint outside 1..{self.n}")
        if list(self.arcs) != sorted(set(self.arcs)):
            raise GraphFormatError("arcs must be distinct and sorted")
        index = {arc: i for i, arc in enumerate(self.arcs)}
        for u, v in self.arcs:
            if (v, u) not in index:
                raise GraphFormatError(f"arc {u}->{v} has no reverse arc")
        object.__setattr__(self, "_index", index)

    @classmethod
    def from_arcs(cls, n: int, arcs: Iterable[Pair]) -> "FlowNetwork":
        """Network on arcs plus their reverses."""
        closed = set()
        for u, v in arcs:
            closed.add((u, v))
            closed.add((v, u))
        return cls(n, tuple(sorted(closed)))

    @property
    def s(self) -> int:
        return 1

    @property
    def t(self) -> int:
        return self.n

    @property
    def m(self) -> int:
        return len(self.arcs)

    @cached_property
    def forward_arcs(self) -> Tuple[Pair, ...]:
        return tuple((u, v) for u, v in self.arcs if u < v)

    @cached_property
    def successors(self) -> Dict[int, Tuple[int, ...]]:
        out: Dict[int, List[int]] = {v: [] for v in range(1, self.n + 1)}
        for u, v in self.arcs:
            out[u].append(v)
        return {v: tuple(sorted(ws)) for v, ws in out.items()}

    @cached_property
    def predecessors(self) -> Dict[int, Tuple[int, ...]]:
        into: Dict[int, List[int]] = {v: [] for v in range(1, self.n + 1)}
        for u, v in self.arcs:
            into[v].append(u)
        return {v: tuple(sorted(us)) for v, us in into.items()}

    def arc_index(self, u: int, v: int) -> int:
        return self._index[(u, v)]

    def has_arc(self, u: int, v: int) -> bool:
        return (u, v) in self._index

    def capacity_vector(self, capacities: Dict[Pair, object]) -> Tuple[Fraction, ...]:
        """Capacities in canonical arc order; arcs not in the mapping get 0."""
        for arc in capacities:
            if arc not in self._index:
                raise GraphFormatError(f"arc {arc[0]}->{arc[1]} is not in the network")
        return tuple(Fraction(capacities.get(arc, 0)) for arc in self.arcs)

    def to_meta(self) -> Dict[str, object]:
        return {"n": self.n, "arcs": [list(a) for a in self.arcs]}

    @classmethod
    def from_meta(cls, meta: Dict[str, object]) -> "FlowNetwork":
        try:
            return cls(int(meta["n"]), tuple((int(u), int(v)) for u, v in meta["arcs"]))
        except (KeyError, TypeError, ValueError) as e:
            raise DocumentParseError(f"meta does not describe a flow network: {e}", path="meta")


# ---------------------------------------------------------------------------
# Text formats
# ---------------------------------------------------------------------------

def _content_lines(text: str) -> List[Tuple[int, List[str]]]:
    lines = []
    for number, raw in enumerate(text.splitlines(), start=1):
        content = raw.split("#", 1)[0].strip()
        if content:
            lines.append((number, content.split()))
    return lines


def _parse_header(lines: List[Tuple[int, List[str]]]) -> Tuple[int, int, str, List[str], int]:
    if not lines:
        raise GraphFormatError("empty graph file", line=1)
    number, tokens = lines[0]
    if len(tokens) < 3:
        raise GraphFormatError("header must read `n m undirected` or `n m directed ...`", line=number)
    try:
        n, m = int(tokens[0]), int(tokens[1])
    except ValueError:
        raise GraphFormatError("vertex and edge counts must be integers", line=number)
    if n < 2 or m < 0:
        raise GraphFormatError(f"invalid counts n={n} m={m}", line=number)
    return n, m, tokens[2], tokens[3:], number


def _parse_edges(lines: List[Tuple[int, List[str]]], n: int, m: int,
                 header_line: int) -> List[Tuple[int, int, Fraction, int]]:
    body = lines[1:]
    if len(body) != m:
        raise GraphFormatError(f"header announces {m} edges, found {len(body)}", line=header_line)
    edges = []
    for number, tokens in body:
        if len(tokens) != 3:
            raise GraphFormatError("expected `u v value`", line=number)
        try:
            u, v = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise GraphFormatError("endpoints must be integers", line=number)
        if not (1 <= u <= n and 1 <= v <= n) or u == v:
            raise GraphFormatError(f"invalid endpoints {u} {v} for n={n}", line=number)
        try:
            value = parse_rational(tokens[2])
        except DocumentParseError:
            raise GraphFormatError(f"invalid number {tokens[2]!r}", line=number)
        edges.append((u, v, value, number))
    return edges


def is_graph_text(text: str) -> bool:
    """True if the first content line looks like a graph header."""
    lines = _content_lines(text)
    return bool(lines) and len(lines[0][1]) >= 3 and lines[0][1][2] in ("undirected", "directed")


def parse_undirected_graph(text: str) -> UndirectedGraph:
    lines = _content_lines(text)
    n, m, kind, _, header_line = _parse_header(lines)
    if kind != "undirected":
        raise GraphFormatError(f"expected an undirected graph, header says {kind!r}", line=header_line)
    seen: Dict[Pair, int] = {}
    edges = []
    for u, v, w, number in _parse_edges(lines, n, m, header_line):
        key = (min(u, v), max(u, v))
        if key in seen:
            raise GraphFormatError(f"duplicate edge {key[0]}-{key[1]} (first on line {seen[key]})", line=number)
        seen[key] = number
        edges.append((u, v, w))
    return UndirectedGraph(n, tuple(edges))


def parse_flow_network(text: str) -> Tuple[FlowNetwork, Tuple[Fraction, ...]]:
    """Network and capacity vector; missing reverse arcs get capacity 0."""
    lines = _content_lines(text)
    n, m, kind, options, header_line = _parse_header(lines)
    if kind != "directed":
        raise GraphFormatError(f"expected a directed graph, header says {kind!r}", line=header_line)
    expected = {"source": "1", "sink": str(n)}
    for option in options:
        key, _, value = option.partition("=")
        if key not in expected:
            raise GraphFormatError(f"unknown header option {option!r}", line=header_line)
        if value not in (expected[key], "n" if key == "sink" else expected[key]):
            raise GraphFormatError(f"{key} must be {expected[key]}, got {value!r}", line=header_line)
    capacities: Dict[Pair, Fraction] = {}
    for u, v, cap, number in _parse_edges(lines, n, m, header_line):
        if cap < 0:
            raise GraphFormatError(f"negative capacity on {u}->{v}", line=number)
        if (u, v) in capacities:
            raise GraphFormatError(f"duplicate arc {u}->{v}", line=number)
        capacities[(u, v)] = cap
    net = FlowNetwork.from_arcs(n, capacities)
    return net, net.capacity_vector(capacities)


def format_undirected_graph(graph: UndirectedGraph) -> str:
    lines = [f"{graph.n} {len(graph.edges)} undirected"]
    lines += [f"{u} {v} {format_rational(w)}" for u, v, w in graph.edges]
    return "\n".join(lines) + "\n"


def format_flow_network(net: FlowNetwork, capacities: Tuple[Fraction, ...],
                        keep_zero: bool = True) -> str:
    """Edge list of net; without keep_zero, zero-capacity arcs are left out."""
    arcs = [(arc, c) for arc, c in zip(net.arcs, capacities) if keep_zero or c != 0]
    lines = [f"{net.n} {len(arcs)} directed source=1 sink={net.n}"]
    lines += [f"{u} {v} {format_rational(c)}" for (u, v), c in arcs]
    return "\n".join(lines) + "\n"
