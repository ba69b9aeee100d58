"""
Minimum spanning tree value as a max-affine program.

The program eliminates vertices n, n-1, ..., 3 one at a time. Eliminating
vertex r charges the cheapest edge at r,

    y_r <- min_{i < r} x_ir

and replaces every remaining weight by

    x'_ij <- min{x_ij, x_ir + x_jr - y_r}

after which the graph on r-1 vertices is solved the same way. With two
vertices left the answer is the weight of the only edge, so

    mst = y_n + y_{n-1} + ... + y_3 + x'_12
"""

import logging
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .errors import ArityError, BigMTooSmallError, DisconnectedGraphError
from .graphs import EdgeWeightVector, UndirectedGraph, UnionFind, complete_pairs
from .maap_core import AffineExpr, Complexity, Instruction, MaapProgram, ProgramBuilder, complexity

logger = logging.getLogger("maapnet.mst_builder")


def _weight_name(level: int, n: int, i: int, j: int) -> str:
    return f"x[{i},{j}]" if level == n else f"x'{level}[{i},{j}]"


def build_mst_program(n: int) -> MaapProgram:
    """
    Program computing the MST value of K_n.

    Args:
        n: number of vertices (>= 2)

    Returns:
        Program with the n(n-1)/2 edge weights as inputs (lexicographic pair
        order) and the single output `mst`
    """
    if n < 2:
        raise ArityError(f"the MST program needs n >= 2 vertices, got {n}")
    b = ProgramBuilder()
    inputs = [b.var(_weight_name(n, n, i, j)) for i, j in complete_pairs(n)]
    body: List[Instruction] = []
    charges: List[AffineExpr] = []

    for r in range(n, 2, -1):
        def x(i: int, j: int) -> AffineExpr:
            return b.expr(_weight_name(r, n, i, j))

        y = b.var(f"y[{r}]")
        body.append(b.assign_min(y, [x(i, r) for i in range(1, r)]))
        body.append(b.for_do_parallel(
            b.assign_min(_weight_name(r - 1, n, i, j), [x(i, j), x(i, r) + x(j, r) - b.expr(y)])
            for i, j in complete_pairs(r - 1)
        ))
        charges.append(b.expr(y))

    total = sum(charges, b.expr(_weight_name(2, n, 1, 2)))
    body.append(b.assign("mst", total))
    prog = b.build(inputs, ["mst"], body, meta={"problem": "mst", "n": n})
    logger.info(f"built MST program for n={n}: ledger {tuple(complexity(prog))}")
    return prog


def mst_ledger(n: int) -> Complexity:
    """Closed form of complexity(build_mst_program(n))."""
    if n < 3:
        return Complexity(0, 0, 0)
    d = sum((r - 2).bit_length() + 1 for r in range(3, n + 1))
    w = 2 * (n - 1) * (n - 2)
    s = 4 * sum(j * j for j in range(2, n))
    return Complexity(d, w, s)


def is_connected(graph: UndirectedGraph) -> bool:
    sets = UnionFind(graph.n)
    components = graph.n
    for u, v, _ in graph.edges:
        if sets.union(u, v):
            components -= 1
    return components == 1


def mst_input_vector(graph: UndirectedGraph, n: Optional[int] = None,
                     big_M: Optional[Fraction] = None) -> EdgeWeightVector:
    """
    Pack graph into the weight vector of K_n.

    Missing pairs get big_M, which must exceed (n-1) * max|w| so that no
    missing pair can enter a minimum spanning tree. The default is
    1 + n * max|w|.
    """
    n = n or graph.n
    if n < graph.n:
        raise ArityError(f"graph has {graph.n} vertices, cannot pack into K_{n}")
    if n != graph.n or not is_connected(graph):
        raise DisconnectedGraphError(f"graph on {n} vertices is not connected")
    largest = max((abs(w) for _, _, w in graph.edges), default=Fraction(0))
    if big_M is None:
        big_M = 1 + n * largest
    big_M = Fraction(big_M)
    if big_M <= (n - 1) * largest:
        raise BigMTooSmallError(f"big_M={big_M} must exceed (n-1)*max|w| = {(n - 1) * largest}")
    present: Dict[Tuple[int, int], Fraction] = graph.weight_map()
    weights = tuple(present.get(pair, big_M) for pair in complete_pairs(n))
    logger.debug(f"packed {len(present)} edges into K_{n} with big_M={big_M}")
    return EdgeWeightVector(n, weights)
