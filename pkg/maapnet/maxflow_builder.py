"""
Maximum flow as a max-affine program for a fixed digraph.

The main program starts from the zero flow and runs, for every path length
k = 1..n-1, m rounds of

    y <- FindAugmentingFlow_k(c)            (augmenting flow on length-k paths)
    x_uv += y_uv; c_uv -= y_uv; c_vu += y_uv (for every forward arc uv)

FindAugmentingFlow_k works without branching on the residual network:

1. fattest paths: a[i,v] is the largest amount v can send to t along a
   residual path of exactly i arcs
2. push: a[k,s] units leave s and are greedily pushed towards t, nodes and
   successors in ascending index order, never exceeding what the next node
   can still forward (a[i-1,w] - Y[i-1,w])
3. clean-up: excess left at a node is pushed back along its incoming flow,
   nodes and predecessors in descending index order
4. y_vw <- z_vw - z_wv on every forward arc

Sequences carry the labels `augment`, `phase`, `find_augmenting_flow`,
`push` and `cleanup` for instrumented interpretation.
"""

import logging
from fractions import Fraction
from typing import List, Sequence

from .compiler import sequentialize
from .errors import ArityError
from .graphs import FlowNetwork
from .maap_core import (AffineExpr, Instruction, MaapProgram, ProgramBuilder,
                        complexity)
from .oracles import flow_value_of

logger = logging.getLogger("maapnet.maxflow_builder")


def arc_name(prefix: str, u: int, v: int) -> str:
    return f"{prefix}[{u},{v}]"


def level_name(prefix: str, i: int, v: int) -> str:
    return f"{prefix}[{i},{v}]"


def _find_augmenting_flow(b: ProgramBuilder, net: FlowNetwork, k: int) -> Instruction:
    """Body of FindAugmentingFlow_k over the variables c, z, Y, a and y."""
    t = net.t
    nodes = [v for v in range(1, net.n + 1) if v != t]

    def c(u: int, v: int) -> AffineExpr:
        return b.expr(arc_name("c", u, v))

    def z(u: int, v: int) -> AffineExpr:
        return b.expr(arc_name("z", u, v))

    def Y(i: int, v: int) -> AffineExpr:
        return b.expr(level_name("Y", i, v))

    def a(i: int, v: int) -> AffineExpr:
        return b.expr(level_name("a", i, v))

    def inner(v: int) -> List[int]:
        return [w for w in net.successors[v] if w != t]

    body: List[Instruction] = [
        b.for_do_parallel(
            [b.assign(arc_name("z", v, w), 0), b.assign(arc_name("z", w, v), 0)]
            for v, w in net.forward_arcs
        ),
        b.for_do_parallel(
            [b.assign(level_name("Y", i, v), 0), b.assign(level_name("a", i, v), 0)]
            for i in range(1, k + 1) for v in nodes
        ),
        b.for_do_parallel(
            b.assign(level_name("a", 1, v), c(v, t)) for v in net.predecessors[t]
        ),
    ]

    # fattest paths of exactly i arcs; nodes without inner successors keep a = 0
    for i in range(2, k + 1):
        blocks = []
        for v in nodes:
            succ = inner(v)
            if not succ:
                continue
            if len(succ) == 1:
                w = succ[0]
                blocks.append(b.sequence([b.assign_min(level_name("a", i, v), [a(i - 1, w), c(v, w)])]))
                continue
            temps = [f"m[{w}]" for w in succ]
            blocks.append(b.sequence(
                [
                    b.do_parallel(
                        b.assign_min(temp, [a(i - 1, w), c(v, w)]) for temp, w in zip(temps, succ)
                    ),
                    b.assign_max(level_name("a", i, v), [b.expr(temp) for temp in temps]),
                ],
                local=temps,
            ))
        if blocks:
            body.append(b.for_do_parallel(blocks))

    push: List[Instruction] = [b.assign(level_name("Y", k, net.s), a(k, net.s))]
    for i in range(k, 1, -1):
        steps = []
        for v in nodes:
            for w in inner(v):
                steps.append(b.sequence(
                    [
                        b.assign_min("f", [Y(i, v), c(v, w), a(i - 1, w) - Y(i - 1, w)]),
                        b.assign(arc_name("z", v, w), z(v, w) + b.expr("f")),
                        b.assign(level_name("Y", i, v), Y(i, v) - b.expr("f")),
                        b.assign(level_name("Y", i - 1, w), Y(i - 1, w) + b.expr("f")),
                    ],
                    local=["f"],
                ))
        if steps:
            push.append(b.for_do(steps))
    push.append(b.for_do_parallel(
        [b.assign(arc_name("z", v, t), Y(1, v)), b.assign(level_name("Y", 1, v), 0)]
        for v in net.predecessors[t]
    ))
    body.append(b.sequence(push, label="push"))

    cleanup: List[Instruction] = []
    for i in range(2, k):
        steps = []
        for w in reversed(nodes):
            for v in reversed([u for u in net.predecessors[w] if u != t]):
                steps.append(b.sequence(
                    [
                        b.assign_min("b", [Y(i, w), z(v, w)]),
                        b.assign(arc_name("z", v, w), z(v, w) - b.expr("b")),
                        b.assign(level_name("Y", i, w), Y(i, w) - b.expr("b")),
                        b.assign(level_name("Y", i + 1, v), Y(i + 1, v) + b.expr("b")),
                    ],
                    local=["b"],
                ))
        if steps:
            cleanup.append(b.for_do(steps))
    body.append(b.sequence(cleanup, label="cleanup"))

    body.append(b.for_do_parallel(
        b.assign(arc_name("y", v, w), z(v, w) - z(w, v)) for v, w in net.forward_arcs
    ))
    return b.sequence(body, label="find_augmenting_flow")


def build_find_augmenting_flow(net: FlowNetwork, k: int) -> MaapProgram:
    """
    FindAugmentingFlow_k as a standalone program.

    Inputs are the residual capacities c over all arcs (canonical order),
    outputs the augmenting flow y over the forward arcs.
    """
    if not 1 <= k <= net.n - 1:
        raise ArityError(f"path length k must lie in [1, {net.n - 1}], got {k}")
    b = ProgramBuilder()
    inputs = [b.var(arc_name("c", u, v)) for u, v in net.arcs]
    outputs = [b.var(arc_name("y", u, v)) for u, v in net.forward_arcs]
    body = _find_augmenting_flow(b, net, k)
    return b.build(inputs, outputs, [body], meta={"problem": "augmenting-flow", "k": k, **net.to_meta()})


def _maxflow_builder(net: FlowNetwork):
    b = ProgramBuilder()
    inputs = [b.var(arc_name("nu", u, v)) for u, v in net.arcs]
    outputs = [b.var(arc_name("x", u, v)) for u, v in net.forward_arcs]

    body: List[Instruction] = [b.for_do_parallel(
        [
            b.assign(arc_name("x", u, v), 0),
            b.assign(arc_name("c", u, v), b.expr(arc_name("nu", u, v))),
            b.assign(arc_name("c", v, u), b.expr(arc_name("nu", v, u))),
        ]
        for u, v in net.forward_arcs
    )]

    def augment() -> Instruction:
        return b.for_do_parallel(
            [
                b.assign(arc_name("x", u, v), b.expr(arc_name("x", u, v)) + b.expr(arc_name("y", u, v))),
                b.assign(arc_name("c", u, v), b.expr(arc_name("c", u, v)) - b.expr(arc_name("y", u, v))),
                b.assign(arc_name("c", v, u), b.expr(arc_name("c", v, u)) + b.expr(arc_name("y", u, v))),
            ]
            for u, v in net.forward_arcs
        )

    phases = []
    for k in range(1, net.n):
        rounds = [
            b.sequence([_find_augmenting_flow(b, net, k), augment()], label="augment")
            for _ in range(net.m)
        ]
        phases.append(b.sequence([b.for_do(rounds)], label="phase"))
    if phases:
        body.append(b.for_do(phases))
    return b, inputs, outputs, body


def build_maxflow_program(net: FlowNetwork, sequential: bool = False) -> MaapProgram:
    """
    Program computing a maximum s-t flow of net.

    Args:
        net: the fixed topology
        sequential: return the width-reduced variant

    Returns:
        Program with the capacities over all arcs as inputs and the flow on
        every forward arc as outputs
    """
    b, inputs, outputs, body = _maxflow_builder(net)
    prog = b.build(inputs, outputs, body, meta={"problem": "maxflow", **net.to_meta()})
    if sequential:
        prog = sequentialize(prog)
    logger.info(f"built max-flow program for n={net.n} m={net.m}: ledger {tuple(complexity(prog))}")
    return prog


def build_maxflow_value_program(net: FlowNetwork, sequential: bool = False) -> MaapProgram:
    """build_maxflow_program with one more output, `value`, the net flow out of s."""
    b, inputs, outputs, body = _maxflow_builder(net)
    total = AffineExpr.const(0)
    for u, v in net.forward_arcs:
        if u == net.s:
            total = total + b.expr(arc_name("x", u, v))
        elif v == net.s:
            total = total - b.expr(arc_name("x", u, v))
    body.append(b.assign("value", total))
    outputs.append(b.var("value"))
    prog = b.build(inputs, outputs, body, meta={"problem": "maxflow-value", **net.to_meta()})
    return sequentialize(prog) if sequential else prog


def flow_value(net: FlowNetwork, x: Sequence[Fraction]) -> Fraction:
    """Net flow out of s: forward arcs leaving s count positive, entering s negative."""
    return flow_value_of(net, x)
