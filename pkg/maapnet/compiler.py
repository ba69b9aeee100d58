"""
Lowering between max-affine programs and ReLU networks.

- compile_program: program -> network. Affine assignments cost nothing (they
  are folded into the symbolic value of each variable); every two-operand
  max/min becomes one hidden neuron using
      max{p, q} = p + sigma(q - p)      min{p, q} = p - sigma(p - q)
  with the pass-through operand p forwarded over skip connections.
- decompile: network -> program, one Do-Parallel per hidden layer.
- sequentialize: the width-reduced program (no parallel blocks, binary
  extrema only).
"""

import logging
from collections import Counter
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .errors import ArityError, ProgramValidationError
from .maap_core import (AffineExpr, AssignAffine, AssignExtremum, AssignMax,
                        AssignMin, DoParallel, ForDo, ForDoParallel,
                        Instruction, MaapProgram, ProgramBuilder, Sequence,
                        blocks_of, complexity, ensure_valid)
from .relu_net import (Arc, Neuron, ReluNet, Role, ensure_valid_net)

logger = logging.getLogger("maapnet.compiler")


# ---------------------------------------------------------------------------
# Program -> network
# ---------------------------------------------------------------------------

class _Lowering:
    """
    Symbolic execution of a program over neuron ids.

    env maps each program variable to an AffineExpr whose variables are
    neuron ids. Neurons are placed structurally: an instruction started at
    layer `base` only creates neurons on layers base+1 .. base+d, so
    sequence steps occupy disjoint layer ranges and parallel blocks share one.
    """

    def __init__(self, prog: MaapProgram):
        self.prog = prog
        self.env: List[Optional[AffineExpr]] = [None] * len(prog.symbols)
        self.layers: List[int] = []
        self.biases: List[Fraction] = []
        self.sources: List[Tuple[Tuple[Fraction, int], ...]] = []
        self.n_inputs = len(prog.inputs)
        for position, var in enumerate(prog.inputs):
            self.env[var] = AffineExpr.var(position)
            self.layers.append(0)
            self.biases.append(Fraction(0))
            self.sources.append(())

    def substitute(self, expr: AffineExpr) -> AffineExpr:
        constant = expr.constant
        merged: Dict[int, Fraction] = {}
        for coef, var in expr.terms:
            value = self.env[var]
            if value is None:
                raise ProgramValidationError(f"{self.prog.name(var)} read before assignment")
            constant += coef * value.constant
            for c, neuron in value.terms:
                merged[neuron] = merged.get(neuron, Fraction(0)) + coef * c
        return AffineExpr(constant, tuple((c, v) for v, c in sorted(merged.items()) if c != 0))

    def relu(self, expr: AffineExpr, base: int) -> int:
        """New hidden neuron sigma(expr); returns its id."""
        layer = max([base + 1] + [self.layers[v] + 1 for v in expr.variables])
        self.layers.append(layer)
        self.biases.append(expr.constant)
        self.sources.append(expr.terms)
        return len(self.layers) - 1

    def gadget(self, p: AffineExpr, q: AffineExpr, is_max: bool, base: int) -> AffineExpr:
        diff = q - p if is_max else p - q
        sign = 1 if is_max else -1
        if diff.is_constant:
            return p + sign * max(diff.constant, Fraction(0))
        hidden = self.relu(diff, base)
        return p + AffineExpr.var(hidden, sign)

    def extremum(self, forms: List[AffineExpr], is_max: bool, base: int) -> AffineExpr:
        # balanced tree, an odd operand is carried to the next level
        level = forms
        while len(level) > 1:
            paired = []
            for i in range(0, len(level) - 1, 2):
                a, b = level[i], level[i + 1]
                # forward the operand with fewer terms; ties forward the second
                p, q = (a, b) if len(a.terms) < len(b.terms) else (b, a)
                paired.append(self.gadget(p, q, is_max, base))
            if len(level) % 2:
                paired.append(level[-1])
            level = paired
        return level[0]

    def lower(self, instr: Instruction, base: int) -> int:
        """Lower instr starting at layer base; returns the last layer it used."""
        if isinstance(instr, AssignAffine):
            self.env[instr.target] = self.substitute(instr.expr)
            return base
        if isinstance(instr, AssignExtremum):
            first_new = len(self.layers)
            forms = [self.substitute(t) for t in instr.terms]
            self.env[instr.target] = self.extremum(forms, isinstance(instr, AssignMax), base)
            return max([base] + self.layers[first_new:])
        if isinstance(instr, Sequence):
            saved = [(v, self.env[v]) for v in instr.local_vars]
            end = base
            for child in instr.body:
                end = self.lower(child, end)
            for v, value in saved:
                self.env[v] = value
            return end
        if isinstance(instr, ForDo):
            end = base
            for block in instr.iterations:
                end = self.lower(block, end)
            return end
        if isinstance(instr, (DoParallel, ForDoParallel)):
            return max([base] + [self.lower(block, base) for block in blocks_of(instr)])
        raise ProgramValidationError(f"cannot compile {type(instr).__name__}")

    def finish(self, width_cap: int) -> ReluNet:
        """
        Assemble the network from the live neurons.

        Neurons go on the smallest layer their inputs allow, so the output
        layer index equals the longest path. When that packing is wider than
        width_cap the structural layers are kept instead and the first-layer
        neuron with the smallest id is relayed up to the output layer; a relay
        sigma(o(h)) repeats o(h) because o(h) >= 0.
        """
        outputs = [self.env[v] for v in self.prog.outputs]

        # hidden neurons that reach an output
        live = set()
        stack = [v for form in outputs for v in form.variables if v >= self.n_inputs]
        while stack:
            nid = stack.pop()
            if nid in live:
                continue
            live.add(nid)
            stack.extend(src for _, src in self.sources[nid] if src >= self.n_inputs)

        # sources always have smaller ids
        earliest: Dict[int, int] = {}
        for nid in sorted(live):
            earliest[nid] = 1 + max((earliest[src] for _, src in self.sources[nid] if src >= self.n_inputs),
                                    default=0)

        if max(Counter(earliest.values()).values(), default=0) <= width_cap:
            layer_of = earliest
        else:
            used_layers = sorted({self.layers[nid] for nid in live})
            compact = {layer: i for i, layer in enumerate(used_layers, start=1)}
            layer_of = {nid: compact[self.layers[nid]] for nid in live}
            top = len(used_layers)
            if max(earliest.values()) < top:
                start = min(nid for nid in live if layer_of[nid] == 1)
                relay = start
                for layer in range(2, top + 1):
                    relay = self.relu(AffineExpr.var(relay), 0)
                    layer_of[relay] = layer
                outputs[0] = outputs[0] + AffineExpr.var(relay) - AffineExpr.var(start)
                logger.debug(f"packed layering exceeds width {width_cap}, relayed neuron {start} over {top - 1} layers")
        output_layer = max(layer_of.values(), default=0) + 1

        order = sorted(layer_of, key=lambda nid: (layer_of[nid], nid))
        new_id = {nid: nid for nid in range(self.n_inputs)}
        for position, nid in enumerate(order, start=self.n_inputs):
            new_id[nid] = position

        neurons = [Neuron(i, 0, Fraction(0), Role.INPUT) for i in range(self.n_inputs)]
        arcs: List[Arc] = []
        for nid in order:
            nid_new = new_id[nid]
            neurons.append(Neuron(nid_new, layer_of[nid], self.biases[nid], Role.HIDDEN))
            arcs.extend(Arc(new_id[src], nid_new, w) for w, src in self.sources[nid])
        for form in outputs:
            nid_new = len(neurons)
            neurons.append(Neuron(nid_new, output_layer, form.constant, Role.OUTPUT))
            arcs.extend(Arc(new_id[src], nid_new, w) for w, src in form.terms)
        return ReluNet(tuple(neurons), tuple(arcs), dict(self.prog.meta))


def compile_program(prog: MaapProgram) -> ReluNet:
    """
    Lower a valid program to an equivalent ReLU network.

    The network computes interpret(prog, .) exactly and its statistics are
    bounded by (d + 1, w, s) where (d, w, s) = complexity(prog). Its output
    layer index equals the longest path.
    """
    ensure_valid(prog)
    lowering = _Lowering(prog)
    lowering.lower(prog.body, 0)
    net = lowering.finish(complexity(prog).w)
    logger.debug(f"compiled {len(prog.symbols)} variables into {len(net.neurons)} neurons, {len(net.arcs)} arcs")
    return ensure_valid_net(net)


def max_gadget(k: int, mode: str = "max") -> ReluNet:
    """Network computing the max (or min) of its k inputs."""
    if k < 2:
        raise ArityError(f"a max gadget needs k >= 2 inputs, got {k}")
    if mode not in ("max", "min"):
        raise ValueError(f"mode must be 'max' or 'min', got {mode!r}")
    b = ProgramBuilder()
    xs = [b.var(f"x[{i}]") for i in range(1, k + 1)]
    terms = [b.expr(x) for x in xs]
    assign = b.assign_max("y", terms) if mode == "max" else b.assign_min("y", terms)
    return compile_program(b.build(xs, ["y"], [assign], meta={"problem": f"{mode}{k}"}))


# ---------------------------------------------------------------------------
# Network -> program
# ---------------------------------------------------------------------------

def decompile(net: ReluNet) -> MaapProgram:
    """
    Generic program executing net.

    Every hidden layer becomes a For-Do-Parallel over its neurons with blocks
    a(v) <- b_v + sum w_uv o(u); o(v) <- max{0, a(v)}, followed by one
    For-Do-Parallel of affine assignments for the output layer.
    """
    ensure_valid_net(net)
    b = ProgramBuilder()
    names: Dict[int, int] = {}
    for nid in net.input_ids:
        names[nid] = b.var(f"x[{nid}]")

    def activation(neuron: Neuron) -> AffineExpr:
        return AffineExpr.of(neuron.bias, [(a.weight, names[a.src]) for a in net.incoming[neuron.id]])

    body: List[Instruction] = []
    for layer in range(1, net.depth):
        blocks = []
        for neuron in net.neurons:
            if neuron.layer != layer or neuron.role is not Role.HIDDEN:
                continue
            a = b.var(f"a[{neuron.id}]")
            o = b.var(f"o[{neuron.id}]")
            blocks.append([b.assign(a, activation(neuron)), b.assign_max(o, [0, b.expr(a)])])
            names[neuron.id] = o
        body.append(b.for_do_parallel(blocks))
    outputs = []
    out_blocks = []
    for nid in net.output_ids:
        y = b.var(f"y[{nid}]")
        out_blocks.append([b.assign(y, activation(net.neurons[nid]))])
        outputs.append(y)
    body.append(b.for_do_parallel(out_blocks))
    return b.build([names[nid] for nid in net.input_ids], outputs, body, meta=dict(net.meta))


# ---------------------------------------------------------------------------
# Width reduction
# ---------------------------------------------------------------------------

def _chain(instr: Instruction, acc: int) -> Instruction:
    terms = instr.terms
    cls = type(instr)
    steps: List[Instruction] = [cls(acc, (terms[0], terms[1]))]
    for term in terms[2:-1]:
        steps.append(cls(acc, (AffineExpr.var(acc), term)))
    steps.append(cls(instr.target, (AffineExpr.var(acc), terms[-1])))
    return Sequence(tuple(steps), frozenset({acc}))


def _sequentialize(instr: Instruction, acc: int) -> Instruction:
    if isinstance(instr, (AssignMax, AssignMin)):
        return _chain(instr, acc) if len(instr.terms) > 2 else instr
    if isinstance(instr, AssignAffine):
        return instr
    if isinstance(instr, Sequence):
        return Sequence(tuple(_sequentialize(c, acc) for c in instr.body), instr.local_vars, instr.label)
    if isinstance(instr, ForDo):
        return ForDo(instr.trip_count, tuple(_sequentialize(b, acc) for b in instr.iterations))
    if isinstance(instr, (DoParallel, ForDoParallel)):
        return Sequence(tuple(_sequentialize(b, acc) for b in blocks_of(instr)))
    raise ProgramValidationError(f"cannot sequentialize {type(instr).__name__}")


def sequentialize(prog: MaapProgram) -> MaapProgram:
    """
    Width-reduced equivalent of prog.

    Parallel constructs run their blocks in order and every k-ary max/min
    with k > 2 becomes a chain of binary ones through a block-local
    accumulator, so every extremum has width at most 4.
    """
    ensure_valid(prog)
    name = "acc"
    while name in prog.var_ids:
        name += "'"
    acc = len(prog.symbols)
    body = _sequentialize(prog.body, acc)
    meta = dict(prog.meta)
    meta["sequential"] = True
    return MaapProgram(prog.inputs, prog.outputs, body, prog.symbols + (name,), meta)
