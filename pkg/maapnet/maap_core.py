"""
Max-Affine Arithmetic Programs (MAAPs)

This module defines the intermediate representation every other part of
maapnet works on: branch-free programs whose only expressions are affine
combinations of variables and maxima/minima of such combinations.

Key features:
- Immutable instruction tree (assignments, sequences, Do-Parallel blocks and
  pre-unrolled For-Do / For-Do-Parallel loops)
- Static validation returning violations as data
- An interpreter that is generic over exact rationals and floats, with an
  instrumented mode reporting the state at the end of labelled sequences
- The recursive depth/width/size ledger and loop unrolling
- JSON serialization through the document models in maapnet.schemas

Variables are integer ids interned by ProgramBuilder; the program carries
the id -> name table for display and serialization.
"""

import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import (Any, Callable, Dict, FrozenSet, Iterable, Iterator, List,
                    Mapping, NamedTuple, Optional, Tuple, Union)

from pydantic import ValidationError as PydanticValidationError

from .errors import (ArityError, DimensionMismatchError, DocumentParseError,
                     ProgramValidationError)
from .numeric import Mode, Number, check_exact, coerce, infer_mode
from .schemas import (AffineDoc, AssignAffineDoc, AssignExtremumDoc,
                      MaapDocument, ParDoc, RationalDoc, SeqDoc, TermDoc)

logger = logging.getLogger("maapnet.maap_core")

Var = int
Scalar = Union[int, Fraction]


# ---------------------------------------------------------------------------
# Expressions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AffineExpr:
    """
    b + sum_j c_j * v_j with exact coefficients.

    Terms are kept canonical: one entry per variable, sorted by id, no zero
    coefficients. Build instances through AffineExpr.of() or the arithmetic
    operators so that invariant holds.
    """
    constant: Fraction = Fraction(0)
    terms: Tuple[Tuple[Fraction, Var], ...] = ()

    @classmethod
    def of(cls, constant: Scalar = 0,
           terms: Iterable[Tuple[Scalar, Var]] = ()) -> "AffineExpr":
        merged: Dict[Var, Fraction] = {}
        for coef, var in terms:
            merged[var] = merged.get(var, Fraction(0)) + Fraction(coef)
        canonical = tuple((c, v) for v, c in sorted(merged.items()) if c != 0)
        return cls(Fraction(constant), canonical)

    @classmethod
    def var(cls, var: Var, coef: Scalar = 1) -> "AffineExpr":
        return cls.of(0, [(coef, var)])

    @classmethod
    def const(cls, value: Scalar) -> "AffineExpr":
        return cls(Fraction(value), ())

    @property
    def variables(self) -> Tuple[Var, ...]:
        return tuple(v for _, v in self.terms)

    @property
    def is_constant(self) -> bool:
        return not self.terms

    def coefficient(self, var: Var) -> Fraction:
        for coef, v in self.terms:
            if v == var:
                return coef
        return Fraction(0)

    # Arithmetic keeps builders readable: x[i] + x[j] - y

    def __add__(self, other: Any) -> "AffineExpr":
        if isinstance(other, AffineExpr):
            return AffineExpr.of(self.constant + other.constant, self.terms + other.terms)
        if isinstance(other, (int, Fraction)):
            return AffineExpr(self.constant + other, self.terms)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self) -> "AffineExpr":
        return AffineExpr(-self.constant, tuple((-c, v) for c, v in self.terms))

    def __sub__(self, other: Any) -> "AffineExpr":
        if isinstance(other, (AffineExpr, int, Fraction)):
            return self + (-other)
        return NotImplemented

    def __rsub__(self, other: Any) -> "AffineExpr":
        return (-self) + other

    def __mul__(self, scalar: Any) -> "AffineExpr":
        if not isinstance(scalar, (int, Fraction)):
            return NotImplemented
        if scalar == 0:
            return AffineExpr(Fraction(0), ())
        return AffineExpr(self.constant * scalar, tuple((c * scalar, v) for c, v in self.terms))

    __rmul__ = __mul__

    # Evaluation plans, split so that unit coefficients skip the multiply

    @cached_property
    def _exact_plan(self) -> Tuple[Tuple[Var, ...], Tuple[Var, ...], Tuple[Tuple[Fraction, Var], ...]]:
        plus = tuple(v for c, v in self.terms if c == 1)
        minus = tuple(v for c, v in self.terms if c == -1)
        other = tuple((c, v) for c, v in self.terms if c != 1 and c != -1)
        return plus, minus, other

    @cached_property
    def _float_plan(self) -> Tuple[float, Tuple[Var, ...], Tuple[Var, ...], Tuple[Tuple[float, Var], ...]]:
        plus, minus, other = self._exact_plan
        return float(self.constant), plus, minus, tuple((float(c), v) for c, v in other)

    def evaluate(self, env: List[Any], exact: bool = True) -> Number:
        if exact:
            plus, minus, other = self._exact_plan
            total = self.constant
        else:
            total, plus, minus, other = self._float_plan
        for v in plus:
            total += env[v]
        for v in minus:
            total -= env[v]
        for c, v in other:
            total += c * env[v]
        return total

    def render(self, names: Callable[[Var], str]) -> str:
        parts: List[str] = []
        for coef, var in self.terms:
            name = names(var)
            if coef == 1:
                parts.append(f"+ {name}")
            elif coef == -1:
                parts.append(f"- {name}")
            elif coef < 0:
                parts.append(f"- {-coef}*{name}")
            else:
                parts.append(f"+ {coef}*{name}")
        if self.constant != 0 or not parts:
            parts.insert(0, str(self.constant))
        text = " ".join(parts)
        return text[2:] if text.startswith("+ ") else text


ExprLike = Union[AffineExpr, int, Fraction]


def as_expr(value: ExprLike) -> AffineExpr:
    if isinstance(value, AffineExpr):
        return value
    return AffineExpr.const(value)


# ---------------------------------------------------------------------------
# Instructions
# ---------------------------------------------------------------------------

class Instruction:
    """Base class of every node in a program body."""

    __slots__ = ()


@dataclass(frozen=True)
class AssignAffine(Instruction):
    target: Var
    expr: AffineExpr


@dataclass(frozen=True)
class AssignMax(Instruction):
    target: Var
    terms: Tuple[AffineExpr, ...]


@dataclass(frozen=True)
class AssignMin(Instruction):
    target: Var
    terms: Tuple[AffineExpr, ...]


AssignExtremum = (AssignMax, AssignMin)


@dataclass(frozen=True)
class Sequence(Instruction):
    """
    Instructions executed in order.

    local_vars are scoped to this sequence: they must be assigned before they
    are read inside it and are invisible after it. A label marks the sequence
    for instrumented interpretation.
    """
    body: Tuple[Instruction, ...] = ()
    local_vars: FrozenSet[Var] = frozenset()
    label: Optional[str] = None


@dataclass(frozen=True)
class DoParallel(Instruction):
    blocks: Tuple[Sequence, ...] = ()


@dataclass(frozen=True)
class ForDo(Instruction):
    """Sequential loop, stored with one block per iteration."""
    trip_count: int
    iterations: Tuple[Sequence, ...]


@dataclass(frozen=True)
class ForDoParallel(Instruction):
    """Parallel loop, stored with one block per iteration."""
    trip_count: int
    iterations: Tuple[Sequence, ...]


ParallelNode = (DoParallel, ForDoParallel)
SequentialNode = (Sequence, ForDo)


def blocks_of(instr: Instruction) -> Tuple[Instruction, ...]:
    """Children of a composite instruction (empty for assignments)."""
    if isinstance(instr, Sequence):
        return instr.body
    if isinstance(instr, DoParallel):
        return instr.blocks
    if isinstance(instr, (ForDo, ForDoParallel)):
        return instr.iterations
    return ()


def reads_of(instr: Instruction) -> Tuple[Var, ...]:
    if isinstance(instr, AssignAffine):
        return instr.expr.variables
    if isinstance(instr, AssignExtremum):
        return tuple(v for term in instr.terms for v in term.variables)
    return ()


def iter_assignments(instr: Instruction) -> Iterator[Instruction]:
    """Assignments in program order."""
    stack = [instr]
    while stack:
        node = stack.pop()
        if isinstance(node, (AssignAffine,) + AssignExtremum):
            yield node
        else:
            stack.extend(reversed(blocks_of(node)))


@dataclass(frozen=True)
class MaapProgram:
    inputs: Tuple[Var, ...]
    outputs: Tuple[Var, ...]
    body: Instruction
    symbols: Tuple[str, ...]
    meta: Mapping[str, Any] = field(default_factory=dict, compare=False, hash=False)

    def name(self, var: Var) -> str:
        return self.symbols[var]

    @cached_property
    def var_ids(self) -> Dict[str, Var]:
        return {name: i for i, name in enumerate(self.symbols)}

    def var(self, name: str) -> Var:
        return self.var_ids[name]


class Complexity(NamedTuple):
    d: int
    w: int
    s: int


# ---------------------------------------------------------------------------
# Building programs
# ---------------------------------------------------------------------------

class ProgramBuilder:
    """
    Interns variable names and assembles instruction trees.

    Loops are expanded at construction: callers pass one block per iteration.
    """

    def __init__(self):
        self._ids: Dict[str, Var] = {}
        self._names: List[str] = []
        self._fresh_counter = 0

    def var(self, name: str) -> Var:
        var = self._ids.get(name)
        if var is None:
            var = len(self._names)
            self._ids[name] = var
            self._names.append(name)
        return var

    def fresh(self, prefix: str = "tmp") -> Var:
        while True:
            self._fresh_counter += 1
            name = f"{prefix}#{self._fresh_counter}"
            if name not in self._ids:
                return self.var(name)

    def expr(self, name: Union[str, Var], coef: Scalar = 1) -> AffineExpr:
        var = self.var(name) if isinstance(name, str) else name
        return AffineExpr.var(var, coef)

    def _target(self, target: Union[str, Var]) -> Var:
        return self.var(target) if isinstance(target, str) else target

    def assign(self, target: Union[str, Var], expr: ExprLike) -> AssignAffine:
        return AssignAffine(self._target(target), as_expr(expr))

    def assign_max(self, target: Union[str, Var], terms: Iterable[ExprLike]) -> Instruction:
        terms = tuple(as_expr(t) for t in terms)
        if len(terms) == 1:
            return AssignAffine(self._target(target), terms[0])
        return AssignMax(self._target(target), terms)

    def assign_min(self, target: Union[str, Var], terms: Iterable[ExprLike]) -> Instruction:
        terms = tuple(as_expr(t) for t in terms)
        if len(terms) == 1:
            return AssignAffine(self._target(target), terms[0])
        return AssignMin(self._target(target), terms)

    def sequence(self, body: Iterable[Instruction], local: Iterable[Union[str, Var]] = (),
                 label: Optional[str] = None) -> Sequence:
        return Sequence(tuple(body), frozenset(self._target(v) for v in local), label)

    @staticmethod
    def _as_block(block: Union[Instruction, Iterable[Instruction]]) -> Sequence:
        if isinstance(block, Sequence):
            return block
        if isinstance(block, Instruction):
            return Sequence((block,))
        return Sequence(tuple(block))

    def do_parallel(self, blocks: Iterable[Union[Instruction, Iterable[Instruction]]]) -> DoParallel:
        return DoParallel(tuple(self._as_block(b) for b in blocks))

    def for_do(self, iterations: Iterable[Union[Instruction, Iterable[Instruction]]]) -> ForDo:
        iterations = tuple(self._as_block(b) for b in iterations)
        return ForDo(len(iterations), iterations)

    def for_do_parallel(self, iterations: Iterable[Union[Instruction, Iterable[Instruction]]]) -> ForDoParallel:
        iterations = tuple(self._as_block(b) for b in iterations)
        return ForDoParallel(len(iterations), iterations)

    def build(self, inputs: Iterable[Union[str, Var]], outputs: Iterable[Union[str, Var]],
              body: Union[Instruction, Iterable[Instruction]],
              meta: Optional[Mapping[str, Any]] = None) -> MaapProgram:
        if not isinstance(body, Instruction):
            body = Sequence(tuple(body))
        return MaapProgram(
            inputs=tuple(self._target(v) for v in inputs),
            outputs=tuple(self._target(v) for v in outputs),
            body=body,
            symbols=tuple(self._names),
            meta=dict(meta or {}),
        )


def instruction_example_program(n: int) -> MaapProgram:
    """
    Showcase program using every instruction form, on inputs v_1..v_n.

    x_1 <- 4 + sum_i (-1)^i v_i, x_2 <- max{3 v_1, -1.5 v_n, x_1, 5},
    a For-Do prefix sum over v, a Do-Parallel computing y_1..y_3 and a
    For-Do-Parallel setting y_k <- max{v_{k-1} - v_k, 0} for k = 4..n.
    """
    if n < 4:
        raise ArityError(f"the instruction example needs n >= 4, got {n}")
    b = ProgramBuilder()
    v = [None] + [b.var(f"v[{i}]") for i in range(1, n + 1)]
    body: List[Instruction] = [
        b.assign("x[1]", AffineExpr.of(4, [((-1) ** i, v[i]) for i in range(1, n + 1)])),
        b.assign_max("x[2]", [b.expr(v[1], 3), b.expr(v[n], Fraction(-3, 2)), b.expr("x[1]"), 5]),
        b.for_do(
            b.assign(v[k + 1], b.expr(v[k]) + b.expr(v[k + 1]))
            for k in range(1, n)
        ),
        b.do_parallel([
            b.assign_max("y[1]", [b.expr("x[1]"), b.expr("x[2]")]),
            b.assign("y[2]", 7),
            b.assign("y[3]", AffineExpr.of(0, [(1, v[i]) for i in range(1, n + 1)])),
        ]),
    ]
    body.append(b.for_do_parallel(
        [
            b.assign(f"y[{k}]", b.expr(v[k - 1]) - b.expr(v[k])),
            b.assign_max(f"y[{k}]", [b.expr(f"y[{k}]"), 0]),
        ]
        for k in range(4, n + 1)
    ))
    outputs = [f"y[{k}]" for k in range(1, n + 1)]
    return b.build(v[1:], outputs, body, meta={"problem": "example", "n": n})


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    location: str = ""

    def __str__(self) -> str:
        where = f" at {self.location}" if self.location else ""
        return f"[{self.code}]{where}: {self.message}"


def _free_effects(instr: Instruction) -> Tuple[set, set]:
    """Variables read and written by instr, excluding block-local variables."""
    if isinstance(instr, AssignAffine) or isinstance(instr, AssignExtremum):
        return set(reads_of(instr)), {instr.target}
    reads: set = set()
    writes: set = set()
    for child in blocks_of(instr):
        r, w = _free_effects(child)
        reads |= r
        writes |= w
    if isinstance(instr, Sequence) and instr.local_vars:
        reads -= instr.local_vars
        writes -= instr.local_vars
    return reads, writes


class _Validator:

    def __init__(self, prog: MaapProgram):
        self.prog = prog
        self.violations: List[Violation] = []

    def name(self, var: Var) -> str:
        if 0 <= var < len(self.prog.symbols):
            return self.prog.symbols[var]
        return f"#{var}"

    def report(self, code: str, message: str, location: str) -> None:
        self.violations.append(Violation(code, message, location))

    def check_known(self, var: Var, location: str) -> bool:
        if not 0 <= var < len(self.prog.symbols):
            self.report("unknown-variable", f"variable id {var} has no symbol", location)
            return False
        return True

    def run(self) -> List[Violation]:
        seen = set()
        for var in self.prog.inputs:
            self.check_known(var, "inputs")
            if var in seen:
                self.report("duplicate-input", f"{self.name(var)} listed twice", "inputs")
            seen.add(var)
        defined = self.visit(self.prog.body, set(self.prog.inputs), "body")
        for var in self.prog.outputs:
            if self.check_known(var, "outputs") and var not in defined:
                self.report("undefined-output", f"{self.name(var)} is never assigned", "outputs")
        return self.violations

    def visit(self, instr: Instruction, defined: set, location: str) -> set:
        if isinstance(instr, (AssignAffine,) + AssignExtremum):
            for var in reads_of(instr):
                if self.check_known(var, location) and var not in defined:
                    self.report("use-before-def", f"{self.name(var)} read before assignment", location)
            self.check_known(instr.target, location)
            if isinstance(instr, AssignExtremum) and len(instr.terms) < 2:
                kind = "max" if isinstance(instr, AssignMax) else "min"
                self.report("arity", f"{kind} over {len(instr.terms)} term(s) needs at least 2", location)
            return defined | {instr.target}

        if isinstance(instr, Sequence):
            where = f"{location}/{instr.label}" if instr.label else location
            for var in sorted(instr.local_vars):
                self.check_known(var, f"{where} locals")
            outer = defined & instr.local_vars
            current = defined - instr.local_vars
            for i, child in enumerate(instr.body):
                current = self.visit(child, current, f"{where}[{i}]")
            return (current - instr.local_vars) | outer

        if isinstance(instr, (ForDo, ForDoParallel)) and instr.trip_count != len(instr.iterations):
            self.report("trip-count",
                        f"trip count {instr.trip_count} but {len(instr.iterations)} iteration blocks",
                        location)

        if isinstance(instr, ForDo):
            current = defined
            for i, block in enumerate(instr.iterations):
                current = self.visit(block, current, f"{location}[iter {i}]")
            return current

        if isinstance(instr, ParallelNode):
            blocks = blocks_of(instr)
            after = set(defined)
            writers: Dict[Var, List[int]] = {}
            readers: Dict[Var, List[int]] = {}
            for i, block in enumerate(blocks):
                after |= self.visit(block, defined, f"{location}[block {i}]")
                reads, writes = _free_effects(block)
                for var in writes:
                    writers.setdefault(var, []).append(i)
                for var in reads:
                    readers.setdefault(var, []).append(i)
            for var in sorted(writers):
                blocks_writing = writers[var]
                foreign_reads = [j for j in readers.get(var, []) if j not in blocks_writing]
                if len(blocks_writing) > 1 or foreign_reads:
                    self.report(
                        "write-conflict",
                        f"{self.name(var)} assigned in block(s) {blocks_writing} "
                        f"and used in block(s) {sorted(set(blocks_writing[1:] + foreign_reads))}",
                        location)
            return after

        self.report("unknown-instruction", f"unsupported node {type(instr).__name__}", location)
        return defined


def validate_program(prog: MaapProgram) -> List[Violation]:
    """All invariant violations of prog; an empty list means the program is valid."""
    return _Validator(prog).run()


def ensure_valid(prog: MaapProgram) -> MaapProgram:
    violations = validate_program(prog)
    if violations:
        raise ProgramValidationError(
            f"invalid program ({len(violations)} violation(s)): {violations[0]}", violations)
    return prog


# ---------------------------------------------------------------------------
# Interpretation
# ---------------------------------------------------------------------------

class ExecutionState(Mapping[str, Number]):
    """
    Read-only view of the interpreter's variables, keyed by name.

    Handed to interpret observers; values change as execution continues, so
    copy what needs to outlive the callback.
    """

    def __init__(self, prog: MaapProgram, env: List[Any]):
        self._prog = prog
        self._env = env

    def __getitem__(self, name: str) -> Number:
        value = self._env[self._prog.var_ids[name]]
        if value is None:
            raise KeyError(name)
        return value

    def __iter__(self) -> Iterator[str]:
        return (name for i, name in enumerate(self._prog.symbols) if self._env[i] is not None)

    def __len__(self) -> int:
        return sum(1 for value in self._env if value is not None)


Observer = Callable[[str, ExecutionState], None]


class _Interpreter:

    def __init__(self, prog: MaapProgram, exact: bool, observer: Optional[Observer],
                 reverse_parallel: bool):
        self.prog = prog
        self.exact = exact
        self.observer = observer
        self.reverse_parallel = reverse_parallel
        self.env: List[Any] = [None] * len(prog.symbols)

    def run(self, instr: Instruction) -> None:
        env = self.env
        exact = self.exact
        if isinstance(instr, AssignAffine):
            env[instr.target] = instr.expr.evaluate(env, exact)
        elif isinstance(instr, AssignMax):
            env[instr.target] = max(t.evaluate(env, exact) for t in instr.terms)
        elif isinstance(instr, AssignMin):
            env[instr.target] = min(t.evaluate(env, exact) for t in instr.terms)
        elif isinstance(instr, Sequence):
            saved = [(v, env[v]) for v in instr.local_vars]
            for child in instr.body:
                self.run(child)
            if instr.label is not None and self.observer is not None:
                self.observer(instr.label, ExecutionState(self.prog, env))
            for v, value in saved:
                env[v] = value
        elif isinstance(instr, (DoParallel, ForDoParallel)):
            blocks = blocks_of(instr)
            # Write-disjoint blocks: any execution order gives the same state
            for block in (reversed(blocks) if self.reverse_parallel else blocks):
                self.run(block)
        elif isinstance(instr, ForDo):
            for block in instr.iterations:
                self.run(block)
        else:
            raise ProgramValidationError(f"unsupported instruction {type(instr).__name__}")


def interpret(prog: MaapProgram, inputs: List[Any], mode: Optional[Mode] = None,
              observer: Optional[Observer] = None,
              reverse_parallel: bool = False) -> List[Number]:
    """
    Execute prog on inputs and return the output variables' values.

    Args:
        prog: a valid program
        inputs: one value per input variable (int, Fraction, float or "p/q")
        mode: RATIONAL or FLOAT; inferred from the inputs when omitted
        observer: called with (label, state) at the end of every labelled
            sequence (instrumented debug mode)
        reverse_parallel: execute parallel blocks in reverse order

    Returns:
        Output values in the order of prog.outputs
    """
    if len(inputs) != len(prog.inputs):
        raise DimensionMismatchError(
            f"program expects {len(prog.inputs)} inputs, got {len(inputs)}")
    mode = mode or infer_mode(inputs)
    values = coerce(inputs, mode)
    machine = _Interpreter(prog, mode is Mode.RATIONAL, observer, reverse_parallel)
    for var, value in zip(prog.inputs, values):
        machine.env[var] = value
    try:
        machine.run(prog.body)
    except TypeError as e:
        # None in the environment: a read before any assignment
        raise ProgramValidationError(f"program read an unassigned variable: {e}")
    outputs = [machine.env[v] for v in prog.outputs]
    if any(value is None for value in outputs):
        raise ProgramValidationError("program left an output variable unassigned")
    if mode is Mode.RATIONAL:
        outputs = [check_exact(value) for value in outputs]
    return outputs


# ---------------------------------------------------------------------------
# Complexity ledger
# ---------------------------------------------------------------------------

def _extremum_cost(terms: Tuple[AffineExpr, ...]) -> Complexity:
    k = len(terms)
    if k < 2:
        return Complexity(0, 0, 0)
    if k == 2 and sum(1 for t in terms if t.is_constant) == 1:
        # ReLU form max{c, e}: one non-constant term carries the width/size charge
        return Complexity(1, 2, 4)
    return Complexity((k - 1).bit_length(), 2 * k, 4 * k)


def instruction_complexity(instr: Instruction) -> Complexity:
    if isinstance(instr, AssignAffine):
        return Complexity(0, 0, 0)
    if isinstance(instr, AssignExtremum):
        return _extremum_cost(instr.terms)
    parts = [instruction_complexity(child) for child in blocks_of(instr)]
    if not parts:
        return Complexity(0, 0, 0)
    if isinstance(instr, ParallelNode):
        return Complexity(max(p.d for p in parts), sum(p.w for p in parts), sum(p.s for p in parts))
    return Complexity(sum(p.d for p in parts), max(p.w for p in parts), sum(p.s for p in parts))


def complexity(prog: MaapProgram) -> Complexity:
    """The (d, w, s) ledger of prog."""
    return instruction_complexity(prog.body)


def count_instructions(prog: MaapProgram) -> int:
    return sum(1 for _ in iter_assignments(prog.body))


# ---------------------------------------------------------------------------
# Unrolling
# ---------------------------------------------------------------------------

def _unroll(instr: Instruction) -> Instruction:
    if isinstance(instr, Sequence):
        return Sequence(tuple(_unroll(c) for c in instr.body), instr.local_vars, instr.label)
    if isinstance(instr, ForDo):
        return Sequence(tuple(_unroll(b) for b in instr.iterations))
    if isinstance(instr, ForDoParallel):
        return DoParallel(tuple(_unroll(b) for b in instr.iterations))
    if isinstance(instr, DoParallel):
        return DoParallel(tuple(_unroll(b) for b in instr.blocks))
    return instr


def unroll(prog: MaapProgram) -> MaapProgram:
    """Replace For-Do loops by sequences and For-Do-Parallel loops by Do-Parallel."""
    return MaapProgram(prog.inputs, prog.outputs, _unroll(prog.body), prog.symbols, prog.meta)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def _rational_doc(value: Fraction) -> RationalDoc:
    return RationalDoc.construct(num=str(value.numerator), den=str(value.denominator))


def _affine_doc(expr: AffineExpr) -> AffineDoc:
    return AffineDoc.construct(
        constant=_rational_doc(expr.constant),
        terms=[TermDoc.construct(coef=_rational_doc(c), var=v) for c, v in expr.terms],
    )


def _seq_doc(instr: Sequence, loop: bool = False) -> SeqDoc:
    return SeqDoc.construct(kind="seq", loop=loop, label=instr.label,
                            locals=sorted(instr.local_vars),
                            body=[_instruction_doc(c) for c in instr.body])


def _instruction_doc(instr: Instruction):
    if isinstance(instr, AssignAffine):
        return AssignAffineDoc.construct(kind="affine", target=instr.target, expr=_affine_doc(instr.expr))
    if isinstance(instr, AssignExtremum):
        return AssignExtremumDoc.construct(
            kind="max" if isinstance(instr, AssignMax) else "min",
            target=instr.target, terms=[_affine_doc(t) for t in instr.terms])
    if isinstance(instr, Sequence):
        return _seq_doc(instr)
    if isinstance(instr, ForDo):
        return SeqDoc.construct(kind="seq", loop=True, label=None, locals=[],
                                body=[_seq_doc(b) for b in instr.iterations])
    if isinstance(instr, DoParallel):
        return ParDoc.construct(kind="par", loop=False, blocks=[_seq_doc(b) for b in instr.blocks])
    if isinstance(instr, ForDoParallel):
        return ParDoc.construct(kind="par", loop=True, blocks=[_seq_doc(b) for b in instr.iterations])
    raise ProgramValidationError(f"cannot serialize {type(instr).__name__}")


def serialize_program(prog: MaapProgram) -> bytes:
    """Deterministic JSON document for prog (`.maap.json`)."""
    doc = MaapDocument.construct(
        format="maap",
        variables=list(prog.symbols),
        inputs=list(prog.inputs),
        outputs=list(prog.outputs),
        body=_instruction_doc(prog.body),
        meta=dict(prog.meta) if prog.meta else None,
    )
    return (doc.json(indent=2, exclude_none=True) + "\n").encode("utf-8")


def _from_rational(doc: RationalDoc) -> Fraction:
    return Fraction(int(doc.num), int(doc.den))


def _from_affine(doc: AffineDoc) -> AffineExpr:
    return AffineExpr.of(_from_rational(doc.constant), [(_from_rational(t.coef), t.var) for t in doc.terms])


def _from_seq(doc: SeqDoc) -> Sequence:
    return Sequence(tuple(_from_instruction(c) for c in doc.body), frozenset(doc.locals), doc.label)


def _from_instruction(doc) -> Instruction:
    if isinstance(doc, AssignAffineDoc):
        return AssignAffine(doc.target, _from_affine(doc.expr))
    if isinstance(doc, AssignExtremumDoc):
        cls = AssignMax if doc.kind == "max" else AssignMin
        return cls(doc.target, tuple(_from_affine(t) for t in doc.terms))
    if isinstance(doc, SeqDoc):
        if doc.loop:
            iterations = []
            for child in doc.body:
                if not isinstance(child, SeqDoc):
                    raise DocumentParseError("loop iterations must be seq blocks", path="body")
                iterations.append(_from_seq(child))
            return ForDo(len(iterations), tuple(iterations))
        return _from_seq(doc)
    blocks = tuple(_from_seq(b) for b in doc.blocks)
    if doc.loop:
        return ForDoParallel(len(blocks), blocks)
    return DoParallel(blocks)


def load_json(data: Union[bytes, str]) -> Any:
    """json.loads with syntax errors mapped to DocumentParseError (line, column)."""
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as e:
            raise DocumentParseError(f"document is not UTF-8: {e}")
    if not data.strip():
        raise DocumentParseError("empty document", line=1, column=1)
    try:
        return json.loads(data)
    except json.JSONDecodeError as e:
        raise DocumentParseError(e.msg, line=e.lineno, column=e.colno)


def schema_error(e: PydanticValidationError) -> DocumentParseError:
    # union members all report; the deepest location names the real culprit
    worst = max(e.errors(), key=lambda err: len(err["loc"]))
    path = ".".join(str(p) for p in worst["loc"])
    return DocumentParseError(worst["msg"], path=path)


def deserialize_program(data: Union[bytes, str]) -> MaapProgram:
    """Parse a `.maap.json` document; the result is validated before it is returned."""
    raw = load_json(data)
    try:
        doc = MaapDocument.parse_obj(raw)
    except PydanticValidationError as e:
        raise schema_error(e)
    prog = MaapProgram(
        inputs=tuple(doc.inputs),
        outputs=tuple(doc.outputs),
        body=_from_instruction(doc.body),
        symbols=tuple(doc.variables),
        meta=dict(doc.meta or {}),
    )
    ensure_valid(prog)
    return prog


def render_program(prog: MaapProgram) -> str:
    """Pseudo-code listing of prog, one assignment per line."""
    lines: List[str] = [f"input {', '.join(prog.name(v) for v in prog.inputs)}"]

    def emit(instr: Instruction, indent: int) -> None:
        pad = "  " * indent
        if isinstance(instr, AssignAffine):
            lines.append(f"{pad}{prog.name(instr.target)} <- {instr.expr.render(prog.name)}")
        elif isinstance(instr, AssignExtremum):
            op = "max" if isinstance(instr, AssignMax) else "min"
            inner = ", ".join(t.render(prog.name) for t in instr.terms)
            lines.append(f"{pad}{prog.name(instr.target)} <- {op}{{{inner}}}")
        else:
            head = {Sequence: "do", DoParallel: "do parallel", ForDo: "for",
                    ForDoParallel: "for parallel"}[type(instr)]
            if isinstance(instr, Sequence) and instr.label:
                head = f"do  # {instr.label}"
            lines.append(f"{pad}{head}")
            for child in blocks_of(instr):
                emit(child, indent + 1)

    emit(prog.body, 1)
    lines.append(f"return {', '.join(prog.name(v) for v in prog.outputs)}")
    return "\n".join(lines)
