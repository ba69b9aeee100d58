"""Tests for the program representation, interpreter, ledger and documents."""

import io
import json
from fractions import Fraction

import pytest

from maapnet.cli import main
from maapnet.errors import (ArityError, DimensionMismatchError, DocumentParseError,
                            ProgramValidationError)
from maapnet.generators import SplitMix64, random_input, random_program
from maapnet.maap_core import (AffineExpr, AssignMax, Complexity, ForDo, MaapProgram,
                               ProgramBuilder, Sequence, complexity, count_instructions,
                               deserialize_program, ensure_valid, instruction_example_program,
                               interpret, render_program, serialize_program, unroll,
                               validate_program)
from maapnet.numeric import Mode


def codes(prog):
    return {v.code for v in validate_program(prog)}


def test_affine_expr_is_canonical():
    e = AffineExpr.of(1, [(2, 0), (3, 1), (-2, 0)])
    assert e.constant == 1
    assert e.terms == ((Fraction(3), 1),)
    assert e.coefficient(0) == 0


def test_affine_expr_arithmetic():
    e = AffineExpr.var(0) + AffineExpr.var(1, 2) - 3
    assert e.constant == -3
    assert e.coefficient(1) == 2
    assert (e * 0).is_constant
    assert (-e).coefficient(0) == -1
    assert (e - e) == AffineExpr.const(0)


def test_instruction_example_values():
    assert interpret(instruction_example_program(4), [1, 2, 3, 4]) == [6, 7, 20, 0]
    assert interpret(instruction_example_program(5), [1, 2, 3, 4, 5]) == [5, 7, 35, 0, 0]


def test_instruction_example_ledger():
    assert complexity(instruction_example_program(4)) == Complexity(4, 8, 28)
    assert count_instructions(instruction_example_program(4)) == 10


def test_instruction_example_needs_four_inputs():
    with pytest.raises(ArityError):
        instruction_example_program(3)


def test_float_mode_matches_exact_on_dyadic_inputs():
    prog = instruction_example_program(6)
    x = [Fraction(k, 4) for k in (3, -5, 7, 1, -2, 9)]
    exact = interpret(prog, x, Mode.RATIONAL)
    approx = interpret(prog, [float(v) for v in x])
    assert [float(v) for v in exact] == approx


def test_reverse_parallel_gives_same_outputs():
    rng = SplitMix64(7)
    for _ in range(10):
        prog = random_program(rng)
        x = random_input(rng, len(prog.inputs))
        assert interpret(prog, x) == interpret(prog, x, reverse_parallel=True)


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        interpret(instruction_example_program(4), [1, 2, 3])


def test_observer_sees_labelled_sequences():
    b = ProgramBuilder()
    x = b.var("x")
    prog = b.build([x], ["y"], [
        b.sequence([b.assign("t", b.expr(x) + 1)], label="step"),
        b.assign("y", b.expr("t", 2)),
    ])
    seen = []
    out = interpret(prog, [3], observer=lambda label, state: seen.append((label, state["t"])))
    assert out == [8]
    assert seen == [("step", 4)]


def test_single_term_extrema_become_affine():
    b = ProgramBuilder()
    instr = b.assign_max("y", [b.expr("x")])
    assert not isinstance(instr, AssignMax)


def test_use_before_def():
    b = ProgramBuilder()
    x = b.var("x")
    prog = b.build([x], ["y"], [b.assign("y", b.expr("z"))])
    assert "use-before-def" in codes(prog)


def test_locals_are_invisible_after_their_sequence():
    b = ProgramBuilder()
    x = b.var("x")
    prog = b.build([x], ["y"], [
        b.sequence([b.assign("t", b.expr(x))], local=["t"]),
        b.assign("y", b.expr("t")),
    ])
    assert "use-before-def" in codes(prog)


def test_parallel_write_conflicts():
    b = ProgramBuilder()
    x = b.var("x")
    twice = b.build([x], ["y"], [b.do_parallel([
        b.assign("y", b.expr(x)),
        b.assign("y", b.expr(x, 2)),
    ])])
    assert "write-conflict" in codes(twice)

    b = ProgramBuilder()
    x = b.var("x")
    b.var("y")
    crossing = b.build([x, "y"], ["y"], [b.do_parallel([
        b.assign("y", b.expr(x)),
        b.assign("z", b.expr("y")),
    ])])
    assert "write-conflict" in codes(crossing)


def test_parallel_blocks_may_share_locals():
    b = ProgramBuilder()
    x = b.var("x")
    prog = b.build([x], ["p", "q"], [b.do_parallel([
        b.sequence([b.assign("t", b.expr(x)), b.assign("p", b.expr("t"))], local=["t"]),
        b.sequence([b.assign("t", b.expr(x, 3)), b.assign("q", b.expr("t"))], local=["t"]),
    ])])
    assert validate_program(prog) == []
    assert interpret(prog, [2]) == [2, 6]


def test_structural_violations():
    b = ProgramBuilder()
    x = b.var("x")
    y = b.var("y")
    prog = b.build([x], ["w"], [
        AssignMax(y, (AffineExpr.var(x),)),
        ForDo(3, (Sequence(),)),
    ])
    assert {"arity", "trip-count", "undefined-output"} <= codes(prog)
    with pytest.raises(ProgramValidationError) as err:
        ensure_valid(prog)
    assert len(err.value.violations) >= 3


def test_random_programs_are_valid():
    rng = SplitMix64(11)
    for _ in range(25):
        assert validate_program(random_program(rng)) == []


def test_unroll_preserves_semantics_and_ledger():
    rng = SplitMix64(3)
    for _ in range(10):
        prog = random_program(rng)
        flat = unroll(prog)
        x = random_input(rng, len(prog.inputs))
        assert interpret(flat, x) == interpret(prog, x)
        assert complexity(flat) == complexity(prog)


def test_document_roundtrip():
    prog = instruction_example_program(5)
    data = serialize_program(prog)
    again = deserialize_program(data)
    assert again == prog
    assert again.meta == {"problem": "example", "n": 5}
    assert serialize_program(again) == data
    assert data.endswith(b"\n")


def test_document_roundtrip_keeps_locals_and_labels():
    rng = SplitMix64(5)
    for _ in range(5):
        prog = random_program(rng)
        assert deserialize_program(serialize_program(prog)) == prog


def test_document_errors():
    with pytest.raises(DocumentParseError):
        deserialize_program(b"")
    with pytest.raises(DocumentParseError) as err:
        deserialize_program(b'{"format": "maap",')
    assert err.value.line == 1
    with pytest.raises(DocumentParseError) as err:
        deserialize_program(b'{"format": "maap"}')
    assert err.value.path


def test_render_lists_every_assignment():
    prog = instruction_example_program(4)
    listing = render_program(prog)
    assert listing.startswith("input v[1], v[2], v[3], v[4]")
    assert "x[2] <- max{" in listing
    assert listing.endswith("return y[1], y[2], y[3], y[4]")


def max_document(local_ids):
    """y = max{x1, x2} inside a sequence declaring local_ids."""
    one = {"num": "1", "den": "1"}
    zero = {"num": "0", "den": "1"}
    return {
        "format": "maap",
        "variables": ["x1", "x2", "y"],
        "inputs": [0, 1],
        "outputs": [2],
        "body": {
            "kind": "seq",
            "locals": local_ids,
            "body": [{
                "kind": "max",
                "target": 2,
                "terms": [
                    {"constant": zero, "terms": [{"coef": one, "var": 0}]},
                    {"constant": zero, "terms": [{"coef": one, "var": 1}]},
                ],
            }],
        },
    }


def test_local_ids_are_range_checked():
    body = Sequence((AssignMax(2, (AffineExpr.var(0), AffineExpr.var(1))),), frozenset({-1, 7}))
    prog = MaapProgram((0, 1), (2,), body, ("x1", "x2", "y"))
    unknown = [v for v in validate_program(prog) if v.code == "unknown-variable"]
    assert len(unknown) == 2
    assert all("locals" in v.location for v in unknown)


def test_document_with_bad_local_ids(tmp_path):
    assert deserialize_program(json.dumps(max_document([])))
    with pytest.raises(DocumentParseError) as err:
        deserialize_program(json.dumps(max_document([-1])))
    assert "locals" in err.value.path
    with pytest.raises(ProgramValidationError):
        deserialize_program(json.dumps(max_document([99])))

    instances = tmp_path / "pairs.txt"
    instances.write_text("3 5\n")
    for local_ids in ([-1], [99]):
        doc = tmp_path / "bad.maap.json"
        doc.write_text(json.dumps(max_document(local_ids)))
        out = io.StringIO()
        code = main(["--no-log-file", "--log-level", "WARNING", "eval", str(doc), str(instances)], out=out)
        assert code == 2
        assert out.getvalue() == ""
