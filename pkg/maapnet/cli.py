"""
Command-line interface.

    build  {mst,maxflow,min2}   write .maap.json / .relu.json documents
    eval   FILE INSTANCE        run a program or network on instances
    verify {mst,maxflow}        randomized equivalence against the oracles
    stats  FILE                 ledger / network statistics and bound checks

Exit codes: 0 success, 1 verification mismatch or violated bound,
2 usage, parse or validation error.
"""

import argparse
import logging
import os
import sys
from typing import List, Optional, Sequence, TextIO, Tuple

from . import config
from .compiler import compile_program, decompile, sequentialize
from .errors import DocumentParseError, GraphFormatError, MaapNetError
from .graphs import (FlowNetwork, is_graph_text, parse_flow_network,
                     parse_undirected_graph)
from .maap_core import (Complexity, MaapProgram, complexity, count_instructions,
                        deserialize_program, interpret, load_json, serialize_program)
from .maxflow_builder import build_maxflow_program, flow_value
from .mst_builder import build_mst_program, mst_input_vector
from .numeric import Mode, format_number, parse_rational
from .relu_net import (ReluNet, deserialize_net, evaluate, longest_path, min2_net,
                       serialize_net, stats)
from .utils.logging import setup_logging
from .verify import PROBLEMS, run_verification

logger = logging.getLogger("maapnet.cli")

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_ERROR = 2

FLOW_PROBLEMS = ("maxflow", "maxflow-value")


def size_range(text: str) -> List[int]:
    """`5` or `2..8` (inclusive)."""
    low, sep, high = text.partition("..")
    try:
        sizes = list(range(int(low), int(high) + 1)) if sep else [int(low)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected N or A..B, got {text!r}")
    if not sizes:
        raise argparse.ArgumentTypeError(f"empty size range {text!r}")
    return sizes


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="maapnet",
        description="Max-affine arithmetic programs and exact ReLU networks",
    )
    parser.add_argument("--log-level", default=config.LOG_LEVEL, help="logging level (default: %(default)s)")
    parser.add_argument("--log-dir", default=config.LOG_DIR, help="directory of the rotating log file")
    parser.add_argument("--no-log-file", action="store_true", help="log to stderr only")
    sub = parser.add_subparsers(dest="command", required=True)

    build = sub.add_parser("build", help="build a program and compile it to a network")
    build.add_argument("problem", choices=("mst", "maxflow", "min2"))
    build.add_argument("--n", type=int, help="number of vertices (mst)")
    build.add_argument("--graph", help="edge-list file: undirected for mst, directed for maxflow")
    build.add_argument("--sequential", action="store_true", help="width-reduced program")
    build.add_argument("--out-dir", default=config.OUTPUT_DIR, help="output directory (default: %(default)s)")
    build.add_argument("--no-net", action="store_true", help="write the program only")

    ev = sub.add_parser("eval", help="evaluate a .maap.json or .relu.json document")
    ev.add_argument("file")
    ev.add_argument("instance", help="numbers (one instance per line) or a graph file")
    ev.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.RATIONAL.value)

    verify = sub.add_parser("verify", help="compare against the oracles on random instances")
    verify.add_argument("problem", choices=PROBLEMS)
    verify.add_argument("--n", type=size_range, required=True, help="size N or range A..B")
    verify.add_argument("--trials", type=int, default=config.DEFAULT_TRIALS)
    verify.add_argument("--seed", type=int, default=config.DEFAULT_SEED)
    verify.add_argument("--workers", type=int, default=config.WORKERS)
    verify.add_argument("--no-net", action="store_true", help="skip the compiled-network comparison")
    verify.add_argument("--sequential", action="store_true", help="verify the width-reduced programs")

    st = sub.add_parser("stats", help="print complexity statistics")
    st.add_argument("file")
    return parser


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------

def _read_text(path: str) -> str:
    with open(path, "r", encoding="utf-8") as f:
        return f.read()


def _read_document(path: str):
    """Program or network stored at path, told apart by the `format` field."""
    with open(path, "rb") as f:
        data = f.read()
    raw = load_json(data)
    kind = raw.get("format") if isinstance(raw, dict) else None
    if kind == "maap":
        return deserialize_program(data)
    if kind == "relu-net":
        return deserialize_net(data)
    raise DocumentParseError(f"unknown document format {kind!r}", path="format")


def _write(path: str, data: bytes, out: TextIO) -> None:
    with open(path, "wb") as f:
        f.write(data)
    print(f"wrote {path}", file=out)


def _ledger_line(ledger: Complexity) -> str:
    return f"ledger d={ledger.d} w={ledger.w} s={ledger.s}"


def _net_line(net: ReluNet) -> str:
    depth, width, size = stats(net)
    return f"net depth={depth} width={width} size={size}"


def _parse_instances(text: str) -> List[List[str]]:
    instances = []
    for raw in text.splitlines():
        content = raw.split("#", 1)[0].replace(",", " ").strip()
        if content:
            instances.append(content.split())
    if not instances:
        raise DocumentParseError("instance file holds no numbers", line=1, column=1)
    return instances


def _graph_instance(text: str, meta: dict) -> List:
    """Pack a graph file into the input vector of the document's problem."""
    problem = meta.get("problem")
    if problem == "mst":
        if "n" not in meta:
            raise DocumentParseError("MST document has no vertex count", path="meta.n")
        return list(mst_input_vector(parse_undirected_graph(text), n=int(meta["n"])).weights)
    if problem in FLOW_PROBLEMS:
        topology = FlowNetwork.from_meta(meta)
        graph, caps = parse_flow_network(text)
        if graph.n != topology.n:
            raise GraphFormatError(f"graph has {graph.n} nodes, the program was built for {topology.n}")
        given = {arc: c for arc, c in zip(graph.arcs, caps) if c != 0 or topology.has_arc(*arc)}
        return list(topology.capacity_vector(given))
    raise DocumentParseError(f"graph instances need an mst or maxflow document, got {problem!r}",
                             path="meta.problem")


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def _build_target(args) -> Tuple[str, Optional[MaapProgram], Optional[ReluNet]]:
    if args.problem == "min2":
        net = min2_net()
        return "min2", decompile(net), net
    if args.problem == "mst":
        if args.graph:
            n = parse_undirected_graph(_read_text(args.graph)).n
        elif args.n is not None:
            n = args.n
        else:
            raise MaapNetError("build mst needs --n or --graph")
        prog = build_mst_program(n)
        stem = f"mst_{n}"
    else:
        if not args.graph:
            raise MaapNetError("build maxflow needs --graph")
        net, _ = parse_flow_network(_read_text(args.graph))
        prog = build_maxflow_program(net)
        stem = f"maxflow_{net.n}"
    if args.sequential:
        prog = sequentialize(prog)
        stem += "_seq"
    return stem, prog, None


def cmd_build(args, out: TextIO) -> int:
    stem, prog, net = _build_target(args)
    os.makedirs(args.out_dir, exist_ok=True)
    base = os.path.join(args.out_dir, stem)
    _write(base + ".maap.json", serialize_program(prog), out)
    print(_ledger_line(complexity(prog)), file=out)
    if args.no_net:
        return EXIT_OK
    if net is None:
        net = compile_program(prog)
    _write(base + ".relu.json", serialize_net(net), out)
    print(_net_line(net), file=out)
    return EXIT_OK


def cmd_eval(args, out: TextIO) -> int:
    doc = _read_document(args.file)
    mode = Mode(args.mode)
    text = _read_text(args.instance)
    if is_graph_text(text):
        instances = [_graph_instance(text, doc.meta)]
    else:
        instances = [[parse_rational(token) for token in tokens] for tokens in _parse_instances(text)]

    topology = FlowNetwork.from_meta(doc.meta) if doc.meta.get("problem") in FLOW_PROBLEMS else None
    for values in instances:
        if isinstance(doc, MaapProgram):
            outputs = interpret(doc, values, mode)
        else:
            outputs = evaluate(doc, values, mode)
        print(" ".join(format_number(v) for v in outputs), file=out)
        if topology is not None:
            x = outputs[:len(topology.forward_arcs)]
            print(f"flow_value={format_number(flow_value(topology, x))}", file=out)
    return EXIT_OK


def cmd_verify(args, out: TextIO) -> int:
    report = run_verification(
        args.problem, args.n, args.trials, seed=args.seed, workers=args.workers,
        check_net=not args.no_net, sequential=args.sequential,
    )
    for line in report.lines():
        print(line, file=out)
    return EXIT_OK if report.ok else EXIT_MISMATCH


def cmd_stats(args, out: TextIO) -> int:
    doc = _read_document(args.file)
    if isinstance(doc, MaapProgram):
        ledger = complexity(doc)
        print(_ledger_line(ledger), file=out)
        print(f"instructions={count_instructions(doc)}", file=out)
        net = compile_program(doc)
        print(_net_line(net), file=out)
        depth, width, size = stats(net)
        ok = depth <= ledger.d + 1 and width <= ledger.w and size <= ledger.s
        print(f"bound depth<={ledger.d + 1} width<={ledger.w} size<={ledger.s}: "
              f"{'ok' if ok else 'violated'}", file=out)
    else:
        depth, width, size = stats(doc)
        print(_net_line(doc), file=out)
        print(f"longest_path={longest_path(doc)}", file=out)
        ledger = complexity(decompile(doc))
        expected = Complexity(depth - 1, 2 * width, 4 * size)
        print(f"decompiled {_ledger_line(ledger)}", file=out)
        ok = ledger == expected
        print(f"bound d={expected.d} w={expected.w} s={expected.s}: {'ok' if ok else 'violated'}", file=out)
    return EXIT_OK if ok else EXIT_MISMATCH


COMMANDS = {
    "build": cmd_build,
    "eval": cmd_eval,
    "verify": cmd_verify,
    "stats": cmd_stats,
}


def main(argv: Optional[Sequence[str]] = None, out: Optional[TextIO] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.log_level, log_dir=args.log_dir, log_file=not args.no_log_file)
    out = out or sys.stdout
    try:
        return COMMANDS[args.command](args, out)
    except (MaapNetError, OSError) as e:
        logger.debug(f"{args.command} failed", exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
