"""
Randomized oracle equivalence.

For every size and trial index a fresh instance is drawn from
derive_seed(seed, size, index), evaluated by the program (exact) and,
optionally, by the compiled network (float), and compared with the
classical oracle. Any failure is reproducible from the seed it reports.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Tuple

from . import config
from .compiler import compile_program, sequentialize
from .errors import ArityError, MaapNetError
from .generators import SplitMix64, derive_seed, random_flow_network, random_weights
from .graphs import format_flow_network
from .maap_core import MaapProgram, interpret
from .maxflow_builder import build_maxflow_program, flow_value
from .mst_builder import build_mst_program
from .numeric import Mode, format_rational, relative_close
from .oracles import check_flow, edmonds_karp, kruskal
from .relu_net import ReluNet, evaluate

logger = logging.getLogger("maapnet.verify")

PROBLEMS = ("mst", "maxflow")


@dataclass(frozen=True)
class VerifyOptions:
    problem: str
    check_net: bool = True
    sequential: bool = False
    rtol: float = config.FLOAT_RTOL


@dataclass(frozen=True)
class InstanceResult:
    size: int
    index: int
    seed: int
    ok: bool
    instance: str = ""
    message: str = ""


@dataclass
class SizeReport:
    size: int
    trials: int
    passed: int = 0
    failed: int = 0
    first_failure: Optional[InstanceResult] = None

    def line(self) -> str:
        return f"size={self.size} trials={self.trials} pass={self.passed} fail={self.failed}"


@dataclass
class VerifyReport:
    problem: str
    sizes: List[SizeReport] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(s.failed == 0 for s in self.sizes)

    def lines(self) -> List[str]:
        out = [s.line() for s in self.sizes]
        for s in self.sizes:
            failure = s.first_failure
            if failure is not None:
                out.append(f"counterexample size={failure.size} index={failure.index} "
                           f"seed={failure.seed} reason={failure.message}")
                out.append(f"instance {failure.instance.strip()}")
        return out


@lru_cache(maxsize=None)
def _mst_artifacts(n: int, check_net: bool, sequential: bool) -> Tuple[MaapProgram, Optional[ReluNet]]:
    prog = build_mst_program(n)
    if sequential:
        prog = sequentialize(prog)
    return prog, compile_program(prog) if check_net else None


def _mst_instance(n: int, seed: int):
    x = random_weights(SplitMix64(seed), n)
    return x, " ".join(format_rational(w) for w in x.weights)


def _check_mst(n: int, index: int, seed: int, options: VerifyOptions, x, instance: str) -> InstanceResult:
    prog, net = _mst_artifacts(n, options.check_net, options.sequential)
    expected = kruskal(x)
    got = interpret(prog, list(x.weights), Mode.RATIONAL)[0]
    if got != expected:
        return InstanceResult(n, index, seed, False, instance, f"program={got} oracle={expected}")
    if net is not None:
        forwarded = evaluate(net, [float(w) for w in x.weights], Mode.FLOAT)[0]
        if not relative_close(forwarded, expected, options.rtol):
            return InstanceResult(n, index, seed, False, instance, f"network={forwarded} oracle={expected}")
    return InstanceResult(n, index, seed, True, instance)


def _maxflow_instance(n: int, seed: int):
    net, nu = random_flow_network(SplitMix64(seed), n)
    return (net, nu), format_flow_network(net, nu).replace("\n", "; ")


def _check_maxflow(n: int, index: int, seed: int, options: VerifyOptions, drawn,
                   instance: str) -> InstanceResult:
    net, nu = drawn
    prog = build_maxflow_program(net, sequential=options.sequential)
    _, expected = edmonds_karp(net, nu)
    x = interpret(prog, list(nu), Mode.RATIONAL)
    report = check_flow(net, nu, x)
    if not report.feasible:
        return InstanceResult(n, index, seed, False, instance, f"infeasible flow: {report.violations[0]}")
    value = flow_value(net, x)
    if value != expected:
        return InstanceResult(n, index, seed, False, instance, f"program value={value} oracle={expected}")
    if options.check_net:
        relu = compile_program(prog)
        forwarded = evaluate(relu, [float(c) for c in nu], Mode.FLOAT)
        net_value = flow_value(net, forwarded)
        if not relative_close(net_value, expected, options.rtol):
            return InstanceResult(n, index, seed, False, instance, f"network value={net_value} oracle={expected}")
    return InstanceResult(n, index, seed, True, instance)


CHECKERS = {
    "mst": (_mst_instance, _check_mst),
    "maxflow": (_maxflow_instance, _check_maxflow),
}


def check_instance(task: Tuple[int, int, int, VerifyOptions]) -> InstanceResult:
    """One trial; top-level so that worker processes can pickle it."""
    size, index, seed, options = task
    draw, checker = CHECKERS[options.problem]
    instance = ""
    try:
        drawn, instance = draw(size, seed)
        return checker(size, index, seed, options, drawn, instance)
    except MaapNetError as e:
        return InstanceResult(size, index, seed, False, instance, f"{type(e).__name__}: {e}")


def run_verification(problem: str, sizes: Iterable[int], trials: int,
                     seed: int = config.DEFAULT_SEED, workers: int = config.WORKERS,
                     check_net: bool = True, sequential: bool = False,
                     rtol: float = config.FLOAT_RTOL) -> VerifyReport:
    """
    Compare programs (and compiled networks) with the oracles on random instances.

    Args:
        problem: "mst" or "maxflow"
        sizes: vertex counts to test
        trials: instances per size
        seed: master seed
        workers: process count; 1 runs in-process
        check_net: also compare the compiled network in float mode
        sequential: verify the width-reduced programs

    Returns:
        Per-size pass/fail counts with the first counterexample of each size
    """
    if problem not in PROBLEMS:
        raise ValueError(f"unknown problem {problem!r}, expected one of {PROBLEMS}")
    options = VerifyOptions(problem, check_net, sequential, rtol)
    sizes = list(sizes)
    too_small = [n for n in sizes if n < 2]
    if too_small:
        raise ArityError(f"{problem} instances need at least 2 vertices, got sizes {too_small}")
    tasks = [(n, i, derive_seed(seed, n, i), options) for n in sizes for i in range(trials)]
    logger.info(f"verifying {problem}: sizes {sizes}, {trials} trials each, seed {seed}, workers {workers}")

    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(check_instance, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    else:
        results = [check_instance(task) for task in tasks]

    by_size: Dict[int, SizeReport] = {n: SizeReport(n, trials) for n in sizes}
    for result in sorted(results, key=lambda r: (r.size, r.index)):
        report = by_size[result.size]
        if result.ok:
            report.passed += 1
        else:
            report.failed += 1
            logger.error(f"{problem} size={result.size} index={result.index} seed={result.seed}: {result.message}")
            if report.first_failure is None:
                report.first_failure = result
    return VerifyReport(problem, [by_size[n] for n in sizes])


def replay(problem: str, size: int, seed: int, check_net: bool = True,
           sequential: bool = False) -> InstanceResult:
    """Re-run the single trial identified by a reported seed."""
    return check_instance((size, 0, seed, VerifyOptions(problem, check_net, sequential)))
