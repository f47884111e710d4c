"""
Instance generation, protocol dispatch, verification and bench sweeps.
"""

import time
from dataclasses import dataclass, field
from fractions import Fraction
from multiprocessing import Pool
from typing import Any, Optional

import numpy as np  # type: ignore

import core.constants as constants
import core.utils as utils
from core.constants import GraphKind, ProtocolName
from core.exact_cake import Allocation, Valuation
from core.exceptions import BadShapeParams, VerificationFailed, WrongShape
from core.helpers.bench_record import BenchRecord
from core.helpers.claim_report import ClaimReport
from core.helpers.round_trace import TraceSink
from core.protocol_depth2 import alg2, alg2_query_bound
from core.protocol_direct import alg1_four_line, alg_five_line, star_cut_and_choose
from core.protocol_domination import query_bound, run_domination
from core.reporting import BenchReport
from core.rw_oracle import Instance, QueryLedger
from core.social_graph import SocialGraph, sample_graph
from core.verifier import VerificationReport, check_level_outputs, check_trace_claims, is_locally_envy_free


def generate_valuation(rng: np.random.Generator, segments: int, max_denominator: int) -> Valuation:
    """
    Piecewise-constant valuation with breakpoints on the 1/max_denominator grid.

    Densities are integer weights in [1, MAX_DENSITY_WEIGHT] scaled so the
    cake is worth exactly 1.
    """
    q = max_denominator
    interior = sorted(int(b) for b in rng.choice(np.arange(1, q), size=segments - 1, replace=False)) if segments > 1 else []
    breakpoints = [Fraction(0)] + [Fraction(b, q) for b in interior] + [Fraction(1)]
    weights = [int(w) for w in rng.integers(1, constants.MAX_DENSITY_WEIGHT + 1, size=segments)]
    mass = sum((w * (hi - lo) for w, lo, hi in zip(weights, breakpoints, breakpoints[1:])), Fraction(0))
    return Valuation(tuple(breakpoints), tuple(Fraction(w) / mass for w in weights))


def generate_instance(seed: int, n: int, kind: GraphKind, segments: int = constants.DEFAULT_SEGMENTS, max_denominator: int = constants.MAX_DENOMINATOR) -> Instance:
    """
    Deterministic random instance: the graph is drawn first, then one valuation per agent.

    Args:
        seed: Seed of numpy's default_rng
        n: Number of agents, at least 2
        kind: Graph kind
        segments: Segments per valuation, at least 1
        max_denominator: Grid denominator for breakpoints

    Raises:
        BadShapeParams: n < 2, segments < 1 or more segments than grid cells
    """
    if n < 2:
        raise BadShapeParams(f"Instances need at least 2 agents, got {n}")
    if segments < 1:
        raise BadShapeParams(f"Valuations need at least 1 segment, got {segments}")
    if segments > max_denominator:
        raise BadShapeParams(f"{segments} segments do not fit a grid of denominator {max_denominator}")

    rng = np.random.default_rng(seed)
    graph = sample_graph(GraphKind(kind), n, rng)
    valuations = tuple(generate_valuation(rng, segments, max_denominator) for _ in range(n))
    return Instance(valuations, graph)


def valuation_to_json(valuation: Valuation) -> dict:
    return {
        "breakpoints": [utils.format_scalar(b) for b in valuation.breakpoints],
        "densities": [utils.format_scalar(d) for d in valuation.densities],
    }


def instance_to_json(instance: Instance) -> dict:
    """Instance JSON keyed by original agent labels."""
    graph = instance.graph
    parent_by_label: list[Optional[int]] = [None] * instance.n
    for agent in range(1, instance.n + 1):
        p = graph.parent_of(agent)
        parent_by_label[instance.label_of(agent) - 1] = None if p is None else instance.label_of(p)
    return {
        "n": instance.n,
        "graph": {"kind": graph.kind.value, "parent": parent_by_label},
        "valuations": [valuation_to_json(v) for v in instance.valuations_by_label()],
    }


def instance_from_json(data: dict) -> Instance:
    try:
        graph = SocialGraph.from_labels(GraphKind(data["graph"]["kind"]), list(data["graph"]["parent"]))
        valuations = [
            Valuation(
                tuple(utils.parse_scalar(b) for b in entry["breakpoints"]),
                tuple(utils.parse_scalar(d) for d in entry["densities"]),
            )
            for entry in data["valuations"]
        ]
    except (KeyError, TypeError) as e:
        raise ValueError(f"Malformed instance JSON: {e}") from e
    if "n" in data and data["n"] != len(valuations):
        raise ValueError(f"Instance declares n = {data['n']} but lists {len(valuations)} valuations")
    return Instance.from_labels(graph, valuations)


def protocol_bound(protocol: ProtocolName, kind: GraphKind, n: int) -> int:
    """Proven bound on charged cut + eval queries of one run."""
    protocol = ProtocolName(protocol)
    if protocol == ProtocolName.DOMINATION:
        return query_bound(n)
    if protocol == ProtocolName.ALG1:
        return constants.ALG1_CUTS + constants.ALG1_EVALS
    if protocol == ProtocolName.ALG5:
        return constants.ALG5_CUTS + constants.ALG5_EVALS
    if protocol == ProtocolName.STAR:
        return (n - 1) + n * (n + 1) // 2 - 1
    return alg2_query_bound(kind, n)


@dataclass
class RunResult:
    protocol: ProtocolName
    allocation: Allocation
    ledger: QueryLedger
    trace: TraceSink
    ms: int = 0

    def to_json(self, instance: Instance) -> dict:
        """Result JSON with bundles and per-agent counters keyed by original label."""
        return {
            "protocol": self.protocol.value,
            "allocation": utils.allocation_to_json(Allocation(tuple(instance.bundles_by_label(self.allocation)))),
            "ledger": self.ledger.to_dict(instance.graph.labels),
            "rounds": self.trace.rounds_summary(),
        }


def execute(instance: Instance, protocol: ProtocolName, trace: Optional[TraceSink] = None) -> RunResult:
    """
    Run a protocol without verifying its output.

    Raises:
        WrongShape: the protocol does not accept the instance's graph kind
    """
    protocol = ProtocolName(protocol)
    kind = instance.graph.kind
    if kind not in constants.PROTOCOL_GRAPHS[protocol]:
        raise WrongShape(f"{protocol.value} does not run on {kind.value} graphs")
    trace = trace if trace is not None else TraceSink(enabled=False)
    ledger = QueryLedger(instance.n)

    if protocol == ProtocolName.DOMINATION:
        allocation = run_domination(instance, ledger, trace)
    elif protocol == ProtocolName.ALG1:
        allocation = alg1_four_line(instance, ledger)
    elif protocol == ProtocolName.ALG5:
        allocation = alg_five_line(instance, ledger, trace)
    elif protocol == ProtocolName.ALG2:
        allocation = alg2(instance, ledger, trace)
    else:
        allocation = star_cut_and_choose(instance, ledger)
    return RunResult(protocol, allocation, ledger, trace)


def _ledger_claims(instance: Instance, result: RunResult) -> ClaimReport:
    report = ClaimReport("ledger")
    ledger = result.ledger
    n = instance.n
    if result.protocol == ProtocolName.ALG1:
        report.check("exact_counts", (ledger.cut_count, ledger.eval_count) == (constants.ALG1_CUTS, constants.ALG1_EVALS),
                     cut=ledger.cut_count, eval=ledger.eval_count)
    elif result.protocol == ProtocolName.ALG5:
        report.check("exact_counts", (ledger.cut_count, ledger.eval_count) == (constants.ALG5_CUTS, constants.ALG5_EVALS),
                     cut=ledger.cut_count, eval=ledger.eval_count)
    elif result.protocol == ProtocolName.STAR:
        report.check("star_cuts", ledger.cut_count == n - 1, cut=ledger.cut_count)
        report.check("star_evals", ledger.eval_count <= n * (n - 1) // 2 + (n - 1), eval=ledger.eval_count)
    elif result.protocol == ProtocolName.ALG2 and instance.graph.kind == GraphKind.TWO_STAR:
        bound = constants.TWO_STAR_CUT_FACTOR * n * n
        report.check("two_star_cuts", ledger.cut_count <= bound, cut=ledger.cut_count, bound=bound)
    return report


def verify(instance: Instance, result: RunResult) -> VerificationReport:
    """Independent check of a run: envy, query bound, ledger claims and any recorded trace."""
    claims = [_ledger_claims(instance, result)]
    trace = result.trace
    if trace.enabled and trace.rounds:
        claims.append(check_trace_claims(trace, instance))
    if trace.level_outputs:
        claims.append(check_level_outputs(trace, instance))

    return VerificationReport(
        envy=is_locally_envy_free(instance, result.allocation),
        ledger_total=result.ledger.total,
        query_bound=protocol_bound(result.protocol, instance.graph.kind, instance.n),
        claims=claims,
    )


def run(instance: Instance, protocol: ProtocolName, trace_enabled: bool = constants.TRACE_ENABLED, capture_levels: bool = False) -> tuple[RunResult, VerificationReport]:
    """
    Execute and verify; a run is only reported after the verifier passes.

    Raises:
        VerificationFailed: carrying the failed VerificationReport
    """
    trace = TraceSink(enabled=trace_enabled, capture_levels=capture_levels)
    result = execute(instance, protocol, trace)
    report = verify(instance, result)
    if not report.ok:
        utils.logger.error(f"{result.protocol.value} failed verification: {report.to_dict(instance.graph.labels)}")
        raise VerificationFailed(f"{result.protocol.value} output failed verification", report)
    return result, report


@dataclass(frozen=True)
class BenchTask:
    protocol: ProtocolName
    graph: GraphKind
    n: int
    seed: int
    segments: int
    max_denominator: int
    timing: bool = False


@dataclass
class BenchConfig:
    tasks: list[BenchTask] = field(default_factory=list)
    workers: int = 1


def _expand(value: Any, as_range: bool) -> list[int]:
    if isinstance(value, int):
        return list(range(value)) if as_range else [value]
    if as_range:
        return [int(v) for v in value]
    lo, hi = value
    return list(range(int(lo), int(hi) + 1))


def load_bench_config(data: dict) -> BenchConfig:
    """
    Expand a bench config into tasks in sweep order.

    "n" is an int or an inclusive [lo, hi] pair; "seeds" is a count (seeds
    0..count-1) or an explicit list.
    """
    max_denominator = int(data.get("max_denominator", constants.MAX_DENOMINATOR))
    timing = bool(data.get("timing", False))
    tasks = []
    try:
        for sweep in data["sweeps"]:
            protocol = ProtocolName(sweep["protocol"])
            graph = GraphKind(sweep["graph"])
            segments = int(sweep.get("segments", constants.DEFAULT_SEGMENTS))
            for n in _expand(sweep["n"], as_range=False):
                for seed in _expand(sweep["seeds"], as_range=True):
                    tasks.append(BenchTask(protocol, graph, n, seed, segments, max_denominator, timing))
    except (KeyError, TypeError, ValueError) as e:
        raise ValueError(f"Invalid bench config: {e}") from e
    return BenchConfig(tasks, int(data.get("workers", 1)))


def bench_one(task: BenchTask) -> BenchRecord:
    """One bench run; failures are logged and recorded as not envy-free."""
    bound = protocol_bound(task.protocol, task.graph, task.n)
    try:
        instance = generate_instance(task.seed, task.n, task.graph, task.segments, task.max_denominator)
        start = time.perf_counter()
        result = execute(instance, task.protocol)
        ms = int((time.perf_counter() - start) * 1000) if task.timing else 0
        report = verify(instance, result)
        return BenchRecord(
            protocol=task.protocol.value,
            graph=task.graph.value,
            n=task.n,
            seed=task.seed,
            cut=result.ledger.cut_count,
            eval=result.ledger.eval_count,
            raw_eval=result.ledger.raw_eval,
            rounds=result.trace.total_rounds,
            bound=bound,
            envy_free=report.ok,
            ms=ms,
            rounds_per_level=result.trace.max_rounds_per_level(),
        )
    except Exception as e:
        utils.logger.error(f"Bench run {task.protocol.value}/{task.graph.value} n={task.n} seed={task.seed} failed: {e}")
        return BenchRecord(task.protocol.value, task.graph.value, task.n, task.seed, 0, 0, 0, 0, bound, False)


def bench(config: BenchConfig) -> BenchReport:
    utils.logger.info(f"Running {len(config.tasks)} bench run(s) with {config.workers} worker(s)")
    if config.workers > 1:
        with Pool(config.workers) as pool:
            records = pool.map(bench_one, config.tasks)
    else:
        records = [bench_one(task) for task in config.tasks]
    return BenchReport(records)
