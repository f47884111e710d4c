"""
Exact checkers for allocations and protocol traces.

Checkers read valuations straight from the instance and never call protocol
code. Unfair allocations and failed claims come back as reports; only
allocations that do not partition their region raise.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import core.constants as constants
import core.utils as utils
from core.constants import GraphKind, Phase
from core.exact_cake import WHOLE, Allocation, Piece, value_of
from core.exceptions import IncompleteAllocation, NotALine
from core.helpers.claim_report import ClaimReport
from core.helpers.round_trace import Depth2RoundTrace, FiveLineRoundTrace, RoundTrace, TraceSink
from core.rw_oracle import Instance
from core.social_graph import SocialGraph, storage_sets


@dataclass(frozen=True)
class EnvyViolation:
    envier: int
    envied: int
    gap: Fraction

    def to_dict(self, labels: Optional[tuple[int, ...]] = None) -> dict:
        label = (lambda agent: labels[agent - 1]) if labels else (lambda agent: agent)
        return {"envier": label(self.envier), "envied": label(self.envied), "gap": utils.format_scalar(self.gap)}


@dataclass(frozen=True)
class EnvyReport:
    violations: tuple[EnvyViolation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self, labels: Optional[tuple[int, ...]] = None) -> dict:
        return {"envy_free": self.ok, "violations": [v.to_dict(labels) for v in self.violations]}


@dataclass(frozen=True)
class FairnessReport:
    """First failing k-Fair condition, if any."""
    k: int
    condition: Optional[str] = None
    agent: Optional[int] = None
    other: Optional[int] = None
    own_value: Optional[Fraction] = None
    other_value: Optional[Fraction] = None

    @property
    def ok(self) -> bool:
        return self.condition is None

    def to_dict(self) -> dict:
        result = {"k": self.k, "ok": self.ok}
        if not self.ok:
            result.update({
                "condition": self.condition,
                "agent": self.agent,
                "other": self.other,
                "own_value": utils.format_scalar(self.own_value),
                "other_value": utils.format_scalar(self.other_value),
            })
        return result


@dataclass
class VerificationReport:
    """Everything verify checks for one protocol result."""
    envy: EnvyReport
    ledger_total: int
    query_bound: Optional[int]
    claims: list[ClaimReport] = field(default_factory=list)

    @property
    def within_bound(self) -> bool:
        return self.query_bound is None or self.ledger_total <= self.query_bound

    @property
    def ok(self) -> bool:
        return self.envy.ok and self.within_bound and all(report.ok for report in self.claims)

    def to_dict(self, labels: Optional[tuple[int, ...]] = None) -> dict:
        return {
            "ok": self.ok,
            "envy": self.envy.to_dict(labels),
            "queries": self.ledger_total,
            "bound": self.query_bound,
            "within_bound": self.within_bound,
            "claims": [report.to_dict() for report in self.claims],
        }


def _require_complete(alloc: Allocation, region: Piece, n: int) -> None:
    if alloc.n != n:
        raise IncompleteAllocation(f"Allocation has {alloc.n} bundles for {n} agents")
    if not alloc.is_disjoint():
        raise IncompleteAllocation("Allocation bundles overlap")
    if alloc.union() != region:
        raise IncompleteAllocation(f"Allocation covers {alloc.union()}, expected {region}")


def is_locally_envy_free(instance: Instance, alloc: Allocation) -> EnvyReport:
    """
    Compare every agent's bundle with her neighbours' on every edge of the social graph.

    Raises:
        IncompleteAllocation: bundles do not partition [0, 1]
    """
    _require_complete(alloc, WHOLE, instance.n)
    violations = []
    for child, parent in sorted(instance.graph.edges()):
        for envier, envied in ((child, parent), (parent, child)):
            valuation = instance.valuation(envier)
            gap = value_of(valuation, alloc.bundle(envied)) - value_of(valuation, alloc.bundle(envier))
            if gap > 0:
                violations.append(EnvyViolation(envier, envied, gap))
    return EnvyReport(tuple(sorted(violations, key=lambda v: (v.envier, v.envied))))


def _value(instance: Instance, agent: int, alloc: Allocation, bundle: int) -> Fraction:
    return value_of(instance.valuation(agent), alloc.bundle(bundle))


def is_k_fair_line(instance: Instance, alloc: Allocation, k: int, region: Piece = WHOLE) -> FairnessReport:
    """
    C1: a_i with i >= k does not envy a neighbour.
    C2: a_k values B_1..B_k equally.
    C3: a_{k+1} weakly prefers B_{k+1} to each of B_1..B_k.
    """
    if instance.graph.kind != GraphKind.LINE:
        raise NotALine(f"is_k_fair_line needs a line instance, got {instance.graph.kind.value}")
    n = instance.n
    if not 1 <= k <= n:
        raise ValueError(f"Level k must lie in [1, {n}], got {k}")
    _require_complete(alloc, region, n)

    for i in range(k, n + 1):
        own = _value(instance, i, alloc, i)
        for j in (i - 1, i + 1):
            if 1 <= j <= n and _value(instance, i, alloc, j) > own:
                return FairnessReport(k, "C1", i, j, own, _value(instance, i, alloc, j))

    own = _value(instance, k, alloc, k)
    for j in range(1, k):
        if _value(instance, k, alloc, j) != own:
            return FairnessReport(k, "C2", k, j, own, _value(instance, k, alloc, j))

    if k + 1 <= n:
        own = _value(instance, k + 1, alloc, k + 1)
        for j in range(1, k + 1):
            if _value(instance, k + 1, alloc, j) > own:
                return FairnessReport(k, "C3", k + 1, j, own, _value(instance, k + 1, alloc, j))

    return FairnessReport(k)


def is_k_fair_tree(instance: Instance, alloc: Allocation, k: int, region: Piece = WHOLE) -> FairnessReport:
    """
    For every a_j with j >= k:
    C1: no envy towards neighbours.
    C2: a_j values every bundle of Storage(k - 1, a_j) as her own.
    C3: a_j weakly prefers her bundle to every bundle in the storage of an active child.
    """
    graph = instance.graph
    n = instance.n
    view = storage_sets(graph, k, alloc)
    _require_complete(alloc, region, n)

    for j in range(k, n + 1):
        own = _value(instance, j, alloc, j)
        for neighbour in graph.neighbors(j):
            if _value(instance, j, alloc, neighbour) > own:
                return FairnessReport(k, "C1", j, neighbour, own, _value(instance, j, alloc, neighbour))

    for j in range(k, n + 1):
        own = _value(instance, j, alloc, j)
        for i in sorted(view.storage[j]):
            if _value(instance, j, alloc, i) != own:
                return FairnessReport(k, "C2", j, i, own, _value(instance, j, alloc, i))

    for j in range(k, n + 1):
        own = _value(instance, j, alloc, j)
        for child in graph.children(j):
            if child <= view.threshold:
                continue
            for i in sorted(view.storage[child]):
                if _value(instance, j, alloc, i) > own:
                    return FairnessReport(k, "C3", j, i, own, _value(instance, j, alloc, i))

    return FairnessReport(k)


def check_level_outputs(trace: TraceSink, instance: Instance) -> ClaimReport:
    """Every captured recursive output partitions its region and is k-Fair for its level."""
    report = ClaimReport("level_outputs")
    checker = is_k_fair_line if instance.graph.kind == GraphKind.LINE else is_k_fair_tree
    for output in trace.level_outputs:
        complete = output.allocation.is_complete_over(output.region)
        report.check("complete", complete, call_id=output.call_id, level=output.level)
        if not complete:
            continue
        fairness = checker(instance, output.allocation, output.level, output.region)
        report.check("k_fair", fairness.ok, call_id=output.call_id, **fairness.to_dict())
    return report


def _domination_calls(trace: TraceSink) -> dict[int, list[RoundTrace]]:
    calls: dict[int, list[RoundTrace]] = {}
    for record in trace.rounds:
        if isinstance(record, RoundTrace):
            calls.setdefault(record.call_id, []).append(record)
    return calls


def check_trace_claims(trace: TraceSink, instance: Instance) -> ClaimReport:
    """
    Per-round claims of a domination trace, recomputed from the recorded pieces.

    For each level call with d candidates and observer o:
        rounds are numbered 1..m with m <= ceil(d(1 + ln d)) + 1
        at most one Equal round, and only as the last round
        v_o(next residue) <= (1 - 1/d) v_o(residue)
        the observer's lead over each candidate never shrinks across Trim rounds
        and stays non-negative after the Equal round
        for d >= 2 the residue ceil(d ln d) rounds after a Trim round t is worth
        at most the largest amount trimmed in round t

    Traces of alg2 and the five-agent protocol are dispatched to their own checks.
    """
    if any(isinstance(record, Depth2RoundTrace) for record in trace.rounds):
        return check_depth2_trace(trace, instance)
    if any(isinstance(record, FiveLineRoundTrace) for record in trace.rounds):
        return check_five_line_trace(trace, instance)

    report = ClaimReport("domination_trace")
    for call_id, records in _domination_calls(trace).items():
        d = len(records[0].candidates)
        observer = records[0].observer
        valuation = instance.valuation(observer)

        report.check("consecutive_rounds", [r.round for r in records] == list(range(1, len(records) + 1)), call_id=call_id)
        bound = utils.ceil_log_bound(d)
        report.check("round_bound", len(records) <= bound, call_id=call_id, level=records[0].level, rounds=len(records), bound=bound)
        equal_rounds = [r.round for r in records if r.phase == Phase.EQUAL]
        report.check("equal_last", not equal_rounds or equal_rounds == [records[-1].round], call_id=call_id, equal_rounds=equal_rounds)

        factor = 1 - Fraction(1, d)
        previous: dict[int, Fraction] = {i: Fraction(0) for i in records[0].candidates}
        for record in records:
            residue_value = value_of(valuation, record.residue)
            next_value = value_of(valuation, record.next_residue)
            report.check("residue_decay", next_value <= factor * residue_value,
                         call_id=call_id, round=record.round, residue_value=residue_value, next_residue_value=next_value)

            bundles = dict(record.bundles)
            lead = value_of(valuation, bundles[observer])
            for i in record.candidates:
                gap = lead - value_of(valuation, bundles[i])
                if record.phase == Phase.TRIM:
                    report.check("monotone_gap", gap >= previous[i], call_id=call_id, round=record.round, candidate=i, gap=gap, previous=previous[i])
                else:
                    report.check("final_gap", gap >= 0, call_id=call_id, round=record.round, candidate=i, gap=gap)
                previous[i] = gap

        if d >= 2:
            delay = math.ceil(d * math.log(d))
            by_round = {record.round: record for record in records}
            for record in records:
                later = by_round.get(record.round + delay)
                if record.phase != Phase.TRIM or later is None:
                    continue
                observed = value_of(valuation, record.observer_piece)
                c_t = max(observed - value_of(valuation, piece) for piece in record.handed)
                later_value = value_of(valuation, later.residue)
                report.check("delayed_decay", later_value <= c_t,
                             call_id=call_id, round=record.round, later_round=later.round, residue_value=later_value, c_t=c_t)

    if not report.ok:
        utils.logger.error(f"Trace claims failed: {report.violations[0]}")
    return report


def check_five_line_trace(trace: TraceSink, instance: Instance) -> ClaimReport:
    """
    After round 1 the cutter leads one trimmed bundle by at least 2/5 of the trimming;
    that side equalizes in round 2, both sides equalize in round 3 and the
    final residue is empty.
    """
    report = ClaimReport("five_line_trace")
    records = [record for record in trace.rounds if isinstance(record, FiveLineRoundTrace)]
    report.check("three_rounds", [r.round for r in records] == [1, 2, 3], rounds=[r.round for r in records])
    if len(records) != 3:
        return report

    cutter = instance.valuation(3)
    first, second, third = records
    threshold = Fraction(2, 5) * value_of(cutter, first.next_residue)
    root_value = value_of(cutter, first.root_bundle)
    left_gap = root_value - value_of(cutter, first.trimmed_bundles[0])
    right_gap = root_value - value_of(cutter, first.trimmed_bundles[1])
    report.check("dominance_after_round_1", left_gap >= threshold or right_gap >= threshold,
                 left_gap=left_gap, right_gap=right_gap, threshold=threshold)

    report.check("round_1_trims", first.phases == (Phase.TRIM, Phase.TRIM), phases=list(first.phases))
    expected = (Phase.EQUAL, Phase.TRIM) if left_gap >= threshold else (Phase.TRIM, Phase.EQUAL)
    report.check("round_2_phases", second.phases == expected, phases=list(second.phases), expected=list(expected))
    report.check("round_3_equals", third.phases == (Phase.EQUAL, Phase.EQUAL), phases=list(third.phases))
    report.check("residue_exhausted", third.next_residue.is_empty, residue=third.next_residue)
    return report


def _depth2_round_claims(report: ClaimReport, records: list[Depth2RoundTrace], graph: SocialGraph,
                         root_values: list[tuple[Fraction, Fraction]]) -> None:
    """Decay, physical cut and round-count claims shared by both alg2 trace checks."""
    n = graph.n
    d_count = len(graph.children(graph.root))
    factor = 1 - Fraction(d_count + 1, n)

    for record, (residue_value, next_value) in zip(records, root_values):
        report.check("residue_decay", next_value <= factor * residue_value,
                     round=record.round, residue_value=residue_value, next_residue_value=next_value)
        report.check("residue_non_increasing", next_value <= residue_value, round=record.round)
        report.check("physical_cuts", record.physical_cuts <= constants.PHYSICAL_CUT_FACTOR * n,
                     round=record.round, physical_cuts=record.physical_cuts)

    if graph.kind == GraphKind.TWO_STAR:
        for earlier, later in zip(records, records[1:]):
            report.check("two_round_removal", len(later.trimmers_after) < len(earlier.trimmers_before),
                         round=earlier.round, before=list(earlier.trimmers_before), after=list(later.trimmers_after))
        report.check("two_star_rounds", len(records) <= 2 * n, rounds=len(records), bound=2 * n)
    else:
        bound = constants.DEPTH2_ROUND_FACTOR * n * n * math.ceil(math.log(n) + 1)
        report.check("depth2_rounds", len(records) <= bound, rounds=len(records), bound=bound)


def check_depth2_rounds(trace: TraceSink, graph: SocialGraph) -> ClaimReport:
    """
    Round-level claims of an alg2 trace from the root values recorded with it.

    Residue decay by (1 - (|D| + 1) / n) per round, physical cuts per round,
    the overall round bound and, on 2-Star graphs, removal of a trimmer in
    every window of two rounds.
    """
    report = ClaimReport("alg2_round_bounds")
    records = [record for record in trace.rounds if isinstance(record, Depth2RoundTrace)]
    _depth2_round_claims(report, records, graph, [(r.residue_value, r.next_residue_value) for r in records])
    return report


def check_depth2_trace(trace: TraceSink, instance: Instance) -> ClaimReport:
    """
    Round-level claims of an alg2 trace, recomputed from the recorded pieces.

    The round claims of check_depth2_rounds on exact root values, plus
    equal-valued child bundles after every round, no root envy at
    termination and an empty trimmer set and residue after the last round.
    """
    report = ClaimReport("depth2_trace")
    records = [record for record in trace.rounds if isinstance(record, Depth2RoundTrace)]
    graph = instance.graph
    root_valuation = instance.valuation(graph.root)

    root_values = [(value_of(root_valuation, r.residue), value_of(root_valuation, r.next_residue)) for r in records]
    _depth2_round_claims(report, records, graph, root_values)
    for record in records:
        for child, bundles in record.child_bundles:
            valuation = instance.valuation(child)
            values = {value_of(valuation, bundle) for bundle in bundles}
            report.check("equal_child_bundles", len(values) == 1, round=record.round, child=child, values=sorted(values))

    if records:
        last = records[-1]
        root_value = value_of(root_valuation, last.root_bundle)
        for child, bundles in last.child_bundles:
            for k, bundle in enumerate(bundles):
                other = value_of(root_valuation, bundle)
                report.check("root_no_envy", root_value >= other, child=child, bundle=k, root_value=root_value, other_value=other)
        report.check("trimmers_exhausted", not last.trimmers_after, trimmers=list(last.trimmers_after))
        report.check("residue_allocated", last.next_residue.is_empty, residue=last.next_residue)

    if not report.ok:
        utils.logger.error(f"alg2 trace claims failed: {report.violations[0]}")
    return report
