"""
Recursive Domination(R, k) for Line and Tree instances.

Domination(R, k) repeatedly asks Domination(R, k + 1) for an allocation of
the residue R, lets a_k pick the bundles meant for her subtree, and either
trims them (while the observer, a_k's parent, does not yet dominate every
candidate by more than the residue is worth) or equalizes them and stops.
A residue the observer values at 0 is equalized at once.
The returned allocation of R is k-Fair.
"""

import math
from fractions import Fraction
from typing import Optional

import core.constants as constants
import core.utils as utils
from core.constants import GraphKind, Phase
from core.exact_cake import EMPTY, WHOLE, Allocation, Piece, value_of
from core.exceptions import NotALine, NotATree, RoundLimitExceeded
from core.helpers.round_trace import RoundTrace, TraceSink
from core.procedures import PhysicalCuts, eq_div, equal, lowest_position, rank_pieces, trim
from core.rw_oracle import Instance, QueryLedger, RobertsonWebbOracle
from core.social_graph import topological_check


def query_bound(n: int) -> int:
    """ceil(2n * 3^n * n! * (ln n)^n), the total query bound of the line protocol."""
    if n < 2:
        raise ValueError(f"query_bound needs n >= 2, got {n}")
    return math.ceil(2 * n * 3 ** n * math.factorial(n) * math.log(n) ** n)


def round_limit(candidates: int) -> int:
    return constants.ROUND_LIMIT_FACTOR * utils.ceil_log_bound(candidates) + 10


def _base_case(oracle: RobertsonWebbOracle, region: Piece, trace: TraceSink) -> Allocation:
    n = oracle.instance.n
    allocation = Allocation(tuple(eq_div(oracle, n, region, n)))
    if trace.capture_levels:
        trace.close_call(trace.open_call(n), n, region, allocation)
    return allocation


class _LevelRound:
    """Bookkeeping shared by the line and tree variants for one level call."""

    def __init__(self, oracle: RobertsonWebbOracle, k: int, observer: int, slots: list[int], region: Piece, trace: TraceSink):
        """
        Args:
            oracle: Query oracle
            k: Level, also the selecting agent
            observer: a_k's parent, who judges domination
            slots: Bundle indices a_k's pieces are handed to (D_k ascending)
            region: Piece being divided at this level
            trace: Trace sink
        """
        self.oracle = oracle
        self.k = k
        self.observer = observer
        self.slots = slots
        self.trace = trace
        self.call_id = trace.open_call(k)
        self.bundles = {i: EMPTY for i in range(1, oracle.instance.n + 1)}
        self.counter = 0
        self.rounds = 0
        self.limit = round_limit(len(slots))

    def begin(self) -> int:
        self.rounds += 1
        if self.rounds > self.limit:
            raise RoundLimitExceeded(
                f"Level {self.k} exceeded {self.limit} rounds with {len(self.slots)} candidates"
            )
        return self.rounds

    def give(self, index: int, piece: Piece) -> None:
        self.bundles[index] = self.bundles[index].union(piece)

    def dominated(self, residue: Piece) -> bool:
        """True when the observer leads every candidate by more than the residue is worth."""
        cached = self.oracle.cached_value
        lead = cached(self.observer, self.bundles[self.observer])
        worth = cached(self.observer, residue)
        return not any(lead - cached(self.observer, self.bundles[i]) <= worth for i in self.slots)

    def worthless(self, residue: Piece) -> bool:
        """True when the observer values the residue at 0."""
        return self.oracle.cached_value(self.observer, residue) == 0

    def settle(self, residue: Piece, observer_piece: Piece, pieces: list[Piece]) -> Piece:
        """
        Trim or equalize a_k's pieces, hand them to the slots and record the round.

        Args:
            residue: Residue this round divided
            observer_piece: Piece the observer received this round
            pieces: a_k's chosen pieces in selection order

        Returns:
            The residue for the next round
        """
        cuts = PhysicalCuts()
        counter = self.counter
        winner: Optional[int] = None

        # Equalizing a residue worth 0 to the observer leaves all her gaps unchanged
        if not (self.dominated(residue) or self.worthless(residue)):
            phase = Phase.TRIM
            trimmed, next_residue = trim(self.oracle, self.k, pieces, cuts)
            if len(trimmed) > 1:
                observer_values = [self.oracle.eval_piece(self.observer, piece) for piece in trimmed]
                smallest = lowest_position(observer_values)
            else:
                smallest = 0
            winner = self.slots[self.counter % len(self.slots)]
            handed = {winner: trimmed[smallest]}
            others = [piece for position, piece in enumerate(trimmed) if position != smallest]
            for slot in self.slots:
                if slot != winner:
                    handed[slot] = others.pop(0)
            self.counter += 1
        else:
            phase = Phase.EQUAL
            equalized, _ = equal(self.oracle, self.k, pieces, cuts)
            handed = dict(zip(self.slots, equalized))
            next_residue = EMPTY

        for slot in self.slots:
            self.give(slot, handed[slot])

        self._record(phase, counter, winner, residue, next_residue, observer_piece, handed, cuts.count)
        return next_residue

    def _record(self, phase, counter, winner, residue, next_residue, observer_piece, handed, physical_cuts) -> None:
        if not self.trace.enabled:
            self.trace.record(self.call_id, None)
            return
        valuation = self.oracle.instance.valuation(self.observer)
        observer_value = value_of(valuation, observer_piece)
        handed_pieces = tuple(handed[slot] for slot in self.slots)
        handed_values = tuple(value_of(valuation, piece) for piece in handed_pieces)
        max_trimmed = max((observer_value - v for v in handed_values), default=Fraction(0)) if phase == Phase.TRIM else Fraction(0)
        snapshot = tuple((i, self.bundles[i]) for i in [self.observer] + self.slots)
        self.trace.record(self.call_id, RoundTrace(
            call_id=self.call_id,
            level=self.k,
            round=self.rounds,
            agent=self.k,
            observer=self.observer,
            candidates=tuple(self.slots),
            phase=phase,
            counter=counter,
            winner=winner,
            residue=residue,
            next_residue=next_residue,
            observer_piece=observer_piece,
            handed=handed_pieces,
            bundles=snapshot,
            physical_cuts=physical_cuts,
            residue_value=value_of(valuation, residue),
            observer_value=observer_value,
            handed_values=handed_values,
            max_trimmed=max_trimmed,
        ))

    def finish(self, region: Piece) -> Allocation:
        allocation = Allocation.from_mapping(self.oracle.instance.n, self.bundles)
        self.trace.close_call(self.call_id, self.k, region, allocation)
        utils.logger.debug(f"Level {self.k} settled in {self.rounds} round(s)")
        return allocation


def domination_line(oracle: RobertsonWebbOracle, region: Piece, k: int, trace: Optional[TraceSink] = None) -> Allocation:
    """
    Domination(R, k) on a Line: returns a k-Fair allocation of region.

    Args:
        oracle: Query oracle over a Line instance
        region: Piece R to divide
        k: Level, 1 <= k <= n
        trace: Trace sink shared by the whole recursion
    """
    graph = oracle.instance.graph
    if graph.kind != GraphKind.LINE:
        raise NotALine(f"domination_line needs a line instance, got {graph.kind.value}")
    n = graph.n
    if not 1 <= k <= n:
        raise ValueError(f"Level k must lie in [1, {n}], got {k}")
    trace = trace if trace is not None else TraceSink(enabled=False)

    if k == n:
        return _base_case(oracle, region, trace)

    level = _LevelRound(oracle, k, k + 1, list(range(1, k + 1)), region, trace)
    residue = region
    while not residue.is_empty:
        level.begin()
        inner = domination_line(oracle, residue, k + 1, trace)

        # Bundles of agents beyond the observer pass through untouched
        for j in range(k + 2, n + 1):
            level.give(j, inner.bundle(j))

        candidates = [inner.bundle(i) for i in range(1, k + 2)]
        order = rank_pieces(oracle, k, candidates)
        chosen = [candidates[position] for position in order[:k]]
        observer_piece = candidates[order[k]]
        level.give(k + 1, observer_piece)

        residue = level.settle(residue, observer_piece, chosen)

    return level.finish(region)


def domination_tree(oracle: RobertsonWebbOracle, region: Piece, k: int, trace: Optional[TraceSink] = None) -> Allocation:
    """
    Domination(R, k) on a rooted tree: returns a tree k-Fair allocation of region.

    a_k selects d_k bundles from Storage(k, a_{p_k}); the chosen bundles are
    re-indexed onto D_k in ascending order and the displaced ones take the
    vacated indices, again ascending.
    """
    graph = oracle.instance.graph
    if k == 1:
        report = topological_check(graph)
        if not report.ok:
            raise NotATree(f"domination_tree needs a topologically indexed tree: {report.first}")
    n = graph.n
    if not 1 <= k <= n:
        raise ValueError(f"Level k must lie in [1, {n}], got {k}")
    trace = trace if trace is not None else TraceSink(enabled=False)

    if k == n:
        return _base_case(oracle, region, trace)

    observer = graph.parent_of(k)
    slots = sorted(graph.descendants(k))
    slot_set = set(slots)
    storage = sorted(graph.storage(k, observer))

    level = _LevelRound(oracle, k, observer, slots, region, trace)
    residue = region
    while not residue.is_empty:
        level.begin()
        inner = domination_tree(oracle, residue, k + 1, trace)

        candidates = [inner.bundle(i) for i in storage]
        order = rank_pieces(oracle, k, candidates)
        chosen_positions = order[:len(slots)]

        relabeled = {i: inner.bundle(i) for i in range(1, n + 1)}
        for slot, position in zip(slots, chosen_positions):
            relabeled[slot] = candidates[position]
        chosen_indices = {storage[position] for position in chosen_positions}
        vacated = sorted(i for i in chosen_indices if i not in slot_set)
        displaced = sorted(i for i in slots if i not in chosen_indices)
        for index, source in zip(vacated, displaced):
            relabeled[index] = inner.bundle(source)

        for j in range(1, n + 1):
            if j not in slot_set:
                level.give(j, relabeled[j])

        pieces = [relabeled[slot] for slot in slots]
        residue = level.settle(residue, relabeled[observer], pieces)

    return level.finish(region)


def run_domination(instance: Instance, ledger: Optional[QueryLedger] = None, trace: Optional[TraceSink] = None) -> Allocation:
    """Domination([0,1], 1), dispatching Line instances to the line variant."""
    oracle = RobertsonWebbOracle(instance, ledger)
    trace = trace if trace is not None else TraceSink(enabled=False)
    if instance.graph.kind == GraphKind.LINE:
        allocation = domination_line(oracle, WHOLE, 1, trace)
    else:
        allocation = domination_tree(oracle, WHOLE, 1, trace)
    utils.logger.info(
        f"Domination on {instance.graph.kind.value} with {instance.n} agents: "
        f"{oracle.ledger.cut_count} cuts, {oracle.ledger.eval_count} evals, {trace.total_rounds} rounds"
    )
    return allocation
