"""
Closed-form protocols for small graphs.

alg1_four_line and alg_five_line charge a fixed step table instead of the
procedures' default charges: each runs inside QueryLedger.tabled() and books
its rows with charge_step(), so the totals (8/16 and 18/29) do not depend on
the instance. star_cut_and_choose uses the default procedure charges.
"""

from fractions import Fraction
from typing import Optional

import core.utils as utils
from core.constants import GraphKind, Phase
from core.exact_cake import EMPTY, WHOLE, Allocation, Piece
from core.exceptions import WrongShape
from core.helpers.round_trace import FiveLineRoundTrace, TraceSink
from core.procedures import eq_div, equal, lowest_position, rank_pieces, select, trim
from core.rw_oracle import Instance, QueryLedger, RobertsonWebbOracle


def _require(instance: Instance, kind: GraphKind, n: Optional[int], protocol: str) -> None:
    graph = instance.graph
    if graph.kind != kind or (n is not None and graph.n != n):
        expected = f"{n} agents on a {kind.value}" if n is not None else f"a {kind.value}"
        raise WrongShape(f"{protocol} needs {expected}, got {graph.n} agents on a {graph.kind.value}")


def _pick(oracle: RobertsonWebbOracle, agent: int, pieces: list[Piece]) -> tuple[Piece, list[Piece]]:
    """Agent's favorite piece (lowest position on ties) and the others in input order."""
    favorite = rank_pieces(oracle, agent, pieces)[0]
    return pieces[favorite], [piece for position, piece in enumerate(pieces) if position != favorite]


def _anchor(oracle: RobertsonWebbOracle, agent: int, pieces: list[Piece]) -> int:
    """Position Trim keeps untouched: the agent's least valuable piece, lowest position on ties."""
    return lowest_position([oracle.cached_value(agent, piece) for piece in pieces])


def alg1_four_line(instance: Instance, ledger: Optional[QueryLedger] = None) -> Allocation:
    """
    Locally envy-free allocation for four agents on a Line.

    a_3 cuts, a_4 picks first and a_2 trims then equalizes; a_1 picks last
    between the two bundles a_2 values equally.

    Args:
        instance: Four agents on a Line
        ledger: Ledger to charge; reads cut = 8, eval = 16 afterwards

    Returns:
        Allocation with bundles[i - 1] held by a_i
    """
    _require(instance, GraphKind.LINE, 4, "alg1")
    oracle = RobertsonWebbOracle(instance, ledger)
    ledger = oracle.ledger

    with ledger.tabled():
        # Trimming phase
        quarters = eq_div(oracle, 3, WHOLE, 4)
        ledger.charge_step("divide cake", 3, cuts=3)

        p4, remaining = _pick(oracle, 4, quarters)
        ledger.charge_step("a4 picks", 4, evals=3)

        chosen, rest = select(oracle, 2, remaining, 2)
        p3 = rest[0]
        ledger.charge_step("a2 selects", 2, evals=3)

        anchor = _anchor(oracle, 2, chosen)
        trimmed, trimming = trim(oracle, 2, chosen)
        p2 = trimmed[anchor]
        p1_trimmed = trimmed[1 - anchor]
        ledger.charge_step("a2 trims", 2, cuts=1)

        # Equaling phase
        fourths = eq_div(oracle, 3, trimming, 4)
        ledger.charge_step("divide trimming", 3, cuts=3, evals=1)

        t4, remaining = _pick(oracle, 4, fourths)
        ledger.charge_step("a4 picks trimming", 4, evals=4)

        chosen, rest = select(oracle, 2, remaining, 2)
        t3 = rest[0]
        ledger.charge_step("a2 selects trimming", 2, evals=3)

        equalized, x_star = equal(oracle, 2, chosen)
        t1_reduced = equalized[x_star]
        t2_augmented = equalized[1 - x_star]
        ledger.charge_step("a2 equalizes", 2, cuts=1)

        # Trimmed piece pairs with the augmented one so a_3 never envies it
        a1 = p1_trimmed.union(t2_augmented)
        a2 = p2.union(t1_reduced)
        a3 = p3.union(t3)
        a4 = p4.union(t4)

        first = rank_pieces(oracle, 1, [a1, a2])[0]
        ledger.charge_step("a1 picks", 1, evals=2)

    bundles = (a1, a2) if first == 0 else (a2, a1)
    allocation = Allocation(bundles + (a3, a4))
    utils.logger.info(f"alg1 finished: {ledger.cut_count} cuts, {ledger.eval_count} evals")
    return allocation


class _Side:
    """One trimmer of the five-agent Line with her whole and trimmed bundles."""

    def __init__(self, trimmer: int, leaf: int):
        """
        Args:
            trimmer: a_2 or a_4
            leaf: The trimmer's other neighbour, a_1 or a_5
        """
        self.trimmer = trimmer
        self.leaf = leaf
        self.whole = EMPTY
        self.trimmed = EMPTY

    def settle(self, oracle: RobertsonWebbOracle, phase: Phase, pieces: list[Piece]) -> Piece:
        """Trim or equalize the two selected pieces; returns the trimming."""
        if phase == Phase.TRIM:
            anchor = _anchor(oracle, self.trimmer, pieces)
            result, trimming = trim(oracle, self.trimmer, pieces)
            keep = anchor
        else:
            result, keep = equal(oracle, self.trimmer, pieces)
            trimming = EMPTY
        self.whole = self.whole.union(result[keep])
        self.trimmed = self.trimmed.union(result[1 - keep])
        return trimming


def alg_five_line(instance: Instance, ledger: Optional[QueryLedger] = None, trace: Optional[TraceSink] = None) -> Allocation:
    """
    Locally envy-free allocation for five agents on a Line.

    a_3 cuts each residue into five; a_2 then a_4 each take two pieces and a_3
    keeps the last one. Both trimmers trim in round 1. The side a_3 already
    leads by 2/5 of the trimming equalizes in round 2 while the other trims
    once more; both equalize in round 3. a_1 and a_5 pick last.

    Args:
        instance: Five agents on a Line
        ledger: Ledger to charge; reads cut = 18, eval = 29 afterwards
        trace: Optional sink receiving one FiveLineRoundTrace per round
    """
    _require(instance, GraphKind.LINE, 5, "alg5")
    oracle = RobertsonWebbOracle(instance, ledger)
    ledger = oracle.ledger
    trace = trace if trace is not None else TraceSink(enabled=False)
    call_id = trace.open_call(1)

    left, right = _Side(2, 1), _Side(4, 5)
    root = EMPTY
    residue = WHOLE
    phases = (Phase.TRIM, Phase.TRIM)

    with ledger.tabled():
        for round_number in (1, 2, 3):
            fifths = eq_div(oracle, 3, residue, 5)
            ledger.charge_step(f"round {round_number}: a3 divides", 3, cuts=4, evals=0 if round_number == 1 else 1)

            left_pieces, rest = select(oracle, 2, fifths, 2)
            ledger.charge_step(f"round {round_number}: a2 selects", 2, evals=4 if round_number == 1 else 5)
            right_pieces, rest = select(oracle, 4, rest, 2)
            ledger.charge_step(f"round {round_number}: a4 selects", 4, evals=3)
            root = root.union(rest[0])

            trimmings = [
                left.settle(oracle, phases[0], left_pieces),
                right.settle(oracle, phases[1], right_pieces),
            ]
            ledger.charge_step(f"round {round_number}: a2 {phases[0].value}s", 2, cuts=1)
            ledger.charge_step(f"round {round_number}: a4 {phases[1].value}s", 4, cuts=1)
            next_residue = trimmings[0].union(trimmings[1])

            left_dominated: Optional[bool] = None
            if round_number == 1:
                # Gaps are measured against the trimmed bundles A_2 = P_2 \ T_2 and A_4 = P_4 \ T_4
                threshold = Fraction(2, 5) * oracle.cached_value(3, next_residue)
                gap = oracle.cached_value(3, root) - oracle.cached_value(3, left.trimmed)
                left_dominated = gap >= threshold
                phases = (Phase.EQUAL, Phase.TRIM) if left_dominated else (Phase.TRIM, Phase.EQUAL)
                utils.logger.debug(f"alg5 round 1: {'a2' if left_dominated else 'a4'} equalizes next")
                record_phases = (Phase.TRIM, Phase.TRIM)
            else:
                record_phases = phases
                phases = (Phase.EQUAL, Phase.EQUAL)

            trace.record(call_id, FiveLineRoundTrace(
                round=round_number,
                residue=residue,
                next_residue=next_residue,
                root_bundle=root,
                trimmed_bundles=(left.trimmed, right.trimmed),
                whole_bundles=(left.whole, right.whole),
                phases=record_phases,
                left_dominated=left_dominated,
            ) if trace.enabled else None)
            residue = next_residue

        first = rank_pieces(oracle, 1, [left.trimmed, left.whole])[0]
        ledger.charge_step("a1 picks", 1, evals=2)
        last = rank_pieces(oracle, 5, [right.whole, right.trimmed])[0]
        ledger.charge_step("a5 picks", 5, evals=2)

    a1, a2 = (left.trimmed, left.whole) if first == 0 else (left.whole, left.trimmed)
    a4, a5 = (right.trimmed, right.whole) if last == 0 else (right.whole, right.trimmed)
    allocation = Allocation((a1, a2, root, a4, a5))
    utils.logger.info(f"alg5 finished: {ledger.cut_count} cuts, {ledger.eval_count} evals")
    return allocation


def star_cut_and_choose(instance: Instance, ledger: Optional[QueryLedger] = None) -> Allocation:
    """
    Cut-and-choose on a Star: the center divides the cake into n equal pieces,
    the leaves pick in ascending order and the center keeps the last piece.
    """
    _require(instance, GraphKind.STAR, None, "star")
    oracle = RobertsonWebbOracle(instance, ledger)
    n = instance.n

    available = eq_div(oracle, n, WHOLE, n)
    bundles: list[Piece] = []
    for leaf in range(1, n):
        favorite, available = _pick(oracle, leaf, available)
        bundles.append(favorite)
    bundles.append(available[0])

    utils.logger.info(f"star finished with {n} agents: {oracle.ledger.cut_count} cuts, {oracle.ledger.eval_count} evals")
    return Allocation(tuple(bundles))
