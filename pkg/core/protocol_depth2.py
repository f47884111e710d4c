"""
Alg2 for Depth2Tree instances, including 2-Star and Star inputs.

The root cuts every residue into n equal pieces. Each child a_i keeps
l_i + 1 bundles of equal value to her (l_i = number of her leaves); while
the root does not yet dominate a child, the child trims her selection and
the trimmings form the next residue. Once dominated she equalizes instead.
The loop runs until every child is dominated and the residue is empty: once
no trimmer is left, a closing round in which every child equalizes hands out
the last trimmings. Leaves then pick bundles.
"""

import math
from fractions import Fraction
from typing import Optional

import core.constants as constants
import core.utils as utils
from core.constants import GraphKind
from core.exact_cake import EMPTY, WHOLE, Allocation, Piece, union_all, value_of
from core.exceptions import RoundLimitExceeded, WrongShape
from core.helpers.claim_report import ClaimReport
from core.helpers.round_trace import Depth2RoundTrace, TraceSink
from core.procedures import PhysicalCuts, eq_div, equal, lowest_position, rank_pieces, trim
from core.rw_oracle import Instance, QueryLedger, RobertsonWebbOracle
from core.social_graph import SocialGraph
from core.verifier import check_depth2_rounds

DEPTH2_KINDS = (GraphKind.DEPTH2, GraphKind.TWO_STAR, GraphKind.STAR)


def dominates(root_value_gap: Fraction, residue_value: Fraction, l_i: int, d_count: int) -> bool:
    """
    Whether the root dominates a bundle of a child with l_i leaves.

    Args:
        root_value_gap: v_r(A_r) - v_r(A_k)
        residue_value: v_r(R)
        l_i: Number of leaves of the child
        d_count: Number of children of the root

    Returns:
        gap >= min((l_i + 1) / (d_count + 1), 1) * residue_value
    """
    share = min(Fraction(l_i + 1, d_count + 1), Fraction(1))
    return root_value_gap >= share * residue_value


def depth2_round_bound(n: int) -> int:
    return constants.DEPTH2_ROUND_FACTOR * n * n * math.ceil(math.log(n) + 1)


def alg2_query_bound(kind: GraphKind, n: int) -> int:
    """
    Charged cut + eval bound of alg2.

    A round costs at most 3n cuts (root division, trims, equalizations) and
    n^2 + 3n + 1 evals (division, selection, trims, the root's argmin,
    equalizations); the final leaf picks cost at most n^2 evals.
    """
    rounds = 2 * n if GraphKind(kind) == GraphKind.TWO_STAR else depth2_round_bound(n)
    # One closing round follows the last trimming round
    return (rounds + 1) * (n * n + 6 * n + 1) + n * n


class _Child:
    def __init__(self, agent: int, leaves: tuple[int, ...]):
        """
        Args:
            agent: Child of the root
            leaves: Her children, in ascending order
        """
        self.agent = agent
        self.leaves = leaves
        self.bundles = [EMPTY] * (len(leaves) + 1)

    @property
    def leaf_count(self) -> int:
        return len(self.leaves)

    def give(self, k: int, piece: Piece) -> None:
        self.bundles[k] = self.bundles[k].union(piece)


def _trim_child(oracle: RobertsonWebbOracle, root: int, child: _Child, pieces: list[Piece], cuts: PhysicalCuts) -> Piece:
    """Trimming step for an undominated child; returns her trimmings."""
    anchor = lowest_position([oracle.cached_value(child.agent, piece) for piece in pieces])
    trimmed, trimming = trim(oracle, child.agent, pieces, cuts)
    child.give(0, trimmed[anchor])

    rest = [piece for position, piece in enumerate(trimmed) if position != anchor]
    if not rest:
        return trimming

    # The root's smallest trimmed piece tops up the bundle she values most
    bundle_values = [oracle.cached_value(root, child.bundles[k]) for k in range(1, len(child.bundles))]
    w = 1 + min(range(len(bundle_values)), key=lambda position: (-bundle_values[position], position))
    if len(rest) > 1:
        t = lowest_position([oracle.eval_piece(root, piece) for piece in rest])
    else:
        t = 0
    child.give(w, rest[t])
    others = [piece for position, piece in enumerate(rest) if position != t]
    for k in range(1, len(child.bundles)):
        if k != w:
            child.give(k, others.pop(0))
    return trimming


def _equalize_child(oracle: RobertsonWebbOracle, child: _Child, pieces: list[Piece], cuts: PhysicalCuts) -> None:
    equalized, x_star = equal(oracle, child.agent, pieces, cuts)
    child.give(0, equalized[x_star])
    others = [piece for position, piece in enumerate(equalized) if position != x_star]
    for k, piece in enumerate(others, start=1):
        child.give(k, piece)


def alg2(instance: Instance, ledger: Optional[QueryLedger] = None, trace: Optional[TraceSink] = None) -> Allocation:
    """
    Locally envy-free allocation on a tree of depth at most two.

    Args:
        instance: Depth2Tree, TwoStar or Star instance
        ledger: Ledger to charge
        trace: Optional sink receiving one Depth2RoundTrace per round

    Returns:
        Complete allocation with bundles[i - 1] held by a_i
    """
    graph = instance.graph
    if graph.kind not in DEPTH2_KINDS:
        raise WrongShape(f"alg2 needs a depth2, 2star or star graph, got {graph.kind.value}")
    oracle = RobertsonWebbOracle(instance, ledger)
    trace = trace if trace is not None else TraceSink(enabled=False)
    call_id = trace.open_call(1)

    n = graph.n
    root = graph.root
    children = [_Child(i, graph.children(i)) for i in graph.children(root)]
    by_agent = {child.agent: child for child in children}
    d_count = len(children)
    trimmers = [child.agent for child in children]
    root_bundle = EMPTY
    residue = WHOLE
    limit = constants.ROUND_LIMIT_FACTOR * depth2_round_bound(n)
    rounds = 0

    while trimmers or not residue.is_empty:
        rounds += 1
        if rounds > limit:
            raise RoundLimitExceeded(f"alg2 exceeded {limit} rounds with {len(trimmers)} trimmer(s) left")
        cuts = PhysicalCuts()
        available = eq_div(oracle, root, residue, n, cuts)

        # Selection, children in ascending order
        selections = {}
        for child in children:
            order = rank_pieces(oracle, child.agent, available)
            taken = set(order[:child.leaf_count + 1])
            selections[child.agent] = [available[position] for position in order[:child.leaf_count + 1]]
            available = [piece for position, piece in enumerate(available) if position not in taken]
        root_piece = union_all(available)
        root_bundle = root_bundle.union(root_piece)

        trimmings = []
        for agent in trimmers:
            trimmings.append(_trim_child(oracle, root, by_agent[agent], selections[agent], cuts))
        for child in children:
            if child.agent not in trimmers:
                _equalize_child(oracle, child, selections[child.agent], cuts)
        next_residue = union_all(trimmings)

        # Judging domination
        root_value = oracle.cached_value(root, root_bundle)
        residue_value = oracle.cached_value(root, next_residue)
        remaining = []
        for agent in trimmers:
            child = by_agent[agent]
            dominated = all(
                dominates(root_value - oracle.cached_value(root, child.bundles[k]), residue_value, child.leaf_count, d_count)
                for k in range(1, len(child.bundles))
            )
            if not dominated:
                remaining.append(agent)

        if trace.enabled:
            valuation = instance.valuation(root)
            record = Depth2RoundTrace(
                round=rounds,
                root=root,
                residue=residue,
                next_residue=next_residue,
                root_piece=root_piece,
                trimmers_before=tuple(trimmers),
                trimmers_after=tuple(remaining),
                physical_cuts=cuts.count,
                root_bundle=root_bundle,
                child_bundles=tuple((child.agent, tuple(child.bundles)) for child in children),
                residue_value=value_of(valuation, residue),
                next_residue_value=value_of(valuation, next_residue),
            )
        else:
            record = None
        trace.record(call_id, record)
        utils.logger.debug(f"alg2 round {rounds}: {len(remaining)} trimmer(s) left")
        trimmers = remaining
        residue = next_residue

    bundles = {root: root_bundle}
    for child in children:
        left = list(child.bundles)
        for leaf in child.leaves:
            favorite = rank_pieces(oracle, leaf, left)[0]
            bundles[leaf] = left.pop(favorite)
        bundles[child.agent] = left[0]

    allocation = Allocation.from_mapping(n, bundles)
    utils.logger.info(
        f"alg2 on {graph.kind.value} with {n} agents: {oracle.ledger.cut_count} cuts, "
        f"{oracle.ledger.eval_count} evals, {rounds} rounds"
    )
    return allocation


def alg2_round_bounds(trace: TraceSink, graph: SocialGraph) -> ClaimReport:
    """Round-level bounds of an alg2 trace, checked from its recorded root values."""
    return check_depth2_rounds(trace, graph)
