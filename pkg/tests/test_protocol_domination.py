"""
Unit tests for protocol_domination.py.

Small uniform instances pin exact allocations and ledgers; seeded random
Line and Tree instances are checked with the verifier.
"""

from fractions import Fraction
from unittest.mock import patch

import pytest

from core.constants import GraphKind
from core.exact_cake import WHOLE, Allocation, Piece, Valuation
from core.exceptions import NotALine, RoundLimitExceeded
from core.harness import generate_instance
from core.helpers.round_trace import RoundTrace, TraceSink
from core.protocol_domination import domination_line, domination_tree, query_bound, round_limit, run_domination
from core.rw_oracle import Instance, QueryLedger, RobertsonWebbOracle
from core.social_graph import SocialGraph
from core.verifier import check_level_outputs, check_trace_claims, is_locally_envy_free

F = Fraction
HALVES = Allocation((Piece.of((0, F(1, 2))), Piece.of((F(1, 2), 1))))


def uniform(graph: SocialGraph) -> Instance:
    return Instance((Valuation.uniform(),) * graph.n, graph)


class TestQueryBound:
    """Tests for query_bound and round_limit."""

    @pytest.mark.parametrize("n,expected", [(2, 35), (3, 1289)])
    def test_values(self, n, expected):
        assert query_bound(n) == expected

    def test_grows_with_n(self):
        assert all(query_bound(n) < query_bound(n + 1) for n in range(2, 10))

    def test_needs_two_agents(self):
        with pytest.raises(ValueError):
            query_bound(1)

    def test_round_limit_exceeds_proven_bound(self):
        assert round_limit(1) == 10 * 2 + 10


class TestTwoAgents:
    """Two agents reduce to a single cut-and-choose round."""

    @pytest.mark.parametrize("graph", [SocialGraph.line(2), SocialGraph.star(2)])
    def test_uniform_halves(self, graph):
        ledger = QueryLedger(2)
        trace = TraceSink()

        allocation = run_domination(uniform(graph), ledger, trace)

        assert allocation == HALVES
        assert (ledger.cut_count, ledger.eval_count) == (1, 3)
        assert trace.total_rounds == 1
        assert isinstance(trace.rounds[0], RoundTrace)
        assert trace.rounds[0].winner == 1

    def test_chooser_takes_her_favorite(self):
        # a_1 only values the right half
        right = Valuation((F(0), F(1, 2), F(1)), (F(0), F(2)))
        instance = Instance((right, Valuation.uniform()), SocialGraph.line(2))

        allocation = run_domination(instance)

        assert allocation.bundle(1) == Piece.of((F(1, 2), 1))
        assert allocation.bundle(2) == Piece.of((0, F(1, 2)))


class TestUniformThreeLine:
    """Tests on the uniform three-agent Line."""

    def test_envy_free_and_within_bound(self):
        instance = uniform(SocialGraph.line(3))
        ledger = QueryLedger(3)
        trace = TraceSink(capture_levels=True)

        allocation = run_domination(instance, ledger, trace)

        assert allocation.is_complete_over(WHOLE)
        assert is_locally_envy_free(instance, allocation).ok
        assert ledger.total <= query_bound(3)
        assert check_trace_claims(trace, instance).ok
        assert check_level_outputs(trace, instance).ok

    def test_ledger_is_deterministic(self):
        instance = uniform(SocialGraph.line(3))
        first, second = QueryLedger(3), QueryLedger(3)

        assert run_domination(instance, first) == run_domination(instance, second)
        assert first == second


class TestRandomInstances:
    """Seeded random Line and Tree instances."""

    @pytest.mark.parametrize("kind,n", [(GraphKind.LINE, 3), (GraphKind.LINE, 4), (GraphKind.TREE, 4), (GraphKind.TREE, 5), (GraphKind.DEPTH2, 4)])
    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_envy_free_with_valid_trace(self, kind, n, seed):
        instance = generate_instance(seed, n, kind, segments=2, max_denominator=12)
        ledger = QueryLedger(n)
        trace = TraceSink(capture_levels=True)

        allocation = run_domination(instance, ledger, trace)

        assert is_locally_envy_free(instance, allocation).ok
        assert ledger.total <= query_bound(n)
        claims = check_trace_claims(trace, instance)
        assert claims.ok, claims.violations
        levels = check_level_outputs(trace, instance)
        assert levels.ok, levels.violations


class TestGuards:
    """Tests for shape and round-limit guards."""

    def test_line_variant_rejects_trees(self):
        oracle = RobertsonWebbOracle(uniform(SocialGraph.star(3)))

        with pytest.raises(NotALine):
            domination_line(oracle, WHOLE, 1)

    def test_level_out_of_range(self):
        oracle = RobertsonWebbOracle(uniform(SocialGraph.line(3)))

        with pytest.raises(ValueError):
            domination_line(oracle, WHOLE, 4)

    def test_round_limit(self):
        with patch('core.protocol_domination.round_limit', return_value=0):
            with pytest.raises(RoundLimitExceeded):
                run_domination(uniform(SocialGraph.line(3)))

    def test_disabled_trace_still_counts_rounds(self):
        trace = TraceSink(enabled=False)

        run_domination(uniform(SocialGraph.line(2)), trace=trace)

        assert trace.rounds == []
        assert trace.total_rounds == 1


LEFT = Valuation((F(0), F(1, 2), F(1)), (F(2), F(0)))
RIGHT = Valuation((F(0), F(1, 2), F(1)), (F(0), F(2)))


class TestZeroDensity:
    """Valuations with zero-density segments still terminate within the round bound."""

    @pytest.mark.parametrize(
        "graph,valuations",
        [
            (SocialGraph.line(4), (RIGHT, LEFT, LEFT, RIGHT)),
            (SocialGraph.line(3), (LEFT, LEFT, RIGHT)),
            (SocialGraph.star(4), (LEFT, RIGHT, LEFT, RIGHT)),
            (SocialGraph(GraphKind.TWO_STAR, (2, 3, None)), (RIGHT, LEFT, LEFT)),
        ]
    )
    def test_terminates_envy_free(self, graph, valuations):
        instance = Instance(valuations, graph)
        trace = TraceSink()

        allocation = run_domination(instance, trace=trace)

        assert allocation.is_complete_over(WHOLE)
        assert is_locally_envy_free(instance, allocation).ok
        assert "round_bound" not in check_trace_claims(trace, instance).failed


class TestLineAsTree:
    """A Line run through the tree variant matches the line variant exactly."""

    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    @pytest.mark.parametrize("seed", range(5))
    def test_same_allocation_and_ledger(self, n, seed):
        instance = generate_instance(seed, n, GraphKind.LINE, segments=2, max_denominator=12)
        line_oracle = RobertsonWebbOracle(instance, QueryLedger(n))
        tree_oracle = RobertsonWebbOracle(instance, QueryLedger(n))

        line_allocation = domination_line(line_oracle, WHOLE, 1)
        tree_allocation = domination_tree(tree_oracle, WHOLE, 1)

        assert tree_allocation == line_allocation
        assert tree_oracle.ledger.to_dict() == line_oracle.ledger.to_dict()


@pytest.mark.slow
class TestAcceptanceSweeps:
    """25 seeds for every n from 2 to 7 on Lines and random Trees."""

    @pytest.mark.parametrize("kind", [GraphKind.LINE, GraphKind.TREE])
    @pytest.mark.parametrize("n", range(2, 8))
    def test_sweep(self, kind, n):
        for seed in range(25):
            instance = generate_instance(seed, n, kind, segments=2, max_denominator=12)
            ledger = QueryLedger(n)
            trace = TraceSink(capture_levels=True)

            allocation = run_domination(instance, ledger, trace)

            assert is_locally_envy_free(instance, allocation).ok, seed
            assert ledger.total <= query_bound(n), seed
            claims = check_trace_claims(trace, instance)
            assert claims.ok, (seed, claims.violations)
            levels = check_level_outputs(trace, instance)
            assert levels.ok, (seed, levels.violations)

    @pytest.mark.parametrize("n", range(2, 8))
    def test_line_as_tree_ledgers(self, n):
        for seed in range(25):
            instance = generate_instance(seed, n, GraphKind.LINE, segments=2, max_denominator=12)
            line_oracle = RobertsonWebbOracle(instance, QueryLedger(n))
            tree_oracle = RobertsonWebbOracle(instance, QueryLedger(n))

            assert domination_tree(tree_oracle, WHOLE, 1) == domination_line(line_oracle, WHOLE, 1), seed
            assert tree_oracle.ledger.to_dict() == line_oracle.ledger.to_dict(), seed
