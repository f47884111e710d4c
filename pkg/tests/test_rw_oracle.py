"""
Unit tests for rw_oracle.py.

Tests charged and cached queries against the exact valuations, the ledger's
tabled mode and the label mapping of instances.
"""

from fractions import Fraction

import pytest

from core.constants import GraphKind
from core.exact_cake import EMPTY, WHOLE, Allocation, Piece, Valuation
from core.exceptions import BadRange, NotATree, TauOutOfRange, Unsatisfiable
from core.rw_oracle import Instance, QueryLedger, RobertsonWebbOracle
from core.social_graph import SocialGraph

F = Fraction
TWO_STEP = Valuation((F(0), F(1, 2), F(1)), (F(3, 2), F(1, 2)))


def two_agent_oracle() -> RobertsonWebbOracle:
    return RobertsonWebbOracle(Instance((Valuation.uniform(), TWO_STEP), SocialGraph.line(2)))


class TestEvalQuery:
    """Tests for eval_query and eval_piece."""

    def test_uniform_half(self):
        oracle = two_agent_oracle()

        assert oracle.eval_query(1, 0, F(1, 2)) == F(1, 2)
        assert oracle.ledger.eval_of(1) == 1

    def test_two_step_middle(self):
        oracle = two_agent_oracle()

        assert oracle.eval_query(2, F(1, 4), F(3, 4)) == F(1, 2)
        assert oracle.ledger.eval_of(2) == 1
        assert oracle.ledger.eval_of(1) == 0

    @pytest.mark.parametrize("x,y", [(F(1, 2), F(1, 2)), (F(3, 4), F(1, 4)), (F(-1, 2), F(1, 2)), (0, F(3, 2))])
    def test_bad_range_raises(self, x, y):
        with pytest.raises(BadRange):
            two_agent_oracle().eval_query(1, x, y)

    def test_unknown_agent_raises(self):
        with pytest.raises(BadRange):
            two_agent_oracle().eval_query(3, 0, 1)

    def test_eval_piece_charges_once(self):
        oracle = two_agent_oracle()

        value = oracle.eval_piece(1, Piece.of((0, F(1, 4)), (F(1, 2), F(3, 4))))

        assert value == F(1, 2)
        assert oracle.ledger.eval_count == 1


class TestCutQuery:
    """Tests for cut_query and cut_piece_query."""

    def test_uniform_cut(self):
        oracle = two_agent_oracle()

        assert oracle.cut_query(1, F(1, 4), F(1, 2)) == F(3, 4)
        assert oracle.ledger.cut_of(1) == 1

    def test_two_step_cut(self):
        oracle = two_agent_oracle()

        y = oracle.cut_query(2, 0, F(1, 2))

        assert y == F(1, 3)
        assert oracle.eval_query(2, 0, y) == F(1, 2)

    def test_unsatisfiable_cut(self):
        with pytest.raises(Unsatisfiable):
            two_agent_oracle().cut_query(1, F(3, 4), F(1, 2))

    def test_cut_piece(self):
        oracle = two_agent_oracle()

        prefix, suffix = oracle.cut_piece_query(1, Piece.of((0, F(1, 4)), (F(1, 2), F(3, 4))), F(3, 8))

        assert prefix == Piece.of((0, F(1, 4)), (F(1, 2), F(5, 8)))
        assert suffix == Piece.of((F(5, 8), F(3, 4)))
        assert oracle.ledger.cut_count == 1

    @pytest.mark.parametrize("tau,expected", [(0, (EMPTY, WHOLE)), (1, (WHOLE, EMPTY))])
    def test_cut_piece_extremes(self, tau, expected):
        oracle = two_agent_oracle()

        assert oracle.cut_piece_query(1, WHOLE, tau) == expected
        assert oracle.ledger.cut_count == 1

    def test_cut_piece_out_of_range(self):
        with pytest.raises(TauOutOfRange):
            two_agent_oracle().cut_piece_query(1, Piece.of((0, F(1, 2))), F(3, 4))

    def test_uncharged_cut_piece(self):
        oracle = two_agent_oracle()

        oracle.cut_piece_query(1, WHOLE, F(1, 2), charged=False)

        assert oracle.ledger.cut_count == 0


class TestCachedValue:
    """Tests for cached_value."""

    @pytest.mark.parametrize(
        "agent,piece,expected",
        [
            (1, Piece.of((0, F(1, 3))), F(1, 3)),
            (1, EMPTY, F(0)),
            (2, Piece.of((F(1, 4), F(3, 4))), F(1, 2)),
        ]
    )
    def test_values_are_exact_and_uncharged(self, agent, piece, expected):
        oracle = two_agent_oracle()

        assert oracle.cached_value(agent, piece) == expected
        assert oracle.ledger.total == 0
        assert oracle.ledger.raw_eval == 1


class TestQueryLedger:
    """Tests for QueryLedger counters and tabled mode."""

    def test_totals_sum_agents(self):
        ledger = QueryLedger(3)
        ledger.charge_cut(1, 2)
        ledger.charge_eval(3)
        ledger.charge_eval(2, 4)

        assert ledger.cut_count == 2
        assert ledger.eval_count == 5
        assert ledger.total == 7

    def test_tabled_mode_moves_charges_to_raw_eval(self):
        ledger = QueryLedger(2)

        with ledger.tabled():
            ledger.charge_cut(1)
            ledger.charge_eval(2, 3)
            ledger.charge_step("divide", 1, cuts=1, evals=2)

        assert (ledger.cut_count, ledger.eval_count, ledger.raw_eval) == (1, 2, 3)
        assert [step.step for step in ledger.steps] == ["divide"]

    def test_to_dict_uses_labels(self):
        ledger = QueryLedger(2)
        ledger.charge_eval(1)

        result = ledger.to_dict(labels=(7, 3))

        assert result["eval"] == 1
        assert result["per_agent"] == [{"agent": 7, "cut": 0, "eval": 1}, {"agent": 3, "cut": 0, "eval": 0}]

    def test_equal_ledgers(self):
        a, b = QueryLedger(2), QueryLedger(2)
        a.charge_cut(1)
        b.charge_cut(1)

        assert a == b


class TestInstance:
    """Tests for Instance validation and label mapping."""

    def test_valuation_count_must_match(self):
        with pytest.raises(ValueError):
            Instance((Valuation.uniform(),), SocialGraph.line(2))

    def test_invalid_graph_raises(self):
        with pytest.raises(NotATree):
            Instance((Valuation.uniform(),) * 3, SocialGraph(GraphKind.TREE, (None, 1, 2)))

    def test_labels_round_trip(self):
        # Label 1 is the root; post-order indexing moves it to agent 3
        graph = SocialGraph.from_labels(GraphKind.STAR, [None, 1, 1])
        valuations = [Valuation.uniform(), TWO_STEP, Valuation.uniform()]
        instance = Instance.from_labels(graph, valuations)

        assert graph.labels == (2, 3, 1)
        assert instance.valuation(1) == TWO_STEP
        assert instance.valuations_by_label() == valuations

        allocation = Allocation((Piece.of((0, F(1, 3))), Piece.of((F(1, 3), F(2, 3))), Piece.of((F(2, 3), 1))))
        by_label = instance.bundles_by_label(allocation)
        assert by_label[0] == Piece.of((F(2, 3), 1))
        assert instance.allocation_from_labels(by_label) == allocation
