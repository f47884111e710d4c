"""
Unit tests for protocol_direct.py: the four- and five-agent Line protocols
and cut-and-choose on a Star.
"""

from fractions import Fraction

import pytest

from core.constants import GraphKind, Phase
from core.exact_cake import WHOLE, Allocation, Piece, Valuation
from core.exceptions import WrongShape
from core.harness import generate_instance
from core.helpers.round_trace import FiveLineRoundTrace, TraceSink
from core.protocol_direct import alg1_four_line, alg_five_line, star_cut_and_choose
from core.rw_oracle import Instance, QueryLedger
from core.social_graph import SocialGraph
from core.verifier import check_five_line_trace, is_locally_envy_free

F = Fraction


def uniform(graph: SocialGraph) -> Instance:
    return Instance((Valuation.uniform(),) * graph.n, graph)


def fifth(i: int) -> Piece:
    return Piece.of((F(i, 5), F(i + 1, 5)))


class TestFourLine:
    """Tests for alg1_four_line."""

    def test_uniform_allocation(self):
        ledger = QueryLedger(4)

        allocation = alg1_four_line(uniform(SocialGraph.line(4)), ledger)

        assert allocation == Allocation((
            Piece.of((F(1, 2), F(3, 4))),
            Piece.of((F(1, 4), F(1, 2))),
            Piece.of((F(3, 4), 1)),
            Piece.of((0, F(1, 4))),
        ))
        assert (ledger.cut_count, ledger.eval_count) == (8, 16)

    def test_step_table(self):
        ledger = QueryLedger(4)

        alg1_four_line(uniform(SocialGraph.line(4)), ledger)

        assert [(step.agent, step.cuts, step.evals) for step in ledger.steps] == [
            (3, 3, 0), (4, 0, 3), (2, 0, 3), (2, 1, 0), (3, 3, 1), (4, 0, 4), (2, 0, 3), (2, 1, 0), (1, 0, 2),
        ]
        assert [ledger.cut_of(i) for i in range(1, 5)] == [0, 2, 6, 0]
        assert [ledger.eval_of(i) for i in range(1, 5)] == [2, 6, 1, 7]

    @pytest.mark.parametrize("seed", range(8))
    def test_random_instances(self, seed):
        instance = generate_instance(seed, 4, GraphKind.LINE)
        ledger = QueryLedger(4)

        allocation = alg1_four_line(instance, ledger)

        assert is_locally_envy_free(instance, allocation).ok
        assert (ledger.cut_count, ledger.eval_count) == (8, 16)

    @pytest.mark.parametrize("graph", [SocialGraph.line(5), SocialGraph.star(4)])
    def test_wrong_shape(self, graph):
        with pytest.raises(WrongShape):
            alg1_four_line(uniform(graph))


class TestFiveLine:
    """Tests for alg_five_line."""

    def test_uniform_allocation(self):
        ledger = QueryLedger(5)
        trace = TraceSink()
        instance = uniform(SocialGraph.line(5))

        allocation = alg_five_line(instance, ledger, trace)

        assert allocation == Allocation((fifth(1), fifth(0), fifth(4), fifth(3), fifth(2)))
        assert (ledger.cut_count, ledger.eval_count) == (18, 29)
        assert is_locally_envy_free(instance, allocation).ok

    def test_uniform_trace(self):
        trace = TraceSink()
        instance = uniform(SocialGraph.line(5))

        alg_five_line(instance, trace=trace)

        records = trace.rounds
        assert all(isinstance(record, FiveLineRoundTrace) for record in records)
        assert [record.phases for record in records] == [
            (Phase.TRIM, Phase.TRIM),
            (Phase.EQUAL, Phase.TRIM),
            (Phase.EQUAL, Phase.EQUAL),
        ]
        assert records[0].left_dominated is True
        assert check_five_line_trace(trace, instance).ok

    @pytest.mark.parametrize("seed", range(8))
    def test_random_instances(self, seed):
        instance = generate_instance(seed, 5, GraphKind.LINE)
        ledger = QueryLedger(5)
        trace = TraceSink()

        allocation = alg_five_line(instance, ledger, trace)

        assert allocation.is_complete_over(WHOLE)
        assert is_locally_envy_free(instance, allocation).ok
        assert (ledger.cut_count, ledger.eval_count) == (18, 29)
        report = check_five_line_trace(trace, instance)
        assert report.ok, report.violations

    def test_wrong_shape(self):
        with pytest.raises(WrongShape):
            alg_five_line(uniform(SocialGraph.line(4)))


class TestStarCutAndChoose:
    """Tests for star_cut_and_choose."""

    def test_uniform_three_star(self):
        ledger = QueryLedger(3)

        allocation = star_cut_and_choose(uniform(SocialGraph.star(3)), ledger)

        assert allocation == Allocation((
            Piece.of((0, F(1, 3))),
            Piece.of((F(1, 3), F(2, 3))),
            Piece.of((F(2, 3), 1)),
        ))
        assert (ledger.cut_count, ledger.eval_count) == (2, 5)

    def test_ten_star_ledger(self):
        ledger = QueryLedger(10)

        star_cut_and_choose(uniform(SocialGraph.star(10)), ledger)

        assert (ledger.cut_count, ledger.eval_count) == (9, 54)

    @pytest.mark.parametrize("seed", range(4))
    def test_random_stars(self, seed):
        instance = generate_instance(seed, 6, GraphKind.STAR)

        assert is_locally_envy_free(instance, star_cut_and_choose(instance)).ok

    def test_wrong_shape(self):
        with pytest.raises(WrongShape):
            star_cut_and_choose(uniform(SocialGraph.line(3)))


@pytest.mark.slow
class TestAcceptanceSweeps:
    """Exact ledgers and envy-freeness over the full seeded acceptance ranges."""

    def test_four_line_thousand_seeds(self):
        for seed in range(1000):
            instance = generate_instance(seed, 4, GraphKind.LINE)
            ledger = QueryLedger(4)

            allocation = alg1_four_line(instance, ledger)

            assert is_locally_envy_free(instance, allocation).ok, seed
            assert (ledger.cut_count, ledger.eval_count) == (8, 16), seed

    def test_five_line_thousand_seeds(self):
        for seed in range(1000):
            instance = generate_instance(seed, 5, GraphKind.LINE)
            ledger = QueryLedger(5)
            trace = TraceSink()

            allocation = alg_five_line(instance, ledger, trace)

            assert is_locally_envy_free(instance, allocation).ok, seed
            assert (ledger.cut_count, ledger.eval_count) == (18, 29), seed
            assert check_five_line_trace(trace, instance).ok, seed

    @pytest.mark.parametrize("n", range(3, 51))
    def test_star_hundred_seeds(self, n):
        for seed in range(100):
            instance = generate_instance(seed, n, GraphKind.STAR)
            ledger = QueryLedger(n)

            allocation = star_cut_and_choose(instance, ledger)

            assert is_locally_envy_free(instance, allocation).ok, seed
            assert ledger.cut_count == n - 1, seed
            assert ledger.eval_count <= n * n, seed
