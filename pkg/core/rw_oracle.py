"""
Robertson-Webb query interface with a charging ledger.

Protocols reach valuations only through RobertsonWebbOracle. Charged queries
(eval_query, eval_piece, cut_query, cut_piece_query) increment the per-agent
counters; cached_value serves values an agent already knows and only counts
towards raw_eval.
"""

from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional

from core.exact_cake import ONE, ZERO, Allocation, Piece, Valuation, inverse_cut, to_scalar, value_of
from core.exceptions import BadRange, NotATree, TauOutOfRange
from core.social_graph import SocialGraph, topological_check


@dataclass(frozen=True)
class Instance:
    valuations: tuple[Valuation, ...]
    graph: SocialGraph

    def __post_init__(self):
        object.__setattr__(self, 'valuations', tuple(self.valuations))
        if len(self.valuations) != self.graph.n:
            raise ValueError(f"Instance has {len(self.valuations)} valuations for {self.graph.n} agents")
        report = topological_check(self.graph)
        if not report.ok:
            raise NotATree(f"Instance graph is invalid: {report.first}")

    @classmethod
    def from_labels(cls, graph: SocialGraph, valuations_by_label: list[Valuation]) -> "Instance":
        """Pair a re-indexed graph with valuations listed by original label."""
        return cls(tuple(valuations_by_label[label - 1] for label in graph.labels), graph)

    @property
    def n(self) -> int:
        return self.graph.n

    def valuation(self, agent: int) -> Valuation:
        return self.valuations[agent - 1]

    def label_of(self, agent: int) -> int:
        return self.graph.labels[agent - 1]

    def valuations_by_label(self) -> list[Valuation]:
        ordered: list[Optional[Valuation]] = [None] * self.n
        for agent, label in enumerate(self.graph.labels, start=1):
            ordered[label - 1] = self.valuation(agent)
        return ordered  # type: ignore

    def bundles_by_label(self, allocation: Allocation) -> list[Piece]:
        ordered: list[Piece] = [Piece()] * self.n
        for agent, label in enumerate(self.graph.labels, start=1):
            ordered[label - 1] = allocation.bundle(agent)
        return ordered

    def allocation_from_labels(self, bundles_by_label: list[Piece]) -> Allocation:
        return Allocation(tuple(bundles_by_label[label - 1] for label in self.graph.labels))


@dataclass(frozen=True)
class ChargedStep:
    step: str
    agent: int
    cuts: int
    evals: int


class QueryLedger:
    """
    Per-agent counters of charged cut and eval queries.

    Inside tabled(), charges issued by procedures are not counted (evals move
    to raw_eval); protocols with a closed-form charging table book their
    queries with charge_step() instead.
    """

    def __init__(self, n: int):
        """
        Args:
            n: Number of agents
        """
        self.n = n
        self.cuts = [0] * n
        self.evals = [0] * n
        self.raw_eval = 0
        self.steps: list[ChargedStep] = []
        self._tabled = 0

    @property
    def cut_count(self) -> int:
        return sum(self.cuts)

    @property
    def eval_count(self) -> int:
        return sum(self.evals)

    @property
    def total(self) -> int:
        return self.cut_count + self.eval_count

    def cut_of(self, agent: int) -> int:
        return self.cuts[agent - 1]

    def eval_of(self, agent: int) -> int:
        return self.evals[agent - 1]

    @contextmanager
    def tabled(self) -> Iterator["QueryLedger"]:
        self._tabled += 1
        try:
            yield self
        finally:
            self._tabled -= 1

    def charge_cut(self, agent: int, count: int = 1) -> None:
        if self._tabled:
            return
        self.cuts[agent - 1] += count

    def charge_eval(self, agent: int, count: int = 1) -> None:
        if self._tabled:
            self.raw_eval += count
            return
        self.evals[agent - 1] += count

    def note_raw_eval(self, count: int = 1) -> None:
        self.raw_eval += count

    def charge_step(self, step: str, agent: int, cuts: int = 0, evals: int = 0) -> None:
        """Book one row of a protocol's charging table."""
        self.cuts[agent - 1] += cuts
        self.evals[agent - 1] += evals
        self.steps.append(ChargedStep(step, agent, cuts, evals))

    def to_dict(self, labels: Optional[tuple[int, ...]] = None) -> dict:
        labels = labels or tuple(range(1, self.n + 1))
        return {
            "cut": self.cut_count,
            "eval": self.eval_count,
            "raw_eval": self.raw_eval,
            "per_agent": [
                {"agent": labels[i], "cut": self.cuts[i], "eval": self.evals[i]}
                for i in range(self.n)
            ],
        }

    def __eq__(self, other) -> bool:
        if not isinstance(other, QueryLedger):
            return NotImplemented
        return (self.cuts, self.evals, self.raw_eval) == (other.cuts, other.evals, other.raw_eval)

    def __repr__(self) -> str:
        return f"QueryLedger(cut={self.cut_count}, eval={self.eval_count}, raw_eval={self.raw_eval})"


class RobertsonWebbOracle:
    def __init__(self, instance: Instance, ledger: Optional[QueryLedger] = None):
        """
        Args:
            instance: Instance whose valuations answer the queries
            ledger: Ledger to charge; a fresh one is created when omitted
        """
        self.instance = instance
        self.ledger = ledger if ledger is not None else QueryLedger(instance.n)

    def _valuation(self, agent: int) -> Valuation:
        if not 1 <= agent <= self.instance.n:
            raise BadRange(f"Agent index {agent} outside [1, {self.instance.n}]")
        return self.instance.valuation(agent)

    def eval_query(self, agent: int, x, y) -> Fraction:
        x, y = to_scalar(x), to_scalar(y)
        if not (ZERO <= x < y <= ONE):
            raise BadRange(f"eval query needs 0 <= x < y <= 1, got [{x}, {y}]")
        value = self._valuation(agent).value(x, y)
        self.ledger.charge_eval(agent)
        return value

    def eval_piece(self, agent: int, p: Piece) -> Fraction:
        """One charged eval for a whole piece."""
        value = value_of(self._valuation(agent), p)
        self.ledger.charge_eval(agent)
        return value

    def cut_query(self, agent: int, x, tau) -> Fraction:
        x, tau = to_scalar(x), to_scalar(tau)
        if not ZERO <= x <= ONE:
            raise BadRange(f"cut query needs 0 <= x <= 1, got {x}")
        if tau < ZERO:
            raise TauOutOfRange(f"cut query needs tau >= 0, got {tau}")
        y = self._valuation(agent).cut_point(x, tau)
        self.ledger.charge_cut(agent)
        return y

    def cut_piece_query(self, agent: int, p: Piece, tau, charged: bool = True) -> tuple[Piece, Piece]:
        """
        Left prefix of p worth tau to the agent, and the remainder.

        Charges one cut; procedures whose cut charge is fixed in advance pass
        charged=False and book the cuts themselves.
        """
        prefix, suffix = inverse_cut(self._valuation(agent), p, to_scalar(tau))
        if charged:
            self.ledger.charge_cut(agent)
        return prefix, suffix

    def cached_value(self, agent: int, p: Piece) -> Fraction:
        value = value_of(self._valuation(agent), p)
        self.ledger.note_raw_eval()
        return value
