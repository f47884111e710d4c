from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import core.utils as utils
from core.constants import Phase
from core.exact_cake import Allocation, Piece


def _values(values: tuple[Fraction, ...]) -> list[str]:
    return [utils.format_scalar(v) for v in values]


@dataclass(frozen=True)
class RoundTrace:
    """
    One while-round of Domination(R, k).

    Pieces are stored as they were handed out; the *_value fields are the
    observer's values at record time. bundles holds the observer's and the
    candidates' accumulated bundles at the end of the round.
    """
    call_id: int
    level: int
    round: int
    agent: int
    observer: int
    candidates: tuple[int, ...]
    phase: Phase
    counter: int
    winner: Optional[int]
    residue: Piece
    next_residue: Piece
    observer_piece: Piece
    handed: tuple[Piece, ...]
    bundles: tuple[tuple[int, Piece], ...]
    physical_cuts: int
    residue_value: Fraction
    observer_value: Fraction
    handed_values: tuple[Fraction, ...]
    max_trimmed: Fraction

    def to_dict(self) -> dict:
        return {
            "type": "domination",
            "call_id": self.call_id,
            "level": self.level,
            "round": self.round,
            "agent": self.agent,
            "observer": self.observer,
            "candidates": list(self.candidates),
            "phase": self.phase.value,
            "counter": self.counter,
            "winner": self.winner,
            "residue": utils.piece_to_json(self.residue),
            "next_residue": utils.piece_to_json(self.next_residue),
            "observer_piece": utils.piece_to_json(self.observer_piece),
            "handed": [utils.piece_to_json(p) for p in self.handed],
            "bundles": {str(i): utils.piece_to_json(p) for i, p in self.bundles},
            "physical_cuts": self.physical_cuts,
            "residue_value": utils.format_scalar(self.residue_value),
            "observer_value": utils.format_scalar(self.observer_value),
            "handed_values": _values(self.handed_values),
            "c_t": utils.format_scalar(self.max_trimmed),
        }


@dataclass(frozen=True)
class Depth2RoundTrace:
    round: int
    root: int
    residue: Piece
    next_residue: Piece
    root_piece: Piece
    trimmers_before: tuple[int, ...]
    trimmers_after: tuple[int, ...]
    physical_cuts: int
    root_bundle: Piece
    child_bundles: tuple[tuple[int, tuple[Piece, ...]], ...]
    residue_value: Fraction
    next_residue_value: Fraction

    def to_dict(self) -> dict:
        return {
            "type": "alg2",
            "round": self.round,
            "root": self.root,
            "residue": utils.piece_to_json(self.residue),
            "next_residue": utils.piece_to_json(self.next_residue),
            "root_piece": utils.piece_to_json(self.root_piece),
            "trimmers_before": list(self.trimmers_before),
            "trimmers_after": list(self.trimmers_after),
            "physical_cuts": self.physical_cuts,
            "root_bundle": utils.piece_to_json(self.root_bundle),
            "child_bundles": {str(i): [utils.piece_to_json(p) for p in bundles] for i, bundles in self.child_bundles},
            "residue_value": utils.format_scalar(self.residue_value),
            "next_residue_value": utils.format_scalar(self.next_residue_value),
        }


@dataclass(frozen=True)
class FiveLineRoundTrace:
    round: int
    residue: Piece
    next_residue: Piece
    root_bundle: Piece
    trimmed_bundles: tuple[Piece, Piece]
    whole_bundles: tuple[Piece, Piece]
    phases: tuple[Phase, Phase]
    left_dominated: Optional[bool]

    def to_dict(self) -> dict:
        return {
            "type": "alg5",
            "round": self.round,
            "residue": utils.piece_to_json(self.residue),
            "next_residue": utils.piece_to_json(self.next_residue),
            "root_bundle": utils.piece_to_json(self.root_bundle),
            "trimmed_bundles": [utils.piece_to_json(p) for p in self.trimmed_bundles],
            "whole_bundles": [utils.piece_to_json(p) for p in self.whole_bundles],
            "phases": [phase.value for phase in self.phases],
            "left_dominated": self.left_dominated,
        }


@dataclass(frozen=True)
class LevelOutput:
    call_id: int
    level: int
    region: Piece
    allocation: Allocation


@dataclass
class TraceSink:
    """
    Collects round records of one protocol run.

    Round counts per call are always kept; records are stored only when
    enabled, and recursive outputs only when capture_levels is set.
    """
    enabled: bool = True
    capture_levels: bool = False
    rounds: list = field(default_factory=list)
    level_outputs: list[LevelOutput] = field(default_factory=list)
    call_rounds: dict[int, tuple[int, int]] = field(default_factory=dict)
    _next_call: int = 0

    def open_call(self, level: int) -> int:
        self._next_call += 1
        self.call_rounds[self._next_call] = (level, 0)
        return self._next_call

    def record(self, call_id: int, record) -> None:
        level, count = self.call_rounds[call_id]
        self.call_rounds[call_id] = (level, count + 1)
        if self.enabled:
            self.rounds.append(record)

    def close_call(self, call_id: int, level: int, region: Piece, allocation: Allocation) -> None:
        if self.capture_levels:
            self.level_outputs.append(LevelOutput(call_id, level, region, allocation))

    @property
    def total_rounds(self) -> int:
        return sum(count for _, count in self.call_rounds.values())

    def max_rounds_per_level(self) -> dict[int, int]:
        per_level: dict[int, int] = defaultdict(int)
        for level, count in self.call_rounds.values():
            per_level[level] = max(per_level[level], count)
        return dict(sorted(per_level.items()))

    def rounds_summary(self) -> dict:
        return {
            "total": self.total_rounds,
            "calls": len(self.call_rounds),
            "max_per_level": {str(level): count for level, count in self.max_rounds_per_level().items()},
        }

    def to_records(self) -> list[dict]:
        return [record.to_dict() for record in self.rounds]
