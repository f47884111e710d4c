import json
from typing import Optional

import core.constants as constants


class BenchRecord:
    def __init__(self, protocol: str, graph: str, n: int, seed: int, cut: int, eval: int, raw_eval: int, rounds: int, bound: Optional[int], envy_free: bool, ms: int = 0, rounds_per_level: Optional[dict] = None):
        """
        One protocol run of a bench sweep.

        Args:
            protocol: Protocol name
            graph: Graph kind
            n: Number of agents
            seed: Instance seed
            cut: Charged cut queries
            eval: Charged eval queries
            raw_eval: Every valuation lookup, charged or not
            rounds: Total while-loop rounds
            bound: Proven bound the run is compared against
            envy_free: Set by the verifier, never by the protocol
            ms: Wall time in milliseconds, 0 unless timing is enabled
            rounds_per_level: Maximum rounds per recursion level
        """
        self.protocol = protocol
        self.graph = graph
        self.n = n
        self.seed = seed
        self.cut = cut
        self.eval = eval
        self.raw_eval = raw_eval
        self.rounds = rounds
        self.bound = bound
        self.envy_free = envy_free
        self.ms = ms
        self.rounds_per_level = rounds_per_level or {}

    @property
    def queries(self) -> int:
        return self.cut + self.eval

    def to_row(self) -> list:
        """Values in BENCH_CSV_COLUMNS order."""
        return [getattr(self, column) for column in constants.BENCH_CSV_COLUMNS]

    def to_json(self) -> str:
        return json.dumps(self.__dict__)
