"""
Unit tests for helpers/round_trace.py TraceSink and record serialization.
"""

import json

from core.exact_cake import WHOLE, Allocation, Valuation
from core.helpers.round_trace import TraceSink
from core.protocol_depth2 import alg2
from core.protocol_domination import run_domination
from core.rw_oracle import Instance
from core.social_graph import SocialGraph


def uniform(graph: SocialGraph) -> Instance:
    return Instance((Valuation.uniform(),) * graph.n, graph)


class TestTraceSink:
    """Tests for round counting and level capture."""

    def test_counts_rounds_per_level(self):
        trace = TraceSink()
        first = trace.open_call(1)
        second = trace.open_call(2)
        trace.record(first, "r1")
        trace.record(second, "r2")
        trace.record(second, "r3")

        assert trace.total_rounds == 3
        assert trace.max_rounds_per_level() == {1: 1, 2: 2}
        assert trace.rounds_summary() == {"total": 3, "calls": 2, "max_per_level": {"1": 1, "2": 2}}

    def test_disabled_sink_keeps_counts_only(self):
        trace = TraceSink(enabled=False)
        call_id = trace.open_call(1)
        trace.record(call_id, None)

        assert trace.rounds == []
        assert trace.total_rounds == 1

    def test_level_outputs_need_capture(self):
        trace = TraceSink()
        trace.close_call(trace.open_call(1), 1, WHOLE, Allocation((WHOLE,)))

        assert trace.level_outputs == []


class TestRecordSerialization:
    """Round records serialize to JSON lines."""

    def test_domination_records(self):
        trace = TraceSink()
        run_domination(uniform(SocialGraph.line(2)), trace=trace)

        records = [json.loads(json.dumps(record)) for record in trace.to_records()]

        assert records[0]["type"] == "domination"
        assert records[0]["phase"] == "trim"
        assert records[0]["handed"] == [[["0", "1/2"]]]
        assert records[0]["residue_value"] == "1"

    def test_alg2_records(self):
        trace = TraceSink()
        alg2(uniform(SocialGraph.star(3)), trace=trace)

        record = trace.to_records()[0]

        assert record["type"] == "alg2"
        assert record["trimmers_before"] == [1, 2]
        assert record["next_residue"] == []
