"""
Unit tests for helpers/bench_record.py BenchRecord class.
"""

import json

import core.constants as constants
from core.helpers.bench_record import BenchRecord


class TestBenchRecord:
    """Tests for BenchRecord serialization."""

    def test_row_follows_csv_columns(self):
        record = BenchRecord("star", "star", 4, 2, 3, 9, 9, 0, 14, True, ms=5)

        row = record.to_row()

        assert len(row) == len(constants.BENCH_CSV_COLUMNS)
        assert dict(zip(constants.BENCH_CSV_COLUMNS, row)) == {
            "protocol": "star", "graph": "star", "n": 4, "seed": 2, "cut": 3, "eval": 9,
            "raw_eval": 9, "rounds": 0, "bound": 14, "envy_free": True, "ms": 5,
        }

    def test_queries(self):
        assert BenchRecord("alg1", "line", 4, 0, 8, 16, 40, 0, 24, True).queries == 24

    def test_to_json(self):
        record = BenchRecord("domination", "line", 3, 1, 4, 9, 20, 6, 1289, True, rounds_per_level={1: 2, 2: 3})

        data = json.loads(record.to_json())

        assert data["bound"] == 1289
        assert data["rounds_per_level"] == {"1": 2, "2": 3}
