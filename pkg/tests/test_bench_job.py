"""
Tests for jobs/bench_job.py.

Runs the job end to end against a tiny sweep written to tmp_path. The job
always leaves through sys.exit, so every test asserts the exit code.
"""

import json
import os
from unittest.mock import patch

import pytest

from core.jobs import bench_job


@pytest.fixture
def bench_paths(tmp_path):
    """Write a small sweep config and return the job's paths."""
    config = tmp_path / "bench.json"
    config.write_text(json.dumps({
        "sweeps": [{"protocol": "star", "graph": "star", "n": [3, 4], "seeds": 2}],
        "max_denominator": 20,
    }))
    return {
        "BENCH_CONFIG_PATH": str(config),
        "BENCH_OUTPUT_PATH": str(tmp_path / "out" / "bench.csv"),
        "BENCH_SUMMARY_PATH": str(tmp_path / "out" / "summary.json"),
    }


class TestValidateEnvVars:
    """Tests for validate_env_vars."""

    def test_missing_vars_exit(self):
        with patch.dict(os.environ, {}, clear=True):
            with pytest.raises(SystemExit) as exit_info:
                bench_job.validate_env_vars()

        assert exit_info.value.code == 1

    def test_summary_is_optional(self):
        env = {"BENCH_CONFIG_PATH": "bench.json", "BENCH_OUTPUT_PATH": "bench.csv"}

        with patch.dict(os.environ, env, clear=True):
            values = bench_job.validate_env_vars()

        assert values["BENCH_SUMMARY_PATH"] == ""


class TestMain:
    """Tests for the job entry point."""

    def test_success_writes_csv_and_summary(self, bench_paths, tmp_path):
        with patch.dict(os.environ, bench_paths, clear=True):
            with pytest.raises(SystemExit) as exit_info:
                bench_job.main()

        assert exit_info.value.code == 0
        lines = (tmp_path / "out" / "bench.csv").read_text().strip().split("\n")
        assert len(lines) == 5
        summary = json.loads((tmp_path / "out" / "summary.json").read_text())
        assert [row["n"] for row in summary] == [3, 4]

    def test_failed_run_exits_with_error(self, bench_paths):
        with patch.dict(os.environ, bench_paths, clear=True):
            with patch('core.harness.execute', side_effect=RuntimeError("boom")):
                with pytest.raises(SystemExit) as exit_info:
                    bench_job.main()

        assert exit_info.value.code == 1

    def test_missing_config_exits_with_error(self, bench_paths, tmp_path):
        bench_paths["BENCH_CONFIG_PATH"] = str(tmp_path / "missing.json")

        with patch.dict(os.environ, bench_paths, clear=True):
            with pytest.raises(SystemExit) as exit_info:
                bench_job.main()

        assert exit_info.value.code == 1
