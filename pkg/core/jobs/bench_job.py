#!/usr/bin/env python3
"""
Batch entry point for a query-complexity bench sweep.

Reads a bench config, runs every (protocol, graph, n, seed) task and writes one CSV row per run.

Required Environment Variables:
    BENCH_CONFIG_PATH: Bench config JSON (sweeps, max_denominator, timing, workers)
    BENCH_OUTPUT_PATH: Destination CSV path

Optional Environment Variables:
    BENCH_SUMMARY_PATH: Destination of the per-(protocol, graph, n) summary JSON

Exit Codes:
    0: Success, every run envy-free and within its bound
    1: Failure, including any run that failed verification
"""

import os
import sys
import traceback

import core.harness as harness
import core.utils as utils
from core.storage_backend import storage


def validate_env_vars() -> dict[str, str]:
    """Validate and return required environment variables."""
    required_vars = ['BENCH_CONFIG_PATH', 'BENCH_OUTPUT_PATH']

    env_values = {}
    missing_vars = []

    for var in required_vars:
        value = os.getenv(var)
        if not value:
            missing_vars.append(var)
        else:
            env_values[var] = value

    if missing_vars:
        utils.logger.error(f"Missing required environment variables: {', '.join(missing_vars)}")
        sys.exit(1)

    env_values['BENCH_SUMMARY_PATH'] = os.getenv('BENCH_SUMMARY_PATH', '')

    return env_values


def main():
    """Main entry point for the bench job."""
    utils.logger.info("=" * 80)
    utils.logger.info("Bench Job: Query Complexity Sweep - Starting")
    utils.logger.info("=" * 80)
    utils.logger.info(f"PID: {os.getpid()}")
    utils.logger.info(f"Working directory: {os.getcwd()}")

    env_values = validate_env_vars()

    utils.logger.info(f"BENCH_CONFIG_PATH: {env_values['BENCH_CONFIG_PATH']}")
    utils.logger.info(f"BENCH_OUTPUT_PATH: {env_values['BENCH_OUTPUT_PATH']}")
    utils.logger.info(f"BENCH_SUMMARY_PATH: {env_values['BENCH_SUMMARY_PATH']}")

    try:
        config = harness.load_bench_config(storage.read_json(env_values['BENCH_CONFIG_PATH']))
        report = harness.bench(config)
        report.write_csv(env_values['BENCH_OUTPUT_PATH'])
        if env_values['BENCH_SUMMARY_PATH']:
            report.write_summary(env_values['BENCH_SUMMARY_PATH'])

        failed = [record for record in report.records if not record.envy_free]
        if failed:
            raise Exception(f"{len(failed)} of {len(report.records)} run(s) failed verification")

        utils.logger.info("=" * 80)
        utils.logger.info("Bench Job: Query Complexity Sweep - SUCCESS")
        utils.logger.info("=" * 80)
        sys.exit(0)

    except Exception as e:
        utils.logger.error("=" * 80)
        utils.logger.error("Bench Job: Query Complexity Sweep - FAILED")
        utils.logger.error("=" * 80)
        utils.logger.error(f"Error: {str(e)}")
        utils.logger.error(f"Traceback:\n{traceback.format_exc()}")
        sys.exit(1)


if __name__ == '__main__':
    main()
