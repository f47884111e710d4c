"""
Command-line entry point: python -m core.cli {gen,run,verify,bench}.

Every subcommand exits 0 on success and 1 on failure. Failures are logged;
verification failures also print the failing report.
"""

import argparse
import json
import sys
import traceback
from typing import Optional

import core.constants as constants
import core.harness as harness
import core.utils as utils
from core.constants import Fairness, GraphKind, ProtocolName
from core.exceptions import VerificationFailed
from core.storage_backend import storage
from core.verifier import is_k_fair_line, is_k_fair_tree, is_locally_envy_free


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cake-lef", description="Exact locally envy-free cake cutting on social graphs.")
    parser.add_argument("--max-denominator", type=int, default=constants.MAX_DENOMINATOR,
                        help="Grid denominator for generated breakpoints")
    subparsers = parser.add_subparsers(dest="command", required=True)

    gen = subparsers.add_parser("gen", help="Generate a seeded random instance")
    gen.add_argument("--graph", required=True, choices=[kind.value for kind in GraphKind])
    gen.add_argument("--n", type=int, required=True, help="Number of agents")
    gen.add_argument("--segments", type=int, default=constants.DEFAULT_SEGMENTS, help="Segments per valuation")
    gen.add_argument("--seed", type=int, required=True)
    gen.add_argument("-o", "--output", required=True, help="Instance JSON path")

    run = subparsers.add_parser("run", help="Run a protocol and verify its output")
    run.add_argument("--protocol", required=True, choices=[protocol.value for protocol in ProtocolName])
    run.add_argument("--instance", required=True, help="Instance JSON path")
    run.add_argument("--trace", default=None, help="Write round records as JSON lines to this path")
    run.add_argument("-o", "--output", required=True, help="Result JSON path")

    verify = subparsers.add_parser("verify", help="Check an allocation against an instance")
    verify.add_argument("--instance", required=True, help="Instance JSON path")
    verify.add_argument("--allocation", required=True, help="Result JSON or bare allocation JSON, bundles by agent label")
    verify.add_argument("--k", type=int, default=None, help="Also check k-Fair at this index (topological indexing)")
    verify.add_argument("--fairness", choices=[fairness.value for fairness in Fairness], default=None,
                        help="k-Fair variant; defaults to line on line graphs and tree otherwise")

    bench = subparsers.add_parser("bench", help="Sweep protocols over seeded instances")
    bench.add_argument("--config", required=True, help="Bench config JSON path")
    bench.add_argument("-o", "--output", required=True, help="Bench CSV path")
    bench.add_argument("--summary", default=None, help="Write the per-(protocol, graph, n) summary JSON here")
    return parser


def _gen(args: argparse.Namespace) -> int:
    instance = harness.generate_instance(args.seed, args.n, GraphKind(args.graph), args.segments, args.max_denominator)
    uri = storage.write_json(args.output, harness.instance_to_json(instance))
    utils.logger.info(f"Wrote {args.graph} instance with {args.n} agents to {uri}")
    return 0


def _load_instance(path: str):
    try:
        return harness.instance_from_json(storage.read_json(path))
    except Exception as e:
        raise Exception(f"Unable to load instance {path}: {e}") from e


def _run(args: argparse.Namespace) -> int:
    instance = _load_instance(args.instance)
    result, report = harness.run(instance, ProtocolName(args.protocol), trace_enabled=bool(args.trace) or constants.TRACE_ENABLED)
    storage.write_json(args.output, result.to_json(instance))
    if args.trace:
        storage.write_jsonl(args.trace, result.trace.to_records())
    utils.logger.info(f"{args.protocol} passed verification with {report.ledger_total} charged queries")
    return 0


def _verify(args: argparse.Namespace) -> int:
    instance = _load_instance(args.instance)
    data = storage.read_json(args.allocation)
    bundles = data["allocation"] if isinstance(data, dict) else data
    try:
        allocation = instance.allocation_from_labels(list(utils.allocation_from_json(bundles).bundles))
    except (IndexError, TypeError, ValueError) as e:
        raise Exception(f"Unable to read allocation {args.allocation}: {e}") from e

    envy = is_locally_envy_free(instance, allocation)
    output = envy.to_dict(instance.graph.labels)
    ok = envy.ok
    if args.k is not None:
        fairness = Fairness(args.fairness) if args.fairness else (
            Fairness.LINE if instance.graph.kind == GraphKind.LINE else Fairness.TREE
        )
        check = is_k_fair_line if fairness == Fairness.LINE else is_k_fair_tree
        fair = check(instance, allocation, args.k)
        output["k_fair"] = fair.to_dict()
        ok = ok and fair.ok

    print(json.dumps(output, indent=2))
    return 0 if ok else 1


def _bench(args: argparse.Namespace) -> int:
    data = storage.read_json(args.config)
    data.setdefault("max_denominator", args.max_denominator)
    report = harness.bench(harness.load_bench_config(data))
    report.write_csv(args.output)
    if args.summary:
        report.write_summary(args.summary)
    return 0


COMMANDS = {"gen": _gen, "run": _run, "verify": _verify, "bench": _bench}


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except VerificationFailed as e:
        print(json.dumps(e.report.to_dict() if e.report is not None else {"ok": False}, indent=2))
        utils.logger.error(f"{args.command} failed: {e}")
        return 1
    except Exception as e:
        utils.logger.error(f"{args.command} failed: {e}")
        utils.logger.debug(traceback.format_exc())
        return 1


if __name__ == "__main__":
    sys.exit(main())
