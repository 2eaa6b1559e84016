"""
Command-line surface: transform, solve, enumerate, bench and verify.

Exit codes:
    0 success
    1 unexpected error
    2 instance parse/validation error or invalid option value
    3 I/O error
    4 qubit cap or exhaustive-search bound exceeded
    5 reduction verification failed

Every run emits a RunManifest (to --manifest PATH, else one JSON line on stderr).
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional

from src.benchmark import bench_to_frame, run_bench
from src.exact_solver import (
    EnumerationSizeError,
    brute_force_minimum,
    enumerate_feasible,
    solutions_to_document,
    solutions_to_frame,
    verify_reduction,
)
from src.problem_model import InstanceError, ProsumerInstance, load_fixture_a, load_instance_file
from src.qaoa_sim import QaoaConfig, ResourceLimitError, result_to_document, solve_qaoa
from src.reduction import (
    format_hamiltonian,
    ilp_to_document,
    ising_to_document,
    qubo_to_document,
    reduce_instance,
)
from src.reporting import (
    FORMATS,
    RunManifest,
    dump_json,
    format_counts_line,
    format_enumeration_output,
    format_exact_output,
    format_qaoa_output,
    format_transform_output,
    format_verification_output,
    render_frame,
    samples_to_frame,
    write_atomic,
)
from src.settings import configure_logging, default_max_qubits

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_INPUT = 2
EXIT_IO = 3
EXIT_RESOURCE = 4
EXIT_VERIFY_FAILED = 5

EMIT_CHOICES = ("ilp", "qubo", "ising", "hamiltonian", "all")


def _int_list(text: str) -> List[int]:
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("expected at least one integer")
    return values


def _flatten(groups: List[List[int]]) -> List[int]:
    return [v for group in groups for v in group]


# ------------------------------------------------------------------------------------
# Helpers shared by the commands
# ------------------------------------------------------------------------------------
def _load(args, manifest: RunManifest) -> ProsumerInstance:
    manifest.instance_path = str(args.instance)
    with manifest.phase("load"):
        return load_instance_file(args.instance)


def _max_qubits(args) -> int:
    return args.max_qubits if args.max_qubits is not None else default_max_qubits()


def _emit(args, text: str, manifest: RunManifest) -> None:
    """Send a command's result to --out (atomically) or stdout."""
    if args.out:
        path = write_atomic(args.out, text)
        manifest.add_output(path)
        print(f"✅ Wrote {path}")
    else:
        sys.stdout.write(text)


# ------------------------------------------------------------------------------------
# Commands
# ------------------------------------------------------------------------------------
def cmd_transform(args, manifest: RunManifest) -> int:
    instance = _load(args, manifest)
    manifest.config = {"emit": args.emit}
    with manifest.phase("reduce"):
        reduction = reduce_instance(instance)

    if args.emit == "hamiltonian":
        text = format_hamiltonian(reduction.ising) + "\n"
    else:
        documents: Dict[str, Callable] = {
            "ilp": lambda: ilp_to_document(reduction.ilp),
            "qubo": lambda: qubo_to_document(reduction.qubo),
            "ising": lambda: ising_to_document(reduction.ising),
        }
        if args.emit == "all":
            document = {name: build() for name, build in documents.items()}
        else:
            document = documents[args.emit]()
        text = dump_json(document)

    if args.out:
        print(format_transform_output(reduction))
    else:
        print(f"📐 {format_counts_line(reduction)}", file=sys.stderr)
    _emit(args, text, manifest)
    return EXIT_OK


def _solve_exact(args, instance: ProsumerInstance, manifest: RunManifest) -> str:
    manifest.config = {"method": "exact"}
    with manifest.phase("reduce"):
        reduction = reduce_instance(instance)
    with manifest.phase("brute_force"):
        bits, value = brute_force_minimum(reduction.ising)
    with manifest.phase("enumerate"):
        records = enumerate_feasible(instance)

    if args.format == "table":
        return format_exact_output(instance, bits, value, records) + "\n"
    if args.format == "csv":
        return render_frame(solutions_to_frame(instance, records), "csv")
    document = {
        "method": "exact",
        "optimum": {"bits": bits, "energy": value},
        **solutions_to_document(instance, records),
    }
    return dump_json(document)


def _solve_qaoa(args, instance: ProsumerInstance, manifest: RunManifest) -> str:
    config = QaoaConfig(
        reps=args.reps,
        shots=args.shots,
        max_evaluations=args.max_evaluations,
        restarts=args.restarts,
        seed=args.seed,
        max_qubits=_max_qubits(args),
        materialize=args.materialize,
    )
    manifest.config = {"method": "qaoa", **config.to_dict()}
    with manifest.phase("qaoa"):
        result = solve_qaoa(instance, config)

    optimum_cost: Optional[int] = None
    try:
        with manifest.phase("oracle"):
            records = enumerate_feasible(instance)
        optimum_cost = records[0].cost if records else None
    except EnumerationSizeError as e:
        logger.info(f"Skipping the exact comparison: {e}")

    if args.format == "table":
        return format_qaoa_output(result, optimum_cost, top=args.top) + "\n"
    if args.format == "csv":
        return render_frame(samples_to_frame(result), "csv")
    best = result.best_feasible
    document = {
        "method": "qaoa",
        "config": config.to_dict(),
        **result_to_document(result),
        "best_feasible": None if best is None else {"bits": best.bits, "cost": best.cost, "count": best.count},
        "exact_optimum_cost": optimum_cost,
    }
    return dump_json(document)


def cmd_solve(args, manifest: RunManifest) -> int:
    instance = _load(args, manifest)
    if args.method == "exact":
        text = _solve_exact(args, instance, manifest)
    else:
        text = _solve_qaoa(args, instance, manifest)
    _emit(args, text, manifest)
    return EXIT_OK


def cmd_enumerate(args, manifest: RunManifest) -> int:
    instance = _load(args, manifest)
    with manifest.phase("enumerate"):
        records = enumerate_feasible(instance)
    if args.format == "table":
        text = format_enumeration_output(instance, records) + "\n"
    elif args.format == "csv":
        text = render_frame(solutions_to_frame(instance, records), "csv")
    else:
        text = dump_json(solutions_to_document(instance, records))
    _emit(args, text, manifest)
    return EXIT_OK


def cmd_bench(args, manifest: RunManifest) -> int:
    if args.instance:
        base = _load(args, manifest)
    else:
        base = load_fixture_a()
    hours = _flatten(args.hours)
    reps = _flatten(args.reps)
    cap = _max_qubits(args)
    manifest.config = {"hours": hours, "reps": reps, "seed": args.seed, "shots": args.shots,
                       "restarts": args.restarts, "max_evaluations": args.max_evaluations, "max_qubits": cap}
    with manifest.phase("bench"):
        rows = run_bench(base, hours, reps, seed=args.seed, max_qubits=cap, shots=args.shots,
                         restarts=args.restarts, max_evaluations=args.max_evaluations)
    blank = "-" if args.format == "table" else None
    _emit(args, render_frame(bench_to_frame(rows, blank=blank), args.format), manifest)
    return EXIT_OK


def cmd_verify(args, manifest: RunManifest) -> int:
    instance = _load(args, manifest)
    manifest.config = {"penalty": args.penalty, "sample_size": args.sample_size, "seed": args.seed}
    with manifest.phase("verify"):
        report = verify_reduction(instance, penalty=args.penalty, sample_size=args.sample_size, seed=args.seed)
    if args.format == "json":
        text = dump_json(report.to_dict())
    else:
        text = format_verification_output(report) + "\n"
    _emit(args, text, manifest)
    return EXIT_OK if report.passed else EXIT_VERIFY_FAILED


# ------------------------------------------------------------------------------------
# Parser and dispatch
# ------------------------------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v for info, -vv for debug logging")
    common.add_argument("--max-qubits", type=int, default=None,
                        help="statevector cap (default: $PROSUMER_QAOA_MAX_QUBITS or 24)")
    common.add_argument("--out", type=Path, default=None, help="write the result here instead of stdout")
    common.add_argument("--manifest", type=Path, default=None, help="write the run manifest here (default: stderr)")

    parser = argparse.ArgumentParser(
        prog="main.py",
        description="Prosumer load scheduling as QUBO / Ising, solved exactly or with simulated QAOA",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("transform", parents=[common], help="reduce an instance to ILP / QUBO / Ising form")
    p.add_argument("instance", type=Path)
    p.add_argument("--emit", choices=EMIT_CHOICES, default="ising")
    p.set_defaults(handler=cmd_transform)

    p = sub.add_parser("solve", parents=[common], help="solve with QAOA or the exact oracle")
    p.add_argument("instance", type=Path)
    p.add_argument("--method", choices=("qaoa", "exact"), default="qaoa")
    p.add_argument("--reps", type=int, default=1, help="QAOA layers p")
    p.add_argument("--shots", type=int, default=1024)
    p.add_argument("--restarts", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-evaluations", type=int, default=400, help="objective evaluations per restart")
    p.add_argument("--materialize", action="store_true", help="cache the full energy diagonal")
    p.add_argument("--top", type=int, default=10, help="samples shown in table format")
    p.add_argument("--format", choices=FORMATS, default="table")
    p.set_defaults(handler=cmd_solve)

    p = sub.add_parser("enumerate", parents=[common], help="list every feasible schedule with its cost")
    p.add_argument("instance", type=Path)
    p.add_argument("--format", choices=FORMATS, default="table")
    p.set_defaults(handler=cmd_enumerate)

    p = sub.add_parser("bench", parents=[common], help="qubit counts and QAOA timings over the widened family")
    p.add_argument("--instance", type=Path, default=None, help="base instance (default: data/fixture_a.json)")
    p.add_argument("--hours", type=_int_list, nargs="+", default=[[3, 4, 5]], help="e.g. 3,4,5")
    p.add_argument("--reps", type=_int_list, nargs="+", default=[[1]], help="e.g. 1,3,5")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--shots", type=int, default=1024)
    p.add_argument("--restarts", type=int, default=1)
    p.add_argument("--max-evaluations", type=int, default=100)
    p.add_argument("--format", choices=FORMATS, default="table")
    p.set_defaults(handler=cmd_bench)

    p = sub.add_parser("verify", parents=[common], help="cross-check the reduction against direct evaluation")
    p.add_argument("instance", type=Path)
    p.add_argument("--penalty", type=float, default=None, help="override the penalty coefficient A")
    p.add_argument("--sample-size", type=int, default=1 << 14)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("table", "json"), default="table")
    p.set_defaults(handler=cmd_verify)

    return parser


def _finish(args, manifest: RunManifest) -> None:
    if args.manifest:
        write_atomic(args.manifest, manifest.to_json_line() + "\n")
    else:
        print(manifest.to_json_line(), file=sys.stderr)


def run(argv: Optional[List[str]] = None) -> int:
    """Parse argv, run the command and return its exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose)
    manifest = RunManifest(command=args.command)

    try:
        code = args.handler(args, manifest)
    except InstanceError as e:
        print(f"❌ Invalid instance: {e}", file=sys.stderr)
        code = EXIT_INPUT
    except (ResourceLimitError, EnumerationSizeError) as e:
        print(f"❌ Size limit: {e}", file=sys.stderr)
        code = EXIT_RESOURCE
    except ValueError as e:
        print(f"❌ Invalid value: {e}", file=sys.stderr)
        code = EXIT_INPUT
    except OSError as e:
        print(f"❌ I/O error: {e}", file=sys.stderr)
        code = EXIT_IO
    except Exception as e:
        logger.exception("Unexpected failure")
        print(f"❌ FATAL ERROR: {e}", file=sys.stderr)
        code = EXIT_UNEXPECTED

    manifest.exit_code = code
    try:
        _finish(args, manifest)
    except OSError as e:
        print(f"⚠️ Could not write manifest: {e}", file=sys.stderr)
        code = code or EXIT_IO
    return code


def main() -> None:
    sys.exit(run())
