#!/usr/bin/env python3
"""
Performance Benchmarking Script
Times the reduction chain, the exact oracles and QAOA over the widened reference family
"""

import argparse
import sys
import os
import time
from typing import Dict, List
from datetime import datetime

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))
from src.benchmark import bench_to_frame, run_bench
from src.exact_solver import brute_force_minimum, enumerate_feasible
from src.problem_model import load_fixture_a, widen_instance
from src.reduction import reduce_instance
from src.settings import default_max_qubits


class Colors:
    HEADER = '\033[95m'
    BLUE = '\033[94m'
    CYAN = '\033[96m'
    GREEN = '\033[92m'
    YELLOW = '\033[93m'
    RED = '\033[91m'
    ENDC = '\033[0m'
    BOLD = '\033[1m'


def print_header(title):
    """Print formatted header"""
    print(f"\n{Colors.HEADER}{Colors.BOLD}{'='*70}{Colors.ENDC}")
    print(f"{Colors.HEADER}{Colors.BOLD}{title:^70}{Colors.ENDC}")
    print(f"{Colors.HEADER}{Colors.BOLD}{'='*70}{Colors.ENDC}\n")


def print_metric(name, value, unit="", threshold=None):
    """Print a metric, yellow when it exceeds the threshold"""
    if threshold and isinstance(value, (int, float)):
        color = Colors.GREEN if value < threshold else Colors.YELLOW
    else:
        color = Colors.CYAN

    print(f"{name:.<40} {color}{value:>12.2f}{Colors.ENDC} {unit}")


def benchmark_reduction(hours_list: List[int]) -> Dict[str, float]:
    """Time instance -> ILP -> QUBO -> Ising for each family member"""
    print_header("BENCHMARK 1: Reduction Chain")
    base = load_fixture_a()
    results = {}
    for hours in hours_list:
        instance = widen_instance(base, hours)
        start = time.perf_counter()
        for _ in range(20):
            reduction = reduce_instance(instance)
        elapsed = (time.perf_counter() - start) / 20
        results[f'reduce_{hours}h_ms'] = elapsed * 1000
        print_metric(f"Reduce {hours}h ({reduction.ilp.num_vars} variables)", elapsed * 1000, "ms", 50)
    print(f"\n{Colors.GREEN}✅ Reduction benchmarks completed{Colors.ENDC}")
    return results


def benchmark_exact(hours_list: List[int]) -> Dict[str, float]:
    """Time enumeration and the brute-force minimum"""
    print_header("BENCHMARK 2: Exact Oracles")
    base = load_fixture_a()
    results = {}
    for hours in hours_list:
        instance = widen_instance(base, hours)
        start = time.perf_counter()
        records = enumerate_feasible(instance)
        results[f'enumerate_{hours}h_ms'] = (time.perf_counter() - start) * 1000
        print_metric(f"Enumerate {hours}h ({len(records)} feasible)", results[f'enumerate_{hours}h_ms'], "ms", 1000)

        ising = reduce_instance(instance).ising
        start = time.perf_counter()
        _, value = brute_force_minimum(ising)
        results[f'brute_force_{hours}h_s'] = time.perf_counter() - start
        print_metric(f"Brute force {hours}h (min {value:g})", results[f'brute_force_{hours}h_s'], "s", 10)
    print(f"\n{Colors.GREEN}✅ Exact oracle benchmarks completed{Colors.ENDC}")
    return results


def benchmark_qaoa(hours_list: List[int], reps_list: List[int], seed: int, max_qubits: int) -> Dict[str, object]:
    """QAOA wall time per (hours, reps) cell; cells over the cap are marked"""
    print_header("BENCHMARK 3: QAOA Statevector Simulation")
    rows = run_bench(load_fixture_a(), hours_list, reps_list, seed=seed, max_qubits=max_qubits)
    results = {}
    for row in rows:
        label = f"QAOA {row.hours}h p={row.reps} ({row.qubits} qubits)"
        if row.status == "cap":
            print(f"{label:.<40} {Colors.RED}{'cap':>12}{Colors.ENDC}")
            results[f'qaoa_{row.hours}h_p{row.reps}'] = "cap"
        else:
            print_metric(label, row.seconds, "s", 60)
            results[f'qaoa_{row.hours}h_p{row.reps}_s'] = row.seconds
    print()
    print(bench_to_frame(rows, blank="-").to_string(index=False))
    print(f"\n{Colors.GREEN}✅ QAOA benchmarks completed{Colors.ENDC}")
    return results


def print_summary(all_results):
    """Print benchmark summary"""
    print_header("BENCHMARK SUMMARY")

    print(f"\n{Colors.BOLD}Performance Metrics:{Colors.ENDC}\n")

    for category, results in all_results.items():
        if results:
            print(f"{Colors.CYAN}{category}:{Colors.ENDC}")
            for key, value in results.items():
                if isinstance(value, float):
                    print(f"  • {key}: {value:.4f}")
                else:
                    print(f"  • {key}: {value}")
            print()

    print(f"\n{Colors.GREEN}{Colors.BOLD}✨ All benchmarks completed!{Colors.ENDC}\n")


def main():
    """Run all benchmarks"""
    parser = argparse.ArgumentParser(description="Benchmark the prosumer QAOA toolkit")
    parser.add_argument('--hours', type=int, nargs='+', default=[3, 4, 5])
    parser.add_argument('--reps', type=int, nargs='+', default=[1, 3])
    parser.add_argument('--seed', type=int, default=0)
    parser.add_argument('--max-qubits', type=int, default=None)
    args = parser.parse_args()
    cap = args.max_qubits if args.max_qubits is not None else default_max_qubits()

    print_header("🏃 PROSUMER QAOA BENCHMARKS")
    print(f"Timestamp: {datetime.now().isoformat()}")
    print(f"Statevector cap: {cap} qubits\n")

    all_results = {
        "Reduction": benchmark_reduction(args.hours),
        "Exact Oracles": benchmark_exact(args.hours),
        "QAOA": benchmark_qaoa(args.hours, args.reps, args.seed, cap),
    }

    print_summary(all_results)


if __name__ == "__main__":
    main()
