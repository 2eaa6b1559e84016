"""
Scaling benchmark over the widened reference family.

Each (hours, reps) cell widens the base instance to `hours` slots, reports the
binary+slack variable split and runs QAOA once, timing it. Cells whose qubit
count exceeds the cap are reported with status "cap" instead of aborting.
Timings are informational only.
"""

import logging
import time
from dataclasses import asdict, dataclass
from typing import List, Optional, Sequence

import pandas as pd

from src.problem_model import ProsumerInstance, widen_instance
from src.qaoa_sim import QaoaConfig, ResourceLimitError, solve_qaoa
from src.reduction import variable_counts

logger = logging.getLogger(__name__)

BENCH_COLUMNS = ["hours", "reps", "load_vars", "slack_vars", "qubits", "status", "seconds", "best_cost", "expectation"]


@dataclass
class BenchRow:
    hours: int
    reps: int
    load_vars: int
    slack_vars: int
    qubits: int
    status: str  # "ok" | "cap"
    seconds: Optional[float] = None
    best_cost: Optional[int] = None
    expectation: Optional[float] = None


def run_bench(base: ProsumerInstance, hours_list: Sequence[int], reps_list: Sequence[int], seed: int = 0,
              max_qubits: Optional[int] = None, shots: int = 1024, restarts: int = 1,
              max_evaluations: int = 100) -> List[BenchRow]:
    """Run every (hours, reps) cell sequentially."""
    rows: List[BenchRow] = []
    for hours in hours_list:
        instance = widen_instance(base, hours)
        load_vars, slack_vars = variable_counts(instance)
        qubits = load_vars + slack_vars
        for reps in reps_list:
            config_kwargs = dict(reps=reps, shots=shots, restarts=restarts, seed=seed,
                                 max_evaluations=max_evaluations)
            if max_qubits is not None:
                config_kwargs["max_qubits"] = max_qubits
            config = QaoaConfig(**config_kwargs)
            row = BenchRow(hours=hours, reps=reps, load_vars=load_vars, slack_vars=slack_vars,
                           qubits=qubits, status="ok")
            start = time.perf_counter()
            try:
                result = solve_qaoa(instance, config)
            except ResourceLimitError as e:
                logger.warning(f"bench cell hours={hours} reps={reps}: {e}")
                row.status = "cap"
            else:
                row.seconds = round(time.perf_counter() - start, 4)
                best = result.best_feasible
                row.best_cost = best.cost if best else None
                row.expectation = result.expectation
            logger.info(f"bench cell hours={hours} reps={reps}: {row.status} ({qubits} qubits)")
            rows.append(row)
    return rows


def bench_to_frame(rows: List[BenchRow], blank: Optional[str] = None) -> pd.DataFrame:
    """One row per cell; `blank` replaces the empty timing/cost fields of "cap" rows."""
    frame = pd.DataFrame([asdict(r) for r in rows], columns=BENCH_COLUMNS, dtype=object)
    if blank is not None:
        frame = frame.where(frame.notna(), blank)
    return frame
