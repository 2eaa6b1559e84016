"""
Output formatting, run manifests and safe file writes for the command-line tools.

- Human-readable blocks (format_*_output) in the console style of the rest of the toolkit
- Table / CSV / JSON rendering of pandas frames
- RunManifest: what was run, with which settings, how long each phase took, what was written
- write_atomic: write-then-rename so a failed run never leaves a partial file
"""

import json
import logging
import os
import tempfile
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Union

import pandas as pd

from src.exact_solver import SolutionRecord, VerificationReport, solutions_to_frame
from src.problem_model import ProsumerInstance, cost_breakdown, format_cents, hourly_power
from src.qaoa_sim import QaoaResult
from src.reduction import Reduction, variable_counts

logger = logging.getLogger(__name__)

RULE = "=" * 70
FORMATS = ("table", "json", "csv")


# ------------------------------------------------------------------------------------
# Files and manifests
# ------------------------------------------------------------------------------------
def write_atomic(path: Union[str, Path], text: str) -> Path:
    """Write text to a sibling temp file, then rename it over `path`."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{target.name}.", suffix=".tmp", dir=target.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            f.write(text)
        os.replace(tmp_name, target)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    logger.debug(f"Wrote {target} ({len(text)} chars)")
    return target


def dump_json(document) -> str:
    return json.dumps(document, indent=2, ensure_ascii=False) + "\n"


@dataclass
class RunManifest:
    """Record of one CLI run; timings live here and nowhere in the solver outputs."""
    command: str
    instance_path: Optional[str] = None
    config: Dict = field(default_factory=dict)
    timings: Dict[str, float] = field(default_factory=dict)
    outputs: List[str] = field(default_factory=list)
    exit_code: int = 0

    @contextmanager
    def phase(self, name: str):
        start = time.perf_counter()
        try:
            yield
        finally:
            self.timings[name] = round(time.perf_counter() - start, 6)

    def add_output(self, path: Union[str, Path]) -> None:
        self.outputs.append(str(path))

    def to_dict(self) -> Dict:
        return {
            "command": self.command,
            "instance": self.instance_path,
            "config": self.config,
            "timings_s": self.timings,
            "outputs": self.outputs,
            "exit_code": self.exit_code,
        }

    def to_json_line(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


# ------------------------------------------------------------------------------------
# Rendering
# ------------------------------------------------------------------------------------
def render_frame(frame: pd.DataFrame, fmt: str) -> str:
    if fmt == "csv":
        return frame.to_csv(index=False)
    if fmt == "json":
        return frame.to_json(orient="records", indent=2) + "\n"
    if frame.empty:
        return "(no rows)\n"
    return frame.to_string(index=False) + "\n"


def format_counts_line(reduction: Reduction) -> str:
    """'12 variables, 5 constraints'"""
    return f"{reduction.ilp.num_vars} variables, {len(reduction.ilp.constraints)} constraints"


def format_transform_output(reduction: Reduction) -> str:
    instance = reduction.instance
    load_vars, slack_vars = variable_counts(instance)
    lines = [
        RULE,
        "REDUCTION SUMMARY",
        RULE,
        f"📐 {format_counts_line(reduction)}",
        f"   • load variables:  {load_vars}",
        f"   • slack variables: {slack_vars}",
        f"   • penalty A:       {reduction.penalty:g}",
        f"   • pairwise terms:  {len(reduction.ising.couplings_j)}",
        f"   • Ising offset:    {reduction.ising.offset:g}",
    ]
    return "\n".join(lines)


def format_schedule_lines(instance: ProsumerInstance, record: SolutionRecord) -> List[str]:
    lines = []
    for load in instance.loads:
        hours = record.schedule.on_hours(load.id)
        lines.append(f"   • load {load.id}: on in hour(s) {', '.join(map(str, hours)) or '-'}")
    shares = cost_breakdown(instance, record.schedule)
    lines.append("   • cost by load: " + ", ".join(f"{k}={v}" for k, v in shares.items()))
    drawn = hourly_power(instance, record.schedule)
    lines.append("   • kW by hour:   " + ", ".join(f"h{h}={kw}/{instance.e_max}" for h, kw in drawn.items()))
    return lines


def format_enumeration_output(instance: ProsumerInstance, records: List[SolutionRecord]) -> str:
    """Feasible-solution listing with the cheapest schedule spelled out."""
    lines = [RULE, f"FEASIBLE SCHEDULES ({len(records)})", RULE]
    lines.append(render_frame(solutions_to_frame(instance, records), "table").rstrip("\n"))
    if records:
        best = records[0]
        lines.append(f"\n✅ Best schedule: {best.bitstring} at {format_cents(best.cost)}")
        lines.extend(format_schedule_lines(instance, best))
    else:
        lines.append("\n⚠️ No schedule satisfies the power cap and working times")
    return "\n".join(lines)


def format_exact_output(instance: ProsumerInstance, optimum_bits: str, optimum_value: float,
                        records: List[SolutionRecord]) -> str:
    lines = [RULE, "EXACT SOLUTION", RULE]
    lines.append(f"🎯 Minimum energy {optimum_value:g} at {optimum_bits}")
    lines.append(format_enumeration_output(instance, records))
    return "\n".join(lines)


def samples_to_frame(result: QaoaResult) -> pd.DataFrame:
    rows = [
        {
            "rank": rank,
            "bits": s.bits,
            "count": s.count,
            "probability": round(s.count / result.shots, 6),
            "feasible": s.feasible,
            "cost": s.cost,
            "cost_eur": f"{s.cost / 100:.2f}",
            "energy": s.energy,
        }
        for rank, s in enumerate(result.samples, start=1)
    ]
    return pd.DataFrame(rows, columns=["rank", "bits", "count", "probability", "feasible", "cost", "cost_eur", "energy"])


def format_qaoa_output(result: QaoaResult, optimum_cost: Optional[int] = None, top: int = 10) -> str:
    lines = [RULE, f"QAOA RESULT ({result.num_qubits} qubits, p = {len(result.gammas)})", RULE]
    lines.append(f"📉 <H> = {result.expectation:.4f} (zero-parameter baseline {result.baseline_expectation:.4f})")
    lines.append(f"   gamma = {', '.join(f'{g:.6f}' for g in result.gammas)}")
    lines.append(f"   beta  = {', '.join(f'{b:.6f}' for b in result.betas)}")
    lines.append(f"   optimizer evaluations: {result.optimizer_evaluations}")
    lines.append(f"   feasible share of shots: {result.feasible_probability:.3f}")

    best = result.best_feasible
    if best is None:
        lines.append("\n❌ No feasible schedule was sampled")
    else:
        lines.append(f"\n✅ Best feasible sample: {best.bits} at {format_cents(best.cost)}")
        if optimum_cost is not None:
            verdict = "optimal" if best.cost == optimum_cost else f"exact optimum is {optimum_cost}"
            lines.append(f"   oracle check: {verdict}")

    lines.append(f"\n📊 Top {min(top, len(result.samples))} samples:")
    lines.append(render_frame(samples_to_frame(result).head(top), "table").rstrip("\n"))
    return "\n".join(lines)


def format_verification_output(report: VerificationReport) -> str:
    mode = "exhaustive" if report.exhaustive else "sampled"
    lines = [RULE, f"REDUCTION CHECKS ({report.num_vars} variables, A = {report.penalty:g}, {mode})", RULE]
    for check in report.checks:
        icon = "⚠️" if check.skipped else ("✅" if check.passed else "❌")
        lines.append(f"{icon} {check.name}: {check.detail}")
        if check.witness:
            lines.append(f"   witness: {check.witness}")
    if report.passed:
        lines.append("\n✅ All checks passed")
    else:
        lines.append(f"\n❌ Verification failed: {', '.join(c.name for c in report.failed_checks)}")
    return "\n".join(lines)
