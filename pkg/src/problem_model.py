"""
Prosumer Scheduling Problem Model

Defines the single-user prosumer problem and its classical semantics:
- Schedulable, interruptible loads with a preference window, a working time and a power draw
- Hourly tariffs (integer cents per kWh) and a system power cap (integer kW)
- The JSON instance document (load / serialize / validate)
- Cost and feasibility of a schedule, the ground truth every reduction and solver is checked against

Time slots are one hour long, so kW per slot is kWh and every cost stays an exact integer.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from src.settings import FIXTURE_A_PATH

logger = logging.getLogger(__name__)

ScheduleKey = Tuple[str, int]


# ------------------------------------------------------------------------------------
# Errors
# ------------------------------------------------------------------------------------
class InstanceError(Exception):
    """Base class for instance document problems."""


class InstanceParseError(InstanceError):
    """The document is not well-formed (bad JSON, wrong shape, wrong field type)."""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None,
                 field: Optional[str] = None):
        self.line = line
        self.column = column
        self.field = field
        location = []
        if line is not None:
            location.append(f"line {line}" + (f", column {column}" if column is not None else ""))
        if field:
            location.append(f"field '{field}'")
        prefix = f"{'; '.join(location)}: " if location else ""
        super().__init__(f"{prefix}{message}")


class InstanceValidationError(InstanceError):
    """The document parsed but violates an instance invariant."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"field '{field}': {message}")


class ScheduleKeyError(KeyError):
    """A schedule's (load, hour) keys do not match the instance windows."""

    def __str__(self):
        return str(self.args[0]) if self.args else "schedule key mismatch"


# ------------------------------------------------------------------------------------
# Domain types
# ------------------------------------------------------------------------------------
@dataclass(frozen=True)
class Load:
    """A schedulable interruptible load"""
    id: str
    alpha: int  # first admissible hour (inclusive)
    beta: int  # last admissible hour (inclusive)
    duration: int  # hours the load must run
    power: int  # kW drawn while on

    @property
    def window(self) -> Tuple[int, int]:
        return (self.alpha, self.beta)

    @property
    def window_hours(self) -> range:
        return range(self.alpha, self.beta + 1)

    @property
    def window_length(self) -> int:
        """Number of one-hour slots in the window."""
        return self.beta - self.alpha + 1

    def covers(self, hour: int) -> bool:
        return self.alpha <= hour <= self.beta


@dataclass(frozen=True)
class ProsumerInstance:
    """
    One prosumer scheduling problem.

    Validated on construction; see validate_instance for the invariants.
    """
    loads: Tuple[Load, ...]
    hours: Tuple[int, ...]
    tariff: Mapping[int, int]  # hour -> cents per kWh, read-only
    e_max: int  # kW

    def __post_init__(self):
        object.__setattr__(self, "loads", tuple(self.loads))
        object.__setattr__(self, "hours", tuple(self.hours))
        object.__setattr__(self, "tariff", MappingProxyType(dict(self.tariff)))
        validate_instance(self)

    def __hash__(self) -> int:
        return hash((self.loads, self.hours, tuple(sorted(self.tariff.items())), self.e_max))

    @property
    def num_load_vars(self) -> int:
        return sum(load.window_length for load in self.loads)

    @property
    def prices(self) -> List[int]:
        return [self.tariff[h] for h in self.hours]

    def load(self, load_id: str) -> Load:
        for candidate in self.loads:
            if candidate.id == load_id:
                return candidate
        raise KeyError(load_id)

    def load_var_keys(self) -> List[ScheduleKey]:
        """(load id, hour) pairs in normative variable order: loads as declared, hours ascending."""
        return [(load.id, h) for load in self.loads for h in load.window_hours]


@dataclass(frozen=True)
class ScheduleAssignment:
    """On/off state x_l^h for every (load, hour) inside the load windows"""
    values: Mapping[ScheduleKey, int] = field(default_factory=dict)  # read-only after construction

    def __post_init__(self):
        values = dict(self.values)
        for key, bit in values.items():
            if bit not in (0, 1) or isinstance(bit, bool):
                raise ValueError(f"schedule value for {key} must be 0 or 1, got {bit!r}")
        object.__setattr__(self, "values", MappingProxyType(values))

    def __hash__(self) -> int:
        return hash(frozenset(self.values.items()))

    def __getitem__(self, key: ScheduleKey) -> int:
        return self.values[key]

    def keys(self):
        return self.values.keys()

    def on_hours(self, load_id: str) -> List[int]:
        return sorted(h for (lid, h), bit in self.values.items() if lid == load_id and bit)


@dataclass(frozen=True)
class PowerViolation:
    hour: int
    drawn: int
    cap: int

    def describe(self) -> str:
        return f"hour {self.hour}: drawn power {self.drawn} kW exceeds E_max {self.cap} kW"


@dataclass(frozen=True)
class DurationViolation:
    load_id: str
    on_hours: int
    required: int

    def describe(self) -> str:
        return f"load '{self.load_id}': on for {self.on_hours} h, must run exactly {self.required} h"


Violation = Union[PowerViolation, DurationViolation]


@dataclass(frozen=True)
class FeasibilityReport:
    """Outcome of a feasibility check; truthy when the schedule is feasible"""
    feasible: bool
    violations: Tuple[Violation, ...] = ()

    def __bool__(self) -> bool:
        return self.feasible

    def describe(self) -> List[str]:
        return [v.describe() for v in self.violations]


# ------------------------------------------------------------------------------------
# Validation and document I/O
# ------------------------------------------------------------------------------------
def validate_instance(instance: ProsumerInstance) -> None:
    """Raise InstanceValidationError naming the first violated invariant."""
    if len(instance.hours) < 1:
        raise InstanceValidationError("hours", "at least one scheduling hour is required")
    if list(instance.hours) != list(range(1, len(instance.hours) + 1)):
        raise InstanceValidationError("hours", "hours must be labelled 1..|H| in order")
    if instance.e_max < 1:
        raise InstanceValidationError("e_max", f"must be >= 1 kW, got {instance.e_max}")
    for h in instance.hours:
        if h not in instance.tariff:
            raise InstanceValidationError("tariff", f"no price for hour {h}")
        if instance.tariff[h] < 0:
            raise InstanceValidationError(f"tariff[{h - 1}]", f"price must be >= 0, got {instance.tariff[h]}")
    if len(instance.loads) < 1:
        raise InstanceValidationError("loads", "at least one load is required")

    seen = set()
    last_hour = len(instance.hours)
    for idx, load in enumerate(instance.loads):
        where = f"loads[{idx}]"
        if not load.id:
            raise InstanceValidationError(f"{where}.id", "load id must be a non-empty string")
        if load.id in seen:
            raise InstanceValidationError(f"{where}.id", f"duplicate load id '{load.id}'")
        seen.add(load.id)
        if not (1 <= load.alpha <= last_hour):
            raise InstanceValidationError(f"{where}.alpha", f"window start {load.alpha} outside hours 1..{last_hour}")
        if not (1 <= load.beta <= last_hour):
            raise InstanceValidationError(f"{where}.beta", f"window end {load.beta} outside hours 1..{last_hour}")
        if load.alpha > load.beta:
            raise InstanceValidationError(f"{where}.beta", f"window end {load.beta} precedes start {load.alpha}")
        if load.duration < 1:
            raise InstanceValidationError(f"{where}.delta", f"duration must be >= 1 h, got {load.duration}")
        if load.duration > load.window_length:
            raise InstanceValidationError(
                f"{where}.delta",
                f"duration {load.duration} h exceeds window [{load.alpha}, {load.beta}] of {load.window_length} slot(s)"
            )
        if not (1 <= load.power <= instance.e_max):
            raise InstanceValidationError(
                f"{where}.power", f"power {load.power} kW must lie in 1..E_max ({instance.e_max} kW)"
            )


def _require_int(value, field_name: str) -> int:
    if isinstance(value, bool):
        raise InstanceParseError("expected an integer, got a boolean", field=field_name)
    if isinstance(value, int):
        return value
    if isinstance(value, float):
        if value.is_integer():
            return int(value)
        raise InstanceParseError(
            f"fractional value {value} is not allowed; rescale the unit "
            f"(e.g. express power in W or prices in tenths of a cent) so every value is an integer",
            field=field_name,
        )
    raise InstanceParseError(f"expected an integer, got {type(value).__name__}", field=field_name)


def _require(document: dict, key: str, where: str = ""):
    if key not in document:
        raise InstanceParseError("missing required field", field=f"{where}{key}")
    return document[key]


def instance_from_document(document: dict) -> ProsumerInstance:
    """Build and validate an instance from an already-decoded document."""
    if not isinstance(document, dict):
        raise InstanceParseError("top level must be an object")

    num_hours = _require_int(_require(document, "hours"), "hours")
    if num_hours < 1:
        raise InstanceValidationError("hours", f"must be >= 1, got {num_hours}")
    e_max = _require_int(_require(document, "e_max"), "e_max")

    raw_tariff = _require(document, "tariff")
    if not isinstance(raw_tariff, list):
        raise InstanceParseError("expected an array of prices", field="tariff")
    if len(raw_tariff) != num_hours:
        raise InstanceValidationError(
            "tariff", f"expected {num_hours} prices (one per hour), got {len(raw_tariff)}"
        )
    tariff = {h: _require_int(p, f"tariff[{h - 1}]") for h, p in enumerate(raw_tariff, start=1)}

    raw_loads = _require(document, "loads")
    if not isinstance(raw_loads, list):
        raise InstanceParseError("expected an array of loads", field="loads")
    loads = []
    for idx, raw in enumerate(raw_loads):
        where = f"loads[{idx}]."
        if not isinstance(raw, dict):
            raise InstanceParseError("expected an object", field=f"loads[{idx}]")
        load_id = _require(raw, "id", where)
        if not isinstance(load_id, str):
            raise InstanceParseError("expected a string", field=f"{where}id")
        loads.append(Load(
            id=load_id,
            alpha=_require_int(_require(raw, "alpha", where), f"{where}alpha"),
            beta=_require_int(_require(raw, "beta", where), f"{where}beta"),
            duration=_require_int(_require(raw, "delta", where), f"{where}delta"),
            power=_require_int(_require(raw, "power", where), f"{where}power"),
        ))

    return ProsumerInstance(
        loads=tuple(loads),
        hours=tuple(range(1, num_hours + 1)),
        tariff=tariff,
        e_max=e_max,
    )


def load_instance(text: str) -> ProsumerInstance:
    """
    Parse and validate an instance document.

    Args:
        text: JSON document with `hours`, `e_max`, `tariff` and `loads`

    Returns:
        Validated ProsumerInstance

    Raises:
        InstanceParseError: malformed JSON or wrong field types (with line/field context)
        InstanceValidationError: an invariant such as duration <= window length is violated
    """
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise InstanceParseError(e.msg, line=e.lineno, column=e.colno) from e
    instance = instance_from_document(document)
    logger.info(
        f"Loaded instance: {len(instance.loads)} load(s), {len(instance.hours)} hour(s), "
        f"E_max={instance.e_max} kW, {instance.num_load_vars} load variables"
    )
    return instance


def load_instance_file(path: Union[str, Path]) -> ProsumerInstance:
    """Read an instance document from disk (OSError propagates untouched)."""
    text = Path(path).read_text(encoding="utf-8")
    return load_instance(text)


def load_fixture_a() -> ProsumerInstance:
    """The two-load, three-hour reference instance shipped in data/."""
    return load_instance_file(FIXTURE_A_PATH)


def instance_to_document(instance: ProsumerInstance) -> dict:
    return {
        "hours": len(instance.hours),
        "e_max": instance.e_max,
        "tariff": instance.prices,
        "loads": [
            {"id": l.id, "alpha": l.alpha, "beta": l.beta, "delta": l.duration, "power": l.power}
            for l in instance.loads
        ],
    }


def serialize_instance(instance: ProsumerInstance) -> str:
    """Canonical JSON text; load_instance(serialize_instance(x)) == x."""
    return json.dumps(instance_to_document(instance), indent=2) + "\n"


def widen_instance(instance: ProsumerInstance, hours: int) -> ProsumerInstance:
    """
    Scaling-family member: every window becomes [1, hours] and the tariff
    repeats the base pattern cyclically (22/21/24 -> 22/21/24/22/21 ...).
    """
    if hours < 1:
        raise ValueError(f"hours must be >= 1, got {hours}")
    base = instance.prices
    tariff = {h: base[(h - 1) % len(base)] for h in range(1, hours + 1)}
    loads = tuple(
        Load(id=l.id, alpha=1, beta=hours, duration=min(l.duration, hours), power=l.power)
        for l in instance.loads
    )
    return ProsumerInstance(loads=loads, hours=tuple(range(1, hours + 1)), tariff=tariff, e_max=instance.e_max)


# ------------------------------------------------------------------------------------
# Schedule semantics
# ------------------------------------------------------------------------------------
def _check_keys(instance: ProsumerInstance, schedule: ScheduleAssignment) -> None:
    expected = set(instance.load_var_keys())
    actual = set(schedule.keys())
    if expected != actual:
        missing = sorted(expected - actual)
        extra = sorted(actual - expected)
        parts = []
        if missing:
            parts.append(f"missing {missing}")
        if extra:
            parts.append(f"outside any window {extra}")
        raise ScheduleKeyError(f"schedule keys do not match the load windows: {'; '.join(parts)}")


def schedule_from_bits(instance: ProsumerInstance, bits: Sequence[int]) -> ScheduleAssignment:
    """Load-variable bits (normative order) -> ScheduleAssignment. Extra trailing bits (slacks) are ignored."""
    keys = instance.load_var_keys()
    if len(bits) < len(keys):
        raise ValueError(f"need at least {len(keys)} bits, got {len(bits)}")
    return ScheduleAssignment({key: int(bits[i]) for i, key in enumerate(keys)})


def schedule_to_bits(instance: ProsumerInstance, schedule: ScheduleAssignment) -> List[int]:
    _check_keys(instance, schedule)
    return [schedule[key] for key in instance.load_var_keys()]


def schedule_from_on_hours(instance: ProsumerInstance, on_hours: Dict[str, Iterable[int]]) -> ScheduleAssignment:
    """Build a schedule from {load id: hours switched on}; unspecified slots are off."""
    values = {key: 0 for key in instance.load_var_keys()}
    for load_id, hours in on_hours.items():
        try:
            load = instance.load(load_id)
        except KeyError:
            raise ScheduleKeyError(f"unknown load '{load_id}'") from None
        for h in hours:
            if not load.covers(h):
                raise ScheduleKeyError(f"hour {h} is outside the window of load '{load_id}'")
            values[(load_id, h)] = 1
    return ScheduleAssignment(values)


def cost_of_schedule(instance: ProsumerInstance, schedule: ScheduleAssignment) -> int:
    """Global energy cost in integer cents: sum over loads and hours of p^h * x_l^h * E_l."""
    _check_keys(instance, schedule)
    return sum(
        instance.tariff[h] * schedule[(load.id, h)] * load.power
        for load in instance.loads
        for h in load.window_hours
    )


def cost_breakdown(instance: ProsumerInstance, schedule: ScheduleAssignment) -> Dict[str, int]:
    """Per-load share of the cost in cents."""
    _check_keys(instance, schedule)
    return {
        load.id: sum(instance.tariff[h] * schedule[(load.id, h)] * load.power for h in load.window_hours)
        for load in instance.loads
    }


def hourly_power(instance: ProsumerInstance, schedule: ScheduleAssignment) -> Dict[int, int]:
    """Total kW drawn in every hour of the horizon."""
    _check_keys(instance, schedule)
    drawn = {h: 0 for h in instance.hours}
    for load in instance.loads:
        for h in load.window_hours:
            drawn[h] += schedule[(load.id, h)] * load.power
    return drawn


def is_feasible(instance: ProsumerInstance, schedule: ScheduleAssignment) -> FeasibilityReport:
    """
    Check the power cap in every hour and the exact working time of every load.

    Returns:
        FeasibilityReport listing each violated constraint (empty when feasible)
    """
    violations: List[Violation] = []
    for h, drawn in hourly_power(instance, schedule).items():
        if drawn > instance.e_max:
            violations.append(PowerViolation(hour=h, drawn=drawn, cap=instance.e_max))
    for load in instance.loads:
        on = sum(schedule[(load.id, h)] for h in load.window_hours)
        if on != load.duration:
            violations.append(DurationViolation(load_id=load.id, on_hours=on, required=load.duration))
    return FeasibilityReport(feasible=not violations, violations=tuple(violations))


def format_cents(cents: int) -> str:
    """'107 cents (1.07 €)'"""
    return f"{cents} cents ({cents / 100:.2f} €)"
