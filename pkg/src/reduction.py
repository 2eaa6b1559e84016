"""
ILP -> QUBO -> Ising Reduction Chain

Turns a prosumer instance into the models QAOA consumes:
  1. Binary ILP: cost vector plus equality constraints, the hourly power
     inequalities closed with binary-encoded slack (residual energy) variables
  2. QUBO: objective plus A * sum of squared constraint residuals, x^2 folded into x
  3. Ising: substitution x = (1 - z) / 2, giving fields h, couplings J and an offset
     whose energy equals the QUBO value bit-for-bit

Variable order is normative: load variables (loads as declared, hours ascending),
then slack variables grouped by hour ascending, bit index ascending within the hour.
Bit vectors map to basis indices little-endian: variable i is bit i-1 of the index.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.problem_model import ProsumerInstance, ScheduleAssignment, hourly_power, schedule_to_bits

logger = logging.getLogger(__name__)

Pair = Tuple[int, int]


# ------------------------------------------------------------------------------------
# Model types
# ------------------------------------------------------------------------------------
@dataclass(frozen=True)
class LoadVar:
    load_id: str
    hour: int

    @property
    def label(self) -> str:
        return f"x_{self.load_id}^{self.hour}"


@dataclass(frozen=True)
class SlackVar:
    hour: int
    bit: int  # 1-based index m within the hour
    coefficient: int

    @property
    def label(self) -> str:
        return f"y_{self.bit}^{self.hour}"


VarMeta = Union[LoadVar, SlackVar]


class ConstraintKind(Enum):
    POWER = "power"  # one per hour: sum E_l x_l^h + E_res^h = E_max
    DURATION = "duration"  # one per load: sum_h x_l^h = delta_l


@dataclass(frozen=True)
class Constraint:
    kind: ConstraintKind
    label: str
    coefficients: Tuple[int, ...]  # dense row over all variables
    rhs: int


@dataclass(frozen=True)
class BinaryLinearProgram:
    """min c.x subject to S x = b over binary x"""
    num_vars: int
    cost: Tuple[int, ...]
    constraints: Tuple[Constraint, ...]
    var_meta: Tuple[VarMeta, ...]

    @property
    def num_load_vars(self) -> int:
        return sum(isinstance(v, LoadVar) for v in self.var_meta)

    @property
    def num_slack_vars(self) -> int:
        return sum(isinstance(v, SlackVar) for v in self.var_meta)

    def constraint_matrix(self) -> np.ndarray:
        if not self.constraints:
            return np.zeros((0, self.num_vars), dtype=np.int64)
        return np.array([c.coefficients for c in self.constraints], dtype=np.int64)

    def rhs_vector(self) -> np.ndarray:
        return np.array([c.rhs for c in self.constraints], dtype=np.int64)

    def slack_indices(self, hour: int) -> List[int]:
        return [i for i, v in enumerate(self.var_meta) if isinstance(v, SlackVar) and v.hour == hour]


@dataclass(eq=False)
class QuboModel:
    """offset + sum u_i x_i + sum_{i<j} v_ij x_i x_j (0-based indices, i < j keys only)"""
    num_vars: int
    linear: np.ndarray
    quadratic: Dict[Pair, float]
    offset: float
    penalty: float = 0.0

    def __post_init__(self):
        self.linear = np.asarray(self.linear, dtype=float)
        self.linear.setflags(write=False)
        for (i, j) in self.quadratic:
            if not (0 <= i < j < self.num_vars):
                raise ValueError(f"quadratic key ({i}, {j}) must satisfy 0 <= i < j < {self.num_vars}")

    def upper_matrix(self) -> np.ndarray:
        """Strictly upper-triangular matrix of the pairwise coefficients."""
        v = np.zeros((self.num_vars, self.num_vars))
        for (i, j), value in self.quadratic.items():
            v[i, j] = value
        return v


@dataclass(eq=False)
class IsingModel:
    """offset + sum h_i z_i + sum_{i<j} J_ij z_i z_j with z = +1 <-> x = 0"""
    num_spins: int
    fields_h: np.ndarray
    couplings_j: Dict[Pair, float]
    offset: float

    def __post_init__(self):
        self.fields_h = np.asarray(self.fields_h, dtype=float)
        self.fields_h.setflags(write=False)
        for (i, j) in self.couplings_j:
            if not (0 <= i < j < self.num_spins):
                raise ValueError(f"coupling key ({i}, {j}) must satisfy 0 <= i < j < {self.num_spins}")

    def coupling_matrix(self) -> np.ndarray:
        j = np.zeros((self.num_spins, self.num_spins))
        for (a, b), value in self.couplings_j.items():
            j[a, b] = value
        return j

    def max_abs_coefficient(self) -> float:
        values = [abs(v) for v in self.fields_h] + [abs(v) for v in self.couplings_j.values()]
        return max(values, default=0.0)


@dataclass(eq=False)
class Reduction:
    """Every stage of the chain for one instance."""
    instance: ProsumerInstance
    ilp: BinaryLinearProgram
    penalty: float
    qubo: QuboModel
    ising: IsingModel


# ------------------------------------------------------------------------------------
# Bit helpers
# ------------------------------------------------------------------------------------
def index_bits(indices: Union[int, np.ndarray], n: int) -> np.ndarray:
    """Basis index -> bit rows (little-endian: column i is variable i+1)."""
    idx = np.atleast_1d(np.asarray(indices, dtype=np.int64))
    return ((idx[:, None] >> np.arange(n, dtype=np.int64)) & 1).astype(np.int8)


def bits_to_index(bits: Sequence[int]) -> int:
    return int(sum(int(b) << i for i, b in enumerate(bits)))


def bit_reverse(indices: np.ndarray, n: int) -> np.ndarray:
    """Reverse the n-bit representation; orders indices by their bitstring lexicographically."""
    idx = np.asarray(indices, dtype=np.int64)
    out = np.zeros_like(idx)
    for i in range(n):
        out |= ((idx >> i) & 1) << (n - 1 - i)
    return out


def spins_from_bits(bits) -> np.ndarray:
    """x = 0 -> z = +1, x = 1 -> z = -1."""
    return 1 - 2 * np.asarray(bits, dtype=np.int64)


def bits_from_spins(spins) -> np.ndarray:
    return ((1 - np.asarray(spins, dtype=np.int64)) // 2).astype(np.int8)


def bitstring(bits: Sequence[int]) -> str:
    """Variable 1 leftmost."""
    return "".join(str(int(b)) for b in bits)


def bits_from_string(text: str) -> List[int]:
    if any(ch not in "01" for ch in text):
        raise ValueError(f"bitstring must contain only 0/1, got {text!r}")
    return [int(ch) for ch in text]


# ------------------------------------------------------------------------------------
# ILP construction
# ------------------------------------------------------------------------------------
def slack_encoding(range_size: int) -> List[int]:
    """
    Coefficients of the binary slack expansion for an integer in 0..N-1.

    M = ceil(log2 N) bits: 1, 2, ..., 2^(M-2), then N - 2^(M-1). Subset sums are exactly 0..N-1.
    """
    if range_size < 1:
        raise ValueError(f"range size must be >= 1, got {range_size}")
    m = (range_size - 1).bit_length()
    if m == 0:
        return []
    return [1 << k for k in range(m - 1)] + [range_size - (1 << (m - 1))]


def residual_slack_bits(coefficients: Sequence[int], residual: int) -> List[int]:
    """Canonical slack bits reproducing `residual` with the given slack_encoding coefficients."""
    total = sum(coefficients)
    if not (0 <= residual <= total):
        raise ValueError(f"residual {residual} not representable (range 0..{total})")
    if not coefficients:
        return []
    powers = list(coefficients[:-1])
    bits = [0] * len(coefficients)
    remaining = residual
    if remaining > sum(powers):
        bits[-1] = 1
        remaining -= coefficients[-1]
    for k, c in enumerate(powers):
        if remaining & c:
            bits[k] = 1
    return bits


def variable_counts(instance: ProsumerInstance) -> Tuple[int, int]:
    """(load variables, slack variables): sum of window lengths and M * |H|."""
    m = len(slack_encoding(instance.e_max + 1))
    return instance.num_load_vars, m * len(instance.hours)


def build_ilp(instance: ProsumerInstance) -> BinaryLinearProgram:
    """
    Binary ILP of the prosumer problem.

    Hour constraints come first (power balance with residual slack), then one
    working-time equality per load.
    """
    meta: List[VarMeta] = [LoadVar(load_id, h) for load_id, h in instance.load_var_keys()]
    slack_coeffs = slack_encoding(instance.e_max + 1)
    for h in instance.hours:
        for m, c in enumerate(slack_coeffs, start=1):
            meta.append(SlackVar(hour=h, bit=m, coefficient=c))
    n = len(meta)

    power_of = {load.id: load.power for load in instance.loads}
    cost = [
        instance.tariff[v.hour] * power_of[v.load_id] if isinstance(v, LoadVar) else 0
        for v in meta
    ]

    constraints: List[Constraint] = []
    for h in instance.hours:
        row = [0] * n
        for i, v in enumerate(meta):
            if isinstance(v, LoadVar) and v.hour == h:
                row[i] = power_of[v.load_id]
            elif isinstance(v, SlackVar) and v.hour == h:
                row[i] = v.coefficient
        constraints.append(Constraint(ConstraintKind.POWER, f"hour {h}", tuple(row), instance.e_max))
    for load in instance.loads:
        row = [1 if isinstance(v, LoadVar) and v.load_id == load.id else 0 for v in meta]
        constraints.append(Constraint(ConstraintKind.DURATION, f"load {load.id}", tuple(row), load.duration))

    ilp = BinaryLinearProgram(num_vars=n, cost=tuple(cost), constraints=tuple(constraints), var_meta=tuple(meta))
    logger.info(
        f"Built ILP: {n} variables ({ilp.num_load_vars} load + {ilp.num_slack_vars} slack), "
        f"{len(constraints)} constraints"
    )
    return ilp


def penalty_coefficient(instance: ProsumerInstance) -> float:
    """A = 1 + C_up - C_low, with C_up the all-on cost and C_low = 0 the all-off cost."""
    c_up = sum(instance.tariff[h] * load.power for load in instance.loads for h in load.window_hours)
    c_low = 0
    return 1.0 + c_up - c_low


def ilp_objective(ilp: BinaryLinearProgram, bits: Sequence[int]) -> int:
    return int(np.dot(np.asarray(ilp.cost, dtype=np.int64), np.asarray(bits, dtype=np.int64)))


def ilp_residuals(ilp: BinaryLinearProgram, bits: Sequence[int]) -> List[int]:
    """S x - b for every constraint; all zero exactly when x is feasible."""
    x = np.asarray(bits, dtype=np.int64)
    return (ilp.constraint_matrix() @ x - ilp.rhs_vector()).tolist()


def penalized_values(ilp: BinaryLinearProgram, penalty: float, bit_matrix: np.ndarray) -> np.ndarray:
    """Direct evaluation of cost + A * sum residual^2 for each row of bit_matrix."""
    b = np.asarray(bit_matrix, dtype=np.int64)
    cost = b @ np.asarray(ilp.cost, dtype=np.int64)
    residual = b @ ilp.constraint_matrix().T - ilp.rhs_vector()
    return cost + penalty * (residual ** 2).sum(axis=1)


def full_bitstring(ilp: BinaryLinearProgram, instance: ProsumerInstance, schedule: ScheduleAssignment) -> List[int]:
    """Load bits of the schedule plus slacks encoding each hour's true residual (clipped at 0)."""
    bits = schedule_to_bits(instance, schedule)
    slack_coeffs = slack_encoding(instance.e_max + 1)
    for h, drawn in hourly_power(instance, schedule).items():
        residual = max(instance.e_max - drawn, 0)
        bits.extend(residual_slack_bits(slack_coeffs, residual))
    if len(bits) != ilp.num_vars:
        raise ValueError(f"ILP has {ilp.num_vars} variables, schedule encodes {len(bits)}")
    return bits


# ------------------------------------------------------------------------------------
# QUBO and Ising
# ------------------------------------------------------------------------------------
def qubo_from_ilp(ilp: BinaryLinearProgram, penalty: float) -> QuboModel:
    """
    Expand c.x + A * sum_m (S_m.x - b_m)^2 into linear, pairwise and constant parts.

    x_i^2 is folded into x_i. A = 0 is accepted so the unpenalized objective can be inspected.
    """
    if penalty < 0:
        raise ValueError(f"penalty coefficient must be >= 0, got {penalty}")
    s = ilp.constraint_matrix().astype(float)
    b = ilp.rhs_vector().astype(float)

    linear = np.asarray(ilp.cost, dtype=float) + penalty * ((s ** 2).sum(axis=0) - 2.0 * (b @ s))
    gram = s.T @ s
    quadratic = {
        (i, j): 2.0 * penalty * gram[i, j]
        for i, j in combinations(range(ilp.num_vars), 2)
        if gram[i, j] != 0 and penalty != 0
    }
    offset = penalty * float(b @ b)
    logger.info(f"QUBO: {ilp.num_vars} variables, {len(quadratic)} pairwise terms, A={penalty:g}")
    return QuboModel(num_vars=ilp.num_vars, linear=linear, quadratic=quadratic, offset=offset, penalty=penalty)


def ising_from_qubo(qubo: QuboModel) -> IsingModel:
    """
    Substitute x_i = (1 - z_i) / 2.

    h_i = -u_i/2 - sum_{j != i} v_ij/4,  J_ij = v_ij/4,  offset = c + sum u_i/2 + sum v_ij/4
    """
    h = -qubo.linear / 2.0
    couplings: Dict[Pair, float] = {}
    offset = qubo.offset + float(qubo.linear.sum()) / 2.0
    for (i, j), v in qubo.quadratic.items():
        h[i] -= v / 4.0
        h[j] -= v / 4.0
        couplings[(i, j)] = v / 4.0
        offset += v / 4.0
    return IsingModel(num_spins=qubo.num_vars, fields_h=h, couplings_j=couplings, offset=offset)


def reduce_instance(instance: ProsumerInstance, penalty: Optional[float] = None) -> Reduction:
    """Run the whole chain; `penalty` overrides the default A."""
    ilp = build_ilp(instance)
    a = penalty_coefficient(instance) if penalty is None else float(penalty)
    qubo = qubo_from_ilp(ilp, a)
    ising = ising_from_qubo(qubo)
    return Reduction(instance=instance, ilp=ilp, penalty=a, qubo=qubo, ising=ising)


def qubo_value(qubo: QuboModel, bits: Sequence[int]) -> float:
    if len(bits) != qubo.num_vars:
        raise ValueError(f"expected {qubo.num_vars} bits, got {len(bits)}")
    x = np.asarray(bits, dtype=float)
    value = qubo.offset + float(qubo.linear @ x)
    for (i, j), v in qubo.quadratic.items():
        value += v * x[i] * x[j]
    return value


def ising_energy(ising: IsingModel, spins: Sequence[int]) -> float:
    if len(spins) != ising.num_spins:
        raise ValueError(f"expected {ising.num_spins} spins, got {len(spins)}")
    z = np.asarray(spins)
    if not np.all((z == 1) | (z == -1)):
        raise ValueError("spins must be +1 or -1")
    z = z.astype(float)
    energy = ising.offset + float(ising.fields_h @ z)
    for (i, j), value in ising.couplings_j.items():
        energy += value * z[i] * z[j]
    return energy


def qubo_values(qubo: QuboModel, bit_matrix: np.ndarray) -> np.ndarray:
    """Vectorized qubo_value over the rows of bit_matrix."""
    b = np.asarray(bit_matrix, dtype=float)
    return qubo.offset + b @ qubo.linear + ((b @ qubo.upper_matrix()) * b).sum(axis=1)


def ising_energies(ising: IsingModel, spin_matrix: np.ndarray) -> np.ndarray:
    """Vectorized ising_energy over the rows of spin_matrix."""
    z = np.asarray(spin_matrix, dtype=float)
    return ising.offset + z @ ising.fields_h + ((z @ ising.coupling_matrix()) * z).sum(axis=1)


def hamiltonian_matrix(ising: IsingModel, order: str = "little") -> np.ndarray:
    """
    Dense diagonal operator for small models.

    order="big" puts variable 1 in the most significant position (tensor-product order);
    order="little" matches the simulator's basis indexing.
    """
    n = ising.num_spins
    if n > 12:
        raise ValueError(f"dense operator view is limited to 12 spins, model has {n}")
    if order not in ("little", "big"):
        raise ValueError(f"order must be 'little' or 'big', got {order!r}")
    indices = np.arange(1 << n, dtype=np.int64)
    energies = ising_energies(ising, spins_from_bits(index_bits(indices, n)))
    if order == "big":
        energies = energies[bit_reverse(indices, n)]
    return np.diag(energies)


# ------------------------------------------------------------------------------------
# Rendering and documents (1-indexed to match qubit labels)
# ------------------------------------------------------------------------------------
def _num(value: float):
    value = float(value)
    return int(value) if value.is_integer() else value


def _fmt(value: float) -> str:
    value = float(value)
    return str(int(value)) if value.is_integer() else f"{value:.10g}"


def format_hamiltonian(ising: IsingModel) -> str:
    """Pauli-Z operator form, e.g. '79·Z_1 + 80·Z_2 - 112·Z_4 + 101·Z_1 Z_2 + 2019.5'."""
    terms: List[Tuple[float, str]] = []
    for i, h in enumerate(ising.fields_h):
        if h != 0:
            terms.append((h, f"Z_{i + 1}"))
    for (i, j) in sorted(ising.couplings_j):
        value = ising.couplings_j[(i, j)]
        if value != 0:
            terms.append((value, f"Z_{i + 1} Z_{j + 1}"))
    if ising.offset != 0 or not terms:
        terms.append((ising.offset, ""))

    parts = []
    for k, (coef, op) in enumerate(terms):
        body = f"{_fmt(abs(coef))}·{op}" if op else _fmt(abs(coef))
        if k == 0:
            parts.append(f"-{body}" if coef < 0 else body)
        else:
            parts.append(f"{'-' if coef < 0 else '+'} {body}")
    return " ".join(parts)


def ilp_to_document(ilp: BinaryLinearProgram) -> dict:
    variables = []
    for i, v in enumerate(ilp.var_meta, start=1):
        if isinstance(v, LoadVar):
            variables.append({"index": i, "kind": "load", "label": v.label, "load": v.load_id, "hour": v.hour})
        else:
            variables.append({"index": i, "kind": "slack", "label": v.label, "hour": v.hour,
                              "bit": v.bit, "coefficient": v.coefficient})
    return {
        "num_vars": ilp.num_vars,
        "num_constraints": len(ilp.constraints),
        "variables": variables,
        "cost": list(ilp.cost),
        "constraints": [
            {"kind": c.kind.value, "label": c.label, "coefficients": list(c.coefficients), "rhs": c.rhs}
            for c in ilp.constraints
        ],
    }


def qubo_to_document(qubo: QuboModel) -> dict:
    return {
        "num_vars": qubo.num_vars,
        "offset": _num(qubo.offset),
        "penalty": _num(qubo.penalty),
        "linear": [_num(u) for u in qubo.linear],
        "quadratic": [
            {"i": i + 1, "j": j + 1, "v": _num(qubo.quadratic[(i, j)])} for (i, j) in sorted(qubo.quadratic)
        ],
    }


def ising_to_document(ising: IsingModel) -> dict:
    return {
        "num_spins": ising.num_spins,
        "offset": _num(ising.offset),
        "h": [_num(h) for h in ising.fields_h],
        "j": [
            {"i": i + 1, "j": j + 1, "v": _num(ising.couplings_j[(i, j)])} for (i, j) in sorted(ising.couplings_j)
        ],
    }
