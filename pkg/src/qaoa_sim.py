"""
QAOA Statevector Simulator for Diagonal Hamiltonians

Self-contained simulation of the standard QAOA ansatz:
- |+...+> start, alternating e^{-i gamma H} phase layers and e^{-i beta sum X_i} mixer layers
- Multi-start Nelder-Mead search over (gamma, beta)
- Seeded multinomial sampling of the final state and decoding into ranked schedules

Basis index k encodes bits little-endian (variable i is bit i-1 of k); a measured
|1> on qubit i is spin z_i = -1, i.e. x_i = 1.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import minimize

from src.problem_model import ProsumerInstance, ScheduleAssignment, cost_of_schedule, is_feasible, schedule_from_bits
from src.reduction import (
    IsingModel,
    Reduction,
    bitstring,
    index_bits,
    ising_energy,
    reduce_instance,
    spins_from_bits,
)
from src.settings import DIAGONAL_CHUNK, default_max_qubits

logger = logging.getLogger(__name__)

SeedLike = Union[int, np.random.SeedSequence]


class ResourceLimitError(RuntimeError):
    """The statevector would exceed the configured qubit cap."""

    def __init__(self, num_qubits: int, cap: int):
        self.num_qubits = num_qubits
        self.cap = cap
        super().__init__(
            f"{num_qubits} qubits exceed the statevector cap of {cap} qubits "
            f"({1 << num_qubits} amplitudes requested)"
        )


def check_qubit_cap(num_qubits: int, cap: Optional[int] = None) -> None:
    cap = default_max_qubits() if cap is None else cap
    if num_qubits > cap:
        logger.warning(f"Refusing to allocate {num_qubits}-qubit statevector (cap {cap})")
        raise ResourceLimitError(num_qubits, cap)


@dataclass
class QaoaConfig:
    """Simulation and optimizer settings"""
    reps: int = 1
    shots: int = 1024
    max_evaluations: int = 400  # per restart
    restarts: int = 1
    seed: int = 0
    max_qubits: int = field(default_factory=default_max_qubits)
    materialize: bool = False
    normalize_gamma: bool = True

    def __post_init__(self):
        for name in ("reps", "shots", "max_evaluations", "restarts", "max_qubits"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise ValueError(f"QaoaConfig.{name} must be a positive integer, got {value!r}")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ValueError(f"QaoaConfig.seed must be a non-negative integer, got {self.seed!r}")

    def to_dict(self) -> Dict:
        return {
            "reps": self.reps,
            "shots": self.shots,
            "max_evaluations": self.max_evaluations,
            "restarts": self.restarts,
            "seed": self.seed,
            "max_qubits": self.max_qubits,
            "materialize": self.materialize,
            "normalize_gamma": self.normalize_gamma,
        }


class DiagonalHamiltonian:
    """
    Energies of every basis state of an Ising model.

    Evaluated lazily in chunks of DIAGONAL_CHUNK indices; `materialize=True`
    keeps the full 2^n vector instead.
    """

    def __init__(self, ising: IsingModel, materialize: bool = False, chunk_size: int = DIAGONAL_CHUNK):
        self.ising = ising
        self.num_qubits = ising.num_spins
        self.dimension = 1 << ising.num_spins
        self.chunk_size = max(1, chunk_size)
        self._h = np.asarray(ising.fields_h, dtype=float)
        self._j = ising.coupling_matrix()
        self._vector: Optional[np.ndarray] = None
        if materialize:
            self.materialize()

    def energy(self, index: int) -> float:
        if not (0 <= index < self.dimension):
            raise IndexError(f"basis index {index} outside 0..{self.dimension - 1}")
        return ising_energy(self.ising, spins_from_bits(index_bits(index, self.num_qubits)[0]))

    def energies(self, start: int, stop: int) -> np.ndarray:
        if self._vector is not None:
            return self._vector[start:stop]
        z = spins_from_bits(index_bits(np.arange(start, stop, dtype=np.int64), self.num_qubits)).astype(float)
        return self.ising.offset + z @ self._h + ((z @ self._j) * z).sum(axis=1)

    def chunks(self) -> Iterator[Tuple[int, int, np.ndarray]]:
        for start in range(0, self.dimension, self.chunk_size):
            stop = min(start + self.chunk_size, self.dimension)
            yield start, stop, self.energies(start, stop)

    def materialize(self) -> np.ndarray:
        if self._vector is None:
            self._vector = self.energies(0, self.dimension)
            self._vector.setflags(write=False)
        return self._vector

    @property
    def is_materialized(self) -> bool:
        return self._vector is not None

    def minimum(self) -> float:
        return min(float(e.min()) for _, _, e in self.chunks())


# ------------------------------------------------------------------------------------
# Statevector kernels (states are updated in place and returned)
# ------------------------------------------------------------------------------------
def _num_qubits(state: np.ndarray) -> int:
    n = int(state.shape[0]).bit_length() - 1
    if state.ndim != 1 or (1 << n) != state.shape[0]:
        raise ValueError(f"statevector length must be a power of two, got shape {state.shape}")
    return n


def initial_state(num_qubits: int, cap: Optional[int] = None) -> np.ndarray:
    """Uniform superposition |+>^n."""
    if num_qubits < 1:
        raise ValueError(f"need at least one qubit, got {num_qubits}")
    check_qubit_cap(num_qubits, cap)
    return np.full(1 << num_qubits, 2.0 ** (-num_qubits / 2.0), dtype=np.complex128)


def apply_phase_separator(state: np.ndarray, diag: DiagonalHamiltonian, gamma: float) -> np.ndarray:
    """amp_k <- amp_k * exp(-i gamma E_k)."""
    if state.shape[0] != diag.dimension:
        raise ValueError(f"state has {state.shape[0]} amplitudes, Hamiltonian has {diag.dimension}")
    if gamma == 0:
        return state
    for start, stop, energies in diag.chunks():
        state[start:stop] *= np.exp(-1j * gamma * energies)
    return state


def apply_mixer(state: np.ndarray, beta: float) -> np.ndarray:
    """Apply e^{-i beta X} to every qubit."""
    n = _num_qubits(state)
    if not state.flags.c_contiguous:
        raise ValueError("statevector must be C-contiguous to be updated in place")
    if beta == 0:
        return state
    c, s = math.cos(beta), math.sin(beta)
    for i in range(n):
        view = state.reshape(-1, 2, 1 << i)
        a = view[:, 0, :].copy()
        b = view[:, 1, :]
        view[:, 0, :] = c * a - 1j * s * b
        view[:, 1, :] = -1j * s * a + c * b
    return state


def expectation(state: np.ndarray, diag: DiagonalHamiltonian) -> float:
    """<psi|H|psi> for diagonal H."""
    if state.shape[0] != diag.dimension:
        raise ValueError(f"state has {state.shape[0]} amplitudes, Hamiltonian has {diag.dimension}")
    total = 0.0
    for start, stop, energies in diag.chunks():
        amps = state[start:stop]
        total += float(np.dot(amps.real ** 2 + amps.imag ** 2, energies))
    return total


def qaoa_state(ising: IsingModel, gammas: Sequence[float], betas: Sequence[float],
               max_qubits: Optional[int] = None, diagonal: Optional[DiagonalHamiltonian] = None) -> np.ndarray:
    """Final statevector after len(gammas) phase/mixer layers."""
    if len(gammas) != len(betas) or len(gammas) < 1:
        raise ValueError(f"need equal, non-empty gamma/beta lists, got {len(gammas)} and {len(betas)}")
    diag = diagonal if diagonal is not None else DiagonalHamiltonian(ising)
    state = initial_state(ising.num_spins, max_qubits)
    for gamma, beta in zip(gammas, betas):
        apply_phase_separator(state, diag, float(gamma))
        apply_mixer(state, float(beta))
    return state


def qaoa_expectation(ising: IsingModel, gammas: Sequence[float], betas: Sequence[float],
                     max_qubits: Optional[int] = None, diagonal: Optional[DiagonalHamiltonian] = None) -> float:
    diag = diagonal if diagonal is not None else DiagonalHamiltonian(ising)
    return expectation(qaoa_state(ising, gammas, betas, max_qubits, diag), diag)


# ------------------------------------------------------------------------------------
# Classical optimization loop
# ------------------------------------------------------------------------------------
@dataclass(frozen=True)
class TraceEntry:
    restart: int
    evaluation: int
    gammas: Tuple[float, ...]
    betas: Tuple[float, ...]
    expectation: float


@dataclass(frozen=True)
class QaoaParameters:
    gammas: Tuple[float, ...]
    betas: Tuple[float, ...]
    expectation: float


def optimize_parameters(ising: IsingModel, config: QaoaConfig, seed: Optional[SeedLike] = None,
                        diagonal: Optional[DiagonalHamiltonian] = None) -> Tuple[QaoaParameters, List[TraceEntry]]:
    """
    Multi-start Nelder-Mead over (gamma, beta).

    Starts are drawn with gamma in [0, 2pi) and beta in [0, pi). With normalize_gamma the
    search runs on gamma * max|h, J|, so the start range spans the useful phase scale;
    returned gammas are always physical.

    Returns:
        (best parameters, one TraceEntry per objective evaluation)
    """
    check_qubit_cap(ising.num_spins, config.max_qubits)
    p = config.reps
    diag = diagonal if diagonal is not None else DiagonalHamiltonian(ising, materialize=config.materialize)
    max_coef = ising.max_abs_coefficient()
    scale = 1.0 / max_coef if config.normalize_gamma and max_coef > 0 else 1.0
    rng = np.random.Generator(np.random.Philox(config.seed if seed is None else seed))

    trace: List[TraceEntry] = []
    best: Optional[QaoaParameters] = None

    for restart in range(config.restarts):
        x0 = np.concatenate([rng.uniform(0.0, 2 * np.pi, p), rng.uniform(0.0, np.pi, p)])

        def objective(x: np.ndarray) -> float:
            gammas = tuple(float(g) * scale for g in x[:p])
            betas = tuple(float(b) for b in x[p:])
            value = qaoa_expectation(ising, gammas, betas, config.max_qubits, diag)
            trace.append(TraceEntry(restart, len(trace), gammas, betas, value))
            logger.debug(f"restart {restart} eval {len(trace)}: <H> = {value:.6f}")
            return value

        res = minimize(
            objective, x0, method="Nelder-Mead",
            options={"maxfev": config.max_evaluations, "xatol": 1e-4, "fatol": 1e-6},
        )
        candidate = QaoaParameters(
            gammas=tuple(float(g) * scale for g in res.x[:p]),
            betas=tuple(float(b) for b in res.x[p:]),
            expectation=float(res.fun),
        )
        logger.info(f"Restart {restart + 1}/{config.restarts}: <H> = {candidate.expectation:.4f} ({res.nfev} evaluations)")
        if best is None or candidate.expectation < best.expectation:
            best = candidate

    return best, trace


def sample(state: np.ndarray, shots: int, seed: SeedLike = 0) -> Dict[str, int]:
    """
    Multinomial measurement of the state in the computational basis.

    Returns:
        {bitstring (variable 1 leftmost): count}, ordered by bitstring; counts sum to shots
    """
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    n = _num_qubits(state)
    probs = state.real ** 2 + state.imag ** 2
    probs = probs / probs.sum()
    rng = np.random.Generator(np.random.Philox(seed))
    counts = rng.multinomial(shots, probs)
    hits = np.flatnonzero(counts)
    result = {bitstring(row): int(counts[k]) for k, row in zip(hits, index_bits(hits, n))}
    return dict(sorted(result.items()))


# ------------------------------------------------------------------------------------
# End-to-end solve
# ------------------------------------------------------------------------------------
@dataclass(frozen=True)
class SampleRecord:
    bits: str
    count: int
    energy: float
    cost: int
    feasible: bool
    schedule: ScheduleAssignment

    def rank_key(self) -> Tuple[bool, int, str]:
        return (not self.feasible, self.cost, self.bits)


@dataclass
class QaoaResult:
    gammas: Tuple[float, ...]
    betas: Tuple[float, ...]
    expectation: float
    baseline_expectation: float
    samples: List[SampleRecord]  # ranked
    trace: List[TraceEntry]
    num_qubits: int
    penalty: float
    shots: int

    @property
    def counts(self) -> Dict[str, int]:
        return {s.bits: s.count for s in self.samples}

    @property
    def best_feasible(self) -> Optional[SampleRecord]:
        return next((s for s in self.samples if s.feasible), None)

    @property
    def feasible_probability(self) -> float:
        return sum(s.count for s in self.samples if s.feasible) / self.shots

    @property
    def optimizer_evaluations(self) -> int:
        return len(self.trace)


def decode_samples(reduction: Reduction, counts: Dict[str, int]) -> List[SampleRecord]:
    """Decode each bitstring's load prefix into a schedule and rank (feasible, cost, bits)."""
    instance = reduction.instance
    records = []
    for bits, count in counts.items():
        bit_list = [int(ch) for ch in bits]
        schedule = schedule_from_bits(instance, bit_list)
        records.append(SampleRecord(
            bits=bits,
            count=count,
            energy=ising_energy(reduction.ising, spins_from_bits(bit_list)),
            cost=cost_of_schedule(instance, schedule),
            feasible=is_feasible(instance, schedule).feasible,
            schedule=schedule,
        ))
    records.sort(key=SampleRecord.rank_key)
    return records


def solve_qaoa(instance: ProsumerInstance, config: QaoaConfig) -> QaoaResult:
    """
    Reduce, optimize (gamma, beta), sample the final state and rank decoded schedules.

    Raises:
        ResourceLimitError: the reduced model needs more qubits than config.max_qubits
    """
    reduction = reduce_instance(instance)
    n = reduction.ising.num_spins
    check_qubit_cap(n, config.max_qubits)
    logger.info(f"Solving with QAOA: {n} qubits, reps={config.reps}, restarts={config.restarts}, shots={config.shots}")

    optimizer_seed, sampling_seed = np.random.SeedSequence(config.seed).spawn(2)
    diag = DiagonalHamiltonian(reduction.ising, materialize=config.materialize)
    zeros = [0.0] * config.reps
    baseline = qaoa_expectation(reduction.ising, zeros, zeros, config.max_qubits, diag)

    params, trace = optimize_parameters(reduction.ising, config, seed=optimizer_seed, diagonal=diag)
    state = qaoa_state(reduction.ising, params.gammas, params.betas, config.max_qubits, diag)
    counts = sample(state, config.shots, sampling_seed)
    samples = decode_samples(reduction, counts)

    result = QaoaResult(
        gammas=params.gammas,
        betas=params.betas,
        expectation=params.expectation,
        baseline_expectation=baseline,
        samples=samples,
        trace=trace,
        num_qubits=n,
        penalty=reduction.penalty,
        shots=config.shots,
    )
    best = result.best_feasible
    logger.info(
        f"QAOA done: <H> = {result.expectation:.4f} (baseline {baseline:.4f}); "
        f"feasible share {result.feasible_probability:.3f}; "
        f"best feasible cost {best.cost if best else 'n/a'}"
    )
    return result


def result_to_document(result: QaoaResult) -> Dict:
    """Result document without timings; same seed, same bytes."""
    return {
        "params": {"gamma": list(result.gammas), "beta": list(result.betas)},
        "expectation": result.expectation,
        "baseline_expectation": result.baseline_expectation,
        "num_qubits": result.num_qubits,
        "penalty": result.penalty,
        "feasible_probability": result.feasible_probability,
        "samples": [
            {"bits": s.bits, "count": s.count, "energy": s.energy, "cost": s.cost, "feasible": s.feasible}
            for s in result.samples
        ],
        "trace": [
            {"restart": t.restart, "evaluation": t.evaluation, "expectation": t.expectation}
            for t in result.trace
        ],
    }
