"""
Prosumer QAOA Toolkit
Reduces prosumer load scheduling to QUBO / Ising form and solves it exactly or with simulated QAOA.
"""

from .problem_model import (
    Load,
    ProsumerInstance,
    ScheduleAssignment,
    cost_of_schedule,
    is_feasible,
    load_instance,
)
from .reduction import build_ilp, ising_from_qubo, qubo_from_ilp, reduce_instance
from .qaoa_sim import QaoaConfig, qaoa_expectation, solve_qaoa
from .exact_solver import brute_force_minimum, enumerate_feasible, verify_reduction

__all__ = [
    'Load',
    'ProsumerInstance',
    'ScheduleAssignment',
    'cost_of_schedule',
    'is_feasible',
    'load_instance',
    'build_ilp',
    'qubo_from_ilp',
    'ising_from_qubo',
    'reduce_instance',
    'QaoaConfig',
    'qaoa_expectation',
    'solve_qaoa',
    'brute_force_minimum',
    'enumerate_feasible',
    'verify_reduction',
]

__version__ = "1.0.0"
