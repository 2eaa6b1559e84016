#!/usr/bin/env python3
"""
Tests for the ILP -> QUBO -> Ising reduction chain, checked against the
reference 12-variable instance and against direct penalized evaluation.
"""

from itertools import product

import numpy as np
import pytest

from conftest import make_instance
from src.problem_model import schedule_from_bits, schedule_from_on_hours, widen_instance
from src.reduction import (
    BinaryLinearProgram,
    ConstraintKind,
    IsingModel,
    LoadVar,
    QuboModel,
    SlackVar,
    bitstring,
    bits_from_spins,
    bits_from_string,
    build_ilp,
    format_hamiltonian,
    full_bitstring,
    hamiltonian_matrix,
    ilp_objective,
    ilp_residuals,
    ilp_to_document,
    index_bits,
    ising_energies,
    ising_energy,
    ising_from_qubo,
    ising_to_document,
    penalized_values,
    penalty_coefficient,
    qubo_from_ilp,
    qubo_to_document,
    qubo_value,
    qubo_values,
    reduce_instance,
    residual_slack_bits,
    slack_encoding,
    spins_from_bits,
    variable_counts,
)

FIELDS_A = [79, 80, 77, -112, -111.5, -113, 0, 0, 0, 0, 0, 0]
COUPLINGS_A = {
    # working-time groups
    (1, 2): 101, (1, 3): 101, (2, 3): 101, (4, 5): 101, (4, 6): 101, (5, 6): 101,
    # hour 1
    (1, 4): 202, (1, 7): 202, (1, 8): 404, (4, 7): 101, (4, 8): 202, (7, 8): 202,
    # hour 2
    (2, 5): 202, (2, 9): 202, (2, 10): 404, (5, 9): 101, (5, 10): 202, (9, 10): 202,
    # hour 3
    (3, 6): 202, (3, 11): 202, (3, 12): 404, (6, 11): 101, (6, 12): 202, (11, 12): 202,
}
BEST_FULL_BITS = "110010" + "10" + "00" + "11"


def _all_bits(n):
    return index_bits(np.arange(1 << n), n)


# ------------------------------------------------------------------------------------
# Slack encoding and ILP
# ------------------------------------------------------------------------------------
@pytest.mark.parametrize("size, expected", [(1, []), (2, [1]), (3, [1, 1]), (4, [1, 2]), (6, [1, 2, 2]), (8, [1, 2, 4])])
def test_slack_encoding(size, expected):
    assert slack_encoding(size) == expected


@pytest.mark.parametrize("size", range(1, 65))
def test_slack_subset_sums_cover_range_exactly(size):
    coeffs = slack_encoding(size)
    sums = {sum(c for c, b in zip(coeffs, bits) if b) for bits in product([0, 1], repeat=len(coeffs))}
    assert sums == set(range(size))


def test_slack_encoding_rejects_empty_range():
    with pytest.raises(ValueError):
        slack_encoding(0)


@pytest.mark.parametrize("residual", range(6))
def test_residual_slack_bits_reproduce_residual(residual):
    coeffs = slack_encoding(6)
    bits = residual_slack_bits(coeffs, residual)
    assert sum(c * b for c, b in zip(coeffs, bits)) == residual


def test_fixture_a_ilp_shape(fixture_a):
    ilp = build_ilp(fixture_a)
    assert ilp.num_vars == 12
    assert (ilp.num_load_vars, ilp.num_slack_vars) == (6, 6)
    assert len(ilp.constraints) == 5
    assert [c.kind for c in ilp.constraints] == [ConstraintKind.POWER] * 3 + [ConstraintKind.DURATION] * 2
    assert ilp.cost == (44, 42, 48, 22, 21, 24, 0, 0, 0, 0, 0, 0)
    assert ilp.var_meta[0] == LoadVar("1", 1)
    assert ilp.var_meta[7] == SlackVar(hour=1, bit=2, coefficient=2)
    assert [v.label for v in ilp.var_meta[6:8]] == ["y_1^1", "y_2^1"]
    assert ilp.constraints[0].coefficients == (2, 0, 0, 1, 0, 0, 1, 2, 0, 0, 0, 0)
    assert ilp.rhs_vector().tolist() == [3, 3, 3, 2, 1]
    assert ilp.slack_indices(2) == [8, 9]


@pytest.mark.parametrize("hours, expected", [(3, (6, 6)), (4, (8, 8)), (5, (10, 10))])
def test_scaling_family_variable_counts(fixture_a, hours, expected):
    wide = widen_instance(fixture_a, hours)
    assert variable_counts(wide) == expected
    assert build_ilp(wide).num_vars == sum(expected)


def test_smallest_ilp(single_slot_instance):
    ilp = build_ilp(single_slot_instance)
    assert ilp.num_vars == 2
    assert len(ilp.constraints) == 2


def test_variable_count_formula():
    instance = make_instance([1, 2, 3, 4, 5], 6, [("a", 1, 3, 2, 2), ("b", 2, 5, 1, 6)])
    ilp = build_ilp(instance)
    assert ilp.num_vars == (3 + 4) + 3 * 5  # ceil(log2 7) = 3 slack bits per hour


def test_ilp_residuals_vanish_on_feasible_full_bitstring(fixture_a):
    ilp = build_ilp(fixture_a)
    schedule = schedule_from_on_hours(fixture_a, {"1": [1, 2], "2": [2]})
    bits = full_bitstring(ilp, fixture_a, schedule)
    assert bitstring(bits) == BEST_FULL_BITS
    assert ilp_residuals(ilp, bits) == [0, 0, 0, 0, 0]
    assert ilp_objective(ilp, bits) == 107


# ------------------------------------------------------------------------------------
# Penalty and QUBO
# ------------------------------------------------------------------------------------
def test_penalty_coefficient(fixture_a):
    assert penalty_coefficient(fixture_a) == 202


def test_penalty_with_free_energy():
    instance = make_instance([0, 0, 0], 3, [("1", 1, 3, 2, 2), ("2", 1, 3, 1, 1)])
    assert penalty_coefficient(instance) == 1.0


def test_penalty_with_doubled_powers():
    instance = make_instance([22, 21, 24], 6, [("1", 1, 3, 2, 4), ("2", 1, 3, 1, 2)])
    assert penalty_coefficient(instance) == 403


def test_fixture_a_qubo_coefficients(reduction_a):
    qubo = reduction_a.qubo
    assert qubo.penalty == 202
    assert qubo.linear[0] == -2178
    assert qubo.quadratic[(0, 3)] == 808
    assert qubo.offset == 202 * 32
    assert all(i < j for i, j in qubo.quadratic)


def test_qubo_matches_direct_evaluation_on_all_bitstrings(reduction_a):
    bits = _all_bits(12)
    direct = penalized_values(reduction_a.ilp, 202, bits)
    np.testing.assert_allclose(qubo_values(reduction_a.qubo, bits), direct, rtol=0, atol=1e-9)


def test_qubo_value_of_feasible_rows(reduction_a, fixture_a):
    ilp = reduction_a.ilp
    best = full_bitstring(ilp, fixture_a, schedule_from_bits(fixture_a, [1, 1, 0, 0, 1, 0]))
    second = full_bitstring(ilp, fixture_a, schedule_from_bits(fixture_a, [1, 1, 0, 1, 0, 0]))
    assert qubo_value(reduction_a.qubo, best) == pytest.approx(107, abs=1e-9)
    assert qubo_value(reduction_a.qubo, second) == pytest.approx(108, abs=1e-9)


def test_constraint_free_qubo_is_plain_cost():
    ilp = BinaryLinearProgram(num_vars=3, cost=(4, 0, 7), constraints=(), var_meta=())
    qubo = qubo_from_ilp(ilp, 10.0)
    assert qubo.linear.tolist() == [4, 0, 7]
    assert qubo.quadratic == {}
    assert qubo.offset == 0
    assert qubo_value(qubo, [0, 0, 0]) == 0


def test_negative_penalty_is_rejected(reduction_a):
    with pytest.raises(ValueError):
        qubo_from_ilp(reduction_a.ilp, -1.0)


def test_qubo_rejects_lower_triangle_keys():
    with pytest.raises(ValueError):
        QuboModel(num_vars=2, linear=[0, 0], quadratic={(1, 0): 1.0}, offset=0.0)


def test_qubo_value_rejects_wrong_length(reduction_a):
    with pytest.raises(ValueError):
        qubo_value(reduction_a.qubo, [0] * 11)


def test_random_instances_match_direct_evaluation():
    rng = np.random.default_rng(5)
    for _ in range(10):
        hours = int(rng.integers(1, 4))
        e_max = int(rng.integers(1, 4))
        loads = []
        for k in range(int(rng.integers(1, 3))):
            alpha = int(rng.integers(1, hours + 1))
            beta = int(rng.integers(alpha, hours + 1))
            delta = int(rng.integers(1, beta - alpha + 2))
            loads.append((f"L{k}", alpha, beta, delta, int(rng.integers(1, e_max + 1))))
        instance = make_instance(rng.integers(0, 30, hours).tolist(), e_max, loads)
        red = reduce_instance(instance)
        bits = _all_bits(red.ilp.num_vars)
        direct = penalized_values(red.ilp, red.penalty, bits)
        np.testing.assert_allclose(qubo_values(red.qubo, bits), direct, atol=1e-9)
        np.testing.assert_allclose(ising_energies(red.ising, spins_from_bits(bits)), direct, atol=1e-9)


# ------------------------------------------------------------------------------------
# Ising
# ------------------------------------------------------------------------------------
def test_fixture_a_ising_coefficients(reduction_a):
    ising = reduction_a.ising
    np.testing.assert_allclose(ising.fields_h, FIELDS_A, atol=1e-9)
    expected = {(i - 1, j - 1): v for (i, j), v in COUPLINGS_A.items()}
    assert set(ising.couplings_j) == set(expected)
    for key, value in expected.items():
        assert ising.couplings_j[key] == pytest.approx(value, abs=1e-9)
    assert ising.offset == pytest.approx(2019.5, abs=1e-9)


def test_ising_matches_qubo_on_all_bitstrings(reduction_a):
    bits = _all_bits(12)
    np.testing.assert_allclose(
        ising_energies(reduction_a.ising, spins_from_bits(bits)),
        qubo_values(reduction_a.qubo, bits),
        rtol=0, atol=1e-9,
    )


def test_ising_offset_is_mean_energy(reduction_a):
    energies = ising_energies(reduction_a.ising, spins_from_bits(_all_bits(12)))
    assert energies.mean() == pytest.approx(2019.5, abs=1e-9)


def test_single_variable_substitution():
    ising = ising_from_qubo(QuboModel(num_vars=1, linear=[2.0], quadratic={}, offset=0.0))
    assert ising.fields_h.tolist() == [-1.0]
    assert ising.offset == 1.0


def test_ising_energy_values(reduction_a):
    best = spins_from_bits(bits_from_string(BEST_FULL_BITS))
    assert ising_energy(reduction_a.ising, best) == pytest.approx(107, abs=1e-9)
    assert ising_energy(reduction_a.ising, [1] * 12) == pytest.approx(6464, abs=1e-9)


def test_two_spin_example():
    ising = IsingModel(num_spins=2, fields_h=[0.5, 0.0], couplings_j={(0, 1): -1.0}, offset=0.5)
    assert ising_energy(ising, [-1, -1]) == -1
    np.testing.assert_allclose(np.diag(hamiltonian_matrix(ising, "big")), [0, 2, 1, -1])
    np.testing.assert_allclose(np.diag(hamiltonian_matrix(ising, "little")), [0, 1, 2, -1])


def test_ising_energy_rejects_bad_spins(reduction_a):
    with pytest.raises(ValueError):
        ising_energy(reduction_a.ising, [1] * 11)
    with pytest.raises(ValueError):
        ising_energy(reduction_a.ising, [1] * 11 + [0])


def test_hamiltonian_matrix_size_limit():
    ising = IsingModel(num_spins=13, fields_h=np.zeros(13), couplings_j={}, offset=0.0)
    with pytest.raises(ValueError):
        hamiltonian_matrix(ising)


def test_spin_bit_conversion():
    assert spins_from_bits([0, 1]).tolist() == [1, -1]
    assert bits_from_spins([1, -1]).tolist() == [0, 1]
    assert index_bits(6, 3).tolist() == [[0, 1, 1]]


# ------------------------------------------------------------------------------------
# Rendering and documents
# ------------------------------------------------------------------------------------
def test_format_hamiltonian(reduction_a):
    text = format_hamiltonian(reduction_a.ising)
    assert text.startswith("79·Z_1 + 80·Z_2 + 77·Z_3 - 112·Z_4 - 111.5·Z_5 - 113·Z_6 + 101·Z_1 Z_2 + 101·Z_1 Z_3 + 202·Z_1 Z_4")
    assert text.endswith("+ 202·Z_11 Z_12 + 2019.5")


def test_documents_are_one_indexed(reduction_a):
    ising_doc = ising_to_document(reduction_a.ising)
    assert ising_doc["h"][0] == 79
    assert ising_doc["h"][4] == -111.5
    assert ising_doc["offset"] == 2019.5
    assert {"i": 1, "j": 4, "v": 202} in ising_doc["j"]
    assert len(ising_doc["j"]) == 24

    qubo_doc = qubo_to_document(reduction_a.qubo)
    assert qubo_doc["penalty"] == 202
    assert qubo_doc["linear"][0] == -2178

    ilp_doc = ilp_to_document(reduction_a.ilp)
    assert ilp_doc["num_vars"] == 12
    assert ilp_doc["num_constraints"] == 5
    assert ilp_doc["variables"][6]["label"] == "y_1^1"
