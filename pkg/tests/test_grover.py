import math

import numpy as np
import pytest

from dqc_evo.circuit_ir import CircuitGenome, GateKind
from dqc_evo.grover import (
    GroverSpec, build_grover, default_iterations, grover_success_probability, hadamard,
    multi_controlled_z, random_target,
)
from dqc_evo.simulator import bits_to_index, extract_solution, probabilities, run, unitary


def test_spec_validation_and_defaults():
    assert GroverSpec(4, "0101").iterations == 3
    assert [default_iterations(n) for n in range(2, 9)] == [1, 2, 3, 4, 6, 8, 12]
    for bad in [(1, "0"), (9, "0" * 9), (3, "01"), (3, "0a1")]:
        with pytest.raises(ValueError):
            GroverSpec(*bad)
    with pytest.raises(ValueError):
        GroverSpec(3, "011", 0)


def test_success_probability_examples():
    assert grover_success_probability(2, 1) == pytest.approx(1.0, abs=1e-15)
    assert grover_success_probability(4, 3) == pytest.approx(0.96134, abs=1e-4)
    assert grover_success_probability(1, 0) == pytest.approx(0.5, abs=1e-15)


def test_two_qubit_grover_is_exact():
    p = probabilities(run(build_grover(GroverSpec(2, "11", 1))))
    assert np.max(np.abs(p - [0, 0, 0, 1])) < 1e-9


def test_hadamard_decomposition():
    u = unitary(CircuitGenome(1, hadamard(0)))
    h = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    phase = u[0, 0] / h[0, 0]
    assert abs(abs(phase) - 1) < 1e-12
    assert np.allclose(u, phase * h, atol=1e-12)


@pytest.mark.parametrize("m", range(1, 7))
def test_multi_controlled_z_flips_only_all_ones(m):
    c = CircuitGenome(m, multi_controlled_z(list(range(m))))
    u = unitary(c)
    assert np.allclose(u, np.diag(np.diag(u)), atol=1e-12)
    d = np.diag(u) / u[0, 0]
    expected = np.ones(1 << m)
    expected[-1] = -1
    assert np.allclose(d, expected, atol=1e-12)


def test_multi_controlled_z_on_qubit_subset():
    c = CircuitGenome(4, multi_controlled_z([3, 1]))
    d = np.diag(unitary(c))
    d = d / d[0]
    for b in range(16):
        want = -1 if (b >> 3) & 1 and (b >> 1) & 1 else 1
        assert d[b] == pytest.approx(want, abs=1e-12)


def test_basis_set_and_solution(rng):
    for n in range(2, 9):
        target = random_target(n, rng)
        c = build_grover(GroverSpec(n, target))
        assert set(np.unique(c.kinds)) <= {int(k) for k in GateKind}
        s = run(c)
        assert extract_solution(s) == target
        p = probabilities(s)[bits_to_index(target)]
        assert abs(p - grover_success_probability(n, default_iterations(n))) < 1e-9


def test_random_target_is_seeded():
    a = random_target(6, np.random.default_rng(7))
    assert a == random_target(6, np.random.default_rng(7))
    assert len(a) == 6 and set(a) <= {"0", "1"}
