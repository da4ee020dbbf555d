"""Grover search circuits in the {x, sx, rz, cx} basis."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .circuit_ir import CircuitGenome, Gate

MIN_QUBITS = 2
MAX_QUBITS = 8


def default_iterations(n_qubits: int) -> int:
    return max(1, math.floor(math.pi / 4 * math.sqrt(2 ** n_qubits)))


@dataclass(frozen=True)
class GroverSpec:
    """Search instance.  ``target`` is written qubit 0 first."""

    n_qubits: int
    target: str
    iterations: int | None = None

    def __post_init__(self):
        if not MIN_QUBITS <= self.n_qubits <= MAX_QUBITS:
            raise ValueError(f"n_qubits must be in [{MIN_QUBITS}, {MAX_QUBITS}], got {self.n_qubits}")
        if len(self.target) != self.n_qubits or set(self.target) - {"0", "1"}:
            raise ValueError(f"target must be a {self.n_qubits}-character bitstring, got {self.target!r}")
        if self.iterations is None:
            object.__setattr__(self, "iterations", default_iterations(self.n_qubits))
        elif self.iterations < 1:
            raise ValueError("iterations must be >= 1")


def random_target(n_qubits: int, rng: np.random.Generator) -> str:
    return "".join(str(b) for b in rng.integers(0, 2, size=n_qubits))


def hadamard(q: int) -> list[Gate]:
    # equal to H up to a global phase
    return [Gate.rz(q, math.pi / 2), Gate.sx(q), Gate.rz(q, math.pi / 2)]


def multi_controlled_z(qubits: list[int]) -> list[Gate]:
    """Ancilla-free phase network flipping the sign of |1...1> on ``qubits``.

    Uses x_1 x_2 ... x_m = 2^(1-m) * sum over non-empty subsets S of
    (-1)^(|S|+1) * parity(S).  Subsets are grouped by their highest member,
    which accumulates the parity of the lower members along a Gray code.
    """
    m = len(qubits)
    if m == 1:
        return [Gate.rz(qubits[0], math.pi)]
    unit = math.pi / 2 ** (m - 1)
    gates = []
    for k in range(m):
        acc = qubits[k]
        prev = 0
        for step in range(1 << k):
            code = step ^ (step >> 1)
            if step:
                flipped = (code ^ prev).bit_length() - 1
                gates.append(Gate.cx(qubits[flipped], acc))
            size = bin(code).count("1") + 1
            gates.append(Gate.rz(acc, unit if size % 2 else -unit))
            prev = code
        if k:
            # last Gray code word is a single bit; undo it
            gates.append(Gate.cx(qubits[prev.bit_length() - 1], acc))
    return gates


def build_grover(spec: GroverSpec) -> CircuitGenome:
    n = spec.n_qubits
    everyone = list(range(n))
    zeros = [q for q, b in enumerate(spec.target) if b == "0"]
    h_all = [g for q in everyone for g in hadamard(q)]
    x_all = [Gate.x(q) for q in everyone]
    mcz = multi_controlled_z(everyone)

    oracle = [Gate.x(q) for q in zeros] + mcz + [Gate.x(q) for q in zeros]
    diffusion = h_all + x_all + mcz + x_all + h_all

    genes = list(h_all)
    for _ in range(spec.iterations):
        genes += oracle + diffusion
    return CircuitGenome(n, genes)


def grover_success_probability(n: int, k: int) -> float:
    theta = math.asin(2 ** (-n / 2))
    return math.sin((2 * k + 1) * theta) ** 2
