import itertools
import math

import numpy as np
import pytest
from hypothesis import strategies as st

from dqc_evo.circuit_ir import CircuitGenome, Gate, GateKind


def random_genome(rng: np.random.Generator, n_qubits: int, length: int) -> CircuitGenome:
    genes = []
    for _ in range(length):
        kind = GateKind(int(rng.integers(4 if n_qubits > 1 else 3)))
        if kind is GateKind.CX:
            a, b = rng.choice(n_qubits, size=2, replace=False)
            genes.append(Gate.cx(int(a), int(b)))
        elif kind is GateKind.RZ:
            genes.append(Gate.rz(int(rng.integers(n_qubits)), float(rng.uniform(0, 2 * math.pi))))
        else:
            genes.append(Gate(kind, (int(rng.integers(n_qubits)),)))
    return CircuitGenome(n_qubits, genes)


@st.composite
def genomes(draw, min_qubits=1, max_qubits=5, max_len=40):
    n = draw(st.integers(min_qubits, max_qubits))
    kinds = [GateKind.X, GateKind.SX, GateKind.RZ] + ([GateKind.CX] if n > 1 else [])
    genes = []
    for _ in range(draw(st.integers(0, max_len))):
        kind = draw(st.sampled_from(kinds))
        q = draw(st.integers(0, n - 1))
        if kind is GateKind.CX:
            t = draw(st.integers(0, n - 1).filter(lambda v, q=q: v != q))
            genes.append(Gate.cx(q, t))
        elif kind is GateKind.RZ:
            angle = draw(st.floats(-20, 20, allow_nan=False, allow_infinity=False))
            genes.append(Gate.rz(q, angle))
        else:
            genes.append(Gate(kind, (q,)))
    return CircuitGenome(n, genes)


# --- independent dense oracle: explicit kron products, qubit 0 least significant ---

_X = np.array([[0, 1], [1, 0]], dtype=complex)
_SX = 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]])


def _rz(theta):
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def _embed(op, q, n):
    out = np.array([[1.0 + 0j]])
    for k in reversed(range(n)):
        out = np.kron(out, op if k == q else np.eye(2))
    return out


def _cx_matrix(c, t, n):
    dim = 1 << n
    m = np.zeros((dim, dim), dtype=complex)
    for b in range(dim):
        m[b ^ (1 << t) if (b >> c) & 1 else b, b] = 1
    return m


def oracle_unitary(c: CircuitGenome) -> np.ndarray:
    n = c.n_qubits
    u = np.eye(1 << n, dtype=complex)
    for g in c:
        if g.kind is GateKind.CX:
            m = _cx_matrix(*g.qubits, n)
        elif g.kind is GateKind.RZ:
            m = _embed(_rz(g.angle), g.qubits[0], n)
        else:
            m = _embed(_X if g.kind is GateKind.X else _SX, g.qubits[0], n)
        u = m @ u
    return u


def brute_force_bisection(weights: np.ndarray) -> int:
    """Smallest cut over all balanced two-way splits."""
    n = len(weights)
    best = None
    for left in itertools.combinations(range(n), (n + 1) // 2):
        side = np.zeros(n, dtype=bool)
        side[list(left)] = True
        cut = int(weights[side][:, ~side].sum())
        best = cut if best is None else min(best, cut)
    return best


def random_weighted_graph(rng: np.random.Generator, n: int, density: float = 0.6,
                          max_weight: int = 9) -> np.ndarray:
    w = np.zeros((n, n), dtype=np.int64)
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < density:
                w[i, j] = w[j, i] = rng.integers(1, max_weight + 1)
    return w


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys
    module = sys.modules.get("test_acceptance")
    if module is None or not module.VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in module.VERDICTS:
        terminalreporter.write_line(line)
