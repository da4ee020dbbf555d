"""Statevector simulation for basis-gate genomes.

Bit order: basis index ``b`` holds qubit ``q`` in bit ``(b >> q) & 1``, so
qubit 0 is the least-significant bit.  Bitstrings returned by
:func:`extract_solution` are written qubit 0 first.
"""
from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .circuit_ir import CircuitGenome, Gate, GateKind

MAX_QUBITS = 20


class SimulationError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.ascontiguousarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != (1 << self.n_qubits,):
            raise SimulationError(
                f"expected {1 << self.n_qubits} amplitudes for {self.n_qubits} qubits, got {amps.shape}")
        if amps.flags.writeable:
            amps = amps.copy()
            amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def _check_n(n: int) -> None:
    if not 1 <= n <= MAX_QUBITS:
        raise SimulationError(f"qubit count must be in [1, {MAX_QUBITS}], got {n}")


def zero_state(n: int) -> StateVector:
    _check_n(n)
    amps = np.zeros(1 << n, dtype=np.complex128)
    amps[0] = 1.0
    return StateVector(n, amps)


@numba.njit(cache=True)
def _apply_kernel(state, n_qubits, kinds, q0, q1, angles):
    half = 1 << (n_qubits - 1)
    # SX = 1/2 [[1+i, 1-i], [1-i, 1+i]]
    sp = 0.5 + 0.5j
    sm = 0.5 - 0.5j
    for g in range(kinds.shape[0]):
        k = kinds[g]
        q = q0[g]
        if k == 3:
            c = q
            t = q1[g]
            cm = 1 << c
            tm = 1 << t
            for b in range(1 << n_qubits):
                if (b & cm) and not (b & tm):
                    j = b | tm
                    tmp = state[b]
                    state[b] = state[j]
                    state[j] = tmp
            continue
        m = 1 << q
        low = m - 1
        if k == 0:
            for i in range(half):
                b0 = ((i & ~low) << 1) | (i & low)
                b1 = b0 | m
                tmp = state[b0]
                state[b0] = state[b1]
                state[b1] = tmp
        elif k == 1:
            for i in range(half):
                b0 = ((i & ~low) << 1) | (i & low)
                b1 = b0 | m
                a0 = state[b0]
                a1 = state[b1]
                state[b0] = sp * a0 + sm * a1
                state[b1] = sm * a0 + sp * a1
        else:
            th = 0.5 * angles[g]
            p0 = np.cos(th) - 1j * np.sin(th)
            p1 = np.cos(th) + 1j * np.sin(th)
            for i in range(half):
                b0 = ((i & ~low) << 1) | (i & low)
                state[b0] *= p0
                state[b0 | m] *= p1


# X, CX and RZ map basis states to phased basis states.  Runs of them are
# tracked symbolically: each qubit's current value is an affine parity
# (row mask + constant bit) of the bits at the last flush, and RZ phases
# accumulate per parity mask.  Only SX forces the pending map onto the
# amplitudes; large phase sets are expanded with a Walsh-Hadamard transform.
@numba.njit(cache=True)
def _flush(state, n, row, cbit, theta, touched, nt, perm_dirty):
    N = 1 << n
    if nt > 0:
        if nt <= 4:
            for t in range(nt):
                m = touched[t]
                a = theta[m]
                e_plus = complex(np.cos(a), np.sin(a))
                e_minus = complex(np.cos(a), -np.sin(a))
                for x in range(N):
                    v = x & m
                    p = 0
                    while v:
                        v &= v - 1
                        p ^= 1
                    if p:
                        state[x] *= e_minus
                    else:
                        state[x] *= e_plus
                theta[m] = 0.0
        else:
            w = theta.copy()
            h = 1
            while h < N:
                for i0 in range(0, N, 2 * h):
                    for j in range(i0, i0 + h):
                        a = w[j]; b = w[j + h]
                        w[j] = a + b; w[j + h] = a - b
                h *= 2
            for x in range(N):
                state[x] *= complex(np.cos(w[x]), np.sin(w[x]))
            for t in range(nt):
                theta[touched[t]] = 0.0
    if perm_dirty:
        col = np.zeros(n, dtype=np.int64)
        cmask = 0
        for q in range(n):
            r = row[q]
            for j in range(n):
                if (r >> j) & 1:
                    col[j] |= 1 << q
            if cbit[q]:
                cmask |= 1 << q
        f = np.empty(N, dtype=np.int64)
        f[0] = cmask
        for x in range(1, N):
            low = x & (-x)
            j = 0
            while (low >> j) != 1:
                j += 1
            f[x] = f[x ^ low] ^ col[j]
        out = np.empty_like(state)
        for x in range(N):
            out[f[x]] = state[x]
        state[:] = out
        for q in range(n):
            row[q] = 1 << q
            cbit[q] = 0


@numba.njit(cache=True)
def _run_kernel(state, n, kinds, q0, q1, angles):
    N = 1 << n
    row = np.empty(n, dtype=np.int64)
    for q in range(n):
        row[q] = 1 << q
    cbit = np.zeros(n, dtype=np.int64)
    theta = np.zeros(N, dtype=np.float64)
    touched = np.empty(N, dtype=np.int64)
    seen = np.zeros(N, dtype=np.bool_)
    nt = 0
    perm_dirty = False
    sp = 0.5 + 0.5j; sm = 0.5 - 0.5j
    for g in range(kinds.shape[0]):
        k = kinds[g]; q = q0[g]
        if k == 3:
            t = q1[g]
            row[t] ^= row[q]; cbit[t] ^= cbit[q]
            perm_dirty = True
        elif k == 0:
            cbit[q] ^= 1
            perm_dirty = True
        elif k == 2:
            m = row[q]
            if cbit[q]:
                theta[m] += 0.5 * angles[g]
            else:
                theta[m] -= 0.5 * angles[g]
            if not seen[m]:
                seen[m] = True
                touched[nt] = m
                nt += 1
        else:
            if nt > 0 or perm_dirty:
                _flush(state, n, row, cbit, theta, touched, nt, perm_dirty)
                for t in range(nt):
                    seen[touched[t]] = False
                nt = 0
                perm_dirty = False
            m = 1 << q
            for i0 in range(0, N, 2 * m):
                for j in range(i0, i0 + m):
                    a0 = state[j]; a1 = state[j + m]
                    state[j] = sp * a0 + sm * a1
                    state[j + m] = sm * a0 + sp * a1
    if nt > 0 or perm_dirty:
        _flush(state, n, row, cbit, theta, touched, nt, perm_dirty)


def _apply_arrays(amps: np.ndarray, c: CircuitGenome) -> np.ndarray:
    if len(c):
        _apply_kernel(amps, c.n_qubits, c.kinds, c.q0, c.q1, c.angles)
    return amps


def apply_gate(s: StateVector, g: Gate) -> StateVector:
    if max(g.qubits) >= s.n_qubits:
        raise SimulationError(f"gate {g} out of range for {s.n_qubits} qubits")
    single = CircuitGenome(s.n_qubits, [g])
    return StateVector(s.n_qubits, _apply_arrays(s.amplitudes.copy(), single))


def run_amplitudes(c: CircuitGenome) -> np.ndarray:
    """Raw output amplitudes of ``c`` applied to |0...0>; a fresh writeable array."""
    _check_n(c.n_qubits)
    amps = np.zeros(1 << c.n_qubits, dtype=np.complex128)
    amps[0] = 1.0
    if len(c):
        _run_kernel(amps, c.n_qubits, c.kinds, c.q0, c.q1, c.angles)
    return amps


def run_dense(c: CircuitGenome) -> np.ndarray:
    """Gate-by-gate reference for :func:`run_amplitudes`."""
    _check_n(c.n_qubits)
    amps = np.zeros(1 << c.n_qubits, dtype=np.complex128)
    amps[0] = 1.0
    return _apply_arrays(amps, c)


def run(c: CircuitGenome) -> StateVector:
    return StateVector(c.n_qubits, run_amplitudes(c))


def overlap_fidelity(target: np.ndarray, amps: np.ndarray) -> float:
    return float(abs(np.vdot(target, amps)) ** 2)


def fidelity(target: StateVector, c: CircuitGenome) -> float:
    """|<target| U |0>|^2 for the circuit U encoded by ``c``."""
    if target.n_qubits != c.n_qubits:
        raise SimulationError(
            f"target has {target.n_qubits} qubits but circuit has {c.n_qubits}")
    return min(1.0, overlap_fidelity(target.amplitudes, run_amplitudes(c)))


def probabilities(s: StateVector) -> np.ndarray:
    return np.abs(s.amplitudes) ** 2


def index_to_bits(index: int, n_qubits: int) -> str:
    return "".join(str((index >> q) & 1) for q in range(n_qubits))


def bits_to_index(bits: str) -> int:
    return sum(1 << q for q, b in enumerate(bits) if b == "1")


def extract_solution(s: StateVector) -> str:
    # np.argmax returns the first maximum, i.e. the smallest basis index
    return index_to_bits(int(np.argmax(probabilities(s))), s.n_qubits)


def unitary(c: CircuitGenome) -> np.ndarray:
    """Full 2^n x 2^n matrix of ``c`` (column b = image of basis state b)."""
    _check_n(c.n_qubits)
    dim = 1 << c.n_qubits
    cols = []
    for b in range(dim):
        amps = np.zeros(dim, dtype=np.complex128)
        amps[b] = 1.0
        cols.append(_apply_arrays(amps, c))
    return np.stack(cols, axis=1)
