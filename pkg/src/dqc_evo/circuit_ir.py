"""Gate and circuit genome representation.

A circuit is a flat, ordered list of gates over a fixed number of qubits.
Only the hardware basis {x, sx, rz, cx} is representable.  Internally the
genome is stored column-wise in three numpy arrays so that the evolutionary
operators and the simulator can work on it without materialising Python
objects for every gene.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum
from typing import Iterable, Iterator, Sequence

import numba
import numpy as np

TWO_PI = 2.0 * math.pi


class GateKind(IntEnum):
    X = 0
    SX = 1
    RZ = 2
    CX = 3

    @property
    def arity(self) -> int:
        return 2 if self is GateKind.CX else 1

    @property
    def mnemonic(self) -> str:
        return self.name.lower()


_BY_MNEMONIC = {k.mnemonic: k for k in GateKind}


class CircuitError(ValueError):
    """Invalid gate or genome."""


class CircuitParseError(CircuitError):
    """Malformed circuit text; ``line`` is 1-based."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line
        self.message = message


class DuplicateQubitError(CircuitParseError):
    pass


def canonical_angle(theta: float) -> float:
    theta = float(theta) % TWO_PI
    # tiny negative inputs wrap to exactly 2*pi
    return 0.0 if theta >= TWO_PI else theta


@dataclass(frozen=True)
class Gate:
    kind: GateKind
    qubits: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self):
        kind = GateKind(self.kind)
        qubits = tuple(int(q) for q in self.qubits)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "qubits", qubits)
        if len(qubits) != kind.arity:
            raise CircuitError(f"{kind.mnemonic} acts on {kind.arity} qubit(s), got {qubits}")
        if min(qubits) < 0:
            raise CircuitError(f"negative qubit index in {qubits}")
        if len(set(qubits)) != len(qubits):
            raise CircuitError(f"duplicate qubit in {qubits}")
        if kind is GateKind.RZ:
            if self.angle is None:
                raise CircuitError("rz requires an angle")
            object.__setattr__(self, "angle", canonical_angle(self.angle))
        elif self.angle is not None:
            raise CircuitError(f"{kind.mnemonic} takes no angle")

    @classmethod
    def x(cls, q: int) -> "Gate":
        return cls(GateKind.X, (q,))

    @classmethod
    def sx(cls, q: int) -> "Gate":
        return cls(GateKind.SX, (q,))

    @classmethod
    def rz(cls, q: int, theta: float) -> "Gate":
        return cls(GateKind.RZ, (q,), theta)

    @classmethod
    def cx(cls, control: int, target: int) -> "Gate":
        return cls(GateKind.CX, (control, target))

    def __str__(self):
        parts = [self.kind.mnemonic, *map(str, self.qubits)]
        if self.angle is not None:
            parts.append(format(self.angle, ".17g"))
        return " ".join(parts)


class CircuitGenome:
    """Immutable gate sequence on ``n_qubits`` qubits.

    Columns: ``kinds`` (int8 GateKind values), ``q0``/``q1`` (int64; ``q1``
    is -1 for single-qubit gates, ``q0`` is the control of a CX) and
    ``angles`` (float64, 0 unless the gate is RZ).
    """

    __slots__ = ("n_qubits", "kinds", "q0", "q1", "angles")

    def __init__(self, n_qubits: int, genes: Iterable[Gate] = ()):
        genes = list(genes)
        kinds = np.fromiter((g.kind for g in genes), dtype=np.int8, count=len(genes))
        q0 = np.fromiter((g.qubits[0] for g in genes), dtype=np.int64, count=len(genes))
        q1 = np.fromiter((g.qubits[1] if len(g.qubits) == 2 else -1 for g in genes),
                         dtype=np.int64, count=len(genes))
        angles = np.fromiter((g.angle or 0.0 for g in genes), dtype=np.float64, count=len(genes))
        self._set(n_qubits, kinds, q0, q1, angles)
        self.validate()

    @classmethod
    def from_arrays(cls, n_qubits, kinds, q0, q1, angles, *, validate=False) -> "CircuitGenome":
        obj = cls.__new__(cls)
        obj._set(n_qubits, kinds, q0, q1, angles)
        if validate:
            obj.validate()
        return obj

    def _set(self, n_qubits, kinds, q0, q1, angles):
        n_qubits = int(n_qubits)
        if n_qubits < 1:
            raise CircuitError(f"n_qubits must be positive, got {n_qubits}")
        arrays = []
        for a, dt in ((kinds, np.int8), (q0, np.int64), (q1, np.int64), (angles, np.float64)):
            a = np.ascontiguousarray(a, dtype=dt)
            # read-only arrays come from other genomes and can be shared
            if a.flags.writeable:
                a = a.copy()
                a.flags.writeable = False
            arrays.append(a)
        object.__setattr__(self, "n_qubits", n_qubits)
        for name, a in zip(("kinds", "q0", "q1", "angles"), arrays):
            object.__setattr__(self, name, a)

    def __setattr__(self, name, value):
        raise AttributeError("CircuitGenome is immutable")

    def validate(self) -> None:
        """Raise CircuitError if any genome invariant is violated."""
        k, q0, q1, ang = self.kinds, self.q0, self.q1, self.angles
        if not (len(k) == len(q0) == len(q1) == len(ang)):
            raise CircuitError("column length mismatch")
        if len(k) == 0:
            return
        if k.min() < 0 or k.max() > GateKind.CX:
            raise CircuitError("unknown gate kind")
        is_cx = k == GateKind.CX
        if q0.min() < 0 or q0.max() >= self.n_qubits:
            raise CircuitError(f"qubit index out of range [0, {self.n_qubits})")
        if np.any(is_cx & ((q1 < 0) | (q1 >= self.n_qubits))):
            raise CircuitError(f"cx target out of range [0, {self.n_qubits})")
        if np.any(is_cx & (q0 == q1)):
            raise CircuitError("cx with identical control and target")
        if np.any(~is_cx & (q1 != -1)):
            raise CircuitError("single-qubit gate with a second operand")
        is_rz = k == GateKind.RZ
        if np.any(~is_rz & (ang != 0.0)):
            raise CircuitError("angle on a non-rz gate")
        if np.any(is_rz & ((ang < 0.0) | (ang >= TWO_PI))) or not np.all(np.isfinite(ang)):
            raise CircuitError("rz angle not in [0, 2*pi)")

    def __len__(self):
        return len(self.kinds)

    def gate(self, i: int) -> Gate:
        kind = GateKind(int(self.kinds[i]))
        if kind is GateKind.CX:
            return Gate(kind, (int(self.q0[i]), int(self.q1[i])))
        angle = float(self.angles[i]) if kind is GateKind.RZ else None
        return Gate(kind, (int(self.q0[i]),), angle)

    @property
    def genes(self) -> list[Gate]:
        return [self.gate(i) for i in range(len(self))]

    def __iter__(self) -> Iterator[Gate]:
        return (self.gate(i) for i in range(len(self)))

    def __getitem__(self, item):
        if isinstance(item, slice):
            return CircuitGenome.from_arrays(self.n_qubits, self.kinds[item], self.q0[item],
                                             self.q1[item], self.angles[item])
        return self.gate(item)

    def take(self, idx) -> "CircuitGenome":
        """Sub-genome of the given gene indices, in that order."""
        idx = np.asarray(idx, dtype=np.int64)
        return CircuitGenome.from_arrays(self.n_qubits, self.kinds[idx], self.q0[idx],
                                         self.q1[idx], self.angles[idx])

    def __eq__(self, other):
        if not isinstance(other, CircuitGenome):
            return NotImplemented
        return (self.n_qubits == other.n_qubits
                and np.array_equal(self.kinds, other.kinds)
                and np.array_equal(self.q0, other.q0)
                and np.array_equal(self.q1, other.q1)
                and np.array_equal(self.angles, other.angles))

    def __hash__(self):
        return hash((self.n_qubits, self.kinds.tobytes(), self.q0.tobytes(),
                     self.q1.tobytes(), self.angles.tobytes()))

    def __repr__(self):
        return f"CircuitGenome(n_qubits={self.n_qubits}, n_genes={len(self)})"

    @property
    def cx_count(self) -> int:
        return int(np.count_nonzero(self.kinds == GateKind.CX))


def concat(n_qubits: int, parts: Sequence[CircuitGenome]) -> CircuitGenome:
    """Join genome slices end to end."""
    if not parts:
        return CircuitGenome(n_qubits)
    return CircuitGenome.from_arrays(
        n_qubits,
        np.concatenate([p.kinds for p in parts]),
        np.concatenate([p.q0 for p in parts]),
        np.concatenate([p.q1 for p in parts]),
        np.concatenate([p.angles for p in parts]),
    )


@numba.njit(cache=True)
def _depth_kernel(n_qubits, kinds, q0, q1):
    level = np.zeros(n_qubits, dtype=np.int64)
    depth = 0
    for i in range(kinds.shape[0]):
        a = q0[i]
        if kinds[i] == 3:
            b = q1[i]
            d = max(level[a], level[b]) + 1
            level[a] = d
            level[b] = d
        else:
            d = level[a] + 1
            level[a] = d
        if d > depth:
            depth = d
    return depth


def depth(c: CircuitGenome) -> int:
    """Number of moments under greedy left-to-right layering."""
    if len(c) == 0:
        return 0
    return int(_depth_kernel(c.n_qubits, c.kinds, c.q0, c.q1))


def cx_pairs(c: CircuitGenome) -> list[tuple[int, int]]:
    mask = c.kinds == GateKind.CX
    return list(zip(c.q0[mask].tolist(), c.q1[mask].tolist()))


def cx_array(c: CircuitGenome) -> np.ndarray:
    """(k, 2) array of CX (control, target) pairs in gene order."""
    mask = c.kinds == GateKind.CX
    return np.stack([c.q0[mask], c.q1[mask]], axis=1)


def parse_circuit(text: str) -> CircuitGenome:
    """Parse the line-oriented circuit format.

    ``qubits <n>`` first, then one gate per line (``x q``, ``sx q``,
    ``rz q angle``, ``cx control target``).  Blank lines and lines starting
    with ``#`` are skipped.
    """
    n_qubits = None
    genes: list[Gate] = []
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if n_qubits is None:
            if fields[0] != "qubits" or len(fields) != 2:
                raise CircuitParseError(lineno, "expected 'qubits <n>' header")
            n_qubits = _parse_int(fields[1], lineno)
            if n_qubits < 1:
                raise CircuitParseError(lineno, "qubit count must be positive")
            continue
        kind = _BY_MNEMONIC.get(fields[0])
        if kind is None:
            raise CircuitParseError(lineno, f"unknown gate {fields[0]!r}")
        n_args = kind.arity + (kind is GateKind.RZ)
        if len(fields) - 1 != n_args:
            raise CircuitParseError(lineno, f"{kind.mnemonic} takes {n_args} argument(s)")
        qubits = tuple(_parse_int(f, lineno) for f in fields[1:1 + kind.arity])
        for q in qubits:
            if not 0 <= q < n_qubits:
                raise CircuitParseError(lineno, f"qubit {q} out of range [0, {n_qubits})")
        if len(set(qubits)) != len(qubits):
            raise DuplicateQubitError(lineno, f"duplicate qubit in {kind.mnemonic}")
        angle = None
        if kind is GateKind.RZ:
            try:
                angle = float(fields[2])
            except ValueError:
                raise CircuitParseError(lineno, f"bad angle {fields[2]!r}") from None
            if not math.isfinite(angle):
                raise CircuitParseError(lineno, "angle must be finite")
        genes.append(Gate(kind, qubits, angle))
    if n_qubits is None:
        raise CircuitParseError(1, "missing 'qubits <n>' header")
    return CircuitGenome(n_qubits, genes)


def _parse_int(s: str, lineno: int) -> int:
    try:
        return int(s)
    except ValueError:
        raise CircuitParseError(lineno, f"expected an integer, got {s!r}") from None


def serialize_circuit(c: CircuitGenome) -> str:
    lines = [f"qubits {c.n_qubits}"]
    lines.extend(str(g) for g in c)
    return "\n".join(lines) + "\n"
