"""Communication cost of a circuit distributed over networked QPUs.

Two regimes are supported: a dynamic two-way split recomputed with
Kernighan-Lin for every circuit, and a fixed qubit-to-QPU assignment on a
network topology where every global CX is charged its hop distance.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Union

import numpy as np

from .circuit_ir import CircuitGenome, GateKind


class PartitionError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class InteractionGraph:
    """Undirected CX-count graph over qubits; ``weights`` is symmetric with zero diagonal."""

    n_vertices: int
    weights: np.ndarray

    def weight(self, i: int, j: int) -> int:
        return int(self.weights[i, j])

    @property
    def edges(self) -> dict[tuple[int, int], int]:
        iu, ju = np.nonzero(np.triu(self.weights, 1))
        return {(int(i), int(j)): int(self.weights[i, j]) for i, j in zip(iu, ju)}

    @property
    def total_weight(self) -> int:
        return int(np.triu(self.weights, 1).sum())

    @classmethod
    def from_edges(cls, n_vertices: int, edges: dict[tuple[int, int], int]) -> "InteractionGraph":
        w = np.zeros((n_vertices, n_vertices), dtype=np.int64)
        for (i, j), wt in edges.items():
            if i == j:
                raise PartitionError("self-edges are not allowed")
            w[i, j] += wt
            w[j, i] += wt
        return cls(n_vertices, w)


def _weights_from_arrays(n: int, ctrl: np.ndarray, tgt: np.ndarray) -> np.ndarray:
    flat = np.bincount(ctrl * n + tgt, minlength=n * n).reshape(n, n)
    return flat + flat.T


def interaction_graph(c: CircuitGenome) -> InteractionGraph:
    mask = c.kinds == GateKind.CX
    return InteractionGraph(c.n_qubits, _weights_from_arrays(c.n_qubits, c.q0[mask], c.q1[mask]))


@dataclass(frozen=True)
class NetworkTopology:
    n_qpus: int
    edges: tuple[tuple[int, int], ...]
    capacity: int | None = None
    distances: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n_qpus < 1:
            raise PartitionError("topology needs at least one QPU")
        edges = tuple((int(a), int(b)) for a, b in self.edges)
        object.__setattr__(self, "edges", edges)
        adj = [[] for _ in range(self.n_qpus)]
        for a, b in edges:
            if not (0 <= a < self.n_qpus and 0 <= b < self.n_qpus) or a == b:
                raise PartitionError(f"invalid link ({a}, {b}) for {self.n_qpus} QPUs")
            adj[a].append(b)
            adj[b].append(a)
        dist = np.full((self.n_qpus, self.n_qpus), -1, dtype=np.int64)
        for src in range(self.n_qpus):
            dist[src, src] = 0
            queue = deque([src])
            while queue:
                u = queue.popleft()
                for v in adj[u]:
                    if dist[src, v] < 0:
                        dist[src, v] = dist[src, u] + 1
                        queue.append(v)
        if (dist < 0).any():
            raise PartitionError("network topology is disconnected")
        dist.flags.writeable = False
        object.__setattr__(self, "distances", dist)

    @classmethod
    def complete(cls, n_qpus: int, capacity: int | None = None) -> "NetworkTopology":
        edges = [(a, b) for a in range(n_qpus) for b in range(a + 1, n_qpus)]
        return cls(n_qpus, tuple(edges), capacity)

    @classmethod
    def grid_2x2(cls, capacity: int | None = None) -> "NetworkTopology":
        # 0 - 1
        # |   |
        # 2 - 3
        return cls(4, ((0, 1), (0, 2), (1, 3), (2, 3)), capacity)

    def distance(self, a: int, b: int) -> int:
        return int(self.distances[a, b])


@dataclass(frozen=True)
class Assignment:
    qpu_of: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "qpu_of", tuple(int(q) for q in self.qpu_of))
        if any(q < 0 for q in self.qpu_of):
            raise PartitionError("QPU indices must be non-negative")

    def __len__(self):
        return len(self.qpu_of)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.qpu_of, dtype=np.int64)

    def check(self, topology: NetworkTopology) -> None:
        counts = np.bincount(self.as_array(), minlength=topology.n_qpus)
        if len(counts) > topology.n_qpus:
            raise PartitionError(f"assignment uses QPU {len(counts) - 1}, topology has {topology.n_qpus}")
        if topology.capacity is not None and counts.max(initial=0) > topology.capacity:
            raise PartitionError(
                f"capacity {topology.capacity} exceeded: qubits per QPU {counts.tolist()}")


def naive_assignment(n_qubits: int, capacity: int) -> Assignment:
    """Consecutive blocks: qubits 0..capacity-1 on QPU 0, the next block on QPU 1, ..."""
    return Assignment(tuple(q // capacity for q in range(n_qubits)))


def _pairs_array(cx) -> np.ndarray:
    arr = np.asarray(cx, dtype=np.int64)
    return arr.reshape(-1, 2)


def _labels(p: Assignment, pairs: np.ndarray) -> np.ndarray:
    labels = p.as_array()
    if pairs.size and pairs.max() >= len(labels):
        raise PartitionError(f"qubit {int(pairs.max())} is not assigned")
    return labels


def cut_cost(p: Assignment, cx: Iterable[tuple[int, int]]) -> int:
    """Number of CX pairs whose qubits sit on different QPUs."""
    pairs = _pairs_array(list(cx))
    labels = _labels(p, pairs)
    return int(np.count_nonzero(labels[pairs[:, 0]] != labels[pairs[:, 1]]))


def hop_cost(p: Assignment, cx: Iterable[tuple[int, int]], t: NetworkTopology) -> int:
    """Sum of network hop distances over all CX pairs (0 for local gates)."""
    pairs = _pairs_array(list(cx))
    labels = _labels(p, pairs)
    p.check(t)
    return int(t.distances[labels[pairs[:, 0]], labels[pairs[:, 1]]].sum())


def kl_bisect(g: InteractionGraph, seed: int = 0) -> Assignment:
    """Balanced two-way split by Kernighan-Lin pair swapping.

    Odd vertex counts are padded with an isolated dummy vertex.  The seed
    only fixes the initial split and the order in which equal gains are
    considered.  The side holding vertex 0 is labelled QPU 0.
    """
    if g.n_vertices < 2:
        raise PartitionError("bisection needs at least two vertices")
    w = np.ascontiguousarray(g.weights, dtype=np.int64)
    return Assignment(_kl_cached(g.n_vertices, w.tobytes(), int(seed)))


@lru_cache(maxsize=65536)
def _kl_cached(n: int, wbytes: bytes, seed: int) -> tuple[int, ...]:
    w = np.frombuffer(wbytes, dtype=np.int64).reshape(n, n)
    m = n + (n % 2)
    if m != n:
        padded = np.zeros((m, m), dtype=np.int64)
        padded[:n, :n] = w
        w = padded
    W = w.tolist()
    order = np.random.default_rng(seed).permutation(m).tolist()
    half = m // 2
    side = [0] * m
    for v in order[half:]:
        side[v] = 1

    while True:
        # D[v] = external - internal cost
        D = [sum(W[v][u] if side[u] != side[v] else -W[v][u] for u in range(m)) for v in range(m)]
        locked = [False] * m
        gains, swaps = [], []
        for _ in range(half):
            best = None
            for a in order:
                if locked[a] or side[a] != 0:
                    continue
                for b in order:
                    if locked[b] or side[b] != 1:
                        continue
                    gain = D[a] + D[b] - 2 * W[a][b]
                    if best is None or gain > best[0]:
                        best = (gain, a, b)
            gain, a, b = best
            locked[a] = locked[b] = True
            gains.append(gain)
            swaps.append((a, b))
            for x in range(m):
                if locked[x]:
                    continue
                if side[x] == 0:
                    D[x] += 2 * W[x][a] - 2 * W[x][b]
                else:
                    D[x] += 2 * W[x][b] - 2 * W[x][a]
        best_k, best_total, total = 0, 0, 0
        for k, gain in enumerate(gains, start=1):
            total += gain
            if total > best_total:
                best_k, best_total = k, total
        if best_k == 0:
            break
        for a, b in swaps[:best_k]:
            side[a], side[b] = 1, 0

    side = side[:n]
    if side[0] == 1:
        side = [1 - s for s in side]
    return tuple(side)


@dataclass(frozen=True)
class DynamicKL:
    """Two QPUs; the split is recomputed for each circuit."""

    n_parts: int = 2

    def __post_init__(self):
        if self.n_parts != 2:
            raise PartitionError("dynamic Kernighan-Lin partitioning supports exactly 2 parts")


@dataclass(frozen=True)
class FixedPartition:
    assignment: Assignment
    topology: NetworkTopology

    def __post_init__(self):
        self.assignment.check(self.topology)


PartitionSpec = Union[DynamicKL, FixedPartition]


def comm_cost_arrays(n_qubits: int, ctrl: np.ndarray, tgt: np.ndarray,
                     spec: PartitionSpec, seed: int = 0) -> int:
    """Communication cost from CX control/target arrays (hot path of the fitness)."""
    if len(ctrl) == 0:
        return 0
    if isinstance(spec, DynamicKL):
        w = _weights_from_arrays(n_qubits, ctrl, tgt)
        labels = np.asarray(_kl_cached(n_qubits, w.tobytes(), int(seed)))
        return int(np.count_nonzero(labels[ctrl] != labels[tgt]))
    labels = spec.assignment.as_array()
    if len(labels) < n_qubits:
        raise PartitionError(f"assignment covers {len(labels)} qubits, circuit has {n_qubits}")
    return int(spec.topology.distances[labels[ctrl], labels[tgt]].sum())


def global_gate_cost(c: CircuitGenome, spec: PartitionSpec, seed: int = 0) -> int:
    mask = c.kinds == GateKind.CX
    return comm_cost_arrays(c.n_qubits, c.q0[mask], c.q1[mask], spec, seed)


def cut_of(g: InteractionGraph, p: Assignment) -> int:
    labels = p.as_array()
    diff = labels[:, None] != labels[None, :]
    return int(g.weights[diff].sum() // 2)
