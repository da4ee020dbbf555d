"""Fitness functions: weighted fidelity minus a metric rescaled to the original circuit."""
from __future__ import annotations

import enum
from dataclasses import dataclass

from .circuit_ir import CircuitGenome, GateKind, _depth_kernel, depth
from .partition import FixedPartition, PartitionSpec, comm_cost_arrays, global_gate_cost
from .simulator import StateVector, overlap_fidelity, run, run_amplitudes


class FitnessError(ValueError):
    pass


class Objective(str, enum.Enum):
    GLOBAL_GATES = "global_gates"
    CX = "cx"
    DEPTH = "depth"
    DISTANCE = "distance"

    @property
    def needs_partition(self) -> bool:
        return self in (Objective.GLOBAL_GATES, Objective.DISTANCE)


@dataclass(frozen=True)
class Baseline:
    depth: int
    cx: int
    comm: int | None


def rescale(metric: float, baseline: float) -> float:
    return metric / max(baseline, 1)


@dataclass(frozen=True, eq=False)
class FitnessSpec:
    objective: Objective
    alpha: float
    baseline: Baseline
    target_state: StateVector
    partition: PartitionSpec | None = None
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "objective", Objective(self.objective))
        if not self.alpha > 0:
            raise FitnessError(f"alpha must be positive, got {self.alpha}")
        if self.objective.needs_partition and self.partition is None:
            raise FitnessError(f"objective {self.objective.value!r} needs a partition spec")
        if self.objective is Objective.DISTANCE and not isinstance(self.partition, FixedPartition):
            raise FitnessError("the distance objective needs a fixed assignment on a topology")

    @classmethod
    def from_original(cls, original: CircuitGenome, objective, alpha: float = 1.0,
                      partition: PartitionSpec | None = None, seed: int = 0,
                      target_state: StateVector | None = None) -> "FitnessSpec":
        """Spec whose baseline metrics (and, by default, target state) come from ``original``."""
        comm = None if partition is None else global_gate_cost(original, partition, seed)
        baseline = Baseline(depth(original), original.cx_count, comm)
        if target_state is None:
            target_state = run(original)
        return cls(Objective(objective), float(alpha), baseline, target_state, partition, seed)


@dataclass(frozen=True)
class Evaluation:
    fitness: float
    fidelity: float


def evaluate_full(c: CircuitGenome, spec: FitnessSpec) -> Evaluation:
    target = spec.target_state
    if c.n_qubits != target.n_qubits:
        raise FitnessError(f"circuit has {c.n_qubits} qubits, target state {target.n_qubits}")
    fid = min(1.0, overlap_fidelity(target.amplitudes, run_amplitudes(c)))
    obj = spec.objective
    if obj is Objective.DEPTH:
        metric = _depth_kernel(c.n_qubits, c.kinds, c.q0, c.q1) if len(c) else 0
        base = spec.baseline.depth
    elif obj is Objective.CX:
        metric = c.cx_count
        base = spec.baseline.cx
    else:
        mask = c.kinds == GateKind.CX
        metric = comm_cost_arrays(c.n_qubits, c.q0[mask], c.q1[mask], spec.partition, spec.seed)
        base = spec.baseline.comm
    return Evaluation(spec.alpha * fid - rescale(metric, base), fid)


def evaluate(c: CircuitGenome, spec: FitnessSpec) -> float:
    return evaluate_full(c, spec).fitness


def comm_cost(c: CircuitGenome, spec: FitnessSpec) -> int | None:
    if spec.partition is None:
        return None
    return global_gate_cost(c, spec.partition, spec.seed)


def default_alpha(objective, partition: PartitionSpec | None = None) -> float:
    """1 everywhere except the network runs: 2 on three QPUs, 3 on four."""
    if Objective(objective) is Objective.DISTANCE and isinstance(partition, FixedPartition):
        return {3: 2.0, 4: 3.0}.get(partition.topology.n_qpus, 1.0)
    return 1.0

