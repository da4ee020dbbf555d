"""Evolutionary circuit optimisation for distributed quantum computing."""
from .circuit_ir import (
    CircuitError, CircuitGenome, CircuitParseError, Gate, GateKind, cx_pairs, depth,
    parse_circuit, serialize_circuit,
)
from .ea import EAParams, evolve
from .estimator import CircuitOptimizer
from .fitness import FitnessSpec, Objective, evaluate, rescale
from .grover import GroverSpec, build_grover, grover_success_probability
from .partition import (
    Assignment, DynamicKL, FixedPartition, NetworkTopology, cut_cost, global_gate_cost, hop_cost,
    interaction_graph, kl_bisect, naive_assignment,
)
from .simulator import StateVector, extract_solution, fidelity, probabilities, run, zero_state

__version__ = "0.1.0"
