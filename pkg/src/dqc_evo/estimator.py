"""scikit-learn style wrapper around the evolutionary optimiser.

``fit`` takes the original circuit (and optionally the state it should keep
preparing), ``transform`` returns the optimised circuit.  Hyperparameters are
plain constructor arguments, so ``get_params``/``set_params``/``clone`` work
as for any estimator.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .circuit_ir import CircuitGenome, parse_circuit
from .ea import EAParams, evolve
from .fitness import FitnessSpec, Objective, default_alpha, evaluate
from .partition import DynamicKL, PartitionSpec
from .simulator import StateVector


def check_circuit(X) -> CircuitGenome:
    """Accept a genome or circuit text; anything else is a TypeError."""
    if isinstance(X, CircuitGenome):
        return X
    if isinstance(X, str):
        return parse_circuit(X)
    raise TypeError(f"expected a CircuitGenome or circuit text, got {type(X).__name__}")


def check_target_state(y, n_qubits: int) -> StateVector | None:
    if y is None:
        return None
    if isinstance(y, StateVector):
        state = y
    else:
        state = StateVector(n_qubits, np.asarray(y, dtype=np.complex128))
    if state.n_qubits != n_qubits:
        raise ValueError(f"target state has {state.n_qubits} qubits, circuit has {n_qubits}")
    if abs(state.norm - 1.0) > 1e-8:
        raise ValueError(f"target state is not normalised (norm {state.norm})")
    return state


class CircuitOptimizer(TransformerMixin, BaseEstimator):
    def __init__(self, objective: str = "global_gates", alpha: float | None = None,
                 partition: PartitionSpec | None = None, population_size: int = 200,
                 generations: int = 3000, crossover_rate: float = 0.85,
                 mutation_rate: float = 0.4, child_rate: float = 0.3,
                 replace_rate: float = 0.1, random_state: int = 0):
        self.objective = objective
        self.alpha = alpha
        self.partition = partition
        self.population_size = population_size
        self.generations = generations
        self.crossover_rate = crossover_rate
        self.mutation_rate = mutation_rate
        self.child_rate = child_rate
        self.replace_rate = replace_rate
        self.random_state = random_state

    def _ea_params(self) -> EAParams:
        return EAParams(self.population_size, self.generations, self.crossover_rate,
                        self.mutation_rate, self.child_rate, self.replace_rate,
                        int(self.random_state))

    def fit(self, X, y=None):
        """Evolve ``X`` towards a cheaper circuit preparing ``y`` (default: X|0>)."""
        original = check_circuit(X)
        target = check_target_state(y, original.n_qubits)
        objective = Objective(self.objective)
        partition = self.partition if self.partition is not None else DynamicKL()
        alpha = self.alpha if self.alpha is not None else default_alpha(objective, partition)
        params = self._ea_params()
        self.fitness_spec_ = FitnessSpec.from_original(original, objective, alpha, partition,
                                                       params.seed, target)
        result = evolve(original, params, self.fitness_spec_)
        self.original_ = original
        self.best_ = result.best
        self.best_circuit_ = result.best.genome
        self.history_ = result.history
        self.n_qubits_in_ = original.n_qubits
        return self

    def transform(self, X):
        check_is_fitted(self, "best_circuit_")
        circuit = check_circuit(X)
        if circuit.n_qubits != self.n_qubits_in_:
            raise ValueError(f"fitted on {self.n_qubits_in_} qubits, got {circuit.n_qubits}")
        return self.best_circuit_

    def score(self, X, y=None):
        """Fitness of ``X`` under the fitted objective."""
        check_is_fitted(self, "fitness_spec_")
        return evaluate(check_circuit(X), self.fitness_spec_)
