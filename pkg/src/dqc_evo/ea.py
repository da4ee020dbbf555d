"""Steady-state evolutionary optimiser over variable-length gate lists.

Every generation breeds a batch of children (crossover of tournament-chosen
parents, or a fresh copy of the original circuit), mutates each child with
some probability, and lets the best children replace the worst members of
the population.  All randomness is drawn from one ``numpy`` generator seeded
from :attr:`EAParams.seed`.
"""
from __future__ import annotations

import hashlib
import math
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .circuit_ir import TWO_PI, CircuitGenome, GateKind, concat, depth
from .fitness import FitnessSpec, comm_cost, evaluate_full


@dataclass(frozen=True)
class EAParams:
    population_size: int = 200
    generations: int = 3000
    crossover_rate: float = 0.85
    mutation_rate: float = 0.4
    child_rate: float = 0.3
    replace_rate: float = 0.1
    seed: int = 0

    def __post_init__(self):
        for name in ("crossover_rate", "mutation_rate", "child_rate", "replace_rate"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {value}")
        if self.population_size < 2:
            raise ValueError("population_size must be at least 2")
        if self.generations < 0:
            raise ValueError("generations must be non-negative")
        if self.seed < 0:
            raise ValueError("seed must be an unsigned integer")
        if not self.n_children >= self.n_replace >= 1:
            raise ValueError(
                f"need child count ({self.n_children}) >= replace count ({self.n_replace}) >= 1")
        if self.n_replace >= self.population_size:
            raise ValueError("replace_rate must leave at least one survivor")

    @property
    def n_children(self) -> int:
        return _count(self.child_rate, self.population_size)

    @property
    def n_replace(self) -> int:
        return _count(self.replace_rate, self.population_size)


def _count(rate: float, size: int) -> int:
    # guards 0.3 * 200 style products against landing just below an integer
    return int(math.floor(rate * size + 1e-9))


@dataclass
class Individual:
    genome: CircuitGenome
    fitness: float
    fidelity: float
    _metrics: dict | None = field(default=None, repr=False)

    def metrics(self, spec: FitnessSpec) -> dict:
        """Reporting metrics, computed on first use."""
        if self._metrics is None:
            self._metrics = {
                "fidelity": self.fidelity,
                "depth": depth(self.genome),
                "cx_count": self.genome.cx_count,
                "comm_cost": comm_cost(self.genome, spec),
            }
        return self._metrics


@dataclass(frozen=True)
class GenerationStats:
    generation: int
    best_fitness: float
    mean_fitness: float
    best_fidelity: float
    best_depth: int
    best_cx: int
    best_comm: int | None


class Evaluator:
    """Fitness with a small memo keyed by genome content, so clones are free."""

    def __init__(self, spec: FitnessSpec, cache_size: int = 2048):
        self.spec = spec
        self.cache_size = cache_size
        self._cache: OrderedDict[bytes, tuple[float, float]] = OrderedDict()
        self.calls = 0

    def __call__(self, genome: CircuitGenome) -> Individual:
        h = hashlib.blake2b(digest_size=16)
        h.update(genome.n_qubits.to_bytes(2, "little"))
        for arr in (genome.kinds, genome.q0, genome.q1, genome.angles):
            h.update(arr.tobytes())
        key = h.digest()
        hit = self._cache.get(key)
        if hit is None:
            self.calls += 1
            ev = evaluate_full(genome, self.spec)
            hit = (ev.fitness, ev.fidelity)
            self._cache[key] = hit
            if len(self._cache) > self.cache_size:
                self._cache.popitem(last=False)
        else:
            self._cache.move_to_end(key)
        return Individual(genome, hit[0], hit[1])


def random_gate_arrays(n_qubits: int, rng: np.random.Generator) -> tuple[int, int, int, float]:
    """A fresh gate as (kind, q0, q1, angle): uniform kind, distinct uniform qubits."""
    kinds = 4 if n_qubits > 1 else 3
    kind = int(rng.integers(kinds))
    q0 = int(rng.integers(n_qubits))
    q1 = -1
    angle = 0.0
    if kind == GateKind.CX:
        q1 = int(rng.integers(n_qubits - 1))
        if q1 >= q0:
            q1 += 1
    elif kind == GateKind.RZ:
        angle = float(rng.uniform(0.0, TWO_PI))
    return kind, q0, q1, angle


def _check_pair(a: CircuitGenome, b: CircuitGenome) -> None:
    if a.n_qubits != b.n_qubits:
        raise ValueError(f"parents act on {a.n_qubits} and {b.n_qubits} qubits")


def single_point_crossover(a: CircuitGenome, b: CircuitGenome, rng: np.random.Generator,
                           cut: int | None = None) -> CircuitGenome:
    """Head of ``a`` up to the cut, tail of ``b`` from it; the child is as long as ``b``."""
    _check_pair(a, b)
    if cut is None:
        cut = int(rng.integers(0, min(len(a), len(b)) + 1))
    return concat(a.n_qubits, [a[:cut], b[cut:]])


def uniform_crossover(a: CircuitGenome, b: CircuitGenome, rng: np.random.Generator) -> CircuitGenome:
    _check_pair(a, b)
    length = len(a) if rng.random() < 0.5 else len(b)
    short = min(len(a), len(b))
    from_a = rng.random(short) < 0.5
    cols = []
    for name in ("kinds", "q0", "q1", "angles"):
        xa, xb = getattr(a, name), getattr(b, name)
        head = np.where(from_a, xa[:short], xb[:short])
        if length > short:
            longer = xa if len(a) > len(b) else xb
            head = np.concatenate([head, longer[short:length]])
        cols.append(head)
    return CircuitGenome.from_arrays(a.n_qubits, *cols)


def _with_columns(c: CircuitGenome, kinds, q0, q1, angles) -> CircuitGenome:
    return CircuitGenome.from_arrays(c.n_qubits, kinds, q0, q1, angles)


def gate_flip(c: CircuitGenome, rng: np.random.Generator) -> CircuitGenome:
    if len(c) == 0:
        return c
    i = int(rng.integers(len(c)))
    kind, q0, q1, angle = random_gate_arrays(c.n_qubits, rng)
    cols = [c.kinds.copy(), c.q0.copy(), c.q1.copy(), c.angles.copy()]
    for col, v in zip(cols, (kind, q0, q1, angle)):
        col[i] = v
    return _with_columns(c, *cols)


def _drop(c: CircuitGenome, i: int) -> CircuitGenome:
    return _with_columns(c, *(np.delete(getattr(c, n), i) for n in ("kinds", "q0", "q1", "angles")))


def delete_gate(c: CircuitGenome, rng: np.random.Generator) -> CircuitGenome:
    if len(c) == 0:
        return c
    return _drop(c, int(rng.integers(len(c))))


def swap_gate(c: CircuitGenome, rng: np.random.Generator) -> CircuitGenome:
    if len(c) == 0:
        return c
    i, j = (int(v) for v in rng.integers(len(c), size=2))
    order = np.arange(len(c))
    order[i], order[j] = j, i
    return c.take(order)


def shuffle(c: CircuitGenome, rng: np.random.Generator) -> CircuitGenome:
    if len(c) == 0:
        return c
    lo, hi = sorted(int(v) for v in rng.integers(0, len(c) + 1, size=2))
    order = np.arange(len(c))
    order[lo:hi] = lo + rng.permutation(hi - lo)
    return c.take(order)


def add_gate(c: CircuitGenome, rng: np.random.Generator) -> CircuitGenome:
    pos = int(rng.integers(len(c) + 1))
    gate = random_gate_arrays(c.n_qubits, rng)
    return _with_columns(c, *(np.insert(getattr(c, n), pos, v)
                              for n, v in zip(("kinds", "q0", "q1", "angles"), gate)))


def remove_cx(c: CircuitGenome, rng: np.random.Generator) -> CircuitGenome:
    where = np.flatnonzero(c.kinds == GateKind.CX)
    if len(where) == 0:
        return c
    return _drop(c, int(where[rng.integers(len(where))]))


MUTATIONS: tuple[Callable[[CircuitGenome, np.random.Generator], CircuitGenome], ...] = (
    gate_flip, delete_gate, swap_gate, shuffle, add_gate, remove_cx,
)


def mutate(c: CircuitGenome, rng: np.random.Generator, operator: int | None = None) -> CircuitGenome:
    """Apply one of the six mutation operators, chosen uniformly unless given."""
    if operator is None:
        operator = int(rng.integers(len(MUTATIONS)))
    return MUTATIONS[operator](c, rng)


def init_population(original: CircuitGenome, params: EAParams, evaluator: Evaluator) -> list[Individual]:
    # genomes are immutable, so sharing the original is the same as copying it
    first = evaluator(original)
    return [Individual(original, first.fitness, first.fidelity) for _ in range(params.population_size)]


def _tournament(population: list[Individual], rng: np.random.Generator) -> Individual:
    i, j = (int(v) for v in rng.integers(len(population), size=2))
    a, b = population[i], population[j]
    return b if b.fitness > a.fitness else a


def _best(population: list[Individual]) -> Individual:
    best = population[0]
    for ind in population[1:]:
        if ind.fitness > best.fitness:
            best = ind
    return best


def population_stats(generation: int, population: list[Individual], spec: FitnessSpec) -> GenerationStats:
    best = _best(population)
    m = best.metrics(spec)
    return GenerationStats(
        generation=generation,
        best_fitness=best.fitness,
        mean_fitness=float(np.mean([ind.fitness for ind in population])),
        best_fidelity=best.fidelity,
        best_depth=m["depth"],
        best_cx=m["cx_count"],
        best_comm=m["comm_cost"],
    )


def make_child(original: CircuitGenome, population: list[Individual], params: EAParams,
               rng: np.random.Generator) -> CircuitGenome:
    if rng.random() < params.crossover_rate:
        a = _tournament(population, rng).genome
        b = _tournament(population, rng).genome
        if rng.random() < 0.5:
            child = single_point_crossover(a, b, rng)
        else:
            child = uniform_crossover(a, b, rng)
    else:
        child = original
    if rng.random() < params.mutation_rate:
        child = mutate(child, rng)
    return child


def step(population: list[Individual], params: EAParams, evaluator: Evaluator,
         rng: np.random.Generator, original: CircuitGenome, generation: int = 0
         ) -> tuple[list[Individual], GenerationStats]:
    """One generation; returns the new population and its statistics."""
    children = [evaluator(make_child(original, population, params, rng))
                for _ in range(params.n_children)]
    n = params.n_replace
    best_children = sorted(range(len(children)), key=lambda i: (-children[i].fitness, i))[:n]
    worst_members = sorted(range(len(population)), key=lambda i: (population[i].fitness, i))[:n]
    population = list(population)
    for slot, ci in zip(worst_members, best_children):
        population[slot] = children[ci]
    return population, population_stats(generation, population, evaluator.spec)


@dataclass
class EvolutionResult:
    best: Individual
    history: list[GenerationStats]
    evaluations: int


def evolve(original: CircuitGenome, params: EAParams, spec: FitnessSpec,
           callback: Callable[[GenerationStats], None] | None = None) -> EvolutionResult:
    rng = np.random.default_rng(params.seed)
    evaluator = Evaluator(spec)
    population = init_population(original, params, evaluator)
    best = _best(population)
    history = []
    for gen in range(1, params.generations + 1):
        population, stats = step(population, params, evaluator, rng, original, gen)
        history.append(stats)
        if callback is not None:
            callback(stats)
        leader = _best(population)
        if leader.fitness > best.fitness:
            best = leader
    return EvolutionResult(best, history, evaluator.calls)
