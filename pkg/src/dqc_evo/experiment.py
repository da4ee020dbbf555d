"""Experiment configs, multi-seed runs and result files."""
from __future__ import annotations

import csv
import io
import json
import os
import sys
from dataclasses import asdict, dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Any, Callable

import numpy as np

from .circuit_ir import CircuitGenome, depth, parse_circuit, serialize_circuit
from .ea import EAParams, GenerationStats, evolve
from .fitness import FitnessSpec, Objective, default_alpha
from .grover import GroverSpec, build_grover, random_target
from .partition import (
    Assignment, DynamicKL, FixedPartition, NetworkTopology, PartitionSpec, global_gate_cost,
    naive_assignment,
)
from .simulator import extract_solution, run

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class GroverSource:
    n: int
    target: str | None = None
    iterations: int | None = None


@dataclass(frozen=True)
class FileSource:
    path: Path


@dataclass(frozen=True)
class ExperimentConfig:
    circuit: GroverSource | FileSource
    objective: Objective = Objective.GLOBAL_GATES
    alpha: float | None = None
    partition: PartitionSpec = field(default_factory=DynamicKL)
    ea: EAParams = field(default_factory=EAParams)
    seeds: tuple[int, ...] = (0, 1, 2)
    name: str = "experiment"

    def __post_init__(self):
        if not self.seeds:
            raise ConfigError("at least one seed is required")
        if any(s < 0 for s in self.seeds):
            raise ConfigError("seeds must be unsigned integers")
        if isinstance(self.circuit, GroverSource) and not 2 <= self.circuit.n <= 8:
            raise ConfigError(f"grover circuits need 2 to 8 qubits, got {self.circuit.n}")

    @property
    def effective_alpha(self) -> float:
        return self.alpha if self.alpha is not None else default_alpha(self.objective, self.partition)


_EA_KEYS = {f for f in EAParams.__dataclass_fields__ if f != "seed"}


def parse_partition(table: dict[str, Any] | None, n_qubits: int | None = None) -> PartitionSpec:
    """Build a partition spec from a ``[partition]`` table."""
    if not table:
        return DynamicKL()
    mode = table.get("mode", "dynamic_kl")
    if mode == "dynamic_kl":
        return DynamicKL(int(table.get("parts", 2)))
    if mode != "fixed":
        raise ConfigError(f"unknown partition mode {mode!r} (expected 'dynamic_kl' or 'fixed')")
    try:
        qpus = int(table["qpus"])
    except KeyError:
        raise ConfigError("fixed partition needs 'qpus'") from None
    capacity = table.get("capacity")
    links = table.get("links", "complete")
    if links == "complete":
        topology = NetworkTopology.complete(qpus, capacity)
    elif isinstance(links, list):
        topology = NetworkTopology(qpus, tuple(tuple(l) for l in links), capacity)
    else:
        raise ConfigError("'links' must be a list of [a, b] pairs or \"complete\"")
    assignment = table.get("assignment", "naive")
    if assignment == "naive":
        if capacity is None:
            raise ConfigError("naive assignment needs 'capacity'")
        if n_qubits is None:
            raise ConfigError("naive assignment needs a known qubit count")
        assignment = naive_assignment(n_qubits, int(capacity))
    elif isinstance(assignment, list):
        assignment = Assignment(tuple(assignment))
    else:
        raise ConfigError("'assignment' must be \"naive\" or a list of QPU indices")
    return FixedPartition(assignment, topology)


def config_from_dict(data: dict[str, Any], base_dir: Path | None = None,
                     name: str = "experiment") -> ExperimentConfig:
    circ = data.get("circuit")
    if not isinstance(circ, dict):
        raise ConfigError("missing [circuit] table")
    source = circ.get("source", "grover")
    if source == "grover":
        if "n" not in circ:
            raise ConfigError("grover circuit needs 'n'")
        circuit = GroverSource(int(circ["n"]), circ.get("target"), circ.get("iterations"))
        n_qubits = circuit.n
    elif source == "file":
        if "path" not in circ:
            raise ConfigError("file circuit needs 'path'")
        path = Path(circ["path"])
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        circuit = FileSource(path)
        n_qubits = load_circuit(path).n_qubits
    else:
        raise ConfigError(f"unknown circuit source {source!r}")

    fit = data.get("fitness", {})
    try:
        objective = Objective(fit.get("objective", "global_gates"))
    except ValueError:
        raise ConfigError(f"unknown objective {fit.get('objective')!r}; "
                          f"choose from {[o.value for o in Objective]}") from None
    alpha = fit.get("alpha")
    partition = parse_partition(data.get("partition"), n_qubits)

    ea_table = data.get("ea", {})
    unknown = set(ea_table) - _EA_KEYS
    if unknown:
        raise ConfigError(f"unknown [ea] keys: {sorted(unknown)}")
    try:
        ea = EAParams(**ea_table)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[ea]: {exc}") from None
    seeds = tuple(int(s) for s in data.get("seeds", (0, 1, 2)))
    return ExperimentConfig(circuit, objective, None if alpha is None else float(alpha),
                            partition, ea, seeds, data.get("name", name))


def golden_configs() -> list[str]:
    return sorted(p.name[:-5] for p in resources.files("dqc_evo.configs").iterdir()
                  if p.name.endswith(".toml"))


def load_config(path_or_name: str | os.PathLike) -> ExperimentConfig:
    """Load a TOML config file, or one of the bundled configs by name."""
    path = Path(path_or_name)
    if path.exists():
        text, base, name = path.read_text(encoding="utf-8"), path.parent, path.stem
    elif str(path_or_name) in golden_configs():
        res = resources.files("dqc_evo.configs") / f"{path_or_name}.toml"
        text, base, name = res.read_text(encoding="utf-8"), None, str(path_or_name)
    else:
        raise ConfigError(f"no such config file or bundled config: {path_or_name}")
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path_or_name}: {exc}") from None
    return config_from_dict(data, base, name)


def load_circuit(path: str | os.PathLike) -> CircuitGenome:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read circuit {path}: {exc}") from None
    return parse_circuit(text)


def reduction(baseline: float | None, optimized: float | None) -> float | None:
    if baseline is None or optimized is None:
        return None
    if baseline == 0:
        return 0.0
    return 100.0 * (baseline - optimized) / baseline


@dataclass
class SeedRecord:
    seed: int
    target: str
    baseline: dict
    optimized: dict
    solution_correct: bool
    best_fitness: float
    best_circuit: str
    history: list[GenerationStats] = field(repr=False, default_factory=list)

    def reductions(self) -> dict:
        return {k: reduction(self.baseline[k], self.optimized[k]) for k in ("depth", "cx", "comm_cost")}


@dataclass
class ExperimentResult:
    name: str
    config: dict
    records: list[SeedRecord]

    @property
    def aggregate(self) -> dict:
        reds = [r.reductions() for r in self.records]
        agg = {}
        for key in ("depth", "cx", "comm_cost"):
            vals = [r[key] for r in reds if r[key] is not None]
            agg[f"mean_{key}_reduction_pct"] = float(np.mean(vals)) if vals else None
        agg["mean_fidelity"] = float(np.mean([r.optimized["fidelity"] for r in self.records]))
        agg["all_solutions_correct"] = all(r.solution_correct for r in self.records)
        return agg

    def to_json(self) -> dict:
        records = []
        for r in self.records:
            d = {k: v for k, v in asdict(r).items() if k != "history"}
            d["reductions_pct"] = r.reductions()
            records.append(d)
        return {"name": self.name, "config": self.config, "records": records,
                "aggregate": self.aggregate}


def _config_summary(cfg: ExperimentConfig) -> dict:
    circ = cfg.circuit
    circuit = (asdict(circ) if isinstance(circ, GroverSource)
               else {"source": "file", "path": str(circ.path)})
    if isinstance(circ, GroverSource):
        circuit["source"] = "grover"
    if isinstance(cfg.partition, FixedPartition):
        part = {"mode": "fixed", "qpus": cfg.partition.topology.n_qpus,
                "capacity": cfg.partition.topology.capacity,
                "links": [list(e) for e in cfg.partition.topology.edges],
                "assignment": list(cfg.partition.assignment.qpu_of)}
    else:
        part = {"mode": "dynamic_kl", "parts": cfg.partition.n_parts}
    ea = asdict(cfg.ea)
    ea.pop("seed")
    return {"circuit": circuit, "objective": cfg.objective.value, "alpha": cfg.effective_alpha,
            "partition": part, "ea": ea, "seeds": list(cfg.seeds)}


def _original_for_seed(cfg: ExperimentConfig, seed: int) -> tuple[CircuitGenome, str]:
    circ = cfg.circuit
    if isinstance(circ, FileSource):
        original = load_circuit(circ.path)
        return original, extract_solution(run(original))
    target = circ.target
    if target is None:
        target_rng = np.random.default_rng(np.random.SeedSequence(seed).spawn(1)[0])
        target = random_target(circ.n, target_rng)
    return build_grover(GroverSpec(circ.n, target, circ.iterations)), target


def run_seed(cfg: ExperimentConfig, seed: int,
             callback: Callable[[GenerationStats], None] | None = None) -> SeedRecord:
    original, target = _original_for_seed(cfg, seed)
    spec = FitnessSpec.from_original(original, cfg.objective, cfg.effective_alpha,
                                     cfg.partition, seed)
    baseline = {"depth": depth(original), "cx": original.cx_count,
                "comm_cost": global_gate_cost(original, cfg.partition, seed)}
    result = evolve(original, replace(cfg.ea, seed=seed), spec, callback)
    best = result.best
    m = best.metrics(spec)
    optimized = {"depth": m["depth"], "cx": m["cx_count"], "comm_cost": m["comm_cost"],
                 "fidelity": best.fidelity}
    correct = extract_solution(run(best.genome)) == target
    return SeedRecord(seed, target, baseline, optimized, correct, best.fitness,
                      serialize_circuit(best.genome), result.history)


def run_experiment(cfg: ExperimentConfig,
                   progress: Callable[[int, GenerationStats], None] | None = None) -> ExperimentResult:
    records = []
    for seed in cfg.seeds:
        cb = None if progress is None else (lambda st, s=seed: progress(s, st))
        records.append(run_seed(cfg, seed, cb))
    return ExperimentResult(cfg.name, _config_summary(cfg), records)


HISTORY_COLUMNS = ("generation", "seed", "best_fitness", "mean_fitness", "best_fidelity",
                   "best_depth", "best_cx", "best_comm")


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8", newline="")
    os.replace(tmp, path)


def history_csv(result: ExperimentResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(HISTORY_COLUMNS)
    for rec in result.records:
        for st in rec.history:
            writer.writerow([st.generation, rec.seed, repr(st.best_fitness), repr(st.mean_fitness),
                             repr(st.best_fidelity), st.best_depth, st.best_cx,
                             "" if st.best_comm is None else st.best_comm])
    return buf.getvalue()


def write_results(result: ExperimentResult, out_dir: str | os.PathLike) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    path = out / "result.json"
    _atomic_write(path, json.dumps(result.to_json(), indent=2, sort_keys=True) + "\n")
    written.append(path)
    path = out / "history.csv"
    _atomic_write(path, history_csv(result))
    written.append(path)
    for rec in result.records:
        path = out / f"best_seed{rec.seed}.circ"
        _atomic_write(path, rec.best_circuit)
        written.append(path)
    return written
