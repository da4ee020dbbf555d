"""Command line entry point: ``dqc-evo run|metrics|grover|configs``."""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .circuit_ir import CircuitError, depth, serialize_circuit
from .experiment import (
    ConfigError, golden_configs, load_circuit, load_config, parse_partition, run_experiment,
    tomllib, write_results,
)
from .fitness import Objective
from .grover import GroverSpec, build_grover, random_target
from .partition import DynamicKL, FixedPartition, PartitionError, global_gate_cost

log = logging.getLogger("dqc_evo")


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    if args.seed:
        cfg = replace(cfg, seeds=tuple(args.seed))
    if args.objective:
        cfg = replace(cfg, objective=Objective(args.objective))
    if args.alpha is not None:
        cfg = replace(cfg, alpha=args.alpha)
    if args.generations is not None:
        cfg = replace(cfg, ea=replace(cfg.ea, generations=args.generations))
    out = Path(args.out) if args.out else Path("results") / cfg.name

    every = max(1, cfg.ea.generations // 20)

    def progress(seed, st):
        if st.generation % every == 0 or st.generation == cfg.ea.generations:
            log.info("seed %d gen %d best %.4f fid %.4f depth %d cx %d comm %s", seed,
                     st.generation, st.best_fitness, st.best_fidelity, st.best_depth,
                     st.best_cx, st.best_comm)

    result = run_experiment(cfg, progress)
    for path in write_results(result, out):
        log.info("wrote %s", path)
    for rec in result.records:
        red = rec.reductions()
        print(f"seed {rec.seed}: target {rec.target} fidelity {rec.optimized['fidelity']:.4f} "
              f"depth {rec.baseline['depth']}->{rec.optimized['depth']} ({red['depth']:.1f}%) "
              f"cx {rec.baseline['cx']}->{rec.optimized['cx']} ({red['cx']:.1f}%) "
              f"comm {rec.baseline['comm_cost']}->{rec.optimized['comm_cost']} ({red['comm_cost']:.1f}%) "
              f"solution {'ok' if rec.solution_correct else 'WRONG'}")
    agg = result.aggregate
    print(f"mean reductions: depth {agg['mean_depth_reduction_pct']:.2f}% "
          f"cx {agg['mean_cx_reduction_pct']:.2f}% comm {agg['mean_comm_cost_reduction_pct']:.2f}%; "
          f"mean fidelity {agg['mean_fidelity']:.4f}")
    return 0


def _cmd_metrics(args) -> int:
    c = load_circuit(args.circuit)
    print(f"qubits {c.n_qubits}")
    print(f"gates {len(c)}")
    print(f"depth {depth(c)}")
    print(f"cx {c.cx_count}")
    if c.n_qubits >= 2:
        print(f"cut_cost_kl2 {global_gate_cost(c, DynamicKL(), args.seed)}")
    if args.topology:
        try:
            data = tomllib.loads(Path(args.topology).read_text(encoding="utf-8"))
        except (OSError, tomllib.TOMLDecodeError) as exc:
            raise ConfigError(f"{args.topology}: {exc}") from None
        spec = parse_partition(data.get("partition", data), c.n_qubits)
        if not isinstance(spec, FixedPartition):
            raise ConfigError("--topology needs a fixed partition (mode = \"fixed\")")
        print(f"hop_cost {global_gate_cost(c, spec)}")
    return 0


def _cmd_grover(args) -> int:
    target = args.target or random_target(args.n, np.random.default_rng(args.seed))
    spec = GroverSpec(args.n, target, args.iterations)
    sys.stdout.write(f"# grover n={args.n} target={target} (qubit 0 first) "
                     f"iterations={spec.iterations}\n")
    sys.stdout.write(serialize_circuit(build_grover(spec)))
    return 0


def _cmd_configs(args) -> int:
    for name in golden_configs():
        print(name)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dqc-evo", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run an experiment config over its seeds")
    p.add_argument("config", help="TOML config file or bundled config name (see 'configs')")
    p.add_argument("--out", help="output directory (default results/<config name>)")
    p.add_argument("--seed", type=int, action="append", help="override seeds (repeatable)")
    p.add_argument("--objective", choices=[o.value for o in Objective])
    p.add_argument("--alpha", type=float, help="fidelity weight")
    p.add_argument("--generations", type=int, help="override the generation count")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("metrics", help="print depth, CX count and communication cost of a circuit")
    p.add_argument("circuit")
    p.add_argument("--topology", help="TOML file with a [partition] table")
    p.add_argument("--seed", type=int, default=0, help="Kernighan-Lin seed")
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("grover", help="print a Grover circuit in the circuit text format")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--target", help="bitstring, qubit 0 first (default: random from --seed)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--iterations", type=int)
    p.set_defaults(func=_cmd_grover)

    p = sub.add_parser("configs", help="list bundled experiment configs")
    p.set_defaults(func=_cmd_configs)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, CircuitError, PartitionError, ValueError) as exc:
        print(f"dqc-evo: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
