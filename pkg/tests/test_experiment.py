import csv
import json
import subprocess
import sys

import pytest

from dqc_evo.circuit_ir import parse_circuit, serialize_circuit
from dqc_evo.cli import main
from dqc_evo.experiment import (
    HISTORY_COLUMNS, ConfigError, FileSource, GroverSource, config_from_dict, golden_configs,
    load_config, run_experiment, write_results,
)
from dqc_evo.fitness import Objective
from dqc_evo.grover import GroverSpec, build_grover
from dqc_evo.partition import DynamicKL, FixedPartition

GOLDEN = ["grover4_gg", "grover5_gg", "grover6_gg", "grover4_cx", "grover5_cx", "grover6_cx",
          "grover4_depth", "grover5_depth", "grover6_depth", "grover5_cx_alpha2",
          "grover6_net3", "grover8_grid4"]


def small(n=4, objective="global_gates", generations=5, seeds=(0, 1), **extra):
    data = {"circuit": {"source": "grover", "n": n}, "fitness": {"objective": objective},
            "ea": {"population_size": 20, "generations": generations}, "seeds": list(seeds)}
    data.update(extra)
    return config_from_dict(data, name="small")


def test_golden_configs_ship():
    assert sorted(golden_configs()) == sorted(GOLDEN)
    for name in GOLDEN:
        cfg = load_config(name)
        assert cfg.seeds == (0, 1, 2)
        assert cfg.ea.generations == 3000 and cfg.ea.population_size == 200


def test_golden_config_contents():
    net3 = load_config("grover6_net3")
    assert net3.objective is Objective.DISTANCE and net3.effective_alpha == 2.0
    assert isinstance(net3.partition, FixedPartition)
    assert net3.partition.topology.n_qpus == 3
    assert net3.partition.assignment.qpu_of == (0, 0, 1, 1, 2, 2)
    grid = load_config("grover8_grid4")
    assert grid.effective_alpha == 3.0
    assert grid.partition.topology.distance(0, 3) == 2
    assert load_config("grover5_cx_alpha2").effective_alpha == 2.0
    gg = load_config("grover4_gg")
    assert isinstance(gg.partition, DynamicKL) and gg.circuit == GroverSource(4)


@pytest.mark.parametrize("data, fragment", [
    ({}, "[circuit]"),
    ({"circuit": {"source": "grover"}}, "'n'"),
    ({"circuit": {"source": "qasm"}}, "unknown circuit source"),
    ({"circuit": {"n": 9}}, "2 to 8"),
    ({"circuit": {"n": 4}, "fitness": {"objective": "speed"}}, "unknown objective"),
    ({"circuit": {"n": 4}, "ea": {"popsize": 3}}, "unknown [ea] keys"),
    ({"circuit": {"n": 4}, "ea": {"mutation_rate": 2}}, "mutation_rate"),
    ({"circuit": {"n": 4}, "seeds": []}, "seed"),
    ({"circuit": {"n": 4}, "partition": {"mode": "spectral"}}, "partition mode"),
    ({"circuit": {"n": 4}, "partition": {"mode": "fixed"}}, "qpus"),
    ({"circuit": {"n": 4}, "partition": {"mode": "fixed", "qpus": 2}}, "capacity"),
])
def test_config_errors(data, fragment):
    with pytest.raises(ConfigError) as info:
        config_from_dict(data)
    assert fragment in str(info.value)


def test_file_source_and_explicit_assignment(tmp_path):
    circ = tmp_path / "c.circ"
    circ.write_text(serialize_circuit(build_grover(GroverSpec(3, "110"))))
    cfg_path = tmp_path / "exp.toml"
    cfg_path.write_text('seeds = [4]\n[circuit]\nsource = "file"\npath = "c.circ"\n'
                        '[fitness]\nobjective = "distance"\nalpha = 2\n'
                        '[partition]\nmode = "fixed"\nqpus = 2\nlinks = "complete"\n'
                        'assignment = [0, 1, 1]\n[ea]\npopulation_size = 10\ngenerations = 3\n')
    cfg = load_config(cfg_path)
    assert cfg.circuit == FileSource(circ)
    assert cfg.partition.assignment.qpu_of == (0, 1, 1)
    result = run_experiment(cfg)
    assert result.records[0].target == "110"
    assert result.records[0].seed == 4


def test_missing_config():
    with pytest.raises(ConfigError):
        load_config("no_such_config")


def test_zero_generations_is_identity(tmp_path):
    result = run_experiment(small(generations=0))
    for rec in result.records:
        assert all(v == 0.0 for v in rec.reductions().values())
        assert rec.optimized["fidelity"] == pytest.approx(1.0, abs=1e-12)
        assert rec.solution_correct
    write_results(result, tmp_path)
    assert (tmp_path / "history.csv").read_text() == ",".join(HISTORY_COLUMNS) + "\n"


def test_targets_differ_between_seeds_and_are_recorded():
    result = run_experiment(small(n=6, generations=1, seeds=(0, 1, 2)))
    targets = [r.target for r in result.records]
    assert len(set(targets)) > 1
    assert all(len(t) == 6 for t in targets)


def test_result_files(tmp_path):
    result = run_experiment(small(generations=6, seeds=(3, 5)))
    paths = write_results(result, tmp_path)
    assert {p.name for p in paths} == {"result.json", "history.csv", "best_seed3.circ",
                                       "best_seed5.circ"}
    with open(tmp_path / "history.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert list(rows[0]) == list(HISTORY_COLUMNS)
    assert len(rows) == 6 * 2
    for seed in ("3", "5"):
        fits = [float(r["best_fitness"]) for r in rows if r["seed"] == seed]
        assert fits == sorted(fits)

    data = json.loads((tmp_path / "result.json").read_text())
    assert data["name"] == "small"
    assert data["config"]["objective"] == "global_gates"
    assert data["config"]["seeds"] == [3, 5]
    for rec in data["records"]:
        assert set(rec) >= {"seed", "target", "baseline", "optimized", "solution_correct",
                            "best_circuit", "reductions_pct", "best_fitness"}
        for key in ("depth", "cx", "comm_cost"):
            base, opt = rec["baseline"][key], rec["optimized"][key]
            assert rec["reductions_pct"][key] == pytest.approx(100 * (base - opt) / base)
        circ = parse_circuit((tmp_path / f"best_seed{rec['seed']}.circ").read_text())
        assert serialize_circuit(circ) == rec["best_circuit"]
    agg = data["aggregate"]
    assert agg["mean_fidelity"] == pytest.approx(
        sum(r["optimized"]["fidelity"] for r in data["records"]) / 2)


def test_byte_identical_replay(tmp_path):
    cfg = small(n=5, objective="cx", generations=8, seeds=(1, 2))
    for d in ("a", "b"):
        write_results(run_experiment(cfg), tmp_path / d)
    for name in ("result.json", "history.csv", "best_seed1.circ", "best_seed2.circ"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


# --- command line ---

def test_cli_grover_and_metrics(tmp_path, capsys):
    assert main(["grover", "--n", "3", "--target", "101"]) == 0
    text = capsys.readouterr().out
    c = parse_circuit(text)
    assert c == build_grover(GroverSpec(3, "101"))
    path = tmp_path / "g.circ"
    path.write_text(text)
    assert main(["metrics", str(path)]) == 0
    out = dict(line.split() for line in capsys.readouterr().out.strip().splitlines())
    assert out["qubits"] == "3" and out["cx"] == str(c.cx_count) and out["gates"] == str(len(c))


def test_cli_metrics_with_topology(tmp_path, capsys):
    path = tmp_path / "g.circ"
    path.write_text("qubits 8\ncx 0 7\ncx 0 2\nx 1\n")
    topo = tmp_path / "t.toml"
    topo.write_text('[partition]\nmode = "fixed"\nqpus = 4\ncapacity = 2\n'
                    'links = [[0, 1], [0, 2], [1, 3], [2, 3]]\n')
    assert main(["metrics", str(path), "--topology", str(topo)]) == 0
    assert "hop_cost 3" in capsys.readouterr().out
    topo.write_text('[partition]\nmode = "dynamic_kl"\n')
    assert main(["metrics", str(path), "--topology", str(topo)]) == 2


def test_cli_run(tmp_path, capsys):
    out = tmp_path / "res"
    rc = main(["run", "grover4_depth", "--generations", "3", "--seed", "7", "--seed", "9",
               "--out", str(out)])
    assert rc == 0
    data = json.loads((out / "result.json").read_text())
    assert [r["seed"] for r in data["records"]] == [7, 9]
    assert data["config"]["ea"]["generations"] == 3
    assert "seed 7" in capsys.readouterr().out


def test_cli_overrides(tmp_path):
    out = tmp_path / "res"
    assert main(["run", "grover4_gg", "--generations", "2", "--seed", "0", "--objective", "cx",
                 "--alpha", "2", "--out", str(out)]) == 0
    cfg = json.loads((out / "result.json").read_text())["config"]
    assert cfg["objective"] == "cx" and cfg["alpha"] == 2.0


@pytest.mark.parametrize("argv", [
    ["run", "no_such_config"],
    ["metrics", "/nonexistent/circuit"],
    ["grover", "--n", "3", "--target", "10"],
    ["grover", "--n", "12"],
])
def test_cli_errors_exit_nonzero(argv, capsys):
    assert main(argv) == 2
    assert "error" in capsys.readouterr().err


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "dqc_evo.cli", "configs"],
                          capture_output=True, text=True, check=True)
    assert proc.stdout.split() == sorted(GOLDEN)
