import json
import shutil
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from shishkin_robin.cli import ConfigError, load_config, main

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def write(tmp_path, data, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data) if not isinstance(data, str) else data)
    return str(path)


def base_config(**problem):
    cfg = json.loads((CONFIGS / "example_solve.json").read_text())
    cfg["problem"].update(problem)
    return cfg


def test_load_config_round_trip():
    path = CONFIGS / "example_solve.json"
    cfg = load_config(str(path))
    assert cfg.to_dict() == json.loads(path.read_text())
    assert json.loads(cfg.to_json()) == json.loads(path.read_text())


def test_config_expression_evaluates():
    p = load_config(str(CONFIGS / "example_solve.json")).build_problem()
    assert p.a(0.2, 1.0) == 4.0
    assert p.epsilon == 2.0 ** -14


def test_missing_field(tmp_path):
    cfg = base_config()
    del cfg["problem"]["phi_B"]
    with pytest.raises(ConfigError, match="missing field: problem.phi_B"):
        load_config(write(tmp_path, cfg))


def test_malformed_json(tmp_path):
    with pytest.raises(ConfigError, match="malformed JSON"):
        load_config(write(tmp_path, "{\"problem\": "))


def test_expression_syntax_error(tmp_path):
    with pytest.raises(ConfigError, match=r"expression error in problem.f: syntax error at offset 2"):
        load_config(write(tmp_path, base_config(f="2*^3")))


def test_invariant_violation(tmp_path):
    cfg = base_config()
    cfg["mesh"]["N"] = 30
    with pytest.raises(ConfigError, match="divisible by 4"):
        load_config(write(tmp_path, cfg))
    with pytest.raises(ConfigError, match="positive"):
        load_config(write(tmp_path, base_config(alpha=-1)))


def test_solve_builtin_solution(tmp_path, capsys):
    out = tmp_path / "u.csv"
    rc = main(["solve", "--builtin-example", "--epsilon", "2^-14", "--N", "64", "--M", "256",
               "--what", "solution", "--out", str(out)])
    assert rc == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "x,t,U"
    assert len(lines) - 1 == 65 * 257
    data = np.loadtxt(out, delimiter=",", skiprows=1)
    assert np.all(data[:65, 2] == 1.0)


def test_solve_derivative(tmp_path):
    out = tmp_path / "d.csv"
    assert main(["solve", "--builtin-example", "--N", "64", "--M", "256",
                 "--what", "derivative", "--out", str(out)]) == 0
    data = np.loadtxt(out, delimiter=",", skiprows=1)
    assert out.read_text().startswith("x,t,DxU\n")
    final = data[data[:, 1] == 1.0]
    j = np.argmax(np.abs(final[:, 2]))
    assert final[j, 0] < 0.1 or final[j, 0] > 0.9


def test_solve_bad_N_exit_1(capsys):
    assert main(["solve", "--builtin-example", "--N", "30", "--M", "4"]) == 1
    assert "divisible by 4" in capsys.readouterr().err


def test_usage_error_exit_1():
    with pytest.raises(SystemExit) as info:
        main(["solve", "--axis", "time"])
    assert info.value.code == 1


def test_no_problem_source(capsys):
    assert main(["validate"]) == 1
    assert "--builtin-example" in capsys.readouterr().err


def test_numeric_failure_exit_2(tmp_path, capsys):
    cfg = base_config(f="1/(t-0.5)")
    cfg["mesh"] = {"N": 8, "M": 4}
    rc = main(["solve", "--config", write(tmp_path, cfg)])
    assert rc == 2
    assert "numeric failure" in capsys.readouterr().err


def test_compatibility_warn_and_strict(tmp_path, capsys):
    cfg = base_config(phi_B="0")
    cfg["mesh"] = {"N": 8, "M": 4}
    path = write(tmp_path, cfg)
    out = tmp_path / "u.csv"
    assert main(["solve", "--config", path, "--out", str(out)]) == 0
    assert "warning: corner compatibility" in capsys.readouterr().err
    assert main(["solve", "--config", path, "--strict-compat", "--out", str(out)]) == 1
    assert "error: corner compatibility" in capsys.readouterr().err


def test_positivity_failure_aborts(tmp_path, capsys):
    cfg = base_config(a="0.5")
    assert main(["solve", "--config", write(tmp_path, cfg)]) == 1
    assert "alpha" in capsys.readouterr().err


def test_validate_command(capsys):
    assert main(["validate", "--builtin-example"]) == 0
    out = capsys.readouterr().out
    assert "positivity_ok: True" in out
    assert "min_sampled_a: 1 " in out


def test_table_time_small(capsys):
    rc = main(["table", "--builtin-example", "--axis", "time", "--fixed-N", "16",
               "--refine", "4,8,16", "--epsilons", "2^-6,2^-10", "--jobs", "1"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "p* = " in out and "D^N" in out


def test_table_csv_and_config(tmp_path):
    cfg = json.loads((CONFIGS / "table2_space.json").read_text())
    cfg["sweep"]["refine_values"] = [8, 16]
    cfg["sweep"]["fixed_M"] = 8
    out = tmp_path / "t.csv"
    rc = main(["table", "--config", write(tmp_path, cfg), "--format", "csv", "--out", str(out)])
    assert rc == 0
    rows = out.read_text().splitlines()
    assert rows[0] == "epsilon,refinement,D_eps"
    assert len([r for r in rows if r.startswith("D,")]) == 2


def test_table_constant_problem(tmp_path, capsys):
    cfg = {"problem": {"a": "1", "f": "1", "phi_L": "1", "phi_R": "1", "phi_B": "1",
                       "alpha": 0.5, "T": 1},
           "sweep": {"axis": "time", "fixed_N": 8, "refine_values": [4, 8, 16]}}
    assert main(["table", "--config", write(tmp_path, cfg)]) == 0
    out = capsys.readouterr().out
    assert "order undefined" in out
    assert "0.000E+00" in out


def test_table_bad_refine(capsys):
    rc = main(["table", "--builtin-example", "--axis", "time", "--fixed-N", "16",
               "--refine", "4,6"])
    assert rc == 1
    assert "double" in capsys.readouterr().err


def test_solve_output_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["solve", "--config", str(CONFIGS / "example_solve.json"), "--N", "16", "--M", "8"]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_csv_round_trips_doubles(tmp_path):
    out = tmp_path / "u.csv"
    main(["solve", "--builtin-example", "--N", "8", "--M", "4", "--out", str(out)])
    from shishkin_robin.analysis import solve_on
    from shishkin_robin.problem import example_problem
    sol = solve_on(example_problem(), 8, 4)
    vals = np.array([float(line.split(",")[2]) for line in out.read_text().splitlines()[1:]])
    assert np.array_equal(vals.reshape(5, 9).T, sol.values)


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "shishkin_robin", "validate", "--builtin-example"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "positivity_ok: True" in proc.stdout


@pytest.mark.skipif(shutil.which("shishkin-robin") is None, reason="console script not installed")
def test_console_script():
    proc = subprocess.run(["shishkin-robin", "solve", "--builtin-example", "--N", "30", "--M", "2"],
                          capture_output=True, text=True)
    assert proc.returncode == 1
