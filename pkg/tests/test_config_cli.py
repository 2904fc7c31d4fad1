import json
import os

import pytest

from kerflow import cli
from kerflow.config import parse_config, validate_config
from kerflow.errors import ConfigError
from kerflow.runner import run_experiment

CONFIG_DIR = os.path.join(os.path.dirname(__file__), "..", "configs")


def _write(tmp_path, data):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(data))
    return str(path)


def test_parse_minimal_flow_laws(tmp_path):
    cfg = parse_config(_write(tmp_path, {
        "kind": "flow_laws", "seed": 1,
        "fields": [{"name": "rotation2d", "params": {}}],
    }))
    assert cfg.kind == "flow_laws"
    # defaults filled
    assert cfg.tol("flow_law") == 1e-8


def test_unknown_key_reports_path(tmp_path):
    with pytest.raises(ConfigError) as err:
        parse_config(_write(tmp_path, {"kind": "flow_laws", "seed": 1,
                                       "kernell": {}}))
    assert err.value.json_path == "$.kernell"


def test_unknown_tolerance_rejected(tmp_path):
    with pytest.raises(ConfigError) as err:
        parse_config(_write(tmp_path, {"kind": "flow_laws", "seed": 1,
                                       "fields": [],
                                       "tolerances": {"nope": 1.0}}))
    assert err.value.json_path == "$.tolerances.nope"


def test_non_increasing_ladder_rejected(tmp_path):
    with pytest.raises(ConfigError) as err:
        parse_config(_write(tmp_path, {
            "kind": "froelich", "seed": 1,
            "kernel": {"name": "laplace_gaussian", "params": {}},
            "field": {"name": "constant", "params": {"vector": [1.0]}},
            "samples": {"type": "chebyshev", "n": 5, "refinement": [21, 11]},
        }))
    assert err.value.json_path == "$.samples.refinement"


def test_unknown_kind_rejected():
    with pytest.raises(ConfigError):
        validate_config({"kind": "nope", "seed": 0})


def test_seed_env_override(tmp_path, monkeypatch):
    path = _write(tmp_path, {"kind": "flow_laws", "seed": 1, "fields": []})
    monkeypatch.setenv("KERFLOW_SEED", "42")
    assert parse_config(path).seed == 42
    monkeypatch.delenv("KERFLOW_SEED")
    assert parse_config(path).seed == 1


def test_cli_validate_and_exit_codes(tmp_path):
    good = os.path.join(CONFIG_DIR, "compatibility.json")
    assert cli.main(["validate", good]) == 0
    bad = _write(tmp_path, {"kind": "flow_laws", "seed": 1, "oops": 3})
    assert cli.main(["validate", bad]) == cli.EXIT_CONFIG_ERROR


def test_cli_list_builtins(capsys):
    assert cli.main(["list-builtins"]) == 0
    out = capsys.readouterr().out
    assert "fock" in out
    assert "exp(<x, y>)" in out
    assert "euclidean_motion" in out
    assert out.strip()


def test_cli_run_reports_failure_exit(tmp_path, capsys):
    # a tolerance so tight it must fail: exit code 1 and the check named
    cfg = _write(tmp_path, {
        "kind": "compatibility", "seed": 5,
        "kernel": {"name": "gaussian_rbf", "params": {}},
        "action": {"name": "translation", "params": {"dimension": 1}},
        "samples": {"type": "chebyshev", "n": 8},
    })
    code = cli.main(["run", cfg, "--stable-output"])
    out = capsys.readouterr().out
    assert code == cli.EXIT_CHECK_FAILURE
    report = json.loads(out)
    assert report["passed"] is False
    failing = [c["name"] for c in report["checks"] if c["passed"] is False]
    assert "compatibility_max_defect" in failing


def test_cli_unknown_builtin_name(tmp_path):
    cfg = _write(tmp_path, {
        "kind": "froelich", "seed": 1,
        "kernel": {"name": "not_a_kernel", "params": {}},
        "field": {"name": "constant", "params": {"vector": [1.0]}},
        "samples": {"type": "explicit", "points": [[0.0]]},
    })
    assert cli.main(["run", cfg]) == cli.EXIT_CONFIG_ERROR


def test_cli_numeric_error_exit(tmp_path, capsys):
    # the flow of x^2 exits its chart before reaching the requested time
    cfg = _write(tmp_path, {
        "kind": "froelich", "seed": 1,
        "kernel": {"name": "laplace", "params": {"atoms": [[2.0]],
                                                 "weights": [1.0]}},
        "field": {"name": "quadratic1d", "params": {}},
        "samples": {"type": "explicit", "points": [[0.9]]},
        "start_point": [0.9],
        "time": 1.0,
    })
    code = cli.main(["run", cfg])
    capsys.readouterr()
    assert code == cli.EXIT_NUMERIC_ERROR


def test_declared_algebra_consistency(tmp_path):
    import numpy as np
    from kerflow.algebra import abelian
    alg = abelian(1)
    base = {
        "kind": "cdual_rep", "seed": 1,
        "kernel": {"name": "laplace", "params": {"atoms": [[-1.0], [1.0]],
                                                 "weights": [0.5, 0.5]}},
        "action": {"name": "translation", "params": {"dimension": 1}},
        "samples": {"type": "chebyshev", "n": 9},
        "algebra": {"structure_constants": alg.structure.tolist(),
                    "involution": np.diag(alg.involution).tolist(),
                    "labels": list(alg.labels)},
    }
    cfg = parse_config(_write(tmp_path, base))
    assert run_experiment(cfg).passed
    base["algebra"] = {"name": "abelian", "params": {"d": 2}}
    cfg = parse_config(_write(tmp_path, base))
    with pytest.raises(ConfigError):
        run_experiment(cfg)


def test_checks_appear_exactly_once():
    for name in sorted(os.listdir(CONFIG_DIR)):
        cfg = parse_config(os.path.join(CONFIG_DIR, name))
        report = run_experiment(cfg)
        names = [c.name for c in report.checks]
        assert len(names) == len(set(names)), name


def test_every_shipped_config_passes():
    for name in sorted(os.listdir(CONFIG_DIR)):
        cfg = parse_config(os.path.join(CONFIG_DIR, name))
        report = run_experiment(cfg)
        assert report.passed, f"{name}: {[c.name for c in report.checks if c.passed is False]}"


def test_stable_output_is_byte_identical(tmp_path):
    path = os.path.join(CONFIG_DIR, "os_reconstruct_ou.json")
    cfg = parse_config(path)
    a = run_experiment(cfg).to_json(stable_output=True)
    b = run_experiment(cfg).to_json(stable_output=True)
    assert a == b
    with_timings = run_experiment(cfg).to_json(stable_output=False)
    assert "timings" in with_timings


def test_csv_side_files(tmp_path):
    path = os.path.join(CONFIG_DIR, "os_reconstruct_mixture.json")
    cfg = parse_config(path)
    run_experiment(cfg, csv_dir=str(tmp_path), csv_stem="mix")
    out = tmp_path / "mix__semigroup_eigenvalues.csv"
    assert out.exists()
    header = out.read_text().splitlines()[0]
    assert header == "t,eigenvalue_index,value"


def test_gram_spectrum_export(tmp_path):
    import numpy as np
    from kerflow import kernels as kk
    from kerflow.runner import export_gram_spectrum_csv
    model = kk.gram(kk.builtin_kernel("fock"), np.array([[0.0], [0.5]]))
    out = tmp_path / "spectrum.csv"
    export_gram_spectrum_csv(model, str(out))
    lines = out.read_text().splitlines()
    assert lines[0] == "index,eigenvalue"
    assert len(lines) == 3


def test_operator_defect_export(tmp_path):
    import numpy as np
    from kerflow import kernels as kk, operators as op, representation as rp
    from kerflow.runner import export_operator_defects_csv
    kernel = kk.builtin_kernel("laplace", {"atoms": [[-1.0], [1.0]],
                                           "weights": [0.5, 0.5]})
    action = op.builtin_action("translation", {"dimension": 1})
    pts = np.linspace(-1, 1, 9)[:, None]
    table = rp.synthesize_cdual_rep(kernel, action,
                                    kk.gram(kernel, pts, rank_cutoff=1e-10))
    out = tmp_path / "defects.csv"
    export_operator_defects_csv(table, str(out))
    lines = out.read_text().splitlines()
    assert lines[0] == "label,epsilon,defect,min_eigenvalue,max_eigenvalue"
    assert len(lines) == 2
