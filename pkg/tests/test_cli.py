import json

import numpy as np
import pytest

import hpz.cli as cli
from hpz import errors
from hpz.errors import DimensionMismatch, ParseError, SchemaError
from hpz.fixtures import PWNA_A1, PWNA_A2, PWNA_C0, PWNA_D, PWNA_M1, PWNA_M2, pwna_model
from hpz.modelio import model_from_dict, model_to_dict, models_equal, parse_model, write_model
from hpz.reach import ContainmentReport

BUNDLED = cli.bundled_model_path()


def doc():
    return json.load(open(BUNDLED))


def test_bundled_model_values():
    m = parse_model(BUNDLED)
    assert m.state_dim == 2 and m.horizon == 5 and len(m.modes) == 2
    f1, f2 = m.modes[0].dynamics, m.modes[1].dynamics
    assert np.array_equal(f1.Q[0], PWNA_M1) and np.array_equal(f2.Q[1], PWNA_M2)
    assert np.array_equal(f1.A, PWNA_A1) and np.array_equal(f2.A, PWNA_A2)
    assert np.array_equal(f1.d, PWNA_D) and np.array_equal(f2.d, PWNA_D)
    assert np.array_equal(m.initial_set.c, PWNA_C0)
    assert np.array_equal(m.initial_set.G_c, 0.2 * np.eye(2))
    ref = pwna_model()
    ref.sampling = m.sampling
    assert models_equal(m, ref)


def test_round_trip(tmp_path):
    m = parse_model(BUNDLED)
    write_model(m, tmp_path / "m.json")
    assert models_equal(parse_model(tmp_path / "m.json"), m)
    assert model_to_dict(model_from_dict(model_to_dict(m))) == model_to_dict(m)


def test_round_trip_with_constraints_and_binaries(tmp_path):
    from hpz.fixtures import hpz2

    m = pwna_model()
    m.initial_set = hpz2()
    write_model(m, tmp_path / "m.json")
    assert models_equal(parse_model(tmp_path / "m.json"), m)


def test_quadratic_block_shape_names_mode():
    d = doc()
    d["modes"][1]["quadratic"][0] = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]
    with pytest.raises(DimensionMismatch, match=r"\$\.modes\[1\]\.quadratic\[0\]"):
        model_from_dict(d)


def test_empty_modes():
    d = doc()
    d["modes"] = []
    with pytest.raises(SchemaError):
        model_from_dict(d)


def test_unknown_key():
    d = doc()
    d["modes"][0]["extra"] = 1
    with pytest.raises(SchemaError, match="extra"):
        model_from_dict(d)


def test_ragged_matrix():
    d = doc()
    d["modes"][0]["linear"] = [[1.0, 0.0], [1.0]]
    with pytest.raises(DimensionMismatch, match=r"\$\.modes\[0\]\.linear"):
        model_from_dict(d)


def test_parse_error_position(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{\n  "state_dim": 2,\n  "modes": [,]\n}\n')
    with pytest.raises(ParseError, match="line 3, column"):
        parse_model(p)


def test_run_writes_artifacts(tmp_path):
    out = tmp_path / "out"
    assert cli.main(["run", "--model", BUNDLED, "--out", str(out)]) == 0
    for k in range(6):
        lines = (out / f"step_{k}.csv").read_text().splitlines()
        assert lines[0] == "step,x1,x2,leaf" and lines[1].startswith(f"{k},")
    diag = json.loads((out / "diagnostics.json").read_text())
    assert len(diag["steps"]) == 6 and "total_time" in diag
    assert not list(out.glob("*.svg"))


def test_run_is_deterministic(tmp_path):
    args = ["run", "--model", BUNDLED, "--steps", "2", "--seed", "4", "--grid-res", "11", "--samples", "500"]
    cli.main(args + ["--out", str(tmp_path / "a")])
    cli.main(args + ["--out", str(tmp_path / "b")])
    for k in range(3):
        assert (tmp_path / "a" / f"step_{k}.csv").read_bytes() == (tmp_path / "b" / f"step_{k}.csv").read_bytes()
    assert not (tmp_path / "a" / "step_3.csv").exists()


def test_run_svg(tmp_path):
    out = tmp_path / "o"
    assert cli.main(["run", "--model", BUNDLED, "--out", str(out), "--steps", "1", "--emit", "svg"]) == 0
    svg = (out / "step_1.svg").read_text()
    assert svg.startswith("<svg") and "<line" in svg and "<path" in svg
    assert (out / "overlay.svg").exists() and not (out / "step_1.csv").exists()


def test_run_containment(tmp_path):
    out = tmp_path / "o"
    assert cli.main(["run", "--model", BUNDLED, "--out", str(out), "--check-containment", "1000"]) == 0
    rep = json.loads((out / "containment.json").read_text())
    assert rep["passed"] and rep["trajectories"] == 1000 and rep["misses"] == []


def test_containment_failure_exit_code(tmp_path, monkeypatch, capsys):
    monkeypatch.setattr(cli, "check_containment", lambda *a, **k: ContainmentReport(3, 5, [(0, 2)], 0.5))
    code = cli.main(["run", "--model", BUNDLED, "--out", str(tmp_path), "--check-containment", "3"])
    assert code == errors.ContainmentFailure.exit_code
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "ContainmentFailure" and err["exit_code"] == code


def test_model_error_json(tmp_path, capsys):
    d = doc()
    d["modes"] = []
    p = tmp_path / "m.json"
    p.write_text(json.dumps(d))
    assert cli.main(["run", "--model", str(p), "--out", str(tmp_path / "o")]) == SchemaError.exit_code
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "SchemaError" and "$.modes" in err["message"]


def test_output_error(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("")
    code = cli.main(["run", "--model", BUNDLED, "--out", str(blocker / "sub")])
    assert code == errors.OutputError.exit_code


def test_exit_codes_distinct():
    classes = [c for c in vars(errors).values() if isinstance(c, type) and issubclass(c, errors.HPZError)]
    codes = [c.exit_code for c in classes]
    assert len(set(codes)) == len(codes) and 0 not in codes and 2 not in codes


def test_demo_example1(tmp_path):
    out = tmp_path / "ex"
    assert cli.main(["demo", "--fixture", "example1", "--out", str(out)]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["cpz1"]["points"] == 420
    assert summary["hpz1"]["nonempty_leaves"] == 8 and summary["hz"]["nonempty_leaves"] == 8
    for name in ("cpz1", "hz", "hpz1", "hpz2"):
        assert (out / f"{name}.csv").exists() and (out / f"{name}.svg").exists()


def test_demo_pwna(tmp_path):
    out = tmp_path / "pw"
    assert cli.main(["demo", "--fixture", "pwna", "--out", str(out), "--steps", "2"]) == 0
    assert (out / "step_2.csv").exists() and (out / "step_2.svg").exists()


def test_ops_check(capsys):
    assert cli.main(["ops-check", "--trials", "2", "--ops", "linear_map,union"]) == 0
    table = capsys.readouterr().out
    assert "linear_map" in table and "union" in table and "PASS" in table


def test_usage_error():
    with pytest.raises(SystemExit) as err:
        cli.main(["run"])
    assert err.value.code == 2
