import json

import pytest

from liouville_bubbles.cli import EXIT_ACCEPTANCE, EXIT_NUMERICAL, EXIT_OK, EXIT_VALIDATION, main
from liouville_bubbles.config import DEFAULTS, RunConfig
from liouville_bubbles.errors import ConfigurationError


def test_defaults_materialised():
    cfg = RunConfig.from_dict({})
    assert cfg.to_dict() == {**DEFAULTS, "q": [0.0, 0.0], "domain": {**DEFAULTS["domain"], "center": [0.0, 0.0]}}


@pytest.mark.parametrize("raw, field", [
    ({"alpha": 2}, "alpha"),
    ({"alpha": -1.2}, "alpha"),
    ({"m": -1}, "m"),
    ({"t_grid": [5, 4]}, "t_grid"),
    ({"foo": 1}, "foo"),
    ({"version": 9}, "version"),
    ({"domain": {"kind": "triangle"}}, "domain.kind"),
    ({"m": 1, "xi": [[0.1, 0.2], [0.3, 0.1]]}, "xi"),
    ({"coefficient": {"family": "cubic"}}, "coefficient.family"),
    ({"inner": {"method": "magic"}}, "inner.method"),
])
def test_field_level_messages(raw, field):
    with pytest.raises(ConfigurationError, match=f"^{field}"):
        RunConfig.from_dict(raw)


def test_alpha_integer_message_mentions_naturals():
    with pytest.raises(ConfigurationError, match="positive integer"):
        RunConfig.from_dict({"alpha": 2})


def test_problem_roundtrip(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"n": 48, "coefficient": {"family": "exp_x1", "c": 0.5}, "alpha": 0.5}))
    p = RunConfig.load(path).problem()
    assert p.grid.domain.kind == "disc" and p.alpha == 0.5


def write(tmp_path, data):
    path = tmp_path / "run.json"
    path.write_text(json.dumps(data))
    return str(path)


def test_cli_eigen_disc(tmp_path):
    out = tmp_path / "o"
    assert main(["eigen", "--config", write(tmp_path, {"n": 128}), "--out", str(out)]) == EXIT_OK
    res = json.loads((out / "eigen.json").read_text())
    assert res["lambda1"] == pytest.approx(5.78319, rel=5e-3)
    assert res["config"]["n"] == 128
    header = (out / "phi1.csv").read_text().splitlines()[0]
    assert header == "i,j,x,y,phi1"


def test_cli_validation_exit(tmp_path, capsys):
    code = main(["eigen", "--config", write(tmp_path, {"alpha": 2}), "--out", str(tmp_path / "o")])
    assert code == EXIT_VALIDATION
    assert "alpha" in capsys.readouterr().err


def test_cli_resolution_guard_and_force(tmp_path):
    cfg = write(tmp_path, {"n": 64, "alpha": 0.5, "t": 9.0})
    assert main(["ansatz", "--config", cfg, "--out", str(tmp_path / "a")]) == EXIT_VALIDATION
    assert main(["ansatz", "--config", cfg, "--out", str(tmp_path / "b"), "--force"]) == EXIT_OK


def test_cli_numerical_exit(tmp_path):
    # the inner fixed point cannot converge in a single iteration
    cfg = write(tmp_path, {"n": 64, "alpha": 0.5, "t": 4.0, "inner": {"method": "fixed_point", "maxiter": 1}})
    assert main(["reduce", "--config", cfg, "--out", str(tmp_path / "r"), "--force"]) == EXIT_NUMERICAL
    assert (tmp_path / "r" / "reduce_failure.json").exists()


def test_cli_solve_m0(tmp_path):
    cfg = write(tmp_path, {"n": 96, "alpha": 0.5, "t_grid": [4.0, 4.5], "inner": {"method": "newton"}})
    out = tmp_path / "s"
    assert main(["solve", "--config", cfg, "--out", str(out)]) == EXIT_OK
    res = json.loads((out / "solve.json").read_text())
    assert [r["converged"] for r in res["sweep"]] == [True, True]
    assert (out / "u_1.csv").exists() and (out / "v_1.csv").exists()


def test_verify_trivial_exit_zero_and_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["verify", "--suite", "trivial", "--out", str(a)]) == EXIT_OK
    assert main(["verify", "--suite", "trivial", "--out", str(b)]) == EXIT_OK
    assert (a / "verify.json").read_bytes() == (b / "verify.json").read_bytes()
    assert (a / "timing.json").exists()


def test_verify_unknown_suite(tmp_path):
    assert main(["verify", "--suite", "nope", "--out", str(tmp_path)]) == EXIT_VALIDATION


def test_verify_failure_exit(tmp_path, monkeypatch):
    from liouville_bubbles import verification
    monkeypatch.setitem(verification.CHECKS, "trivial_formulas",
                        lambda: verification.CheckResult("trivial_formulas", False, "forced"))
    assert main(["verify", "--suite", "trivial", "--out", str(tmp_path)]) == EXIT_ACCEPTANCE
