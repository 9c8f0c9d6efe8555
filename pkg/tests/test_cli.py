import csv
import json
import math
from fractions import Fraction

import pytest

from src.core.app import CommandService, check_parameter_ranges, main, parse_theta
from src.core.config import validationDefaults
from src.core.errors import ConfigError
from src.core.validation import MeasureCache, ValidationSuite
from src.potentials.potential import Potential


def read_csv(path):
    with open(path) as f:
        lines = f.read().splitlines()
    assert lines[0].startswith("# config: ")
    return json.loads(lines[0][len("# config: "):]), list(csv.DictReader(lines[1:]))


# ---- option parsing ---------------------------------------------------------

@pytest.mark.parametrize("text, expected", [
    ("2", Fraction(2)),
    ("3/2", Fraction(3, 2)),
    ("2.5", 2.5),
    (1, Fraction(1)),
])
def test_parse_theta(text, expected):
    value = parse_theta(text)
    assert value == expected
    assert type(value) is type(expected)


@pytest.mark.parametrize("text", ["0.5", "abc", "1/0", "", "-2"])
def test_parse_theta_rejects(text):
    with pytest.raises(ConfigError):
        parse_theta(text)


def test_parameter_ranges_coerce_types():
    checked = check_parameter_ranges({"jmax": "4", "tol": "1e-9", "c0": 2})
    assert checked == {"jmax": 4, "tol": 1e-9, "c0": 2.0}


@pytest.mark.parametrize("params", [{"jmax": 0}, {"precision": 16}, {"tol": 2.0}, {"n": True}])
def test_parameter_ranges_reject(params):
    with pytest.raises(ConfigError):
        check_parameter_ranges(params)


def test_configure_layers_defaults_file_and_flags(tmp_path):
    recipe = tmp_path / "recipe.json"
    recipe.write_text(json.dumps({"command": "kernel", "n": 3, "grid": 4, "xmax": 2.0}))
    service = CommandService()
    config = service.configure("kernel", {"config": str(recipe), "grid": 6})
    assert config["n"] == 3
    assert config["grid"] == 6
    assert config["xmax"] == 2.0
    assert config["precision"] == 256
    assert config.theta == Fraction(2)
    assert "config" not in config.echo()


# ---- exit codes -------------------------------------------------------------

def test_bad_theta_exits_64(tmp_path):
    assert main(["curve", "--theta", "0.5", "--out", str(tmp_path / "c.csv")]) == 64


def test_unknown_flag_exits_64():
    assert main(["curve", "--bogus", "1"]) == 64


def test_missing_command_exits_64():
    assert main([]) == 64


def test_irrational_theta_for_recurrence_exits_64():
    assert main(["recurrence", "--theta", "2.5", "--weight", "laguerre"]) == 64


def test_malformed_config_exits_64(tmp_path):
    recipe = tmp_path / "broken.json"
    recipe.write_text("{not json")
    assert main(["eq", "--config", str(recipe)]) == 64


def test_config_for_other_command_exits_64(tmp_path):
    recipe = tmp_path / "curve.json"
    recipe.write_text(json.dumps({"command": "curve", "kind": "hard"}))
    assert main(["eq", "--config", str(recipe)]) == 64


def test_unknown_config_key_exits_64(tmp_path):
    recipe = tmp_path / "extra.json"
    recipe.write_text(json.dumps({"sweeps": 10}))
    assert main(["curve", "--config", str(recipe)]) == 64


def test_eq_without_potential_exits_64(tmp_path):
    assert main(["eq", "--out", str(tmp_path / "eq.csv")]) == 64


def test_failed_tolerance_exits_1(tmp_path):
    out = tmp_path / "cd.csv"
    code = main(["cd-check", "--theta", "2/1", "--weight", "laguerre", "--n", "3", "--points", "5",
                 "--precision", "128", "--tol", "1e-300", "--out", str(out)])
    assert code == 1
    assert out.exists()


# ---- commands ---------------------------------------------------------------

def test_curve_for_theta_one_is_unit_circle(tmp_path):
    out = tmp_path / "curve.csv"
    assert main(["curve", "--theta", "1", "--nodes", "128", "--out", str(out)]) == 0
    echo, rows = read_csv(out)
    assert echo["command"] == "curve" and echo["theta"] == "1"
    assert len(rows) == 128
    for row in rows:
        assert math.hypot(float(row["re_s"]), float(row["im_s"])) == pytest.approx(1.0, abs=1e-10)


def test_soft_curve_needs_both_parameters():
    assert main(["curve", "--kind", "soft", "--c0", "1.5"]) == 64


def test_eq_laguerre_support(tmp_path):
    out = tmp_path / "eq.csv"
    assert main(["eq", "--potential", "linear:1", "--theta", "2", "--grid", "20", "--el-points", "0",
                 "--out", str(out)]) == 0
    _, rows = read_csv(out)
    assert len(rows) == 20
    assert rows[0]["regime"] == "hard"
    assert float(rows[0]["b"]) == pytest.approx(3.0 * math.sqrt(3.0), abs=1e-8)
    assert float(rows[0]["c_or_c0"]) == pytest.approx(2.0, abs=1e-8)
    assert all(float(r["psi"]) > 0.0 for r in rows)


def test_cd_check_passes(tmp_path):
    out = tmp_path / "cd.csv"
    assert main(["cd-check", "--theta", "2/1", "--weight", "laguerre", "--n", "5", "--points", "20",
                 "--out", str(out)]) == 0
    _, rows = read_csv(out)
    assert rows and all(float(r["residual"]) <= 1e-16 for r in rows)


def test_recurrence_rows(tmp_path):
    out = tmp_path / "rec.csv"
    assert main(["recurrence", "--theta", "3/2", "--weight", "laguerre", "--k-max", "2",
                 "--out", str(out)]) == 0
    _, rows = read_csv(out)
    assert len(rows) == 3 * 6
    assert {r["k"] for r in rows} == {"0", "1", "2"}


def test_polys_with_bimoment_table(tmp_path):
    out, table = tmp_path / "polys.csv", tmp_path / "table.csv"
    assert main(["polys", "--weight", "laguerre", "--jmax", "3", "--out", str(out),
                 "--table", str(table)]) == 0
    _, rows = read_csv(out)
    assert len(rows) == 1 + 2 + 3 + 4
    first = rows[1]
    assert (first["j"], first["power"]) == ("1", "0")
    assert float(first["p_coeff"]) == pytest.approx(-0.5)
    _, table_rows = read_csv(table)
    assert len(table_rows) == 16


def test_kernel_grid(tmp_path):
    out = tmp_path / "kernel.csv"
    assert main(["kernel", "--weight", "laguerre", "--n", "1", "--grid", "3", "--xmax", "3",
                 "--out", str(out)]) == 0
    _, rows = read_csv(out)
    assert len(rows) == 9
    for row in rows:
        expected = math.exp(-0.5 * (float(row["x"]) + float(row["y"])))
        assert float(row["K"]) == pytest.approx(expected, rel=1e-12)


def test_outputs_are_reproducible(tmp_path):
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["sample", "--n", "3", "--potential", "linear:1", "--sweeps", "300", "--burn-in", "100",
            "--thinning", "5", "--seed", "9"]
    assert main(args + ["--out", str(first)]) == 0
    assert main(args + ["--out", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()


def test_sample_report(tmp_path):
    out, report = tmp_path / "s.csv", tmp_path / "s.json"
    assert main(["sample", "--n", "2", "--potential", "linear:1", "--sweeps", "400", "--burn-in", "100",
                 "--out", str(out), "--report", str(report)]) == 0
    document = json.loads(report.read_text())
    assert document["checks"][0]["check_name"] == "acceptance_rate"
    _, rows = read_csv(out)
    assert list(rows[0]) == ["sweep", "lambda_1", "lambda_2"]


def test_config_recipe_with_flag_override(tmp_path):
    recipe = tmp_path / "curve.json"
    out = tmp_path / "curve.csv"
    recipe.write_text(json.dumps({"command": "curve", "theta": "1", "nodes": 64, "out": "ignored.csv"}))
    assert main(["curve", "--config", str(recipe), "--out", str(out)]) == 0
    echo, rows = read_csv(out)
    assert len(rows) == 64
    assert echo["out"] == str(out)


# ---- validate ---------------------------------------------------------------

def test_validate_subset_writes_report(tmp_path):
    report = tmp_path / "report.json"
    assert main(["validate", "--checks", "unit_circle,laguerre_c", "--report", str(report)]) == 0
    document = json.loads(report.read_text())
    names = [entry["check_name"] for entry in document["checks"]]
    assert names == ["unit_circle", "laguerre_c"]
    for entry in document["checks"]:
        assert set(entry) == {"check_name", "status", "value", "tolerance"}
        assert entry["status"] == "pass"


def test_validate_unknown_check_exits_64(tmp_path):
    assert main(["validate", "--checks", "nonsense", "--report", str(tmp_path / "r.json")]) == 64


def test_measure_cache_reuses_measures():
    service = CommandService()
    config = service.configure("eq", {"potential": "linear:1", "grid": 5, "el_points": 0, "out": None})
    service.run(config)
    result = service.run(config)
    stats = result.metadata["measure_cache"]
    assert stats["cache_size"] == 1
    assert stats["cache_hits"] == 1
    assert result.metadata["elapsed"] >= 0.0


def test_measure_cache_keys_tell_custom_potentials_apart():
    first = Potential.custom(lambda x: x, lambda x: 1.0, lambda x: 0.0)
    second = Potential.custom(lambda x: 2 * x, lambda x: 2.0, lambda x: 0.0)
    assert MeasureCache._key(first, 2.0) != MeasureCache._key(second, 2.0)
    assert MeasureCache._key(first, 2.0) == MeasureCache._key(first, 2.0)
    assert MeasureCache._key(Potential.linear(1.0), 2.0) == MeasureCache._key(Potential.linear(1.0), 2.0)


def test_validate_identity_oracles(tmp_path):
    report = tmp_path / "report.json"
    assert main(["validate", "--checks", "oracles,partition_function", "--report", str(report)]) == 0
    document = json.loads(report.read_text())
    assert [e["check_name"] for e in document["checks"]] == ["oracles", "partition_function"]
    assert all(e["status"] == "pass" for e in document["checks"])


@pytest.mark.slow
def test_validate_equilibrium_invariants(tmp_path):
    report = tmp_path / "report.json"
    checks = "edge_exponents,two_path_density,resolvent,critical_rho"
    assert main(["validate", "--checks", checks, "--report", str(report)]) == 0
    statuses = {e["check_name"]: e["status"] for e in json.loads(report.read_text())["checks"]}
    assert statuses == dict.fromkeys(checks.split(","), "pass")


def test_default_checks_are_registered():
    suite = ValidationSuite()
    defaults = validationDefaults()["checks"]
    assert suite.resolve(defaults) == defaults
    assert {"edge_exponents", "critical_rho", "two_path_density", "resolvent"} <= set(defaults)
    assert set(validationDefaults()["optional_checks"]) <= set(suite.available)
