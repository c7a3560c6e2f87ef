import csv
import json
import xml.etree.ElementTree as ET
from fractions import Fraction

import pytest

from skewrot.cli import main
from skewrot.errors import ConfigError
from skewrot.experiments import (
    REGISTRY,
    ExperimentConfig,
    list_experiments,
    parse_value,
    resolve_prefix,
    run,
)

# small overrides so the smoke run of every experiment stays quick
QUICK = {
    "fig4-kam": {"n_steps": 2000},
    "fig3-oval": {"n_steps": 2000},
    "thm4-escape": {"parameters": {"R_escape": "50"}},
    "squares-classify": {"parameters": {"m_max": 2, "l_max": 2}},
    "squares-crossval": {"parameters": {"n_cases": 5, "n_entries": 10}},
    "squares-escape": {"n_steps": 5000},
    "fig5-walk": {"n_steps": 5000, "seed": 1},
    "lemma2-intersection": {"parameters": {"n_products": 4}},
}

REQUIRED = {"fig3-oval", "fig4-kam", "fig2-hyperbolic", "thm4-escape", "thm2-orders",
            "lemma2-intersection", "concordance-check", "squares-classify", "squares-crossval", "fig5-walk"}


def quick_config(name, prefix):
    extra = QUICK.get(name, {})
    return ExperimentConfig(name, dict(extra.get("parameters", {})), extra.get("n_steps"),
                            extra.get("seed", 0), str(prefix))


def test_registry_contents():
    names = [n for n, _, _ in list_experiments()]
    assert len(names) >= 10
    assert REQUIRED <= set(names)


def test_parse_value():
    assert parse_value("1/3") == Fraction(1, 3)
    assert parse_value("2.5") == Fraction(5, 2)
    assert parse_value("(0,2.419)") == (Fraction(0), Fraction(2419, 1000))
    assert parse_value("(0,1);(0,3)") == [(0, 1), (0, 3)]
    assert parse_value("left") == "left"
    assert parse_value([1, "1/2"]) == [1, Fraction(1, 2)]
    with pytest.raises(ConfigError):
        parse_value("(1,2,3)")


@pytest.mark.parametrize("name", sorted(REGISTRY))
def test_every_experiment_runs(name, tmp_path):
    bundle = run(quick_config(name, tmp_path / name))
    assert bundle.csv_paths and bundle.svg_paths
    for p in bundle.csv_paths:
        with open(p) as fh:
            rows = list(csv.reader(fh))
        assert len(rows) >= 2
        assert all(len(r) == len(rows[0]) for r in rows)
    for p in bundle.svg_paths:
        root = ET.parse(p).getroot()
        assert root.tag.endswith("svg")
        assert any(el.tag.endswith("path") and el.get("d") for el in root.iter())
    assert bundle.summary["experiment"] == name


@pytest.mark.parametrize("name", ["fig3-oval", "lemma2-intersection", "squares-crossval", "fig5-walk"])
def test_byte_identical_reruns(name, tmp_path):
    a = run(quick_config(name, tmp_path / "a" / name))
    b = run(quick_config(name, tmp_path / "b" / name))
    for pa, pb in zip(a.csv_paths + a.svg_paths, b.csv_paths + b.svg_paths):
        assert open(pa, "rb").read() == open(pb, "rb").read()


def test_classify_csv_schema(tmp_path):
    bundle = run(quick_config("squares-classify", tmp_path / "c"))
    with open(bundle.csv_paths[0]) as fh:
        header = next(csv.reader(fh))
    assert header == ["a_num", "a_den", "h0_num", "h0_den", "alpha0", "kind", "period", "steps_checked"]
    assert bundle.summary["matching_classification"] == bundle.summary["cases"]


def test_orbit_csv_schema(tmp_path):
    bundle = run(quick_config("fig3-oval", tmp_path / "o"))
    with open(bundle.csv_paths[0]) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["step", "x", "y", "rho", "phi_unwrapped", "H_value", "substep_index"]
    assert rows[1][0] == "0" and rows[1][-1] == "0"
    # floats round-trip exactly
    assert float(rows[1][1]) == 3.0


def test_config_errors():
    with pytest.raises(ConfigError):
        run(ExperimentConfig("nope"))
    with pytest.raises(ConfigError):
        run(ExperimentConfig("fig4-kam", {"bogus": 1}))
    with pytest.raises(ConfigError):
        run(ExperimentConfig("fig4-kam", n_steps=0))
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"parameters": {}})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"experiment": "x", "extra": 1})


def test_output_dir_env(monkeypatch, tmp_path):
    monkeypatch.setenv("OUTPUT_DIR", str(tmp_path))
    assert resolve_prefix(ExperimentConfig("fig4-kam", output_prefix="runs/x")) == tmp_path / "runs" / "x"
    assert resolve_prefix(ExperimentConfig("fig4-kam", output_prefix="/abs/x")).as_posix() == "/abs/x"


def test_cli_list(capsys):
    assert main(["list"]) == 0
    out = capsys.readouterr().out
    assert "fig4-kam" in out and "squares-classify" in out


def test_cli_run_with_config(tmp_path, capsys):
    cfg = {"experiment": "squares-classify", "parameters": {"m_max": 1, "l_max": 2},
           "n_steps": 10000, "seed": 0, "output_prefix": str(tmp_path / "sq")}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    assert main(["run", "--config", str(path)]) == 0
    out = capsys.readouterr().out
    assert "experiment=squares-classify" in out
    assert (tmp_path / "sq_classify.csv").exists()


def test_cli_set_overrides(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("OUTPUT_DIR", str(tmp_path))
    code = main(["run", "--experiment", "fig3-oval", "--set", "panel=right", "--n-steps", "500"])
    assert code == 0
    assert "panel=right" in capsys.readouterr().out
    assert list(tmp_path.rglob("*.csv"))


def test_cli_exit_codes(tmp_path, capsys):
    assert main(["run", "--experiment", "no-such"]) == 2
    assert main(["run", "--experiment", "fig4-kam", "--set", "oops"]) == 2
    assert main(["run", "--config", str(tmp_path / "missing.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["run", "--config", str(bad)]) == 2
    # an orbit started on a center is a runtime failure
    code = main(["run", "--experiment", "fig4-kam", "--set", "z0=(-1,0)", "--n-steps", "10",
                 "--output-prefix", str(tmp_path / "r")])
    assert code == 1
    assert "DegenerateCenter" in capsys.readouterr().err
    with pytest.raises(SystemExit) as exc:
        main(["run"])
    assert exc.value.code == 2
