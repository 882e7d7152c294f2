import json

import pytest
import yaml

from pinlab import cli
from pinlab.config import from_dict
from pinlab.errors import ConfigError
from pinlab.outputs import SCHEMA_LINE, data_section

BASE = {
    "law": {"alpha": 2.5, "n_max": 256},
    "potential": {"kind": "overtwist", "chi": 1.0},
    "grids": {"h_grid": [-1.0, 0.0, 0.5], "sizes": [64, 128], "h_from_density": []},
    "sampling": {"draws": 40},
}


def write_cfg(tmp_path, data, name="c.yaml"):
    p = tmp_path / name
    p.write_text(yaml.safe_dump(data))
    return str(p)


def run(tmp_path, command, data=BASE, out="o", *extra):
    return cli.main([command, "--config", write_cfg(tmp_path, data), "--out", str(tmp_path / out), *extra])


def merged(**blocks):
    d = {k: dict(v) if isinstance(v, dict) else v for k, v in BASE.items()}
    for k, v in blocks.items():
        d[k] = {**d.get(k, {}), **v} if isinstance(v, dict) else v
    return d


def test_no_command_is_usage_error(capsys):
    with pytest.raises(SystemExit) as ei:
        cli.main([])
    assert ei.value.code == 1


def test_unknown_flag_is_usage_error():
    with pytest.raises(SystemExit) as ei:
        cli.main(["sample", "--bogus"])
    assert ei.value.code == 1


@pytest.mark.parametrize("data,path", [
    (merged(law={"alpha": -1.0}), "law.alpha"),
    (merged(potential={"kind": "spaghetti"}), "potential.kind"),
    (merged(grids={"sizes": [128, 64]}), "grids.sizes"),
    (merged(grids={"sizes": [64, 512]}), "grids.sizes"),
    (merged(disorder={"dist": "cauchy"}), "disorder.dist"),
    ({**BASE, "unexpected": 1}, "unexpected"),
])
def test_config_errors_name_the_key(tmp_path, capsys, data, path):
    assert run(tmp_path, "phase-diagram", data) == 1
    assert path in capsys.readouterr().err


def test_config_error_object():
    with pytest.raises(ConfigError) as ei:
        from_dict({"caps": {"max_memory": "lots"}})
    assert ei.value.path.startswith("caps.max_memory")


def test_missing_config_file(tmp_path):
    assert cli.main(["sample", "--config", str(tmp_path / "none.yaml")]) == 1


def test_bad_seed_and_threads(tmp_path):
    assert run(tmp_path, "sample", BASE, "o", "--seed", "-3") == 1
    assert run(tmp_path, "sample", BASE, "o", "--threads", "0") == 1


def test_size_over_cap_is_config_error(tmp_path, capsys):
    data = merged(law={"n_max": 1024}, grids={"sizes": [256, 1024]}, caps={"max_N": 512})
    assert run(tmp_path, "sample", data) == 1
    assert "max_N" in capsys.readouterr().err


def test_command_preconditions(tmp_path):
    assert run(tmp_path, "bigjump-scan", merged(disorder={"beta": 1.0})) == 1
    assert run(tmp_path, "disorder-scan", BASE) == 1
    assert run(tmp_path, "convexity-check", BASE) == 1


@pytest.mark.parametrize("command", ["phase-diagram", "bigjump-scan", "sample"])
def test_determinism_byte_identical(tmp_path, command):
    assert run(tmp_path, command, BASE, "a", "--seed", "5") == 0
    assert run(tmp_path, command, BASE, "b", "--seed", "5") == 0
    files = sorted(p.name for p in (tmp_path / "a").iterdir() if p.is_file())
    assert files == sorted(p.name for p in (tmp_path / "b").iterdir() if p.is_file())
    for name in files:
        text = (tmp_path / "a" / name).read_text()
        if name.endswith(".csv"):
            assert text.startswith(SCHEMA_LINE + "\n")
        assert data_section(tmp_path / "a" / name) == data_section(tmp_path / "b" / name)


def test_seed_changes_samples(tmp_path):
    run(tmp_path, "sample", BASE, "a", "--seed", "5")
    run(tmp_path, "sample", BASE, "b", "--seed", "6")
    assert data_section(tmp_path / "a" / "samples_h0.csv") != data_section(tmp_path / "b" / "samples_h0.csv")


def test_threads_do_not_change_disordered_output(tmp_path):
    data = merged(disorder={"beta": 1.0, "replicas": 3, "seed": 4}, grids={"h_grid": [0.2, 0.6]})
    assert run(tmp_path, "sample", data, "a", "--threads", "1") == 0
    assert run(tmp_path, "sample", data, "b", "--threads", "3") == 0
    for name in ("samples_h0.csv", "samples_h1.csv"):
        assert data_section(tmp_path / "a" / name) == data_section(tmp_path / "b" / name)


def test_json_format(tmp_path):
    assert run(tmp_path, "phase-diagram", BASE, "o", "--format", "json") == 0
    doc = json.loads((tmp_path / "o" / "phase_diagram.json").read_text())
    assert doc["schema"] == "pinlab-schema v1"
    assert doc["columns"][:4] == ["h", "f_H", "f_H_reg", "rho_h"]
    assert len(doc["rows"]) == 3


def test_contact_dump(tmp_path):
    data = merged(grids={"sizes": [16], "h_grid": [0.0]}, sampling={"dump_contacts": True})
    assert run(tmp_path, "sample", data) == 0
    lines = (tmp_path / "o" / "contacts_h0.jsonl").read_text().splitlines()
    assert len(lines) == 40
    for ln in lines:
        c = json.loads(ln)["contacts"]
        assert c == sorted(c) and c[-1] == 16


ORACLE = {"oracle": {"sizes": [6, 10], "alphas": [1.5], "h_values": [0.0, 0.8], "betas": [0.0, 1.0]},
          "law": {"alpha": 1.5, "n_max": 64}, "grids": {"sizes": [64]}}


def test_oracle_check_passes(tmp_path, capsys):
    assert run(tmp_path, "oracle-check", ORACLE) == 0
    assert "PASS" in capsys.readouterr().out


def test_oracle_check_detects_corrupted_law(tmp_path, capsys):
    bad = {**ORACLE, "oracle": {**ORACLE["oracle"], "corrupt_k": 1.001}}
    assert run(tmp_path, "oracle-check", bad) == 2
    assert "FAIL" in capsys.readouterr().out


def test_convexity_check_zero_potential(tmp_path):
    data = {"law": {"alpha": 1.5, "n_max": 512}, "potential": {"kind": "zero"},
            "grids": {"h_grid": [0.3, 0.6, 0.9], "sizes": [128, 256, 512], "h_from_density": []}}
    assert run(tmp_path, "convexity-check", data) == 0
    assert (tmp_path / "o" / "convexity.csv").exists()
