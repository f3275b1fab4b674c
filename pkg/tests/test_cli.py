import csv
import io
import json
import subprocess
import sys

import pytest

from plasmonq.cli import main

FAST_REFLECTANCE = ["reflectance", "--theta-min", "70", "--theta-max", "80",
                    "--theta-steps", "21"]


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def parse_csv(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_reflectance_schema_and_resonance_shift(capsys):
    code, out, _ = run_cli(capsys, "reflectance", "--theta-steps", "181")
    assert code == 0
    rows = parse_csv(out)
    assert list(rows[0]) == ["n_analyte", "theta_deg", "reflectance"]
    assert len(rows) == 2 * 181
    dips = {}
    for n_label in ("1.39", "1.395"):
        curve = [(float(r["theta_deg"]), float(r["reflectance"]))
                 for r in rows if r["n_analyte"] == n_label]
        theta_min, r_min = min(curve, key=lambda tr: tr[1])
        interior = [tr for tr in curve[1:-1]]
        assert (theta_min, r_min) in interior, "dip must be interior"
        dips[n_label] = theta_min
    assert dips["1.39"] < dips["1.395"]


def test_reflectance_respects_explicit_curves(capsys):
    code, out, _ = run_cli(capsys, *FAST_REFLECTANCE, "--n-analyte", "1.36",
                           "--n-analyte", "1.40")
    assert code == 0
    labels = {row["n_analyte"] for row in parse_csv(out)}
    assert labels == {"1.36", "1.4"}


def test_index_sweep_minimum_has_flat_sensitivity(capsys):
    code, out, _ = run_cli(capsys, "index-sweep")
    assert code == 0
    rows = parse_csv(out)
    assert list(rows[0]) == ["n_analyte", "reflectance", "sensitivity"]
    assert len(rows) == 1093
    reflectances = [float(r["reflectance"]) for r in rows]
    slopes = [abs(float(r["sensitivity"])) for r in rows]
    dip = reflectances.index(min(reflectances))
    assert min(reflectances) < 0.01
    assert 1.373 < float(rows[dip]["n_analyte"]) < 1.393
    assert slopes[dip] < 0.05 * max(slopes)


def test_index_sweep_single_point(capsys):
    code, out, _ = run_cli(capsys, "index-sweep", "--n-min", "1.39",
                           "--n-max", "1.39", "--n-steps", "1")
    assert code == 0
    assert len(parse_csv(out)) == 1


def test_inflection_rows_increase_with_angle(capsys):
    code, out, _ = run_cli(capsys, "inflection", "--theta-steps", "5")
    assert code == 0
    rows = parse_csv(out)
    assert list(rows[0]) == ["theta_deg", "n_inf"]
    assert len(rows) == 5
    values = [float(r["n_inf"]) for r in rows]
    assert values == sorted(values)


def test_ratio_schema(capsys):
    code, out, _ = run_cli(capsys, "ratio", "--n-steps", "7", "--state", "tmsv",
                           "--photons", "2")
    assert code == 0
    rows = parse_csv(out)
    assert list(rows[0]) == ["n_analyte", "R"]
    assert len(rows) == 7


def test_ratio_rejects_unbalanced_efficiencies(capsys):
    code, _, err = run_cli(capsys, "ratio", "--eta-a", "0.9", "--eta-b", "0.5")
    assert code == 2
    assert "balanced" in err


def test_precision_default_state_trio(capsys):
    code, out, _ = run_cli(capsys, "precision", "--theta-min", "71",
                           "--theta-max", "75", "--theta-steps", "3")
    assert code == 0
    rows = parse_csv(out)
    assert list(rows[0]) == ["theta_deg", "n_inf", "state", "N", "eta",
                             "delta_n", "slope", "noise"]
    assert len(rows) == 3 * 3
    assert {r["state"] for r in rows} == {"coherent", "twin-fock", "tmsv"}


def test_precision_single_state(capsys):
    code, out, _ = run_cli(capsys, "precision", "--theta-min", "73",
                           "--theta-max", "73", "--theta-steps", "1",
                           "--state", "twin-fock", "--photons", "2")
    assert code == 0
    rows = parse_csv(out)
    assert len(rows) == 1
    assert rows[0]["state"] == "twin-fock"
    assert float(rows[0]["N"]) == 2.0


def test_json_fields_match_csv_headers(capsys):
    csv_code, csv_out, _ = run_cli(capsys, "inflection", "--theta-steps", "3")
    json_code, json_out, _ = run_cli(capsys, "inflection", "--theta-steps", "3",
                                     "--format", "json")
    assert csv_code == json_code == 0
    header = csv_out.splitlines()[0].split(",")
    records = json.loads(json_out)
    assert len(records) == 3
    assert all(list(record) == header for record in records)


def test_outputs_are_byte_identical(tmp_path, capsys):
    for fmt in ("csv", "json"):
        paths = [tmp_path / f"run{i}.{fmt}" for i in (1, 2)]
        for path in paths:
            code = main(["ratio", "--n-steps", "9", "--format", fmt,
                         "--out", str(path)])
            assert code == 0
        assert paths[0].read_bytes() == paths[1].read_bytes()


def test_config_file_with_flag_override(tmp_path, capsys):
    config = tmp_path / "run.json"
    config.write_text(json.dumps({"theta": 73.0, "n_steps": 2, "n_min": 1.39,
                                  "n_max": 1.39}))
    _, out_73, _ = run_cli(capsys, "index-sweep", "--config", str(config))
    _, out_74, _ = run_cli(capsys, "index-sweep", "--config", str(config),
                           "--theta", "74")
    _, direct_74, _ = run_cli(capsys, "index-sweep", "--theta", "74",
                              "--n-min", "1.39", "--n-max", "1.39",
                              "--n-steps", "2")
    assert out_74 == direct_74
    assert out_74 != out_73


def test_unknown_config_key_is_rejected(tmp_path, capsys):
    config = tmp_path / "bad.json"
    config.write_text(json.dumps({"wavelenght": 810}))
    code, _, err = run_cli(capsys, "index-sweep", "--config", str(config))
    assert code == 2
    assert "wavelenght" in err


def test_malformed_config_is_rejected(tmp_path, capsys):
    config = tmp_path / "bad.json"
    config.write_text("{not json")
    code, _, err = run_cli(capsys, "index-sweep", "--config", str(config))
    assert code == 2


def test_empty_theta_grid_is_a_config_error(capsys):
    code, _, err = run_cli(capsys, "reflectance", "--theta-steps", "0")
    assert code == 2
    assert "at least one point" in err


def test_unphysical_analyte_is_an_input_error(capsys):
    code, _, err = run_cli(capsys, *FAST_REFLECTANCE, "--n-analyte", "1.6")
    assert code == 2
    assert "n_prism" in err


def test_dispersion_file_and_env_fallback(tmp_path, capsys, monkeypatch):
    table = "wavelength_nm,n,k\n700,0.16,4.0\n900,0.25,5.3\n"
    direct = tmp_path / "mygold.csv"
    direct.write_text(table)
    code, out_direct, _ = run_cli(capsys, *FAST_REFLECTANCE,
                                  "--dispersion", str(direct))
    assert code == 0

    monkeypatch.setenv("PLASMON_DISPERSION_DIR", str(tmp_path))
    code, out_env, _ = run_cli(capsys, *FAST_REFLECTANCE,
                               "--dispersion", "mygold.csv")
    assert code == 0
    assert out_env == out_direct


def test_missing_dispersion_is_a_config_error(capsys, monkeypatch):
    monkeypatch.delenv("PLASMON_DISPERSION_DIR", raising=False)
    code, _, err = run_cli(capsys, *FAST_REFLECTANCE, "--dispersion", "nope.csv")
    assert code == 2
    assert "not found" in err


def test_drude_lorentz_model_is_selectable(capsys):
    code, out, _ = run_cli(capsys, *FAST_REFLECTANCE, "--dispersion", "gold-dl")
    assert code == 0
    assert len(parse_csv(out)) == 2 * 21


def test_validate_passes_by_default(capsys):
    code, out, _ = run_cli(capsys, "validate")
    assert code == 0
    assert "all checks passed" in out
    assert out.count("ok  ") == 5


def test_validate_detects_injected_fault(capsys):
    code, out, _ = run_cli(capsys, "validate", "--inject-fault")
    assert code == 1
    assert "FAIL" in out


def test_module_invocation():
    result = subprocess.run(
        [sys.executable, "-m", "plasmonq", "inflection", "--theta-steps", "2"],
        capture_output=True, text=True, check=False,
    )
    assert result.returncode == 0
    assert result.stdout.startswith("theta_deg,n_inf")
