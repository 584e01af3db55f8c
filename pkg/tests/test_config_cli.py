import json
import math
import subprocess
import sys

import numpy as np
import pytest

from geophase.cli import EXIT_CONFIG, EXIT_CONSTRAINT, EXIT_OK, main
from geophase.config import ConfigError, ScenarioConfig, default_config_dict, load_config, parse_config
from geophase.fields import WignerField
from geophase.io import fmt
from geophase.phase_space import gaussian_wigner, make_vacuum

SMALL_SWEEP = {"resolution": [4, 3]}


def write_config(tmp_path, doc, name="scenario.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc, indent=2))
    return path


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_defaults_round_trip():
    doc = default_config_dict()
    assert doc["schema_version"] == 1
    assert parse_config(json.dumps(doc)) == ScenarioConfig()
    assert load_config(None) == ScenarioConfig()


def test_unknown_field_reports_line():
    text = '{\n  "schema_version": 1,\n  "thermal": {\n    "Q": 1e5,\n    "quality": 3\n  }\n}\n'
    with pytest.raises(ConfigError, match=r"line 5: unknown field 'thermal.quality'"):
        parse_config(text)


def test_type_error_reports_line():
    text = '{\n  "schema_version": 1,\n  "sweep": {\n    "settings": {\n      "tau_sigma": "eight"\n    }\n  }\n}'
    with pytest.raises(ConfigError, match=r"line 5: .*tau_sigma"):
        parse_config(text)


def test_schema_version_required_and_checked():
    with pytest.raises(ConfigError, match="schema_version"):
        parse_config("{}")
    with pytest.raises(ConfigError, match="line 1: unsupported schema_version 2"):
        parse_config('{"schema_version": 2}')
    with pytest.raises(ConfigError, match="line 2 column"):
        parse_config('{"schema_version": 1,\n oops}')


def test_booleans_are_not_numbers():
    with pytest.raises(ConfigError):
        parse_config('{"schema_version": 1, "squeeze": {"nbar": true}}')
    cfg = parse_config('{"schema_version": 1, "squeeze": {"nbar": 3}}')
    assert cfg.squeeze.nbar == 3.0 and isinstance(cfg.squeeze.nbar, float)


def test_missing_config_file(tmp_path, capsys):
    code, _, err = run(["squeeze", "--config", tmp_path / "absent.json"], capsys)
    assert code == EXIT_CONFIG
    assert "cannot read config" in err


def test_fmt_shortest_round_trip():
    for v in (0.1, 1 / 3, 1e-300, 2.5, 6.9e6):
        assert float(fmt(v)) == v
    assert fmt(0.1) == "0.1"
    assert fmt(3) == "3"
    assert fmt(True) == "true"


def test_squeeze_json(capsys):
    code, out, _ = run(["squeeze", "--format", "json"], capsys)
    assert code == EXIT_OK
    doc = json.loads(out)["squeeze"]
    assert doc["min_variance"] == pytest.approx(1.5 - math.sqrt(2), rel=1e-12)
    assert math.tan(doc["angle"]) == pytest.approx(math.sqrt(2) - 1, rel=1e-10)
    assert doc["cov"][0][1] == pytest.approx(-1.0)
    assert doc["coupling_max"] < 1e-12


@pytest.mark.parametrize(
    "section, expected",
    [({"chi2": 0.0}, 0.5), ({"chi2": 1.0, "nbar": 10.0}, 10.5 * (math.sqrt(2) - 1) ** 2)],
)
def test_squeeze_examples(tmp_path, capsys, section, expected):
    cfg = write_config(tmp_path, {"schema_version": 1, "squeeze": section})
    code, out, _ = run(["squeeze", "--config", cfg, "--format", "json"], capsys)
    assert code == EXIT_OK
    assert json.loads(out)["squeeze"]["min_variance"] == pytest.approx(expected, rel=1e-12)


def test_squeeze_explicit_loop_and_correction(tmp_path, capsys):
    loop = {"pulses": [{"chi": 1.0, "phi": 0.0}, {"chi": 1.0, "phi": 1.5707963267948966},
                       {"chi": 1.0, "phi": 3.141592653589793}, {"chi": 1.0, "phi": 4.71238898038469}], "eta": 0.9}
    cfg = write_config(tmp_path, {"schema_version": 1, "squeeze": {"chi2": None, "loop": loop}})
    code, _, err = run(["squeeze", "--config", cfg, "--strict"], capsys)
    assert code == EXIT_CONSTRAINT
    assert "loop_not_closed" in err
    cfg = write_config(tmp_path, {"schema_version": 1, "squeeze": {"chi2": None, "loop": loop, "correct_loss": True}})
    code, out, _ = run(["squeeze", "--config", cfg, "--strict", "--format", "json"], capsys)
    assert code == EXIT_OK
    doc = json.loads(out)["squeeze"]
    assert doc["chi_loss"] < 1e-10
    assert doc["added_noise_chi"] == pytest.approx(math.sqrt(1 - 0.81) * math.sqrt(sum(0.9 ** (-2 * j) for j in range(4)) / 4))


def test_squeeze_rejects_ambiguous_loop(tmp_path, capsys):
    cfg = write_config(tmp_path, {"schema_version": 1, "squeeze": {"loop": {"pulses": [{"chi": 1.0}]}}})
    code, _, err = run(["squeeze", "--config", cfg], capsys)
    assert code == EXIT_CONFIG and "not both" in err


def test_csv_output_with_meta(tmp_path, capsys):
    out = tmp_path / "nc.csv"
    code, _, _ = run(["nonclosure", "--out", out], capsys)
    assert code == EXIT_OK
    lines = out.read_text().splitlines()
    assert lines[0] == "chi_loss,variance"
    assert len(lines) == 302
    values = [float(r.split(",")[1]) for r in lines[1:]]
    assert values[0] == pytest.approx(0.085786, abs=1e-6)
    assert all(b >= a for a, b in zip(values, values[1:]))
    meta = json.loads((tmp_path / "nc.csv.meta.json").read_text())["nonclosure"]
    assert 1.5 <= meta["threshold"] <= 2.8
    assert meta["reported_threshold"] == 2.1


def test_thermal_command(tmp_path, capsys):
    out = tmp_path / "traj.csv"
    code, _, _ = run(["thermal", "--out", out], capsys)
    assert code == EXIT_OK
    lines = out.read_text().splitlines()
    assert lines[0] == "t,var_x"
    assert float(lines[1].split(",")[1]) == 10.5
    meta = json.loads((tmp_path / "traj.csv.meta.json").read_text())["thermal"]
    assert meta["oracle_agrees"] is True


def test_wigner_multiple_fields(tmp_path, capsys):
    cfg = write_config(tmp_path, {"schema_version": 1, "wigner": {"gate": "x4", "chi2": [0.0, 0.2],
                                                                   "grid": {"n_x": 512, "half_width": 8.0}}})
    out = tmp_path / "w.csv"
    code, _, _ = run(["wigner", "--config", cfg, "--out", out], capsys)
    assert code == EXIT_OK
    fields = [WignerField.from_csv((tmp_path / f"w.{k}.csv").read_text()) for k in (0, 1)]
    assert fields[0].values.min() > -1e-9
    assert fields[1].values.min() < 0
    summary = json.loads((tmp_path / "w.csv.meta.json").read_text())["wigner"]
    assert [s["chi2"] for s in summary] == [0.0, 0.2]
    assert summary[0]["negativity"] < 1e-6 < summary[1]["negativity"]


def test_wigner_identity_gate(tmp_path, capsys):
    cfg = write_config(tmp_path, {"schema_version": 1, "wigner": {"gate": "none", "grid": {"n_x": 256, "half_width": 8.0}}})
    code, out, _ = run(["wigner", "--config", cfg], capsys)
    assert code == EXIT_OK
    field = WignerField.from_csv(out)
    vacuum = gaussian_wigner(make_vacuum(), field.x, field.p)
    assert np.max(np.abs(field.values - vacuum.values)) < 1e-9


def test_wigner_bad_gate(tmp_path, capsys):
    cfg = write_config(tmp_path, {"schema_version": 1, "wigner": {"gate": "x3"}})
    code, _, err = run(["wigner", "--config", cfg], capsys)
    assert code == EXIT_CONFIG and "gate" in err


def test_sweep_strict_violation(tmp_path, capsys):
    cfg = write_config(tmp_path, {"schema_version": 1, "sweep": dict(SMALL_SWEEP, settings={"tau_sigma": 3.0})})
    code, out, err = run(["sweep", "--config", cfg, "--strict"], capsys)
    assert code == EXIT_CONSTRAINT
    assert "timing:tau>4sigma" in err
    assert out.splitlines()[0] == "L_m,f_hz,Q,g0_rad_s,chi,n_eff,var_obs,violations"
    cfg = write_config(tmp_path, {"schema_version": 1, "sweep": SMALL_SWEEP})
    code, _, _ = run(["sweep", "--config", cfg, "--strict"], capsys)
    assert code == EXIT_OK


def test_invalid_scenario_values(tmp_path, capsys):
    cfg = write_config(tmp_path, {"schema_version": 1, "nonclosure": {"n": 1}})
    assert run(["nonclosure", "--config", cfg], capsys)[0] == EXIT_CONFIG
    cfg = write_config(tmp_path, {"schema_version": 1, "sweep": {"resolution": [1, 1]}})
    assert run(["sweep", "--config", cfg], capsys)[0] == EXIT_CONFIG


def test_global_flags_before_subcommand(tmp_path, capsys):
    code, out, _ = run(["--format", "json", "squeeze"], capsys)
    assert code == EXIT_OK and json.loads(out)


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "geophase.cli", "squeeze"], capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[0] == "quantity,value"
