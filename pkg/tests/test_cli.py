import json
import subprocess
import sys

import numpy as np
import pytest

from nucav.linear_response import reflectance
from nucav.scenario import import_level_scheme

BASE = {
    "cavity": {"kappa": 45.0, "kappa_r": 25.0, "kappa_t": 0.0,
               "detuning_slope": -0.5, "phi0_mrad": 2.96, "xi": 18000.0},
    "coupling": {"ng2": 1400.0},
    "hyperfine": "off",
    "geometry": "a",
    "scan": {"axis": "detuning", "from": -200.0, "to": 200.0, "points": 101},
    "engine": "linear",
}


def run_cli(*args, cwd=None):
    return subprocess.run(
        [sys.executable, "-m", "nucav.cli", *args],
        capture_output=True, text=True, cwd=cwd,
    )


def write_scenario(tmp_path, doc, name="scenario.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


def read_csv(path):
    lines = path.read_text().strip().splitlines()
    assert lines[0].startswith("# scenario=") and lines[0].endswith(" units=gamma")
    assert lines[1] == "abscissa,re_R,im_R,abs2_R" or lines[1] == "tau,g2"
    data = np.array([[float(v) for v in line.split(",")] for line in lines[2:]])
    return lines[0], data


def test_run_writes_spectrum(tmp_path):
    scenario = write_scenario(tmp_path, BASE)
    out = tmp_path / "spec.csv"
    proc = run_cli("run", str(scenario), "--out", str(out))
    assert proc.returncode == 0, proc.stderr
    header, data = read_csv(out)
    assert data.shape == (101, 4)
    assert np.allclose(data[:, 3], data[:, 1] ** 2 + data[:, 2] ** 2)
    meta = json.loads((tmp_path / "spec.csv.meta.json").read_text())
    assert meta["units"] == "gamma" and meta["scenario"] in header


def test_run_is_deterministic(tmp_path):
    scenario = write_scenario(tmp_path, BASE)
    outs = []
    for name in ("a.csv", "b.csv"):
        out = tmp_path / name
        proc = run_cli("run", str(scenario), "--out", str(out))
        assert proc.returncode == 0, proc.stderr
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_run_preset_matches_closed_form(tmp_path):
    out = tmp_path / "p.csv"
    proc = run_cli("run", "--preset", "unmagnetized", "--points", "51",
                   "--out", str(out))
    assert proc.returncode == 0, proc.stderr
    _, data = read_csv(out)
    from nucav.linear_response import two_level_reflectance
    xi = 18000.0
    expected = two_level_reflectance(data[:, 0], 45 * xi, 25 * xi, 0.0, 1400 * xi)
    assert np.max(np.abs(data[:, 1] + 1j * data[:, 2] - expected)) < 1e-12
    assert data[25, 3] > 0.5


def test_run_grid_overrides_change_hash(tmp_path):
    scenario = write_scenario(tmp_path, BASE)
    out1, out2 = tmp_path / "x.csv", tmp_path / "y.csv"
    assert run_cli("run", str(scenario), "--out", str(out1)).returncode == 0
    assert run_cli("run", str(scenario), "--out", str(out2), "--points", "11").returncode == 0
    assert read_csv(out1)[0] != read_csv(out2)[0]


def test_run_rejects_bad_scenario(tmp_path):
    bad = dict(BASE, cavity=dict(BASE["cavity"], kappa_t=45.0))
    scenario = write_scenario(tmp_path, bad)
    proc = run_cli("run", str(scenario))
    assert proc.returncode == 2
    assert "cavity" in proc.stderr


def test_run_rejects_empty_file(tmp_path):
    path = tmp_path / "empty.json"
    path.write_text("")
    proc = run_cli("run", str(path))
    assert proc.returncode == 2


def test_run_svg(tmp_path):
    scenario = write_scenario(tmp_path, dict(BASE, scan=dict(BASE["scan"], points=21)))
    out = tmp_path / "s.csv"
    proc = run_cli("run", str(scenario), "--out", str(out), "--svg")
    assert proc.returncode == 0
    svg = (tmp_path / "s.csv.svg").read_text()
    assert svg.startswith("<svg") and "polyline" in svg


def test_rocking_minimum_metadata(tmp_path):
    out = tmp_path / "r.csv"
    proc = run_cli("rocking", "--preset", "unmagnetized", "--points", "801",
                   "--out", str(out))
    assert proc.returncode == 0, proc.stderr
    meta = json.loads((tmp_path / "r.csv.meta.json").read_text())
    assert meta["minimum_angle_mrad"] == pytest.approx(2.96, abs=0.01)
    _, data = read_csv(out)
    assert data[:, 3].min() == pytest.approx((1 / 9) ** 2, abs=5e-4)


def test_levelscheme_adjacency_geometry_a(tmp_path):
    out = tmp_path / "ls.json"
    proc = run_cli("levelscheme", "--preset", "magnetized-a", "--out", str(out))
    assert proc.returncode == 0, proc.stderr
    doc = json.loads(out.read_text())
    assert doc["adjacency"]["driven"] == [2, 5]
    assert doc["adjacency"]["coupled_pairs"] == [[2, 5]]
    assert doc["units"] == "gamma"


def test_levelscheme_faraday_axis_exact_zero_blocks(tmp_path):
    doc = dict(BASE, hyperfine="Fe57@33T", geometry={
        "surface_normal": [0.0, 0.0, 1.0],
        "propagation": [1.0, 0.0, 0.0],
        "a_in": [0.0, 0.0, 1.0],
        "a_out": [0.0, 0.0, 1.0],
        "b_axis": [1.0, 0.0, 0.0],
    })
    scenario = write_scenario(tmp_path, doc)
    out = tmp_path / "ls.json"
    proc = run_cli("levelscheme", str(scenario), "--out", str(out))
    assert proc.returncode == 0, proc.stderr
    exported = json.loads(out.read_text())
    w = np.array([[complex(re, im) for re, im in row] for row in exported["coupling"]])
    for i in (1, 4):
        for j in (0, 2, 3, 5):
            assert w[i, j] == 0.0 and w[j, i] == 0.0


def test_levelscheme_round_trip_reproduces_spectrum(tmp_path):
    scenario = write_scenario(tmp_path, BASE)
    ls_out = tmp_path / "ls.json"
    csv_out = tmp_path / "spec.csv"
    assert run_cli("levelscheme", str(scenario), "--out", str(ls_out)).returncode == 0
    assert run_cli("run", str(scenario), "--out", str(csv_out)).returncode == 0
    system = import_level_scheme(ls_out.read_text())
    _, data = read_csv(csv_out)
    for row in data[::10]:
        r = reflectance(system, row[0])
        assert abs(r - complex(row[1], row[2])) < 1e-12


def test_levelscheme_requires_linear_engine(tmp_path):
    doc = dict(BASE, engine="quantum",
               quantum={"n_nuclei": 1, "n_ph": 2, "a_in": 0.05})
    scenario = write_scenario(tmp_path, doc)
    proc = run_cli("levelscheme", str(scenario))
    assert proc.returncode == 2


def test_validate_ok_preset():
    proc = run_cli("validate", "--preset", "magnetized-c")
    assert proc.returncode == 0
    assert proc.stdout.startswith("ok")


def test_validate_names_energy_conservation(tmp_path):
    bad = dict(BASE, cavity=dict(BASE["cavity"], kappa_r=25.0, kappa_t=25.0))
    proc = run_cli("validate", str(write_scenario(tmp_path, bad)))
    assert proc.returncode == 2
    assert "kappa" in proc.stdout


def test_validate_non_unit_polarization_hint(tmp_path):
    doc = dict(BASE, geometry={
        "surface_normal": [0.0, 0.0, 1.0],
        "propagation": [1.0, 0.0, 0.0],
        "a_in": [0.0, 0.0, 2.0],
        "a_out": [0.0, 0.0, 1.0],
    })
    proc = run_cli("validate", str(write_scenario(tmp_path, doc)))
    assert proc.returncode == 2
    assert "a_in" in proc.stdout and "divide" in proc.stdout


def test_g2_preset(tmp_path):
    out = tmp_path / "g2.csv"
    proc = run_cli("g2", "--preset", "empty-cavity-g2", "--out", str(out))
    assert proc.returncode == 0, proc.stderr
    _, data = read_csv(out)
    assert data.shape == (11, 2)
    assert np.max(np.abs(data[:, 1] - 1.0)) < 1e-6
    meta = json.loads((tmp_path / "g2.csv.meta.json").read_text())
    assert meta["truncation_convergence"] < 1e-4


def test_g2_requires_quantum_options(tmp_path):
    doc = dict(BASE, scan={"axis": "tau", "from": 0.0, "to": 0.1, "points": 3})
    proc = run_cli("g2", str(write_scenario(tmp_path, doc)))
    assert proc.returncode == 2


def test_g2_resource_cap(tmp_path):
    doc = dict(BASE,
               engine="quantum",
               scan={"axis": "tau", "from": 0.0, "to": 0.1, "points": 3},
               quantum={"n_nuclei": 3, "n_ph": 9, "a_in": 0.1})
    proc = run_cli("g2", str(write_scenario(tmp_path, doc)))
    assert proc.returncode == 4


def test_g2_single_tau_point(tmp_path):
    out = tmp_path / "one.csv"
    proc = run_cli("g2", "--preset", "empty-cavity-g2", "--points", "1",
                   "--from", "0", "--to", "0", "--out", str(out))
    assert proc.returncode == 0, proc.stderr
    _, data = read_csv(out)
    assert data.shape == (1, 2)
    assert data[0, 1] == pytest.approx(1.0, abs=1e-6)


def test_run_quantum_engine(tmp_path):
    doc = dict(BASE,
               cavity={"kappa": 45.0, "kappa_r": 25.0, "kappa_t": 0.0,
                       "detuning_slope": -0.5, "phi0_mrad": 2.96, "xi": 1.0},
               coupling={"ng2": 14.0},
               engine="quantum",
               scan={"axis": "detuning", "from": -10.0, "to": 10.0, "points": 5},
               quantum={"n_nuclei": 1, "n_ph": 1, "a_in": 0.05})
    out = tmp_path / "q.csv"
    proc = run_cli("run", str(write_scenario(tmp_path, doc)), "--out", str(out))
    assert proc.returncode == 0, proc.stderr
    _, data = read_csv(out)
    assert data.shape == (5, 4)
    meta = json.loads((tmp_path / "q.csv.meta.json").read_text())
    assert meta["engine"] == "quantum"


def test_run_quantum_degenerate_steady_state_exit_code(tmp_path):
    # zero coupling leaves both nuclear ground sublevels stationary
    doc = dict(BASE,
               cavity={"kappa": 45.0, "kappa_r": 25.0, "kappa_t": 0.0,
                       "detuning_slope": -0.5, "phi0_mrad": 2.96, "xi": 1.0},
               coupling={"ng2": 0.0},
               engine="quantum",
               scan={"axis": "detuning", "from": -1.0, "to": 1.0, "points": 3},
               quantum={"n_nuclei": 1, "n_ph": 1, "a_in": 0.05})
    proc = run_cli("run", str(write_scenario(tmp_path, doc)))
    assert proc.returncode == 3


def test_missing_input_is_input_error():
    proc = run_cli("run")
    assert proc.returncode == 2
