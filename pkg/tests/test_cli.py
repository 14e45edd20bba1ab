import csv
import math
import io
import json

import jsonschema
import pytest

from deuteron_qc.cli import COMMANDS, CONFIG_ENV, RunConfig, main, output_schema
from deuteron_qc.hamiltonian import exact_ground_energy


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, err = run_cli(capsys, *argv, "--format", "json")
    assert code == 0, err
    return json.loads(out)


FAST_ARGS = {
    "hamiltonian": ["--n", "3"],
    "exact": ["--n", "4"],
    "scan": ["--n", "2", "--grid-points", "9"],
    "vqe": ["--n", "2", "--rounds", "2"],
    "zne": ["--n", "2", "--shots", "0"],
    "extrapolate": [],
}


@pytest.mark.parametrize("command", sorted(FAST_ARGS))
def test_json_matches_schema(capsys, command):
    payload = run_json(capsys, command, *FAST_ARGS[command])
    jsonschema.validate(payload, output_schema(command))


def test_every_command_ships_a_schema():
    for command in COMMANDS:
        schema = output_schema(command)
        jsonschema.Draft202012Validator.check_schema(schema)


def test_hamiltonian_text(capsys):
    code, out, _ = run_cli(capsys, "hamiltonian", "--n", "2", "--format", "text")
    assert code == 0
    for value in ("5.906709", "0.218291", "-6.125000", "-2.143304"):
        assert value in out
    code, out, _ = run_cli(capsys, "hamiltonian", "--n", "1")
    assert "0.218291 (Z0 - I)" in out


def test_hamiltonian_csv(capsys):
    code, out, _ = run_cli(capsys, "hamiltonian", "--n", "2", "--format", "csv")
    assert code == 0
    assert "XX,-2.1433035249352805,0.0" in out


def test_basis_size_zero_is_config_error(capsys):
    code, out, err = run_cli(capsys, "hamiltonian", "--n", "0")
    assert code == 2
    assert "basis size must be ≥ 1" in err
    assert out == ""


def test_numeric_failure_exit_code(capsys):
    code, _, err = run_cli(capsys, "zne", "--n", "2", "--shots", "0", "--readout-e0", "0.5", "--readout-e1", "0.45")
    assert code == 3
    assert "near-singular" in err


def test_invalid_mode_combination(capsys):
    code, _, err = run_cli(capsys, "vqe", "--n", "2", "--mode", "noisy", "--eps", "0")
    assert code == 2
    code, _, err = run_cli(capsys, "vqe", "--n", "5")
    assert code == 2


def test_exact_command(capsys):
    payload = run_json(capsys, "exact", "--n", "3")
    assert [e["energy"] for e in payload["energies"]] == [exact_ground_energy(n) for n in (1, 2, 3)]


def test_scan_exact_csv(capsys):
    code, out, _ = run_cli(capsys, "scan", "--n", "2", "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 41
    assert min(float(r["mean"]) for r in rows) == pytest.approx(-1.749, abs=0.05)
    zero = next(r for r in rows if float(r["theta"]) == 0.0)
    assert float(zero["Z0_mean"]) == -1.0 and float(zero["Z1_mean"]) == 1.0


def test_scan_sampled_within_five_sigma(capsys):
    exact = list(csv.DictReader(io.StringIO(run_cli(capsys, "scan", "--n", "2", "--format", "csv")[1])))
    code, out, _ = run_cli(capsys, "scan", "--n", "2", "--mode", "sampled", "--shots", "8192", "--format", "csv")
    sampled = list(csv.DictReader(io.StringIO(out)))
    for e, s in zip(exact, sampled):
        for term in ("Z0", "Z1", "X0X1", "Y0Y1"):
            sigma = float(s[f"{term}_std_error"])
            assert abs(float(s[f"{term}_mean"]) - float(e[f"{term}_mean"])) <= 5 * sigma + 1e-12


def test_vqe_exact(capsys):
    payload = run_json(capsys, "vqe", "--n", "2", "--mode", "exact")
    assert payload["best_energy"] == pytest.approx(-1.7492, abs=1e-4)


def test_vqe_sampled(capsys):
    payload = run_json(capsys, "vqe", "--n", "2", "--mode", "sampled", "--shots", "8192", "--seed", "7")
    assert abs(payload["best_energy"] - (-1.749)) <= 0.05


def test_zne_zero_noise(capsys):
    payload = run_json(capsys, "zne", "--n", "2", "--eps", "0")
    for s in payload["series"]:
        assert abs(s["slope"]) < 3 * s["slope_std_error"]
        assert [p["r"] for p in s["points"]] == [1, 3, 5, 7]


def test_zne_zero_noise_intercepts_match_exact(capsys):
    from deuteron_qc.ansatz import ansatz_circuit
    from deuteron_qc.pauli import PauliString
    from deuteron_qc.simulator import expectation, run_pure

    payload = run_json(capsys, "zne", "--n", "2", "--eps", "0", "--params", "0.59")
    state = run_pure(ansatz_circuit([0.59]))
    for s in payload["series"]:
        exact = expectation(state, PauliString(s["term"]))
        assert abs(s["intercept"] - exact) <= 3 * s["intercept_std_error"] + 1e-12


def test_zne_csv_rows(capsys):
    code, out, _ = run_cli(capsys, "zne", "--n", "2", "--shots", "0", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert list(rows[0]) == ["term", "r", "mean", "std_error"]
    for term in ("IZ", "XX", "YY", "ZI", "H"):
        assert sorted(int(r["r"]) for r in rows if r["term"] == term) == [0, 1, 3, 5, 7]


def test_extrapolate_command(capsys):
    payload = run_json(capsys, "extrapolate", "--energies", "1:-0.436581,2:-1.749160", "--order", "NLO")
    (fit,) = payload["fits"]
    assert fit["E_infinity"] == pytest.approx(-2.19, abs=0.01)


def test_config_precedence(tmp_path, capsys, monkeypatch):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"basis_size": 3, "format": "json"}))
    payload = json.loads(run_cli(capsys, "exact", "--config", str(cfg))[1])
    assert len(payload["energies"]) == 3
    payload = json.loads(run_cli(capsys, "exact", "--config", str(cfg), "--n", "2")[1])
    assert len(payload["energies"]) == 2
    monkeypatch.setenv(CONFIG_ENV, str(cfg))
    payload = json.loads(run_cli(capsys, "exact")[1])
    assert len(payload["energies"]) == 3


def test_config_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"basis": 3}))
    code, _, err = run_cli(capsys, "exact", "--config", str(cfg))
    assert code == 2 and "unknown config keys" in err


def test_out_file(tmp_path, capsys):
    target = tmp_path / "h.csv"
    code, out, _ = run_cli(capsys, "hamiltonian", "--n", "2", "--format", "csv", "--out", str(target))
    assert code == 0 and out == ""
    assert "XX" in target.read_text()


def test_output_deterministic_across_workers(capsys):
    args = ["scan", "--n", "3", "--mode", "noisy", "--shots", "256", "--grid-points", "5",
            "--readout-e0", "0.02", "--readout-e1", "0.04", "--format", "json"]
    one = run_cli(capsys, *args, "--workers", "1")[1]
    four = run_cli(capsys, *args, "--workers", "4")[1]
    again = run_cli(capsys, *args, "--workers", "1")[1]
    assert one == four == again


def test_run_config_defaults():
    cfg = RunConfig().validate()
    assert cfg.scales == [1, 3, 5, 7] and cfg.iterations == 10 and cfg.shots == 8192
    assert cfg.backend("noisy+zne").noise.cnot_epsilon == 0.02


def test_module_entry_point():
    import subprocess
    import sys

    proc = subprocess.run(
        [sys.executable, "-m", "deuteron_qc", "exact", "--n", "2", "--format", "csv"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[0] == "N,energy_mev"


@pytest.fixture(scope="module")
def table_payload():
    from deuteron_qc.cli import cmd_table1

    return cmd_table1(RunConfig(workers=1).validate())


def test_table1_text_and_schema(table_payload):
    text, payload = table_payload
    jsonschema.validate(json.loads(json.dumps(payload)), output_schema("table1"))
    assert "E from exact diagonalization" in text
    assert "E from simulated quantum computing" in text


def test_table1_exact_block(table_payload):
    _, payload = table_payload
    cells = [c for row in payload["blocks"]["exact"] for name, c in row["cells"].items() if name != "E_N"]
    assert len(cells) == 5
    assert all(abs(c["delta"]) <= 0.01 for c in cells)
    energies = [row["cells"]["E_N"] for row in payload["blocks"]["exact"]]
    assert all(abs(c["delta"]) <= 0.01 for c in energies)


@pytest.mark.xfail(strict=True, reason="the N = 3 simulated energy inherits the ZNE bias (about +0.2 MeV)")
def test_table1_quantum_block_within_combined_uncertainty(table_payload):
    _, payload = table_payload
    for row in payload["blocks"]["quantum"]:
        for c in row["cells"].values():
            assert c["value"] is not None
            assert abs(c["delta"]) <= math.hypot(c["uncertainty"], c["reference_uncertainty"])


@pytest.mark.xfail(strict=True, reason="linear ZNE leaves about +0.2 MeV bias at eps = 0.02 for three qubits")
def test_vqe_noisy_zne_n3(capsys):
    payload = run_json(capsys, "vqe", "--n", "3", "--mode", "noisy+zne", "--eps", "0.02")
    assert abs(payload["best_energy"] - (-2.046)) <= 0.06
