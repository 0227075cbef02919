"""The thin-client CLI: file outputs, config merging, error reporting."""

import json

import numpy as np
import pytest

from qdamp.cli import main


def test_geometry_writes_profiles(tmp_path, capsys):
    rc = main(
        [
            "geometry",
            "--gammas",
            "0.1,0.45",
            "--resolution",
            "12",
            "--no-sweep",
            "--out",
            str(tmp_path),
        ]
    )
    assert rc == 0
    for tag in ("0.1", "0.45"):
        body = (tmp_path / f"lambda_profile_g{tag}.csv").read_text()
        assert body.startswith("theta,lambda,log_lambda\n")
        assert len(body.splitlines()) == 13
        doc = json.loads((tmp_path / f"lambda_profile_g{tag}.json").read_text())
        assert doc["gamma"] == float(tag)
    assert not (tmp_path / "theta_c_sweep.csv").exists()
    assert "wrote" in capsys.readouterr().out


def test_geometry_sweep_file(tmp_path):
    rc = main(["geometry", "--gammas", "0.2", "--resolution", "8", "--out", str(tmp_path)])
    assert rc == 0
    sweep = (tmp_path / "theta_c_sweep.csv").read_text().splitlines()
    assert sweep[0] == "gamma,theta_c"
    assert len(sweep) == 191


def test_convergence_flags_and_outputs(tmp_path):
    rc = main(
        [
            "convergence",
            "--qubits", "2",
            "--depth", "10",
            "--ensemble", "6",
            "--gammas", "0,0.02",
            "--m-haar", "80",
            "--seed", "5",
            "--stride", "2",
            "--out", str(tmp_path),
        ]
    )
    assert rc == 0
    lines = (tmp_path / "distance.csv").read_text().splitlines()
    assert lines[0] == "depth,gamma,distance"
    assert len(lines) == 1 + 2 * 5
    doc = json.loads((tmp_path / "convergence.json").read_text())
    assert doc["config"]["record_stride"] == 2
    assert doc["config"]["master_seed"] == 5


def test_convergence_config_file_with_flag_override(tmp_path):
    cfg_file = tmp_path / "cfg.json"
    cfg_file.write_text(
        json.dumps(
            {
                "qubits": 2,
                "depth": 6,
                "ensemble": 4,
                "gammas": [0.0, 0.1],
                "m_haar": 60,
                "master_seed": 9,
            }
        )
    )
    out = tmp_path / "out"
    rc = main(
        ["convergence", "--config", str(cfg_file), "--depth", "8", "--out", str(out)]
    )
    assert rc == 0
    doc = json.loads((out / "convergence.json").read_text())
    assert doc["config"]["depth"] == 8  # flag wins over file
    assert doc["config"]["qubits"] == 2


def test_convergence_preset_override(tmp_path):
    # preset provides n/M/T/m_haar; flags shrink it to something instant
    rc = main(
        [
            "convergence",
            "--preset", "desk",
            "--qubits", "2",
            "--ensemble", "4",
            "--depth", "5",
            "--gammas", "0,0.01",
            "--m-haar", "50",
            "--out", str(tmp_path),
        ]
    )
    assert rc == 0
    doc = json.loads((tmp_path / "convergence.json").read_text())
    assert doc["config"]["qubits"] == 2
    assert doc["config"]["m_haar"] == 50


def test_invalid_config_gives_nonzero_exit_and_json_error_line(tmp_path, capsys):
    rc = main(
        [
            "convergence",
            "--qubits", "2",
            "--depth", "5",
            "--ensemble", "4",
            "--gammas", "0,7",
            "--out", str(tmp_path),
        ]
    )
    assert rc != 0
    err = capsys.readouterr().err.strip().splitlines()[-1]
    payload = json.loads(err)
    assert payload["error"] == "service_error"
    assert payload["status"] == 422
    assert "gammas" in json.dumps(payload["detail"])


def test_bad_gamma_list_is_usage_error(tmp_path):
    with pytest.raises(SystemExit) as info:
        main(["geometry", "--gammas", "0.1,banana", "--out", str(tmp_path)])
    assert info.value.code == 2


def test_haar_ref_cache(tmp_path):
    rc = main(
        ["haar-ref", "--qubits", "2", "--m-haar", "60", "--seed", "4", "--out", str(tmp_path)]
    )
    assert rc == 0
    doc = json.loads((tmp_path / "haar_reference.json").read_text())
    assert doc["d"] == 4
    assert doc["m_haar"] == 60
    assert np.asarray(doc["sdl"]).shape == (4,)


def test_cli_determinism_across_worker_counts(tmp_path):
    args = [
        "convergence",
        "--qubits", "3",
        "--depth", "15",
        "--ensemble", "30",
        "--gammas", "0,0.02",
        "--m-haar", "100",
        "--seed", "12",
    ]
    out1, out2 = tmp_path / "w1", tmp_path / "w2"
    assert main(args + ["--workers", "1", "--out", str(out1)]) == 0
    assert main(args + ["--workers", "2", "--out", str(out2)]) == 0
    assert (out1 / "distance.csv").read_bytes() == (out2 / "distance.csv").read_bytes()
