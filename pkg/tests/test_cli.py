import json
import subprocess
import sys

import pytest

from aquasim.cli import cli_main


def test_no_command_is_usage_error(capsys):
    assert cli_main([]) == 1
    assert cli_main(["frobnicate"]) == 1
    assert cli_main(["run"]) == 1


def test_gen_data(tmp_path, capsys):
    assert cli_main(["gen-data", "--files", "3", "--records", "20", "--out-dir", str(tmp_path)]) == 0
    files = sorted((tmp_path / "data").iterdir())
    assert [f.name for f in files] == ["swm-000000.csv", "swm-000001.csv", "swm-000002.csv"]
    assert files[0].read_text().startswith("meter_id,read_at,reading_kl\n")


def test_run_and_ttest(tmp_path, capsys):
    assert cli_main(["--out-dir", str(tmp_path), "run", "A", "--runs", "2"]) == 0
    out = tmp_path / "scenario_A.csv"
    assert out.exists()
    assert cli_main(["run", "B", "--runs", "2", "--out-dir", str(tmp_path), "--seed", "3"]) == 0
    capsys.readouterr()
    assert cli_main(["ttest", str(out), str(tmp_path / "scenario_B.csv"),
                     "--metric", "block_time_s"]) == 0
    js = json.loads(capsys.readouterr().out)
    assert js["metric"] == "block_time_s" and js["n_a"] == 54 and js["n_b"] == 48


def test_config_file(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"runs": 1, "A": {"payload_bytes": 4096}}))
    assert cli_main(["run", "A", "--config", str(cfg), "--out-dir", str(tmp_path)]) == 0
    assert len((tmp_path / "scenario_A.csv").read_text().splitlines()) == 1 + 9 * 3


@pytest.mark.parametrize("argv", [
    ["run", "Z"],
    ["run", "A", "--runs", "x"],
    ["ttest", "missing_a.csv", "missing_b.csv", "--metric", "tps"],
])
def test_bad_input_exit_codes(argv, tmp_path):
    code = cli_main(argv + ["--out-dir", str(tmp_path)])
    assert code in (1, 2) and code != 0


def test_missing_csv_is_io_error(tmp_path):
    assert cli_main(["ttest", str(tmp_path / "a.csv"), str(tmp_path / "b.csv"),
                     "--metric", "tps"]) == 2


def test_bad_config_is_validation_error(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text("[1, 2]")
    assert cli_main(["run", "A", "--config", str(cfg), "--out-dir", str(tmp_path)]) == 1


def test_ipfs_check_against_fake_daemon(fake_kubo, capsys):
    assert cli_main(["ipfs-check", "--endpoint", fake_kubo.url, "--size", "1000"]) == 0
    js = json.loads(capsys.readouterr().out)
    assert js["round_trip"] and js["cid_match"]


def test_ipfs_check_unreachable(monkeypatch):
    monkeypatch.setenv("AQUA_IPFS_API", "http://127.0.0.1:9")
    assert cli_main(["ipfs-check"]) == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "aquasim", "--help"], capture_output=True,
                          text=True, timeout=60)
    assert proc.returncode == 0 and "bench" in proc.stdout
