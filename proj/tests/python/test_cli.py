import hashlib
import json
import subprocess


def run(cli, *args, cwd=None):
    return subprocess.run([cli, *args], capture_output=True, text=True, cwd=cwd)


def digest(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


def test_missing_required_flag(cli):
    r = run(cli, "simulate")
    assert r.returncode == 2
    assert "preset" in (r.stderr + r.stdout)


def test_unknown_table(cli, tmp_path):
    r = run(cli, "reproduce", "--table", "4", "--replicates", "1", "--out", str(tmp_path))
    assert r.returncode == 2


def test_empty_dataset_dir(cli, tmp_path):
    r = run(cli, "fit", "--data", str(tmp_path), "--out", str(tmp_path / "out"))
    assert r.returncode == 2


def test_simulate_is_deterministic(cli, tmp_path):
    names = ["genotype.csv", "survival.csv", "gene_map.csv", "truth.json", "manifest.json"]
    hashes = []
    for k in range(2):
        out = tmp_path / f"d{k}"
        r = run(cli, "simulate", "--preset", "table2-ar05-case1-h25", "--seed", "7", "--out", str(out))
        assert r.returncode == 0, r.stderr
        hashes.append([digest(out / n) for n in names])
    assert hashes[0] == hashes[1]
    truth = json.loads((tmp_path / "d0" / "truth.json").read_text())
    assert len(truth["pairs"]) == 12
    manifest = json.loads((tmp_path / "d0" / "manifest.json").read_text())
    assert manifest["command"] == "simulate"


def test_fit_writes_reports(cli, tmp_path):
    data = tmp_path / "data"
    assert run(cli, "simulate", "--preset", "table7-ar08-case1-homo", "--seed", "2", "--out", str(data)).returncode == 0
    out = tmp_path / "fit"
    r = run(cli, "fit", "--data", str(data), "--gamma", "0.5,0.7,0.9", "--lambda-grid", "15", "--out", str(out))
    assert r.returncode == 0, r.stderr
    fit = json.loads((out / "fit.json").read_text())
    assert len(fit["per_gamma"]) == 3
    assert fit["best"]["selected"]
    header = (out / "tuning.csv").read_text().splitlines()[0]
    assert header.startswith("gamma,lambda,bic")


def test_reproduce_single_replicate_warns(cli, tmp_path):
    r = run(cli, "reproduce", "--table", "7", "--replicates", "1", "--lambda-grid", "8", "--out", str(tmp_path))
    assert r.returncode == 0, r.stderr
    assert "warning" in r.stderr.lower()
    lines = (tmp_path / "table7.csv").read_text().splitlines()
    assert len(lines) == 1 + 6 * 4
    fields = lines[1].split(",")
    assert fields[6] == "" and fields[8] == ""
