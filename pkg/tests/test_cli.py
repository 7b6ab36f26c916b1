import json

import pytest

from latticefold.cli import main


def _run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_fold_writes_outputs(tmp_path, capsys):
    prefix = tmp_path / "zika"
    code, out, _ = _run(["fold", "--seq", "LHPGAGK", "--out", str(prefix)], capsys)
    assert code == 0
    assert "best energy -4.160" in out
    for ext in (".pdb", ".xyz", ".trace.csv", ".manifest.json"):
        assert (tmp_path / f"zika{ext}").exists()
    man = json.loads((tmp_path / "zika.manifest.json").read_text())
    assert man["turns"] == [0, 2, 1, 0, 2, 0]
    assert man["energy"]["total"] == pytest.approx(-4.16)
    assert man["extras"]["n_enumerated"] == 54
    assert man["contacts"] == [[1, 6, -4.16]]


def test_fold_manifest_reproducible(tmp_path, capsys):
    docs = []
    for name in ("a", "b"):
        argv = ["fold", "--seq", "LHPGAGK", "--solver", "anneal", "--sweeps", "30",
                "--restarts", "3", "--seed", "4", "--out", str(tmp_path / name)]
        assert _run(argv, capsys)[0] == 0
        doc = json.loads((tmp_path / f"{name}.manifest.json").read_text())
        doc.pop("created")
        docs.append(doc)
    assert docs[0] == docs[1]
    assert (tmp_path / "a.pdb").read_bytes() == (tmp_path / "b.pdb").read_bytes()


def test_fold_vqe_and_reference(tmp_path, capsys):
    ref = tmp_path / "ref"
    assert _run(["fold", "--seq", "LHPGAGK", "--out", str(ref)], capsys)[0] == 0
    code, out, _ = _run(
        ["fold", "--seq", "LHPGAGK", "--solver", "vqe", "--budget", "40",
         "--reference", str(ref) + ".pdb", "--out", str(tmp_path / "v")], capsys,
    )
    assert code == 0 and "RMSD vs reference" in out
    man = json.loads((tmp_path / "v.manifest.json").read_text())
    assert man["extras"]["n_qubits"] == 7
    assert man["reference"]["radius_of_gyration"] == pytest.approx(4.205, abs=1e-3)
    if man["turns"] == [0, 2, 1, 0, 2, 0]:
        assert man["reference"]["rmsd"] == pytest.approx(0.0, abs=1e-3)


def test_too_short_exits_2(tmp_path, capsys):
    code, _, err = _run(["fold", "--seq", "AAA", "--out", str(tmp_path / "x")], capsys)
    assert code == 2
    assert "N ≥ 4 required" in err


def test_bad_symbol_exits_2(capsys):
    code, _, err = _run(["hamiltonian", "--seq", "LHXG"], capsys)
    assert code == 2 and "position 3" in err


def test_missing_file_exits_3(tmp_path, capsys):
    code, _, err = _run(["fold", "--fasta", str(tmp_path / "nope.fa")], capsys)
    assert code == 3 and "error" in err


def test_exhaustive_cap_message(capsys):
    code, _, err = _run(["fold", "--seq", "A" * 15, "--out", "/tmp/unused"], capsys)
    assert code == 2 and "exhaustive cap" in err


def test_resources(tmp_path, capsys):
    code, out, _ = _run(["resources", "--n", "22"], capsys)
    assert code == 0 and "total qubits: 118" in out
    code, out, _ = _run(["resources", "--seq", "LHPGAGK"], capsys)
    assert '"1.0": 494716' in out
    code, _, _ = _run(["resources", "--n", "22", "--scan", "4", "22", "--out", str(tmp_path / "r")],
                      capsys)
    doc = json.loads((tmp_path / "r.resources.json").read_text())
    assert 0.2 <= doc["fit"]["a"] <= 0.3
    assert (tmp_path / "r.scaling.csv").read_text().startswith("N,config,interaction,total\n")


def test_levinthal(capsys):
    code, out, _ = _run(["levinthal", "--n", "2"], capsys)
    assert code == 0 and json.loads(out)["conformations"] == "9"


def test_hamiltonian_then_qubo(tmp_path, capsys):
    prefix = str(tmp_path / "h")
    assert _run(["hamiltonian", "--seq", "LHPGAGK", "--out", prefix], capsys)[0] == 0
    meta = json.loads((tmp_path / "h.poly.json").read_text())
    assert meta["T"] == 63 and meta["n_variables"] == 9
    code, out, _ = _run(["qubo", "--poly", prefix + ".poly.txt", "--solve",
                         "--out", str(tmp_path / "q")], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["n_vars"] == 23 and doc["source"]["sequence"] == "LHPGAGK"
    assert doc["bruteforce_min"] == pytest.approx(-5.51)


def test_screen(tmp_path, capsys):
    code, out, _ = _run(["screen", "--seq", "DAYAQWLKDGGPSSGRPPPS",
                         "--reference", "NLYIQWLKDGGPSSGRPPPS", "--n-eff", "12"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["mutations"] == 3 and doc["amenable"] is True
    code, out, _ = _run(["screen", "--seq", "LHPGAGK", "--tsv"], capsys)
    header, line = out.strip().split("\n")
    assert header.startswith("sequence\t") and "\tNA\t" in line


def test_metrics(tmp_path, capsys):
    prefix = tmp_path / "z"
    _run(["fold", "--seq", "LHPGAGK", "--out", str(prefix)], capsys)
    pdb = str(prefix) + ".pdb"
    assert _run(["metrics", "rmsd", pdb, pdb], capsys)[1].strip() == "0.000"
    assert _run(["metrics", "rg", pdb], capsys)[1].strip() == "4.205"
    assert _run(["metrics", "rmsd", pdb], capsys)[0] == 2


def test_config_merge_flags_win(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"solver": "anneal", "sweeps": 20, "restarts": 2, "seed": 9}))
    out = tmp_path / "c"
    code, _, _ = _run(["fold", "--config", str(cfg), "--seq", "LHPGAGK", "--seed", "1",
                       "--out", str(out)], capsys)
    assert code == 0
    params = json.loads((tmp_path / "c.manifest.json").read_text())["parameters"]
    assert params["solver"] == "anneal" and params["sweeps"] == 20 and params["seed"] == 1


def test_config_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"bogus-key": 1}))
    code, _, err = _run(["fold", "--config", str(cfg), "--seq", "LHPGAGK"], capsys)
    assert code == 2 and "bogus_key" in err


def test_threads_env(monkeypatch):
    monkeypatch.setenv("LATTICEFOLD_THREADS", "3")
    import importlib

    import latticefold.cli as cli

    importlib.reload(cli)
    assert cli.build_parser().parse_args(["fold", "--seq", "A"]).threads == 3
