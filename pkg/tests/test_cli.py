import json

import pytest

from ofdm_pa.cli import main


def _run(tmp_path, *args):
    return main(["--out-dir", str(tmp_path), *args])


def test_reproduce_fig1(tmp_path, capsys):
    assert _run(tmp_path, "reproduce", "fig1", "--trials", "50") == 0
    files = list((tmp_path / "fig1").iterdir())
    assert sum(f.suffix == ".csv" for f in files) >= 4
    assert (tmp_path / "fig1" / "fig1_manifest.json").exists()


def test_optimize_pgd(tmp_path, capsys):
    assert _run(tmp_path, "optimize-pgd", "--n", "64", "--l", "10", "--constellation", "16psk") == 0
    out = capsys.readouterr().out
    assert "final_objective=" in out
    assert (tmp_path / "pgd_n64_L10_pa.csv").read_text().startswith("P\n")
    assert (tmp_path / "pgd_n64_L10_trace.csv").read_text().startswith("iter,objective\n")


def test_optimize_sca_from_config(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n": 32, "pad_factor": 4, "q": 2, "constellation": "16psk"}))
    assert _run(tmp_path, "optimize-sca", "--config", str(cfg)) == 0
    assert "constraint_slack=" in capsys.readouterr().out
    meta = json.loads((tmp_path / "sca_n32_L4_q2_run.json").read_text())
    assert meta["config"]["q"] == 2


def test_montecarlo_byte_identical(tmp_path):
    args = ["montecarlo", "--trials", "1000", "--n", "64", "--constellation", "16qam"]
    assert main(["--seed", "5", "--out-dir", str(tmp_path / "a"), *args]) == 0
    assert main(["--seed", "5", "--out-dir", str(tmp_path / "b"), *args]) == 0
    for f in (tmp_path / "a").iterdir():
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()


@pytest.mark.parametrize("cmd", [
    ["acf", "--constellation", "qpsk", "--n", "8"],
    ["acf", "--kind", "aperiodic", "--n", "8"],
    ["acf", "--kind", "zero-padded", "--l", "4", "--n", "8", "--pa", "random"],
    ["theory", "--n", "8", "--mu4", "1.5"],
    ["theory", "--n", "8", "--kind", "zero-padded", "--l", "4"],
    ["--format", "json", "montecarlo", "--n", "8", "--trials", "20", "--kind", "aperiodic"],
    ["sweep", "--n-values", "8", "16", "--trials", "20"],
])
def test_subcommands_succeed(tmp_path, cmd, capsys):
    assert _run(tmp_path, *cmd) == 0
    assert capsys.readouterr().out.strip()


def test_usage_errors_exit_2(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--bogus"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        _run(tmp_path, "reproduce", "fig12")
    assert exc.value.code == 2
    assert _run(tmp_path, "optimize-sca", "--n", "16", "--l", "4") == 2
    assert _run(tmp_path, "optimize-pgd", "--config", str(tmp_path / "missing.json")) == 2
    assert _run(tmp_path, "theory", "--kind", "aperiodic") == 2
    assert "error" in capsys.readouterr().err


def test_runtime_errors_exit_nonzero(tmp_path, capsys):
    assert _run(tmp_path, "acf", "--constellation", "bpsk") == 1
    assert "pseudo-variance" in capsys.readouterr().err
    assert _run(tmp_path, "montecarlo", "--pa", "file", "--pa-file", str(tmp_path / "nope.csv"),
                "--trials", "2") == 1
