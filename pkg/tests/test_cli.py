import csv
import json

import pytest

from irhm_polaron import cli

MARKOVIAN = {
    "schema_version": 1,
    "experiment": "markovian-run",
    "model": {"n_sites": 2, "j_star": 0.1, "g": 1.0},
    "grid": {"t_end": 100, "n_steps": 10000, "sample_stride": 100},
    "initial_state": "singlet-triplet",
}


def _write(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def _files(directory):
    return {p.name: p.read_bytes() for p in sorted(directory.iterdir()) if p.name != "timings.json"}


def test_markovian_run_outputs(tmp_path):
    out = tmp_path / "out"
    assert cli.main(["run", "--config", _write(tmp_path, MARKOVIAN), "--output", str(out)]) == 0
    names = {p.name for p in out.iterdir()}
    assert {"manifest.json", "report.json", "trajectory.csv", "coherence.csv", "eigenbasis.json",
            "timings.json"} <= names
    rows = list(csv.reader((out / "trajectory.csv").open()))
    assert rows[0][0] == "t" and len(rows) == 102
    mags = [abs(complex(float(r[1]), float(r[2]))) for r in rows[1:]]
    assert max(mags) - min(mags) < 1e-8
    report = json.loads((out / "report.json").read_text())
    assert report["passed"] and all(c["passed"] for c in report["checks"])
    assert {"name", "value", "threshold", "passed"} <= set(report["checks"][0])


def test_csv_float_format(tmp_path):
    path = tmp_path / "x.csv"
    cli.write_csv(path, ["a", "b"], [[0.1, 3]])
    assert path.read_text() == "a,b\n0.10000000000000001,3\n"


def test_reproducible_and_manifest_rerun(tmp_path):
    cfg = _write(tmp_path, MARKOVIAN)
    a, b, c = tmp_path / "a", tmp_path / "b", tmp_path / "c"
    cli.main(["run", "--config", cfg, "--output", str(a)])
    cli.main(["run", "--config", cfg, "--output", str(b)])
    assert _files(a) == _files(b)
    cli.main(["run", "--config", str(a / "manifest.json"), "--output", str(c)])
    assert _files(a) == _files(c)


@pytest.mark.parametrize("cfg", [
    {"schema_version": 1, "experiment": "markovian-run"},
    {"schema_version": 2, "experiment": "verify-identities"},
    {"schema_version": 1, "experiment": "nonsense"},
    dict(MARKOVIAN, model={"n_sites": 2, "j_star": -1.0}),
    dict(MARKOVIAN, grid={"t_end": 0, "n_steps": 10}),
    dict(MARKOVIAN, extra=1),
    {"schema_version": 1, "experiment": "verify-h2", "model": {"n_sites": 2, "j_star": 0.1, "g": 1.0},
     "cutoff_ladder": [6, 4]},
])
def test_invalid_config_exit_2_without_outputs(tmp_path, cfg):
    out = tmp_path / "out"
    assert cli.main(["run", "--config", _write(tmp_path, cfg), "--output", str(out)]) == 2
    assert not out.exists()


def test_unreadable_config(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli.main(["run", "--config", str(bad), "--output", str(tmp_path / "o")]) == 2
    assert cli.main(["run", "--config", str(tmp_path / "missing.json"), "--output", str(tmp_path / "o")]) == 2


def test_verb_experiment_mismatch(tmp_path):
    cfg = _write(tmp_path, MARKOVIAN)
    assert cli.main(["verify", "--config", cfg, "--output", str(tmp_path / "o")]) == 2
    assert cli.main(["sweep", "--config", cfg, "--output", str(tmp_path / "o")]) == 2


def test_missing_output_dir(tmp_path):
    assert cli.main(["run", "--config", _write(tmp_path, MARKOVIAN)]) == 2


def test_failing_check_exit_1(tmp_path, capsys):
    # at this cutoff the phonon sum is still far from the closed form
    cfg = {"schema_version": 1, "experiment": "verify-h2",
           "model": {"n_sites": 2, "j_star": 0.1, "g": 2.0}, "cutoff_ladder": [2, 4]}
    out = tmp_path / "o"
    assert cli.main(["verify", "--config", _write(tmp_path, cfg), "--output", str(out)]) == 1
    assert "h2_sw_vs_closed_at_top_cutoff" in capsys.readouterr().err
    assert not json.loads((out / "report.json").read_text())["passed"]


def test_verify_identities(tmp_path):
    cfg = {"schema_version": 1, "experiment": "verify-identities", "sizes": [4, 5]}
    out = tmp_path / "o"
    assert cli.main(["verify", "--config", _write(tmp_path, cfg), "--output", str(out)]) == 0
    rows = list(csv.DictReader((out / "identities.csv").open()))
    names = {r["identity"] for r in rows}
    assert set(cli.perturbation.IDENTITY_NAMES) <= names
    assert all(float(r["max_abs_deviation"]) == 0 for r in rows)


def test_verify_h3_and_two_qubit(tmp_path):
    h3 = {"schema_version": 1, "experiment": "verify-h3",
          "model": {"n_sites": 3, "j_star": 0.1, "g": 1.0, "phonon_cutoff": 6}}
    assert cli.main(["verify", "--config", _write(tmp_path, h3), "--output", str(tmp_path / "h3")]) == 0
    tq = {"schema_version": 1, "experiment": "two-qubit-demo",
          "model": {"n_sites": 2, "j_star": 0.1, "g": 1.0, "phonon_cutoff": 8},
          "grid": {"t_end": 10, "n_steps": 1000, "sample_stride": 10}, "seed": 5}
    assert cli.main(["run", "--config", _write(tmp_path, tq), "--output", str(tmp_path / "tq")]) == 0


def test_exact_vs_markovian_reports_both_conventions(tmp_path):
    cfg = {"schema_version": 1, "experiment": "exact-vs-markovian",
           "model": {"n_sites": 2, "j_star": 0.1, "g": 2.0, "phonon_cutoff": 6},
           "grid": {"t_end": 20, "n_steps": 2000, "sample_stride": 20}}
    out = tmp_path / "o"
    assert cli.main(["run", "--config", _write(tmp_path, cfg), "--output", str(out)]) == 0
    obs = json.loads((out / "report.json").read_text())["observations"]
    assert set(obs) == {"ripple_markovian", "ripple_lf_vacuum", "ripple_bare_vacuum"}
    header = (out / "singlet_triplet.csv").read_text().splitlines()[0]
    assert header == "t,abs_markovian,abs_lf_vacuum,abs_bare_vacuum"


SWEEP = {
    "schema_version": 1,
    "experiment": "sweep",
    "model": {"n_sites": 2, "j_star": 0.1},
    "grid": {"t_end": 20, "n_steps": 200},
    "sweep": {"g": [0.5, 1.0, 1.5, 2.0], "phonon_cutoff": [4, 6, 8]},
}


def test_sweep_rows_and_parallel_determinism(tmp_path):
    cfg = _write(tmp_path, SWEEP)
    serial, parallel = tmp_path / "s", tmp_path / "p"
    assert cli.main(["sweep", "--config", cfg, "--output", str(serial)]) == 0
    assert cli.main(["sweep", "--config", cfg, "--output", str(parallel), "--parallelism", "3"]) == 0
    assert (serial / "sweep.csv").read_bytes() == (parallel / "sweep.csv").read_bytes()
    rows = list(csv.DictReader((serial / "sweep.csv").open()))
    assert len(rows) == 12
    for g in ("0.5", "1", "1.5", "2"):
        devs = [float(r["h2_sw_deviation"]) for r in rows if r["g"] == g]
        assert devs == sorted(devs, reverse=True) and len(set(devs)) == 3


def test_single_point_sweep(tmp_path):
    cfg = dict(SWEEP, sweep={"g": [1.0], "phonon_cutoff": [6]})
    out = tmp_path / "o"
    assert cli.main(["sweep", "--config", _write(tmp_path, cfg), "--output", str(out)]) == 0
    rows = list(csv.DictReader((out / "sweep.csv").open()))
    assert len(rows) == 1
    h2 = {"schema_version": 1, "experiment": "verify-h2", "model": {"n_sites": 2, "j_star": 0.1, "g": 1.0},
          "cutoff_ladder": [4, 6]}
    ref = tmp_path / "r"
    cli.main(["verify", "--config", _write(tmp_path, h2, "h2.json"), "--output", str(ref)])
    ladder = list(csv.DictReader((ref / "h2_ladder.csv").open()))
    assert rows[0]["h2_sw_deviation"] == ladder[1]["relative_max_deviation"]


@pytest.mark.parametrize("sweep", [
    {"g": [], "phonon_cutoff": [4]},
    {"g": [1.0], "phonon_cutoff": []},
    {"g": [0.5, 1.0, 1.5], "phonon_cutoff": [4, 6], "budget": 5},
])
def test_sweep_refusals(tmp_path, sweep, capsys):
    out = tmp_path / "o"
    assert cli.main(["sweep", "--config", _write(tmp_path, dict(SWEEP, sweep=sweep)), "--output", str(out)]) == 2
    assert not out.exists()
    err = capsys.readouterr().err
    assert "empty" in err or "6 points" in err
