"""End-to-end command-line behavior: exit codes, files, determinism."""

import json

import numpy as np
import pytest

from nhcurrent.cli import main
from nhcurrent.runio import (read_currents_csv, read_currents_ndjson,
                             read_fields_ndjson, read_observables_csv,
                             read_observables_ndjson)


def canonical_tree(outdir, **extra):
    tree = {
        "model": {
            "lattice": {"dim": 1, "extent": [2]},
            "gamma": {"kind": "onsite", "values": [-1.0, 0.0]},
        },
        "initial": {"kind": "plane_wave", "k": [0]},
        "evolve": {"dt": 1e-3, "steps": 20, "record_every": 5,
                   "method": "expm_renorm"},
        "output": {"directory": str(outdir)},
    }
    tree.update(extra)
    return tree


def write_config(tmp_path, tree, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(tree))
    return str(path)


def test_validate_ok(tmp_path, capsys):
    cfg = write_config(tmp_path, canonical_tree(tmp_path / "out"))
    assert main(["validate", cfg]) == 0
    out = capsys.readouterr().out
    assert "ok:" in out
    assert "2 sites" in out


def test_validate_bad_config_exits_2(tmp_path, capsys):
    tree = canonical_tree(tmp_path / "out")
    tree["evolve"]["method"] = "euler"
    cfg = write_config(tmp_path, tree)
    assert main(["validate", cfg]) == 2
    assert "config error:" in capsys.readouterr().err


def test_missing_config_file_exits_2(tmp_path, capsys):
    assert main(["run", str(tmp_path / "absent.json")]) == 2
    assert "config error:" in capsys.readouterr().err


def test_run_writes_all_tables(tmp_path, capsys):
    outdir = tmp_path / "out"
    cfg = write_config(tmp_path, canonical_tree(outdir))
    assert main(["run", cfg]) == 0
    for name in ("observables.csv", "observables.ndjson", "currents.csv",
                 "currents.ndjson", "run_meta.json"):
        assert (outdir / name).exists()
    line = capsys.readouterr().out
    assert "5 recorded states" in line
    meta = json.loads((outdir / "run_meta.json").read_text())
    assert meta["tool"] == "nhcurrent"
    assert meta["recorded_steps"] == 5
    assert meta["neutralizing_background"] is False
    assert meta["config"]["model"]["lattice"]["extent"] == [2]


def test_run_initial_row_hand_values(tmp_path):
    outdir = tmp_path / "out"
    cfg = write_config(tmp_path, canonical_tree(outdir))
    main(["run", cfg, "--quiet"])
    obs = read_observables_csv(outdir / "observables.csv")
    first = obs["time"] == 0.0
    # plane-wave k=0 on two sites: rho = 1/2 each, s = (-1/2, +1/2),
    # phi from the grounded two-site solve is 1/2 on both sites
    assert np.allclose(obs["rho"][first], [0.5, 0.5], atol=1e-15)
    assert np.allclose(obs["s"][first], [-0.5, 0.5], atol=1e-12)
    assert np.allclose(obs["phi"][first], [0.5, 0.5], atol=1e-12)
    cur = read_currents_csv(outdir / "currents.csv")
    first = cur["time"] == 0.0
    assert np.allclose(cur["j"][first], [0.0, 0.0], atol=1e-15)
    assert np.allclose(cur["delta_j"][first], [0.5, 0.0], atol=1e-12)
    assert np.allclose(cur["j_tilde"][first], [0.5, 0.0], atol=1e-12)


def test_run_formats_agree(tmp_path):
    outdir = tmp_path / "out"
    cfg = write_config(tmp_path, canonical_tree(outdir))
    main(["run", cfg, "--quiet"])
    a = read_observables_csv(outdir / "observables.csv")
    b = read_observables_ndjson(outdir / "observables.ndjson")
    for name in a:
        assert np.array_equal(a[name], b[name])
    c = read_currents_csv(outdir / "currents.csv")
    d = read_currents_ndjson(outdir / "currents.ndjson")
    for name in c:
        assert np.array_equal(c[name], d[name])


def test_format_override_csv_only(tmp_path):
    outdir = tmp_path / "out"
    cfg = write_config(tmp_path, canonical_tree(outdir))
    main(["run", cfg, "--quiet", "--format", "csv"])
    assert (outdir / "observables.csv").exists()
    assert not (outdir / "observables.ndjson").exists()


def test_runs_are_byte_identical(tmp_path):
    outdir = tmp_path / "out"
    cfg = write_config(tmp_path, canonical_tree(outdir))
    main(["run", cfg, "--quiet"])
    names = ("observables.csv", "currents.csv", "observables.ndjson",
             "currents.ndjson", "run_meta.json")
    before = {n: (outdir / n).read_bytes() for n in names}
    main(["run", cfg, "--quiet"])
    for n in names:
        assert (outdir / n).read_bytes() == before[n], n


def test_zero_gamma_needs_no_correction(tmp_path):
    outdir = tmp_path / "out"
    tree = canonical_tree(outdir)
    tree["model"]["gamma"]["values"] = [0.0, 0.0]
    tree["initial"] = {"kind": "localized", "site": 0}
    cfg = write_config(tmp_path, tree)
    main(["run", cfg, "--quiet"])
    cur = read_currents_csv(outdir / "currents.csv")
    assert np.abs(cur["delta_j"]).max() < 1e-10
    assert np.array_equal(cur["j"], cur["j_tilde"])


def test_fields_run_writes_snapshots(tmp_path):
    outdir = tmp_path / "out"
    tree = {
        "model": {
            "lattice": {"dim": 1, "extent": [8], "boundary": "periodic"},
            "gamma": {"kind": "onsite",
                      "values": list(0.2 * np.cos(2 * np.pi * np.arange(8)
                                                  / 8))},
        },
        "initial": {"kind": "gaussian", "center": [4.0], "width": 1.5},
        "evolve": {"dt": 1e-2, "steps": 40, "record_every": 10},
        "fields": {"enable": True, "solver": "wave"},
        "output": {"directory": str(outdir)},
    }
    cfg = write_config(tmp_path, tree)
    assert main(["run", cfg, "--quiet"]) == 0
    snaps = read_fields_ndjson(outdir / "fields.ndjson")
    assert len(snaps) == 3  # 5 recorded states, interior ones only
    assert snaps[0]["phi"].shape == (8,)
    assert snaps[0]["a"].shape == (1, 8)
    assert "b" not in snaps[0]


def test_oracle_subcommand_reports_convergence(tmp_path, capsys):
    outdir = tmp_path / "out"
    cfg = write_config(tmp_path, canonical_tree(outdir))
    assert main(["oracle", cfg]) == 0
    assert "monotone" in capsys.readouterr().out
    report = json.loads((outdir / "oracle_report.json").read_text())
    assert report["propagator_agreement"]["ok"] is True
    assert report["jump_realization"]["channels"] == 1
    assert report["jump_realization"]["reconstruction_residual"] < 1e-12
    assert report["effective_hamiltonian_check"]["ok"] is True
    conv = report["postselection_convergence"]
    assert conv["monotone"] is True
    for r in conv["ratios"]:
        assert 3.5 < r < 4.5


def test_oracle_skips_uniform_gamma(tmp_path):
    outdir = tmp_path / "out"
    tree = canonical_tree(outdir)
    tree["model"]["gamma"]["values"] = [-1.0, -1.0]
    cfg = write_config(tmp_path, tree)
    assert main(["oracle", cfg, "--quiet"]) == 0
    report = json.loads((outdir / "oracle_report.json").read_text())
    assert "skipped" in report["postselection_convergence"]
    assert report["jump_realization"]["channels"] == 0


@pytest.mark.filterwarnings("ignore::UserWarning", "ignore::RuntimeWarning")
def test_numerical_failure_exits_3_with_error_file(tmp_path, capsys):
    outdir = tmp_path / "out"
    tree = canonical_tree(outdir)
    tree["model"]["gamma"]["values"] = [1e6, 0.0]
    tree["evolve"] = {"dt": 1.0, "steps": 1, "record_every": 1,
                      "method": "expm_renorm"}
    cfg = write_config(tmp_path, tree)
    assert main(["run", cfg, "--quiet"]) == 3
    assert "numerical failure" in capsys.readouterr().err
    err = json.loads((outdir / "error.json").read_text())
    assert err["type"] == "NumericalError"
    assert "reduce dt" in err["error"]


@pytest.mark.filterwarnings("ignore::UserWarning")
def test_cfl_violation_exits_3(tmp_path):
    outdir = tmp_path / "out"
    tree = {
        "model": {
            "lattice": {"dim": 1, "extent": [8], "boundary": "periodic"},
            "gamma": {"kind": "onsite", "values": [0.0] * 8},
        },
        "initial": {"kind": "gaussian", "center": [4.0], "width": 1.5},
        "evolve": {"dt": 0.5, "steps": 8, "record_every": 4},
        "fields": {"enable": True, "solver": "wave"},
        "output": {"directory": str(outdir)},
    }
    cfg = write_config(tmp_path, tree)
    assert main(["run", cfg, "--quiet"]) == 3
    err = json.loads((outdir / "error.json").read_text())
    assert "CFL" in err["error"]


@pytest.mark.filterwarnings("ignore::UserWarning", "ignore::RuntimeWarning")
def test_sweep_runs_all_and_returns_worst(tmp_path, capsys):
    good = canonical_tree(tmp_path / "good_out")
    bad = canonical_tree(tmp_path / "bad_out")
    bad["model"]["gamma"]["values"] = [1e6, 0.0]
    bad["evolve"] = {"dt": 1.0, "steps": 1, "record_every": 1,
                     "method": "expm_renorm"}
    cfgdir = tmp_path / "configs"
    cfgdir.mkdir()
    (cfgdir / "a_good.json").write_text(json.dumps(good))
    (cfgdir / "b_bad.json").write_text(json.dumps(bad))
    assert main(["sweep", str(cfgdir / "*.json")]) == 3
    out = capsys.readouterr().out
    assert "a_good.json: ok" in out
    assert "b_bad.json: exit 3" in out
    assert (tmp_path / "good_out" / "observables.csv").exists()
    assert (tmp_path / "bad_out" / "error.json").exists()


def test_sweep_empty_glob_exits_2(tmp_path, capsys):
    assert main(["sweep", str(tmp_path / "nothing*.json")]) == 2
    assert "no configs match" in capsys.readouterr().err


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert capsys.readouterr().out.strip() == "0.1.0"
