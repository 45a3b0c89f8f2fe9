"""Config parsing, validation paths, initial states and the metadata echo."""

import json

import numpy as np
import pytest

from nhcurrent import (ConfigError, GaussianInit, LocalizedInit,
                       build_initial_state, config_echo, parse_config,
                       parse_config_tree)
from nhcurrent.lattice import LatticeSpec
from nhcurrent.model import MatrixGamma, OnsiteGamma


def minimal_tree():
    return {
        "model": {
            "lattice": {"dim": 1, "extent": [2]},
            "gamma": {"kind": "onsite", "values": [-1.0, 0.0]},
        },
    }


def test_minimal_config_fills_defaults():
    cfg = parse_config_tree(minimal_tree())
    assert cfg.evolve.dt == 1e-3
    assert cfg.evolve.steps == 1000
    assert cfg.evolve.method == "rk4_nonlinear"
    assert cfg.evolve.record_every == 10
    assert cfg.model.lattice.boundary == "open"
    assert cfg.model.hopping == 1.0
    assert cfg.model.charge == 1.0
    assert cfg.initial == LocalizedInit(site=0)
    assert cfg.fields.enable is False
    assert cfg.oracle.enable is False
    assert cfg.output.directory == "run"
    assert cfg.output.formats == "both"


def test_gamma_onsite_length_error_names_path():
    tree = minimal_tree()
    tree["model"]["gamma"]["values"] = [-1.0]
    with pytest.raises(ConfigError, match=r"model\.gamma\.values"):
        parse_config_tree(tree)


def test_missing_model_names_path():
    with pytest.raises(ConfigError, match="model: missing key"):
        parse_config_tree({})


def test_bad_method_names_path_and_choices():
    tree = minimal_tree()
    tree["evolve"] = {"method": "euler"}
    with pytest.raises(ConfigError, match=r"evolve\.method: must be one of"):
        parse_config_tree(tree)


def test_negative_dt_names_evolve():
    tree = minimal_tree()
    tree["evolve"] = {"dt": -1.0}
    with pytest.raises(ConfigError, match="evolve"):
        parse_config_tree(tree)


def test_localized_site_out_of_range():
    tree = minimal_tree()
    tree["initial"] = {"kind": "localized", "site": 5}
    with pytest.raises(ConfigError, match=r"initial\.site"):
        parse_config_tree(tree)


def test_extent_dim_mismatch_names_lattice():
    tree = minimal_tree()
    tree["model"]["lattice"] = {"dim": 2, "extent": [4]}
    with pytest.raises(ConfigError, match=r"model\.lattice"):
        parse_config_tree(tree)


def test_fields_on_open_lattice_rejected():
    tree = minimal_tree()
    tree["fields"] = {"enable": True}
    with pytest.raises(ConfigError, match=r"fields\.enable"):
        parse_config_tree(tree)


def test_matrix_gamma_hermiticity_failure_names_gamma():
    tree = minimal_tree()
    tree["model"]["gamma"] = {
        "kind": "matrix",
        "entries": {"real": [[0.0, 1.0], [0.0, 0.0]]},
    }
    with pytest.raises(ConfigError, match=r"model\.gamma"):
        parse_config_tree(tree)


def test_potential_length_check():
    tree = minimal_tree()
    tree["model"]["potential"] = [0.0, 1.0, 2.0]
    with pytest.raises(ConfigError, match=r"model\.potential"):
        parse_config_tree(tree)


def test_boolean_is_not_a_number():
    tree = minimal_tree()
    tree["model"]["hopping"] = True
    with pytest.raises(ConfigError, match=r"model\.hopping"):
        parse_config_tree(tree)


def test_gaussian_needs_center_and_width():
    tree = minimal_tree()
    tree["initial"] = {"kind": "gaussian"}
    with pytest.raises(ConfigError, match=r"initial\.center"):
        parse_config_tree(tree)


def test_custom_zero_vector_rejected():
    tree = minimal_tree()
    tree["initial"] = {"kind": "custom",
                       "amplitudes": {"real": [0.0, 0.0]}}
    with pytest.raises(ConfigError, match="zero vector"):
        parse_config_tree(tree)


def test_parse_config_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        parse_config(tmp_path / "nope.json")


def test_parse_config_bad_json(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(ConfigError, match="not valid JSON"):
        parse_config(p)


def test_parse_config_reads_file(tmp_path):
    p = tmp_path / "ok.json"
    p.write_text(json.dumps(minimal_tree()))
    cfg = parse_config(p)
    assert isinstance(cfg.model.gamma, OnsiteGamma)


# ------------------------------------------------------------ initial states

def test_initial_localized():
    lat = LatticeSpec(dim=1, extent=(4,), boundary="open")
    state = build_initial_state(lat, LocalizedInit(site=2))
    assert state.amps[2] == 1.0
    assert np.abs(np.delete(state.amps, 2)).max() == 0.0
    assert state.time == 0.0


def test_initial_gaussian_wraps_on_periodic():
    lat = LatticeSpec(dim=1, extent=(8,), boundary="periodic")
    a = build_initial_state(lat, GaussianInit(center=(0.0,), width=1.0))
    b = build_initial_state(lat, GaussianInit(center=(8.0,), width=1.0))
    assert np.abs(a.amps - b.amps).max() < 1e-15
    # site 7 is distance 1 from center 0 on the ring, same weight as site 1
    assert abs(a.amps[7]) == pytest.approx(abs(a.amps[1]), abs=1e-15)


def test_initial_plane_wave_zero_mode_is_uniform():
    tree = minimal_tree()
    tree["initial"] = {"kind": "plane_wave", "k": [0]}
    cfg = parse_config_tree(tree)
    state = build_initial_state(cfg.model.lattice, cfg.initial)
    assert np.abs(state.amps - 1.0 / np.sqrt(2.0)).max() < 1e-15


def test_initial_plane_wave_unit_mode():
    lat = LatticeSpec(dim=1, extent=(8,), boundary="periodic")
    tree = {"model": {"lattice": {"dim": 1, "extent": [8],
                                  "boundary": "periodic"},
                      "gamma": {"kind": "onsite", "values": [0.0] * 8}},
            "initial": {"kind": "plane_wave", "k": [1]}}
    cfg = parse_config_tree(tree)
    state = build_initial_state(lat, cfg.initial)
    x = np.arange(8)
    expected = np.exp(2j * np.pi * x / 8) / np.sqrt(8.0)
    assert np.abs(state.amps - expected).max() < 1e-15


def test_initial_custom_is_normalized():
    tree = minimal_tree()
    tree["initial"] = {"kind": "custom",
                       "amplitudes": {"real": [3.0, 0.0], "imag": [0.0, 4.0]}}
    cfg = parse_config_tree(tree)
    state = build_initial_state(cfg.model.lattice, cfg.initial)
    assert np.abs(state.amps - [0.6, 0.8j]).max() < 1e-15


# ------------------------------------------------------------------- echo

def test_config_echo_round_trips():
    tree = minimal_tree()
    tree["model"]["potential"] = [0.5, -0.5]
    tree["evolve"] = {"dt": 2e-3, "steps": 50, "method": "expm_renorm",
                      "record_every": 5}
    tree["initial"] = {"kind": "plane_wave", "k": [0]}
    tree["oracle"] = {"enable": True}
    tree["output"] = {"directory": "out", "formats": "csv"}
    cfg = parse_config_tree(tree)
    echo = config_echo(cfg)
    json.dumps(echo)  # must be serializable as-is
    again = parse_config_tree(echo)
    assert config_echo(again) == echo
    assert again.evolve == cfg.evolve
    assert again.initial == cfg.initial
    assert again.output == cfg.output


def test_config_echo_matrix_gamma_round_trips():
    tree = minimal_tree()
    tree["model"]["gamma"] = {
        "kind": "matrix",
        "entries": {"real": [[-1.0, 0.0], [0.0, -2.0]],
                    "imag": [[0.0, 0.5], [-0.5, 0.0]]},
    }
    cfg = parse_config_tree(tree)
    again = parse_config_tree(config_echo(cfg))
    assert isinstance(again.model.gamma, MatrixGamma)
    assert np.array_equal(again.model.gamma.entries, cfg.model.gamma.entries)
