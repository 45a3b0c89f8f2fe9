"""Run configuration: JSON schema, validation and initial-state construction.

Configs are plain JSON trees. Every validation failure names the offending
key path (for example "model.gamma.values"), so a bad config can be fixed
without reading source code. Complex-valued entries are written as
{"real": [...], "imag": [...]} pairs; the imaginary part may be omitted.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .evolve import METHODS, EvolveConfig
from .lattice import BOUNDARIES, LatticeSpec
from .model import (JumpGamma, MatrixGamma, ModelSpec, OnsiteGamma,
                    QuantumState)

INITIAL_KINDS = ("localized", "gaussian", "plane_wave", "custom")
FIELD_SOLVERS = ("quasistatic", "retarded", "wave")
FORMATS = ("csv", "ndjson", "both")

DEFAULTS = {
    "evolve.dt": 1e-3,
    "evolve.steps": 1000,
    "evolve.method": "rk4_nonlinear",
    "evolve.record_every": 10,
    "model.lattice.boundary": "open",
    "model.lattice.spacing": 1.0,
    "model.hopping": 1.0,
    "model.charge": 1.0,
    "initial.kind": "localized",
    "initial.site": 0,
    "fields.enable": False,
    "fields.solver": "wave",
    "oracle.enable": False,
    "output.directory": "run",
    "output.formats": "both",
}


@dataclass(frozen=True)
class LocalizedInit:
    site: int


@dataclass(frozen=True)
class GaussianInit:
    center: tuple
    width: float


@dataclass(frozen=True)
class PlaneWaveInit:
    k: tuple  # integer mode numbers per axis


@dataclass(frozen=True)
class CustomInit:
    amplitudes: np.ndarray  # normalized on load


@dataclass(frozen=True)
class FieldOptions:
    enable: bool = False
    solver: str = "wave"


@dataclass(frozen=True)
class OracleOptions:
    enable: bool = False


@dataclass(frozen=True)
class OutputOptions:
    directory: str = "run"
    formats: str = "both"


@dataclass(frozen=True)
class RunConfig:
    model: ModelSpec
    evolve: EvolveConfig
    initial: object
    fields: FieldOptions = FieldOptions()
    oracle: OracleOptions = OracleOptions()
    output: OutputOptions = OutputOptions()


def _fail(path, msg):
    raise ConfigError(f"{path}: {msg}")


def _get(tree, path, key, default=None, required=False):
    if key not in tree:
        if required:
            _fail(f"{path}.{key}" if path else key, "missing key")
        return default
    return tree[key]


def _expect_map(value, path):
    if not isinstance(value, dict):
        _fail(path, f"expected an object, got {type(value).__name__}")
    return value


def _expect_number(value, path):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(path, f"expected a number, got {type(value).__name__}")
    return float(value)


def _expect_int(value, path):
    if isinstance(value, bool) or not isinstance(value, int):
        _fail(path, f"expected an integer, got {type(value).__name__}")
    return value


def _expect_bool(value, path):
    if not isinstance(value, bool):
        _fail(path, f"expected a boolean, got {type(value).__name__}")
    return value


def _expect_str(value, path, choices=None):
    if not isinstance(value, str):
        _fail(path, f"expected a string, got {type(value).__name__}")
    if choices is not None and value not in choices:
        _fail(path, f"must be one of {choices}, got {value!r}")
    return value


def _expect_number_list(value, path):
    if not isinstance(value, list):
        _fail(path, f"expected an array, got {type(value).__name__}")
    return [_expect_number(v, f"{path}[{i}]") for i, v in enumerate(value)]


def _complex_array(tree, path, shape_hint=None):
    """Parse {"real": ..., "imag": ...} into a complex ndarray."""
    tree = _expect_map(tree, path)
    if "real" not in tree:
        _fail(f"{path}.real", "missing key")
    real = np.asarray(tree["real"], dtype=float)
    imag = tree.get("imag")
    imag = np.zeros_like(real) if imag is None else np.asarray(imag, dtype=float)
    if imag.shape != real.shape:
        _fail(f"{path}.imag", f"shape {imag.shape} != real part {real.shape}")
    return real + 1j * imag


def _parse_lattice(tree, path):
    tree = _expect_map(tree, path)
    dim = _expect_int(_get(tree, path, "dim", required=True), f"{path}.dim")
    extent = _get(tree, path, "extent", required=True)
    if not isinstance(extent, list):
        _fail(f"{path}.extent", "expected an array of site counts")
    extent = tuple(_expect_int(n, f"{path}.extent[{i}]")
                   for i, n in enumerate(extent))
    boundary = _expect_str(
        _get(tree, path, "boundary", DEFAULTS["model.lattice.boundary"]),
        f"{path}.boundary", BOUNDARIES)
    spacing = _expect_number(
        _get(tree, path, "spacing", DEFAULTS["model.lattice.spacing"]),
        f"{path}.spacing")
    try:
        return LatticeSpec(dim=dim, extent=extent, boundary=boundary,
                           spacing=spacing)
    except ValueError as exc:
        _fail(path, str(exc))


def _parse_gamma(tree, path, n_sites):
    tree = _expect_map(tree, path)
    kind = _expect_str(_get(tree, path, "kind", required=True),
                       f"{path}.kind", ("onsite", "matrix", "jumps"))
    try:
        if kind == "onsite":
            values = _expect_number_list(
                _get(tree, path, "values", required=True), f"{path}.values")
            if len(values) != n_sites:
                _fail(f"{path}.values",
                      f"length {len(values)} != lattice sites {n_sites}")
            return OnsiteGamma(np.array(values))
        if kind == "matrix":
            entries = _complex_array(
                _get(tree, path, "entries", required=True), f"{path}.entries")
            return MatrixGamma(entries)
        ops_tree = _get(tree, path, "ops", required=True)
        if not isinstance(ops_tree, list) or not ops_tree:
            _fail(f"{path}.ops", "expected a nonempty array of operators")
        ops = [_complex_array(op, f"{path}.ops[{i}]")
               for i, op in enumerate(ops_tree)]
        return JumpGamma(tuple(ops))
    except ConfigError:
        raise
    except ValueError as exc:
        _fail(path, str(exc))


def _parse_model(tree, path):
    tree = _expect_map(tree, path)
    lattice = _parse_lattice(_get(tree, path, "lattice", required=True),
                             f"{path}.lattice")
    hopping = _expect_number(
        _get(tree, path, "hopping", DEFAULTS["model.hopping"]),
        f"{path}.hopping")
    charge = _expect_number(
        _get(tree, path, "charge", DEFAULTS["model.charge"]),
        f"{path}.charge")
    potential = _get(tree, path, "potential")
    if potential is not None:
        potential = np.array(
            _expect_number_list(potential, f"{path}.potential"))
        if potential.shape != (lattice.n_sites,):
            _fail(f"{path}.potential",
                  f"length {potential.shape[0]} != lattice sites "
                  f"{lattice.n_sites}")
    gamma = _parse_gamma(_get(tree, path, "gamma", required=True),
                         f"{path}.gamma", lattice.n_sites)
    try:
        return ModelSpec(lattice=lattice, gamma=gamma, hopping=hopping,
                         potential=potential, charge=charge)
    except (TypeError, ValueError) as exc:
        _fail(path, str(exc))


def _parse_evolve(tree, path):
    tree = _expect_map(tree, path)
    try:
        return EvolveConfig(
            dt=_expect_number(_get(tree, path, "dt", DEFAULTS["evolve.dt"]),
                              f"{path}.dt"),
            steps=_expect_int(
                _get(tree, path, "steps", DEFAULTS["evolve.steps"]),
                f"{path}.steps"),
            method=_expect_str(
                _get(tree, path, "method", DEFAULTS["evolve.method"]),
                f"{path}.method", METHODS),
            record_every=_expect_int(
                _get(tree, path, "record_every",
                     DEFAULTS["evolve.record_every"]),
                f"{path}.record_every"))
    except ValueError as exc:
        _fail(path, str(exc))


def _parse_initial(tree, path, lattice):
    tree = _expect_map(tree, path)
    kind = _expect_str(
        _get(tree, path, "kind", DEFAULTS["initial.kind"]),
        f"{path}.kind", INITIAL_KINDS)
    if kind == "localized":
        site = _expect_int(
            _get(tree, path, "site", DEFAULTS["initial.site"]), f"{path}.site")
        if not 0 <= site < lattice.n_sites:
            _fail(f"{path}.site",
                  f"site {site} out of range [0, {lattice.n_sites})")
        return LocalizedInit(site)
    if kind == "gaussian":
        center = _expect_number_list(
            _get(tree, path, "center", required=True), f"{path}.center")
        if len(center) != lattice.dim:
            _fail(f"{path}.center",
                  f"needs {lattice.dim} coordinates, got {len(center)}")
        width = _expect_number(_get(tree, path, "width", required=True),
                               f"{path}.width")
        if not width > 0:
            _fail(f"{path}.width", f"must be positive, got {width}")
        return GaussianInit(tuple(center), width)
    if kind == "plane_wave":
        k = _get(tree, path, "k", required=True)
        if not isinstance(k, list):
            _fail(f"{path}.k", "expected an array of integer mode numbers")
        k = tuple(_expect_int(m, f"{path}.k[{i}]") for i, m in enumerate(k))
        if len(k) != lattice.dim:
            _fail(f"{path}.k",
                  f"needs {lattice.dim} mode numbers, got {len(k)}")
        return PlaneWaveInit(k)
    amps = _complex_array(_get(tree, path, "amplitudes", required=True),
                          f"{path}.amplitudes")
    if amps.shape != (lattice.n_sites,):
        _fail(f"{path}.amplitudes",
              f"length {amps.shape} != lattice sites {lattice.n_sites}")
    norm = np.linalg.norm(amps)
    if norm == 0:
        _fail(f"{path}.amplitudes", "cannot normalize the zero vector")
    return CustomInit(amps / norm)


def parse_config_tree(tree):
    """Validate a JSON tree into a RunConfig; errors carry key paths."""
    tree = _expect_map(tree, "<config>")
    model = _parse_model(_get(tree, "", "model", required=True), "model")
    evolve = _parse_evolve(_get(tree, "", "evolve", {}), "evolve")
    initial = _parse_initial(_get(tree, "", "initial", {}), "initial",
                             model.lattice)
    ftree = _expect_map(_get(tree, "", "fields", {}), "fields")
    fields = FieldOptions(
        enable=_expect_bool(
            _get(ftree, "fields", "enable", DEFAULTS["fields.enable"]),
            "fields.enable"),
        solver=_expect_str(
            _get(ftree, "fields", "solver", DEFAULTS["fields.solver"]),
            "fields.solver", FIELD_SOLVERS))
    if fields.enable and not model.lattice.periodic:
        _fail("fields.enable",
              "field reconstruction needs a periodic lattice (the transverse "
              "current split is spectral)")
    otree = _expect_map(_get(tree, "", "oracle", {}), "oracle")
    oracle = OracleOptions(
        enable=_expect_bool(
            _get(otree, "oracle", "enable", DEFAULTS["oracle.enable"]),
            "oracle.enable"))
    outtree = _expect_map(_get(tree, "", "output", {}), "output")
    output = OutputOptions(
        directory=_expect_str(
            _get(outtree, "output", "directory",
                 DEFAULTS["output.directory"]), "output.directory"),
        formats=_expect_str(
            _get(outtree, "output", "formats", DEFAULTS["output.formats"]),
            "output.formats", FORMATS))
    return RunConfig(model=model, evolve=evolve, initial=initial,
                     fields=fields, oracle=oracle, output=output)


def parse_config(path):
    """Load and validate a JSON config file."""
    try:
        with open(path) as fh:
            tree = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return parse_config_tree(tree)


def build_initial_state(lattice, initial):
    """Construct the normalized t=0 state for any initial-condition kind."""
    n = lattice.n_sites
    if isinstance(initial, LocalizedInit):
        amps = np.zeros(n, dtype=complex)
        amps[initial.site] = 1.0
        return QuantumState(amps, 0.0)
    if isinstance(initial, GaussianInit):
        xyz = lattice.coordinates().astype(float)
        d2 = np.zeros(n)
        for a in range(lattice.dim):
            delta = xyz[:, a] - initial.center[a]
            if lattice.periodic:
                extent = lattice.extent[a]
                delta = (delta + extent / 2.0) % extent - extent / 2.0
            d2 += delta ** 2
        amps = np.exp(-d2 / (4.0 * initial.width ** 2)).astype(complex)
        return QuantumState(amps / np.linalg.norm(amps), 0.0)
    if isinstance(initial, PlaneWaveInit):
        xyz = lattice.coordinates().astype(float)
        phase = np.zeros(n)
        for a in range(lattice.dim):
            phase += 2.0 * np.pi * initial.k[a] * xyz[:, a] / lattice.extent[a]
        amps = np.exp(1j * phase) / np.sqrt(n)
        return QuantumState(amps, 0.0)
    if isinstance(initial, CustomInit):
        return QuantumState(initial.amplitudes.copy(), 0.0)
    raise TypeError(f"unknown initial condition {type(initial).__name__}")


def config_echo(config):
    """JSON-ready echo of a validated RunConfig, for run metadata."""
    model = config.model
    lattice = model.lattice
    gamma = model.gamma
    if isinstance(gamma, OnsiteGamma):
        gamma_echo = {"kind": "onsite", "values": list(gamma.values)}
    elif isinstance(gamma, MatrixGamma):
        gamma_echo = {"kind": "matrix",
                      "entries": {"real": gamma.entries.real.tolist(),
                                  "imag": gamma.entries.imag.tolist()}}
    else:
        gamma_echo = {"kind": "jumps",
                      "ops": [{"real": op.real.tolist(),
                               "imag": op.imag.tolist()}
                              for op in gamma.ops]}
    initial = config.initial
    if isinstance(initial, LocalizedInit):
        initial_echo = {"kind": "localized", "site": initial.site}
    elif isinstance(initial, GaussianInit):
        initial_echo = {"kind": "gaussian", "center": list(initial.center),
                        "width": initial.width}
    elif isinstance(initial, PlaneWaveInit):
        initial_echo = {"kind": "plane_wave", "k": list(initial.k)}
    else:
        initial_echo = {"kind": "custom",
                        "amplitudes": {
                            "real": initial.amplitudes.real.tolist(),
                            "imag": initial.amplitudes.imag.tolist()}}
    return {
        "model": {
            "lattice": {"dim": lattice.dim, "extent": list(lattice.extent),
                        "boundary": lattice.boundary,
                        "spacing": lattice.spacing},
            "hopping": model.hopping,
            "potential": list(model.potential),
            "charge": model.charge,
            "gamma": gamma_echo,
        },
        "evolve": {"dt": config.evolve.dt, "steps": config.evolve.steps,
                   "method": config.evolve.method,
                   "record_every": config.evolve.record_every},
        "initial": initial_echo,
        "fields": {"enable": config.fields.enable,
                   "solver": config.fields.solver},
        "oracle": {"enable": config.oracle.enable},
        "output": {"directory": config.output.directory,
                   "formats": config.output.formats},
    }
