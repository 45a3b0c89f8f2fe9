"""Read and validate one run directory.

The file contract mirrors the writer: tables are time-major then site
(currents additionally axis-major within each time block), every value a
plain decimal. Each table may exist as CSV, NDJSON or both; the CSV copy
is preferred when present. Malformed input raises RunDataError naming the
offending file and line so batch jobs fail loudly and reproducibly.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

OBSERVABLE_COLUMNS = ("time", "site", "rho", "s", "phi")
CURRENT_COLUMNS = ("time", "bond_site", "axis", "j", "delta_j", "j_tilde")
INT_COLUMNS = frozenset({"site", "bond_site", "axis"})

TIME_MATCH_RTOL = 1e-9


class RunDataError(ValueError):
    """A run directory is missing files or contains malformed rows."""


@dataclass(frozen=True)
class RunData:
    directory: Path
    meta: dict
    observables: dict  # column name -> 1d array
    currents: dict  # column name -> 1d array
    fields: list | None  # per-snapshot dicts, or None when not solved

    @property
    def dim(self):
        return int(self.meta["config"]["model"]["lattice"]["dim"])

    @property
    def extent(self):
        return tuple(int(n) for n in
                     self.meta["config"]["model"]["lattice"]["extent"])

    @property
    def boundary(self):
        return str(self.meta["config"]["model"]["lattice"]["boundary"])

    @property
    def n_sites(self):
        return int(np.prod(self.extent))

    @property
    def times(self):
        return np.unique(self.observables["time"])


def _convert_row(path, lineno, names, values):
    if len(values) != len(names):
        raise RunDataError(f"{path}: line {lineno}: expected "
                           f"{len(names)} values, got {len(values)}")
    out = []
    for name, value in zip(names, values):
        try:
            out.append(int(value) if name in INT_COLUMNS else float(value))
        except (TypeError, ValueError):
            raise RunDataError(f"{path}: line {lineno}: column {name!r} "
                               f"has non-numeric value {value!r}") from None
    return out


def _read_csv(path, columns):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = tuple(next(reader))
        except StopIteration:
            raise RunDataError(f"{path}: empty file") from None
        if header != columns:
            raise RunDataError(f"{path}: line 1: header {header} != "
                               f"expected {columns}")
        rows = [_convert_row(path, lineno, columns, row)
                for lineno, row in enumerate(reader, start=2)]
    return _columnize(path, columns, rows)


def _read_ndjson(path, columns):
    rows = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise RunDataError(
                    f"{path}: line {lineno}: invalid JSON ({exc.msg})"
                ) from None
            missing = [c for c in columns if c not in obj]
            if missing:
                raise RunDataError(f"{path}: line {lineno}: missing "
                                   f"column {missing[0]!r}")
            rows.append(_convert_row(path, lineno, columns,
                                     [obj[c] for c in columns]))
    return _columnize(path, columns, rows)


def _columnize(path, columns, rows):
    if not rows:
        raise RunDataError(f"{path}: no data rows")
    out = {}
    for i, name in enumerate(columns):
        dtype = int if name in INT_COLUMNS else float
        out[name] = np.array([row[i] for row in rows], dtype=dtype)
    return out


def _read_table(run_dir, stem, columns):
    csv_path = run_dir / f"{stem}.csv"
    ndjson_path = run_dir / f"{stem}.ndjson"
    if csv_path.exists():
        return _read_csv(csv_path, columns)
    if ndjson_path.exists():
        return _read_ndjson(ndjson_path, columns)
    raise RunDataError(f"{run_dir}: neither {csv_path.name} nor "
                       f"{ndjson_path.name} exists")


def _read_fields(path, n_sites, dim):
    out = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise RunDataError(
                    f"{path}: line {lineno}: invalid JSON ({exc.msg})"
                ) from None
            try:
                snap = {"time": float(obj["time"]),
                        "phi": np.array(obj["phi"], dtype=float),
                        "a": np.array(obj["a"], dtype=float),
                        "e": np.array(obj["e"], dtype=float)}
                if "b" in obj:
                    snap["b"] = np.array(obj["b"], dtype=float)
            except (KeyError, TypeError, ValueError) as exc:
                raise RunDataError(
                    f"{path}: line {lineno}: bad snapshot ({exc})") from None
            if snap["phi"].shape != (n_sites,):
                raise RunDataError(f"{path}: line {lineno}: phi has "
                                   f"{snap['phi'].shape[0]} entries, lattice "
                                   f"has {n_sites} sites")
            if snap["a"].shape != (dim, n_sites):
                raise RunDataError(f"{path}: line {lineno}: a has shape "
                                   f"{snap['a'].shape}, expected "
                                   f"({dim}, {n_sites})")
            out.append(snap)
    if not out:
        raise RunDataError(f"{path}: no snapshots")
    return out


def _read_meta(run_dir):
    path = run_dir / "run_meta.json"
    if not path.exists():
        raise RunDataError(f"{run_dir}: run_meta.json is missing")
    try:
        with open(path) as fh:
            meta = json.load(fh)
    except json.JSONDecodeError as exc:
        raise RunDataError(f"{path}: invalid JSON ({exc.msg})") from None
    try:
        lattice = meta["config"]["model"]["lattice"]
        dim = int(lattice["dim"])
        extent = [int(n) for n in lattice["extent"]]
        str(lattice["boundary"])
    except (KeyError, TypeError, ValueError) as exc:
        raise RunDataError(
            f"{path}: missing or malformed lattice description ({exc})"
        ) from None
    if len(extent) != dim:
        raise RunDataError(f"{path}: lattice extent {extent} does not match "
                           f"dim {dim}")
    return meta


def load_run(run_dir):
    """Load a run directory into validated column arrays."""
    run_dir = Path(run_dir)
    if not run_dir.is_dir():
        raise RunDataError(f"{run_dir}: not a directory")
    meta = _read_meta(run_dir)
    observables = _read_table(run_dir, "observables", OBSERVABLE_COLUMNS)
    currents = _read_table(run_dir, "currents", CURRENT_COLUMNS)
    run = RunData(directory=run_dir, meta=meta, observables=observables,
                  currents=currents, fields=None)
    _check_layout(run)
    fields_path = run_dir / "fields.ndjson"
    fields = None
    if fields_path.exists():
        fields = _read_fields(fields_path, run.n_sites, run.dim)
    return RunData(directory=run_dir, meta=meta, observables=observables,
                   currents=currents, fields=fields)


def _check_layout(run):
    """Verify the time-major row layout the grid pivots rely on."""
    ns = run.n_sites
    times = run.times
    nt = times.shape[0]
    obs = run.observables
    if obs["time"].shape[0] != nt * ns:
        raise RunDataError(
            f"{run.directory / 'observables'}: {obs['time'].shape[0]} rows "
            f"do not tile {nt} times x {ns} sites")
    if not np.array_equal(obs["site"].reshape(nt, ns),
                          np.tile(np.arange(ns), (nt, 1))):
        raise RunDataError(f"{run.directory / 'observables'}: rows are not "
                           "in time-major site order")
    cur = run.currents
    if cur["time"].shape[0] != nt * run.dim * ns:
        raise RunDataError(
            f"{run.directory / 'currents'}: {cur['time'].shape[0]} rows do "
            f"not tile {nt} times x {run.dim} axes x {ns} sites")
    sites = cur["bond_site"].reshape(nt, run.dim, ns)
    axes = cur["axis"].reshape(nt, run.dim, ns)
    if not (np.array_equal(sites, np.broadcast_to(np.arange(ns),
                                                  sites.shape))
            and np.array_equal(axes, np.broadcast_to(
                np.arange(run.dim)[:, None], axes.shape))):
        raise RunDataError(f"{run.directory / 'currents'}: rows are not in "
                           "time-major axis/site order")


def observable_grid(run, column):
    """Pivot one observables column into a (n_times, n_sites) array."""
    return run.observables[column].reshape(run.times.shape[0], run.n_sites)


def current_grid(run, column):
    """Pivot one currents column into a (n_times, dim, n_sites) array."""
    return run.currents[column].reshape(run.times.shape[0], run.dim,
                                        run.n_sites)
