"""Deterministic file formats for run outputs.

Tables (observables, currents) exist in CSV and NDJSON form; field
snapshots are NDJSON only because of their nested per-axis layout. Every
number is serialized with 17 significant digits, which round-trips IEEE
doubles exactly, and rows are emitted in a fixed order (time-major, then
site index), so identical runs produce byte-identical files.
"""

from __future__ import annotations

import csv
import json

import numpy as np

OBSERVABLE_COLUMNS = ("time", "site", "rho", "s", "phi")
CURRENT_COLUMNS = ("time", "bond_site", "axis", "j", "delta_j", "j_tilde")


def fmt(x):
    """Serialize one float with 17 significant digits (lossless)."""
    return "%.17g" % x


def _jlist(values):
    return "[" + ",".join(fmt(v) for v in values) + "]"


def _jnested(bond_field):
    return "[" + ",".join(_jlist(axis) for axis in bond_field) + "]"


def write_observables_csv(path, rows):
    """rows: iterable of (time, site, rho, s, phi)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(OBSERVABLE_COLUMNS)
        for time, site, rho, s, phi in rows:
            writer.writerow([fmt(time), site, fmt(rho), fmt(s), fmt(phi)])


def write_currents_csv(path, rows):
    """rows: iterable of (time, bond_site, axis, j, delta_j, j_tilde)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CURRENT_COLUMNS)
        for time, site, axis, j, dj, jt in rows:
            writer.writerow([fmt(time), site, axis, fmt(j), fmt(dj), fmt(jt)])


def write_observables_ndjson(path, rows):
    with open(path, "w") as fh:
        for time, site, rho, s, phi in rows:
            fh.write('{"time":%s,"site":%d,"rho":%s,"s":%s,"phi":%s}\n'
                     % (fmt(time), site, fmt(rho), fmt(s), fmt(phi)))


def write_currents_ndjson(path, rows):
    with open(path, "w") as fh:
        for time, site, axis, j, dj, jt in rows:
            fh.write('{"time":%s,"bond_site":%d,"axis":%d,"j":%s,'
                     '"delta_j":%s,"j_tilde":%s}\n'
                     % (fmt(time), site, axis, fmt(j), fmt(dj), fmt(jt)))


def write_fields_ndjson(path, snapshots):
    """One FieldSnapshot per line; b is present only for 2D lattices."""
    with open(path, "w") as fh:
        for snap in snapshots:
            parts = ['"time":%s' % fmt(snap.time),
                     '"phi":%s' % _jlist(snap.phi),
                     '"a":%s' % _jnested(snap.a),
                     '"e":%s' % _jnested(snap.e)]
            if snap.b is not None:
                parts.append('"b":%s' % _jlist(snap.b))
            fh.write("{" + ",".join(parts) + "}\n")


def write_json(path, payload):
    """Pretty, key-sorted JSON for metadata and reports."""
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _read_table_csv(path, columns, int_columns):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != columns:
            raise ValueError(f"{path}: header {header} != expected {columns}")
        raw = list(reader)
    out = {}
    for i, name in enumerate(columns):
        col = [row[i] for row in raw]
        if name in int_columns:
            out[name] = np.array([int(v) for v in col], dtype=int)
        else:
            out[name] = np.array([float(v) for v in col])
    return out


def read_observables_csv(path):
    return _read_table_csv(path, OBSERVABLE_COLUMNS, {"site"})


def read_currents_csv(path):
    return _read_table_csv(path, CURRENT_COLUMNS, {"bond_site", "axis"})


def _read_table_ndjson(path, columns, int_columns):
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                rows.append(json.loads(line))
    out = {}
    for name in columns:
        col = [row[name] for row in rows]
        dtype = int if name in int_columns else float
        out[name] = np.array(col, dtype=dtype)
    return out


def read_observables_ndjson(path):
    return _read_table_ndjson(path, OBSERVABLE_COLUMNS, {"site"})


def read_currents_ndjson(path):
    return _read_table_ndjson(path, CURRENT_COLUMNS, {"bond_site", "axis"})


def read_fields_ndjson(path):
    """List of dicts with numpy arrays for phi, a, e and (2D) b."""
    out = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            snap = {"time": float(obj["time"]),
                    "phi": np.array(obj["phi"], dtype=float),
                    "a": np.array(obj["a"], dtype=float),
                    "e": np.array(obj["e"], dtype=float)}
            if "b" in obj:
                snap["b"] = np.array(obj["b"], dtype=float)
            out.append(snap)
    return out
