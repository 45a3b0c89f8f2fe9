"""Command-line entry point: validate configs, execute runs, emit files.

Subcommands:
  validate <config>      parse and check a config, no computation
  run <config>           evolve, observe, repair currents, solve fields
  oracle <config>        brute-force cross-checks only, writes a report
  sweep <config-glob>    run every matching config

Exit codes: 0 success, 2 config error, 3 numerical failure. Runs are fully
deterministic: identical configs produce byte-identical outputs.
"""

from __future__ import annotations

import argparse
import glob
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import build_initial_state, config_echo, parse_config
from .errors import ConfigError, NumericalError
from .evolve import evolve_operators
from .fieldsolve import (GAUGE_DIV_TOL, GAUSS_RESIDUAL_TOL, SOURCE_SUM_TOL,
                         assemble_fields, corrected_current, helmholtz,
                         poisson_phi, vector_potential_quasistatic,
                         vector_potential_retarded, vector_potential_wave)
from .model import (HERMITICITY_TOL, STATE_NORM_TOL, build_gamma, build_h0,
                    build_meter_model)
from .observe import bond_current, source_term
from .oracle import (effective_hamiltonian_check, jump_realization,
                     postselection_convergence, propagator_agreement)
from . import runio

ORACLE_DENSE_CAP = 256
ORACLE_CHANNEL_CAP = 3
ORACLE_COMPOSITE_CAP = 512

TOLERANCES = {
    "hermiticity": HERMITICITY_TOL,
    "state_norm": STATE_NORM_TOL,
    "gauss_residual": GAUSS_RESIDUAL_TOL,
    "source_sum": SOURCE_SUM_TOL,
    "gauge_div_a": GAUGE_DIV_TOL,
}


def _apply_overrides(config, args):
    output = config.output
    if args.output_dir is not None:
        output = type(output)(directory=args.output_dir,
                              formats=output.formats)
    if args.format is not None:
        output = type(output)(directory=output.directory, formats=args.format)
    return type(config)(model=config.model, evolve=config.evolve,
                        initial=config.initial, fields=config.fields,
                        oracle=config.oracle, output=output)


def run_pipeline(config, quiet=False):
    """Execute one validated config end to end; returns the output dir."""
    model = config.model
    lattice = model.lattice
    h0 = build_h0(model)
    gamma = build_gamma(model)
    state0 = build_initial_state(lattice, config.initial)
    trajectory = evolve_operators(state0, h0, gamma, config.evolve)

    times = [s.time for s in trajectory]
    rhos, sources, phis = [], [], []
    js, deltas, jts = [], [], []
    for state in trajectory:
        rho = (state.amps.conj() * state.amps).real
        s = source_term(state, gamma)
        j = bond_current(state, model)
        delta, jt = corrected_current(j, s, lattice)
        phi = poisson_phi(rho, model.charge, lattice)
        rhos.append(rho)
        sources.append(s)
        js.append(j)
        deltas.append(delta)
        jts.append(jt)
        phis.append(phi)

    outdir = Path(config.output.directory)
    outdir.mkdir(parents=True, exist_ok=True)

    obs_rows = []
    cur_rows = []
    for n, t in enumerate(times):
        for x in range(lattice.n_sites):
            obs_rows.append((t, x, rhos[n][x], sources[n][x], phis[n][x]))
        for axis in range(lattice.dim):
            for x in range(lattice.n_sites):
                cur_rows.append((t, x, axis, js[n][axis, x],
                                 deltas[n][axis, x], jts[n][axis, x]))

    formats = config.output.formats
    if formats in ("csv", "both"):
        runio.write_observables_csv(outdir / "observables.csv", obs_rows)
        runio.write_currents_csv(outdir / "currents.csv", cur_rows)
    if formats in ("ndjson", "both"):
        runio.write_observables_ndjson(outdir / "observables.ndjson", obs_rows)
        runio.write_currents_ndjson(outdir / "currents.ndjson", cur_rows)

    if config.fields.enable:
        snapshots = _solve_fields(config, lattice, times, jts, phis)
        runio.write_fields_ndjson(outdir / "fields.ndjson", snapshots)

    if config.oracle.enable:
        report = oracle_report(config, h0, gamma, state0)
        runio.write_json(outdir / "oracle_report.json", report)

    meta = {
        "tool": "nhcurrent",
        "version": __version__,
        "config": config_echo(config),
        "tolerances": TOLERANCES,
        "neutralizing_background": lattice.periodic,
        "recorded_steps": len(times),
    }
    runio.write_json(outdir / "run_meta.json", meta)

    if not quiet:
        written = sorted(p.name for p in outdir.iterdir() if p.is_file())
        print(f"wrote {outdir} ({len(times)} recorded states: "
              + ", ".join(written) + ")")
    return outdir


def _solve_fields(config, lattice, times, jts, phis):
    """Vector potential, E and B at the interior recorded times."""
    if len(times) < 3:
        raise NumericalError(
            "field assembly needs at least 3 recorded states; increase "
            "steps or lower record_every")
    dt_rec = times[1] - times[0]
    jt_hist = np.stack([helmholtz(jt, lattice)[1] for jt in jts])
    q = config.model.charge
    solver = config.fields.solver
    if solver == "wave":
        a_series = vector_potential_wave(jt_hist, lattice, dt_rec, q=q)
    elif solver == "quasistatic":
        a_series = np.stack([vector_potential_quasistatic(jt_hist[n], lattice,
                                                          q=q)
                             for n in range(len(times))])
    else:
        a_series = np.stack([vector_potential_retarded(jt_hist[:n + 1],
                                                       lattice, dt_rec,
                                                       times[n], q=q)
                             for n in range(len(times))])
    snapshots = []
    for n in range(1, len(times) - 1):
        snapshots.append(assemble_fields(
            phis[n], (a_series[n - 1], a_series[n], a_series[n + 1]),
            (times[n - 1], times[n], times[n + 1]), lattice))
    return snapshots


def oracle_report(config, h0=None, gamma=None, state0=None):
    """Brute-force cross-checks for one config, as a JSON-ready dict."""
    model = config.model
    if h0 is None:
        h0 = build_h0(model)
    if gamma is None:
        gamma = build_gamma(model)
    if state0 is None:
        state0 = build_initial_state(model.lattice, config.initial)
    n = model.lattice.n_sites
    report = {"g2tau": 1.0, "channel_cap": ORACLE_CHANNEL_CAP}

    if n <= ORACLE_DENSE_CAP:
        dev = propagator_agreement(h0, gamma, state0.amps,
                                   max(config.evolve.dt, 0.1))
        report["propagator_agreement"] = {
            "max_deviation": dev, "tolerance": 1e-10, "ok": dev < 1e-10}
    else:
        report["propagator_agreement"] = {
            "skipped": f"{n} sites exceeds the dense cap {ORACLE_DENSE_CAP}"}

    # Shift gamma by its largest eigenvalue: the uniform part only rescales
    # the norm, and the remainder is negative semidefinite, hence realizable
    # by pure-loss jump operators.
    mu_max = float(np.linalg.eigvalsh(gamma).max())
    shifted = gamma - mu_max * np.eye(n)
    jumps = jump_realization(shifted)
    recon = shifted.copy()
    for op in jumps:
        recon = recon + 0.5 * (op.conj().T @ op)
    report["jump_realization"] = {
        "uniform_shift": mu_max,
        "channels": len(jumps),
        "reconstruction_residual": float(np.abs(recon).max()),
    }

    channels = jumps[:ORACLE_CHANNEL_CAP]
    if not channels:
        report["postselection_convergence"] = {
            "skipped": "gamma is a uniform shift; there are no loss channels"}
        report["effective_hamiltonian_check"] = {
            "skipped": "no loss channels"}
        return report
    composite_dim = n * (len(channels) + 1)
    if composite_dim > ORACLE_COMPOSITE_CAP:
        reason = (f"composite dimension {composite_dim} exceeds "
                  f"{ORACLE_COMPOSITE_CAP}")
        report["postselection_convergence"] = {"skipped": reason}
        report["effective_hamiltonian_check"] = {"skipped": reason}
        return report

    tau0 = 1e-2
    g0 = float(np.sqrt(1.0 / tau0))
    composite = build_meter_model(model, len(channels) + 1, channels, g0)
    dev = effective_hamiltonian_check(composite, channels, g0, tau0)
    report["effective_hamiltonian_check"] = {
        "max_deviation": dev, "tolerance": 1e-12, "ok": dev < 1e-12}

    study = postselection_convergence(model, channels, state0.amps,
                                      g2tau=1.0, tau0=tau0, halvings=4)
    study["channels_used"] = len(channels)
    report["postselection_convergence"] = study
    return report


def _write_error(outdir, exc):
    try:
        Path(outdir).mkdir(parents=True, exist_ok=True)
        runio.write_json(Path(outdir) / "error.json",
                         {"error": str(exc), "type": type(exc).__name__})
    except OSError:
        pass


def _cmd_validate(args):
    config = parse_config(args.config)
    if not args.quiet:
        print(f"ok: {args.config} "
              f"({config.model.lattice.n_sites} sites, "
              f"{config.evolve.steps} steps)")
    return 0


def _cmd_run(args):
    config = _apply_overrides(parse_config(args.config), args)
    try:
        run_pipeline(config, quiet=args.quiet)
    except ConfigError:
        raise
    except (NumericalError, ValueError) as exc:
        _write_error(config.output.directory, exc)
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    return 0


def _cmd_oracle(args):
    config = _apply_overrides(parse_config(args.config), args)
    outdir = Path(config.output.directory)
    try:
        report = oracle_report(config)
        outdir.mkdir(parents=True, exist_ok=True)
        runio.write_json(outdir / "oracle_report.json", report)
    except (NumericalError, ValueError) as exc:
        _write_error(outdir, exc)
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    if not args.quiet:
        conv = report.get("postselection_convergence", {})
        note = ("monotone" if conv.get("monotone")
                else conv.get("skipped", "not monotone"))
        print(f"wrote {outdir / 'oracle_report.json'} "
              f"(postselection convergence: {note})")
    return 0


def _cmd_sweep(args):
    paths = sorted(glob.glob(args.config_glob))
    if not paths:
        raise ConfigError(f"no configs match {args.config_glob!r}")
    worst = 0
    for path in paths:
        sub = argparse.Namespace(config=path, output_dir=None,
                                 format=args.format, quiet=args.quiet)
        try:
            code = _cmd_run(sub)
        except ConfigError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            code = 2
        if not args.quiet:
            print(f"{path}: {'ok' if code == 0 else f'exit {code}'}")
        worst = max(worst, code)
    return worst


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="nhcurrent",
        description="Non-Hermitian lattice dynamics with corrected currents "
                    "and reconstructed fields")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, config_arg="config"):
        if config_arg == "config":
            p.add_argument("config", help="path to a JSON run config")
        else:
            p.add_argument("config_glob", help="glob of JSON run configs")
        p.add_argument("--output-dir", default=None,
                       help="override output.directory from the config")
        p.add_argument("--format", default=None,
                       choices=["csv", "ndjson", "both"],
                       help="override output.formats from the config")
        p.add_argument("--quiet", action="store_true",
                       help="suppress progress output")

    add_common(sub.add_parser("validate", help="check a config and exit"))
    add_common(sub.add_parser("run", help="execute a run end to end"))
    add_common(sub.add_parser("oracle", help="brute-force cross-checks only"))
    add_common(sub.add_parser("sweep", help="run every config in a glob"),
               config_arg="glob")

    args = parser.parse_args(argv)
    handler = {"validate": _cmd_validate, "run": _cmd_run,
               "oracle": _cmd_oracle, "sweep": _cmd_sweep}[args.command]
    try:
        return handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
