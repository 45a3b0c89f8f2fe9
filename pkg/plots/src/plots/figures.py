"""Figure builders and the batch renderer.

All quantities are arithmetic on the tabulated columns: time derivatives
are centered differences of the recorded density, divergences apply the
bond-to-site stencil implied by the file contract (the value at
(bond_site, axis) lives on the link to the next site along that axis,
wrapping only on periodic lattices). Rendering is deterministic: the Agg
backend, a fixed SVG hash salt and date-free metadata make repeated runs
byte-identical under pinned library versions.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .loader import (RunDataError, current_grid, load_run, observable_grid)

KINDS = ("density", "currents", "residual", "fields")

SVG_HASH_SALT = "plots"
PNG_DPI = 150
RESIDUAL_FLOOR = 1e-17
UNIFORM_STRIDE_RTOL = 1e-9


def _div_bond(extent, boundary, bond):
    """Site divergence of one time slice of bond values, shape (dim, n)."""
    dim = len(extent)
    grid = bond.reshape((dim,) + tuple(extent))
    out = np.zeros(tuple(extent))
    for a in range(dim):
        inflow = np.roll(grid[a], 1, axis=a)
        if boundary == "open":
            index = [slice(None)] * dim
            index[a] = 0
            inflow[tuple(index)] = 0.0
        out += grid[a] - inflow
    return out.reshape(-1)


def _uniform_stride(run):
    times = run.times
    if times.shape[0] < 3:
        raise RunDataError(
            f"{run.directory}: need at least 3 recorded times for residual "
            f"curves, got {times.shape[0]}")
    strides = np.diff(times)
    if np.abs(strides - strides[0]).max() > UNIFORM_STRIDE_RTOL * strides[0]:
        raise RunDataError(
            f"{run.directory / 'observables'}: recorded times are not "
            "uniformly spaced; cannot form centered differences")
    return float(strides[0])


def eoc_curves(run):
    """Continuity residual maxima before and after the current correction.

    Returns (interior_times, before, after) where before uses the bare
    current j and after the repaired current j_tilde; both are max-abs
    over sites of the centered d rho/dt plus the bond divergence.
    """
    h = _uniform_stride(run)
    rho = observable_grid(run, "rho")
    j = current_grid(run, "j")
    jt = current_grid(run, "j_tilde")
    nt = run.times.shape[0]
    before = np.empty(nt - 2)
    after = np.empty(nt - 2)
    for n in range(1, nt - 1):
        drho = (rho[n + 1] - rho[n - 1]) / (2.0 * h)
        before[n - 1] = np.abs(
            drho + _div_bond(run.extent, run.boundary, j[n])).max()
        after[n - 1] = np.abs(
            drho + _div_bond(run.extent, run.boundary, jt[n])).max()
    return run.times[1:-1], before, after


def current_extrema(run):
    """Per-time max-abs of the bare and repaired currents."""
    j = current_grid(run, "j")
    jt = current_grid(run, "j_tilde")
    return run.times, np.abs(j).max(axis=(1, 2)), np.abs(jt).max(axis=(1, 2))


def _site_plane(run, values):
    n0, n1 = run.extent
    return values.reshape(n0, n1)


def _nearest_time_index(times, t):
    return int(np.argmin(np.abs(np.asarray(times) - t)))


def density_figure(run):
    """1D: heatmap of rho over (site, time); 2D: final-time density map."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0), constrained_layout=True)
    rho = observable_grid(run, "rho")
    if run.dim == 1:
        im = ax.imshow(rho.T, origin="lower", aspect="auto",
                       extent=(run.times[0], run.times[-1],
                               -0.5, run.n_sites - 0.5),
                       cmap="magma")
        ax.set_xlabel("time")
        ax.set_ylabel("site")
        fig.colorbar(im, ax=ax, label=r"$\rho$")
    else:
        im = ax.imshow(_site_plane(run, rho[-1]).T, origin="lower",
                       cmap="magma")
        ax.set_xlabel("$x_0$")
        ax.set_ylabel("$x_1$")
        fig.colorbar(im, ax=ax, label=rf"$\rho(t={run.times[-1]:g})$")
    ax.set_title("density")
    return fig


def currents_figure(run):
    """Bare vs repaired current: curves in 1D, paired quivers in 2D."""
    j = current_grid(run, "j")
    jt = current_grid(run, "j_tilde")
    if run.dim == 1:
        fig, (ax_x, ax_t) = plt.subplots(1, 2, figsize=(9.0, 3.6),
                                         constrained_layout=True)
        sites = np.arange(run.n_sites)
        ax_x.plot(sites, j[-1, 0], label="$j$", color="tab:blue")
        ax_x.plot(sites, jt[-1, 0], label=r"$\tilde j$", color="tab:red",
                  linestyle="--")
        ax_x.set_xlabel("bond site")
        ax_x.set_ylabel("current")
        ax_x.set_title(f"profile at t={run.times[-1]:g}")
        ax_x.legend()
        times, jmax, jtmax = current_extrema(run)
        ax_t.plot(times, jmax, label=r"$\max_x |j|$", color="tab:blue")
        ax_t.plot(times, jtmax, label=r"$\max_x |\tilde j|$",
                  color="tab:red", linestyle="--")
        ax_t.set_xlabel("time")
        ax_t.set_ylabel("current")
        ax_t.set_title("amplitude history")
        ax_t.legend()
    else:
        fig, (ax_j, ax_jt) = plt.subplots(1, 2, figsize=(9.0, 4.2),
                                          constrained_layout=True,
                                          sharex=True, sharey=True)
        idx = np.arange(run.n_sites)
        x0 = idx // run.extent[1]
        x1 = idx % run.extent[1]
        scale = max(np.abs(jt[-1]).max(), np.abs(j[-1]).max(), 1e-300) * 8.0
        for ax, field, label in ((ax_j, j[-1], "$j$"),
                                 (ax_jt, jt[-1], r"$\tilde j$")):
            ax.quiver(x0, x1, field[0], field[1], angles="xy",
                      scale_units="xy", scale=scale, width=0.004)
            ax.set_xlabel("$x_0$")
            ax.set_title(f"{label} at t={run.times[-1]:g}")
            ax.set_aspect("equal")
        ax_j.set_ylabel("$x_1$")
    fig.suptitle("bare vs repaired current")
    return fig


def residual_figure(run):
    """Max-abs continuity residual over time, before and after repair."""
    times, before, after = eoc_curves(run)
    fig, ax = plt.subplots(figsize=(6.0, 4.0), constrained_layout=True)
    ax.semilogy(times, np.maximum(before, RESIDUAL_FLOOR),
                label=r"$|\partial_t\rho + \nabla\cdot j|$",
                color="tab:blue")
    ax.semilogy(times, np.maximum(after, RESIDUAL_FLOOR),
                label=r"$|\partial_t\rho + \nabla\cdot\tilde j|$",
                color="tab:red", linestyle="--")
    ax.set_xlabel("time")
    ax.set_ylabel("max residual")
    ax.set_title("continuity residual before and after repair")
    ax.legend()
    return fig


def fields_figure(run):
    """Scalar potential with the repaired current: contour plus quiver in
    2D, potential and field profiles in 1D."""
    if run.fields is None:
        raise RunDataError(
            f"{run.directory / 'fields.ndjson'}: not present; this run was "
            "produced without field solving")
    snap = run.fields[len(run.fields) // 2]
    if run.dim == 2:
        fig, ax = plt.subplots(figsize=(6.0, 5.0), constrained_layout=True)
        phi = _site_plane(run, snap["phi"])
        n0, n1 = run.extent
        cs = ax.contourf(np.arange(n0), np.arange(n1), phi.T, levels=12,
                         cmap="viridis")
        fig.colorbar(cs, ax=ax, label=r"$\phi$")
        jt = current_grid(run, "j_tilde")
        n = _nearest_time_index(run.times, snap["time"])
        idx = np.arange(run.n_sites)
        scale = max(np.abs(jt[n]).max(), 1e-300) * 8.0
        ax.quiver(idx // n1, idx % n1, jt[n, 0], jt[n, 1], angles="xy",
                  scale_units="xy", scale=scale, width=0.004,
                  color="white")
        ax.set_xlabel("$x_0$")
        ax.set_ylabel("$x_1$")
        ax.set_aspect("equal")
    else:
        fig, ax = plt.subplots(figsize=(6.0, 4.0), constrained_layout=True)
        sites = np.arange(run.n_sites)
        ax.plot(sites, snap["phi"], label=r"$\phi$", color="tab:green")
        ax.plot(sites, snap["e"][0], label="$E$", color="tab:purple")
        ax.plot(sites, snap["a"][0], label="$A$", color="tab:orange",
                linestyle="--")
        ax.set_xlabel("site")
        ax.legend()
    fig.suptitle(f"fields at t={snap['time']:g}")
    return fig


_BUILDERS = {"density": density_figure, "currents": currents_figure,
             "residual": residual_figure, "fields": fields_figure}


def plot_run(run_dir, which=None, out_dir=None):
    """Render the requested figure kinds for one run directory.

    which defaults to every kind the directory supports (fields only when
    fields.ndjson exists). Each kind is written as both PNG and SVG with
    fixed names; the returned list holds the written paths.
    """
    run = load_run(run_dir)
    if which is None:
        which = [k for k in KINDS
                 if k != "fields" or run.fields is not None]
    unknown = [k for k in which if k not in KINDS]
    if unknown:
        raise RunDataError(f"unknown figure kind {unknown[0]!r}; choose "
                           f"from {KINDS}")
    out = Path(out_dir) if out_dir is not None else Path(run_dir) / "figures"
    out.mkdir(parents=True, exist_ok=True)
    written = []
    with matplotlib.rc_context({"svg.hashsalt": SVG_HASH_SALT}):
        for kind in which:
            fig = _BUILDERS[kind](run)
            png = out / f"{kind}.png"
            svg = out / f"{kind}.svg"
            fig.savefig(png, dpi=PNG_DPI)
            fig.savefig(svg, metadata={"Date": None})
            plt.close(fig)
            written.extend([png, svg])
    return written
