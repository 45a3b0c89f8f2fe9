"""Current repair and electromagnetic-field reconstruction.

Gain and loss break the lattice continuity equation by the source s. The
repair adds a purely longitudinal bond field delta_j = grad(u) with
lap(u) = -s, so j_tilde = j + delta_j obeys div(j_tilde) = div(j) - s and
the corrected continuity equation holds. The transverse sector is left
untouched: a divergence-free addition can never absorb a source, so grad(u)
is the minimal correction.

From the corrected current the classical fields follow their usual sourcing:
phi from the (neutralized) Gauss law, A from the transverse current through
either a lattice wave equation or a retarded Coulomb kernel, and E, B from
phi, A. All spectral work uses the forward-difference symbols from the
lattice module, which keeps the Helmholtz split exactly compatible with the
discrete div and curl.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft

from .errors import ConfigError, NumericalError
from .lattice import (curl_plaquette, div_bond, fourier_symbols, grad_bond,
                      laplacian_stencil, pairwise_distances,
                      solve_poisson_dirichlet, solve_poisson_neumann,
                      solve_poisson_periodic)
from .model import build_gamma
from .observe import bond_current, source_term

GAUSS_RESIDUAL_TOL = 1e-10
SOURCE_SUM_TOL = 1e-8
GAUGE_DIV_TOL = 1e-8
WINDOW_SPACING_RTOL = 1e-9


@dataclass(frozen=True)
class FieldSnapshot:
    """Classical fields at one instant: phi on sites, A and E on bonds.

    b is the plaquette scalar curl of A in 2D and None in 1D.
    """

    time: float
    phi: np.ndarray
    a: np.ndarray
    e: np.ndarray
    b: object = None


@dataclass(frozen=True)
class CurrentSet:
    """Conventional and corrected currents plus the source that links them.

    j_tilde_long / j_tilde_trans hold the Helmholtz split of j_tilde on
    periodic lattices and are None on open ones (no spectral route there).
    """

    j: np.ndarray
    s: np.ndarray
    delta_j: np.ndarray
    j_tilde: np.ndarray
    j_tilde_long: object = None
    j_tilde_trans: object = None


def poisson_phi(rho, q, lattice):
    """Scalar potential from the discrete Gauss law -lap(phi) = q rho.

    Periodic lattices subtract the mean charge first (neutralizing
    background; the periodic Poisson problem has no solution otherwise) and
    return the zero-mean phi. Open lattices solve with Dirichlet padding,
    phi = 0 outside. The residual of the defining equation is checked
    against GAUSS_RESIDUAL_TOL.
    """
    rho = np.asarray(rho, dtype=float)
    if lattice.periodic:
        rho_solved = rho - rho.mean()
        phi = solve_poisson_periodic(lattice, -q * rho_solved)
    else:
        rho_solved = rho
        phi = solve_poisson_dirichlet(lattice, -q * rho_solved)
    residual = np.abs(laplacian_stencil(lattice, phi) + q * rho_solved).max()
    scale = max(1.0, abs(q) * np.abs(rho_solved).max())
    if residual > GAUSS_RESIDUAL_TOL * scale:
        raise NumericalError(
            f"poisson solve residual {residual:.3e} exceeds tolerance")
    return phi


def helmholtz(v, lattice):
    """Split a bond field into longitudinal and transverse parts, spectrally.

    Uses the forward-difference symbol d_a(k) = exp(i k_a) - 1:
    long_hat_a = d_a (d_bar . v_hat) / |d|^2 for k != 0, and the uniform
    k = 0 mode goes to the transverse part (it is divergence-free and the
    continuity equation cannot constrain it). Guarantees, at rounding level:
    long + trans = v, div(trans) = 0 and, in 2D, curl(long) = 0.
    """
    if not lattice.periodic:
        raise ConfigError(
            "unsupported configuration: helmholtz needs a periodic lattice "
            "(spectral route)")
    v = np.asarray(v, dtype=float)
    d, d2 = fourier_symbols(lattice)
    vhat = [scipy.fft.fftn(lattice.grid(v[a])) for a in range(lattice.dim)]
    dot = np.zeros_like(vhat[0])
    for a in range(lattice.dim):
        dot += np.conj(d[a]) * vhat[a]
    with np.errstate(divide="ignore", invalid="ignore"):
        coef = dot / d2
    coef[tuple([0] * lattice.dim)] = 0.0
    long = np.empty_like(v)
    for a in range(lattice.dim):
        long[a] = lattice.flat(scipy.fft.ifftn(d[a] * coef).real)
    return long, v - long


def corrected_current(j, s, lattice):
    """Repair a bond current so its divergence absorbs the source s.

    Solves lap(u) = -s and returns (delta_j, j_tilde) with delta_j = grad(u)
    and j_tilde = j + delta_j. Periodic: spectral solve, zero-mean u.
    Open 1D: exact cumulative sum delta_{x -> x+1} = -sum_{y <= x} s_y with
    zero flux through the walls. Open 2D: zero-flux cosine-transform solve,
    the unique solution with no current leaving the lattice.
    """
    j = np.asarray(j, dtype=float)
    s = np.asarray(s, dtype=float)
    total = s.sum()
    if abs(total) > SOURCE_SUM_TOL:
        raise ValueError(
            f"inconsistent source: sum(s) = {total:.3e} but a bond-divergence "
            "field must sum to zero")
    if lattice.periodic:
        u = solve_poisson_periodic(lattice, -s)
        delta = grad_bond(lattice, u)
    elif lattice.dim == 1:
        delta = np.zeros_like(j)
        delta[0] = -np.cumsum(s)
        delta[0, -1] = 0.0  # leaving bond carries exactly 0
    else:
        u = solve_poisson_neumann(lattice, -s)
        delta = grad_bond(lattice, u)
    return delta, j + delta


def current_set(state, model, gamma=None):
    """Bundle j, s, delta_j, j_tilde (and the Helmholtz split if periodic)."""
    if gamma is None:
        gamma = build_gamma(model)
    j = bond_current(state, model)
    s = source_term(state, gamma)
    delta, jt = corrected_current(j, s, model.lattice)
    long = trans = None
    if model.lattice.periodic:
        long, trans = helmholtz(jt, model.lattice)
    return CurrentSet(j=j, s=s, delta_j=delta, j_tilde=jt,
                      j_tilde_long=long, j_tilde_trans=trans)


def _check_uniform_times(times):
    t0, t1, t2 = (float(t) for t in times)
    h1, h2 = t1 - t0, t2 - t1
    if h1 <= 0 or abs(h2 - h1) > WINDOW_SPACING_RTOL * max(abs(h1), abs(h2)):
        raise ValueError(
            f"snapshot times ({t0}, {t1}, {t2}) are not uniformly spaced")
    return h1


def jl_from_phi(phi_series, dt, q, lattice):
    """Longitudinal corrected current from the scalar-potential route.

    j_L = (1/q) grad((phi(t+dt) - phi(t-dt)) / (2 dt)), the discrete form of
    the statement that the time derivative of grad(phi) is sourced by the
    longitudinal current. Because phi itself is proportional to q, the
    result is q-independent. phi_series holds phi at t-dt, t, t+dt.
    """
    if q == 0:
        raise ValueError("jl_from_phi needs q != 0 (phi carries no current "
                         "information at zero charge)")
    phi_m, _, phi_p = (np.asarray(p, dtype=float) for p in phi_series)
    dphi = (phi_p - phi_m) / (2.0 * dt)
    return grad_bond(lattice, dphi) / q


def vector_potential_wave(jt_history, lattice, dt, q=1.0):
    """Leapfrog integration of the lattice wave equation for A.

    A(t+dt) = 2 A(t) - A(t-dt) + dt^2 (lap(A) + q jt), starting from zero
    initial data with a Taylor first step A(dt) = (dt^2 / 2) q jt(0).
    Returns A at every history time, shape (T, dim, N). The stability bound
    dt <= spacing / sqrt(dim) is enforced, and the Coulomb-gauge condition
    div(A) = 0 (inherited from a transverse source) is verified on the
    result.
    """
    if not lattice.periodic:
        raise ConfigError(
            "unsupported configuration: the wave solver needs a periodic "
            "lattice")
    jt = np.asarray(jt_history, dtype=float)
    if jt.ndim != 3 or jt.shape[1] != lattice.dim:
        raise ValueError(
            f"jt_history must have shape (T, dim, N), got {jt.shape}")
    cfl = 1.0 / np.sqrt(lattice.dim)
    if dt > cfl:
        raise NumericalError(
            f"CFL violation: dt = {dt} exceeds the stability bound "
            f"{cfl:.6g} (spacing / sqrt(dim))")
    nt = jt.shape[0]
    a = np.zeros_like(jt)
    if nt >= 2:
        a[1] = 0.5 * dt * dt * q * jt[0]
    for n in range(1, nt - 1):
        lap = np.stack([laplacian_stencil(lattice, a[n, ax])
                        for ax in range(lattice.dim)])
        a[n + 1] = 2.0 * a[n] - a[n - 1] + dt * dt * (lap + q * jt[n])
    gauge = max((np.abs(div_bond(lattice, a[n])).max() for n in range(nt)),
                default=0.0)
    if gauge > GAUGE_DIV_TOL * max(1.0, np.abs(a).max()):
        raise NumericalError(
            f"Coulomb gauge violated: max |div A| = {gauge:.3e}; "
            "the supplied current history is not transverse")
    return a


def vector_potential_quasistatic(jt, lattice, q=1.0):
    """Instantaneous Coulomb-kernel sum A(x) = (q/4pi) sum_{x'!=x} jt(x')/|x-x'|.

    Distances are Euclidean in the embedding space (no periodic wrapping);
    the self-site is excluded.
    """
    jt = np.asarray(jt, dtype=float)
    dist = pairwise_distances(lattice)
    np.fill_diagonal(dist, np.inf)
    kernel = 1.0 / dist
    return (q / (4.0 * np.pi)) * (kernel @ jt.T).T


def vector_potential_retarded(jt_history, lattice, dt, t_eval, q=1.0):
    """Retarded Coulomb-kernel sum over the stored current history.

    A(x) = (q/4pi) sum_{x'!=x} jt(t', x') / |x-x'| with t' = t_eval - |x-x'|,
    linear interpolation between stored samples, and sources treated as 0
    before t = 0. The history grid must cover [0, t_eval].
    """
    jt = np.asarray(jt_history, dtype=float)
    if jt.ndim != 3 or jt.shape[1] != lattice.dim:
        raise ValueError(
            f"jt_history must have shape (T, dim, N), got {jt.shape}")
    nt = jt.shape[0]
    t_last = (nt - 1) * dt
    if t_eval < 0 or t_eval > t_last * (1.0 + 1e-12):
        raise ValueError(
            f"t_eval = {t_eval} outside the stored history [0, {t_last}]")
    n = lattice.n_sites
    dist = pairwise_distances(lattice)
    np.fill_diagonal(dist, np.inf)
    out = np.zeros((lattice.dim, n))
    if nt == 1:
        return out  # every retarded time falls before t = 0
    tprime = t_eval - dist
    pos = np.clip(tprime / dt, 0.0, nt - 1.0)
    i0 = np.minimum(pos.astype(int), nt - 2)
    frac = pos - i0
    active = tprime >= 0.0
    cols = np.broadcast_to(np.arange(n), (n, n))
    kernel = np.where(active, 1.0 / dist, 0.0)
    for a in range(lattice.dim):
        sampled = ((1.0 - frac) * jt[i0, a, cols]
                   + frac * jt[i0 + 1, a, cols])
        out[a] = (q / (4.0 * np.pi)) * (kernel * sampled).sum(axis=1)
    return out


def assemble_fields(phi, a_series, times, lattice, gamma_expectation=0.0):
    """Combine phi and an A window into a FieldSnapshot at the middle time.

    E = -grad(phi) - dA/dt by centered difference. In the classical regime
    the gain/loss anticommutator correction to E reduces to 2 <Gamma> A and
    the norm-preserving shift makes <Gamma> = 0, so gamma_expectation is
    accepted for bookkeeping but contributes nothing. B is the plaquette
    curl of A in 2D, None in 1D.
    """
    del gamma_expectation  # identically dropped in the classical regime
    h = _check_uniform_times(times)
    phi = np.asarray(phi, dtype=float)
    a_prev, a_mid, a_next = (np.asarray(a, dtype=float) for a in a_series)
    e = -grad_bond(lattice, phi) - (a_next - a_prev) / (2.0 * h)
    b = curl_plaquette(lattice, a_mid) if lattice.dim == 2 else None
    return FieldSnapshot(time=float(times[1]), phi=phi, a=a_mid, e=e, b=b)
