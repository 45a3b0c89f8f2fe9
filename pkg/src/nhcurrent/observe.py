"""Densities, currents, sources and the continuity-equation residual.

The bond current j_{x -> x+e_a} = 2 t Im(psi_x^* psi_{x+e_a}) satisfies the
discrete continuity equation d/dt rho = -div j exactly when Gamma = 0. With
gain/loss switched on the defect is the source

    s_x = 2 Re(psi_x^* (Gamma psi)_x) - 2 <Gamma> rho_x,

the local mean of the anticommutator {Gamma - <Gamma>, |x><x|}. s sums to
zero over the lattice by construction, which is what lets a pure-gradient
correction absorb it.
"""

from __future__ import annotations

import numpy as np

from .evolve import gamma_shift
from .lattice import div_bond, shift
from .model import QuantumState

EXPECTATION_IMAG_TOL = 1e-10
WINDOW_SPACING_RTOL = 1e-9


def _amps(state):
    return state.amps if isinstance(state, QuantumState) else np.asarray(state)


def density(state):
    """Site occupation probabilities |psi_x|^2, shape (N,)."""
    psi = _amps(state)
    return (psi.conj() * psi).real


def bond_current(state, model):
    """Probability current on directed bonds, shape (dim, N).

    j_a[x] = 2 t Im(psi_x^* psi_{x + e_a}); bonds leaving an open lattice
    carry exactly 0 because the shifted amplitude there is 0.
    """
    lat = model.lattice
    psi = _amps(state)
    out = np.empty((lat.dim, lat.n_sites))
    for a in range(lat.dim):
        out[a] = 2.0 * model.hopping * (psi.conj() * shift(lat, psi, a, +1)).imag
    return out


def expectation(op, state):
    """Real expectation value <psi|op|psi> of a Hermitian operator.

    Rejects operators whose expectation has an imaginary part above 1e-10,
    which catches accidentally non-Hermitian input.
    """
    psi = _amps(state)
    val = np.vdot(psi, op @ psi)
    if abs(val.imag) > EXPECTATION_IMAG_TOL:
        raise ValueError(
            f"expectation has imaginary residue {val.imag:.3e}; "
            "operator is not Hermitian")
    return float(val.real)


def source_term(state, gamma):
    """Per-site density source from the shifted gain/loss term, shape (N,).

    s_x = 2 Re(psi_x^* ((Gamma - <Gamma>) psi)_x). The lattice sum vanishes
    identically; numerically it lands at rounding level.
    """
    psi = _amps(state)
    shifted, _ = gamma_shift(gamma, psi)
    return 2.0 * (psi.conj() * shifted).real


def ehrenfest_rhs(op, state, h0, gamma):
    """Exact growth rate of <op>: <i[H0, op]> + <{Gamma - <Gamma>, op}>.

    This is the time derivative of expectation(op) along the norm-preserving
    flow, usable as an oracle against finite differences of a trajectory.
    """
    psi = _amps(state)
    opsi = op @ psi
    hpsi = h0 @ psi
    shifted, _ = gamma_shift(gamma, psi)
    commutator = 1j * (np.vdot(hpsi, opsi) - np.vdot(opsi, hpsi))
    anticomm = 2.0 * np.vdot(shifted, opsi).real
    val = commutator.real + anticomm
    residue = commutator.imag
    if abs(residue) > EXPECTATION_IMAG_TOL:
        raise ValueError(
            f"ehrenfest rhs has imaginary residue {residue:.3e}; "
            "operator is not Hermitian")
    return float(val)


def eoc_residual(window, model):
    """Continuity-equation residual r = d/dt rho + div j on a 3-point window.

    window holds three consecutive recorded states (t - h, t, t + h); the
    derivative is the centered difference of the densities and j is taken at
    the middle state. Gamma = 0 makes r vanish to O(h^2); with gain/loss it
    converges to the source term.
    """
    if len(window) != 3:
        raise ValueError(f"eoc_residual needs exactly 3 states, got {len(window)}")
    t0, t1, t2 = (s.time for s in window)
    h1, h2 = t1 - t0, t2 - t1
    if h1 <= 0 or abs(h2 - h1) > WINDOW_SPACING_RTOL * max(abs(h1), abs(h2)):
        raise ValueError(
            f"window timestamps ({t0}, {t1}, {t2}) are not uniformly spaced")
    drho = (density(window[2]) - density(window[0])) / (t2 - t0)
    j = bond_current(window[1], model)
    return drho + div_bond(model.lattice, j)
