"""Independent brute-force references.

Nothing here shares numerics with the production solvers: propagation goes
through dense eigendecomposition or Pade exponentials, derivatives through
plain finite differences, and the gain/loss model through an explicit
system (x) meter composite that is projected after every interval tau. The
production code is validated against these, never the other way around.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .errors import NumericalError
from .model import MeterModel, QuantumState, build_meter_model

DENSE_SITE_CAP = 256
EIG_CONDITION_CAP = 1e8
POSTSELECT_PROB_FLOOR = 1e-300


def _amps(state):
    return state.amps if isinstance(state, QuantumState) else np.asarray(state)


def _time(state, default=0.0):
    return state.time if isinstance(state, QuantumState) else default


def propagate_exact(h0, gamma, psi0, t, method="auto"):
    """Ground-truth normalized state at time t under H = H0 + i Gamma.

    method "eig" diagonalizes H (with a conditioning check on the
    eigenvector basis), "pade" uses the scaling-and-squaring exponential,
    "auto" prefers eig and falls back to pade when the eigenbasis is too
    ill-conditioned to trust. Dense only; refuses systems above
    DENSE_SITE_CAP sites.
    """
    h = np.asarray(h0, dtype=complex) + 1j * np.asarray(gamma, dtype=complex)
    n = h.shape[0]
    if n > DENSE_SITE_CAP:
        raise ValueError(f"propagate_exact is dense-only; {n} sites exceeds "
                         f"the cap of {DENSE_SITE_CAP}")
    psi = _amps(psi0)
    if method not in ("auto", "eig", "pade"):
        raise ValueError(f"unknown method {method!r}")
    if method in ("auto", "eig"):
        w, v = np.linalg.eig(h)
        cond = np.linalg.cond(v)
        if cond > EIG_CONDITION_CAP:
            if method == "eig":
                raise NumericalError(
                    f"eigenbasis condition number {cond:.3e} too large; "
                    "matrix is near-defective, use the pade route")
            out = scipy.linalg.expm(-1j * t * h) @ psi
        else:
            out = v @ (np.exp(-1j * w * t) * np.linalg.solve(v, psi))
    else:
        out = scipy.linalg.expm(-1j * t * h) @ psi
    norm = np.linalg.norm(out)
    if not np.isfinite(norm) or norm < POSTSELECT_PROB_FLOOR:
        raise NumericalError(f"propagated norm {norm!r} unusable")
    return QuantumState(out / norm, _time(psi0) + t)


def propagator_agreement(h0, gamma, psi0, t):
    """Max amplitude deviation between the eig and pade propagation routes."""
    a = propagate_exact(h0, gamma, psi0, t, method="eig")
    b = propagate_exact(h0, gamma, psi0, t, method="pade")
    return float(np.abs(a.amps - b.amps).max())


def postselect_step(composite, chi_index, psi0, tau):
    """One measure-and-postselect interval on the system (x) meter composite.

    Evolves psi0 (x) chi under the composite Hamiltonian for time tau,
    projects the meter back onto chi, and returns the renormalized system
    state together with the pre-normalization squared norm (the
    postselection success probability).
    """
    if not isinstance(composite, MeterModel):
        raise TypeError("composite must come from build_meter_model")
    psi = _amps(psi0)
    md = composite.meter_dim
    big = np.zeros(composite.n_sites * md, dtype=complex)
    big[chi_index::md] = psi
    evolved = scipy.linalg.expm(-1j * tau * composite.h_composite) @ big
    projected = evolved[chi_index::md]
    prob = float(np.vdot(projected, projected).real)
    if prob < POSTSELECT_PROB_FLOOR:
        raise NumericalError(
            f"postselection probability {prob!r} vanished; no surviving "
            "no-flip branch")
    state = QuantumState(projected / np.sqrt(prob), _time(psi0) + tau)
    return state, prob


def effective_hamiltonian_check(composite, a_ops, g, tau):
    """Deviation of the meter second moment from the jump-operator form.

    Computes <chi| H_int^2 |chi> as a system-space matrix and returns
    ||<chi|H_int^2|chi> - g^2 sum_m A_m^dag A_m||_inf. tau enters both
    sides of the underlying identity only through the common factor g^2 tau,
    so it cancels; it is accepted to mirror the step interface.
    """
    del tau
    if not isinstance(composite, MeterModel):
        raise TypeError("composite must come from build_meter_model")
    md = composite.meter_dim
    chi = composite.chi_index
    h2 = composite.h_int @ composite.h_int
    block = h2[chi::md, chi::md]
    target = np.zeros_like(block)
    for op in a_ops:
        op = np.asarray(op, dtype=complex)
        target += g * g * (op.conj().T @ op)
    dev = np.abs(block - target)
    return float(dev.max()) if dev.size else 0.0


def jump_realization(gamma, tol=1e-12):
    """Jump operators reproducing a Hermitian negative-semidefinite Gamma.

    Eigendecomposes Gamma and returns L_m = sqrt(-2 mu_m) |v_m><v_m| for
    every eigenvalue mu_m < -tol, so that -1/2 sum L^dag L = Gamma up to the
    discarded near-zero modes. Positive eigenvalues beyond tol are rejected:
    gain cannot come from a lossy meter.
    """
    g = np.asarray(gamma, dtype=complex)
    dev = np.abs(g - g.conj().T).max() if g.size else 0.0
    if dev > 1e-12:
        raise ValueError(f"gamma is not Hermitian: max deviation {dev:.3e}")
    mu, v = np.linalg.eigh(g)
    if mu.size and mu.max() > tol:
        raise ValueError(
            f"gamma has a positive eigenvalue {mu.max():.3e}; only "
            "negative-semidefinite Gamma has a pure-loss realization")
    ops = []
    for m in range(mu.size):
        if mu[m] < -tol:
            vec = v[:, m]
            ops.append(np.sqrt(-2.0 * mu[m]) * np.outer(vec, vec.conj()))
    return ops


def postselection_convergence(model, a_ops, psi0, g2tau=1.0, tau0=1e-2,
                              halvings=4):
    """Empirical tau-scaling of the postselection vs effective-step deviation.

    For each tau in a halving sequence from tau0 (holding g^2 tau = g2tau
    fixed, so g grows as tau shrinks) this compares one postselected
    composite step against the first-order effective non-Hermitian step
    (1 - i H_eff tau) psi0 normalized, with H_eff = H0 - (i/2) g^2 tau
    sum A^dag A. Returns the taus, deviations, per-halving ratios and the
    fitted exponent; the scaling is measured, not assumed.
    """
    psi = _amps(psi0)
    taus, devs = [], []
    for k in range(halvings + 1):
        tau = tau0 / (2.0 ** k)
        g = np.sqrt(g2tau / tau)
        composite = build_meter_model(model, len(a_ops) + 1, a_ops, g)
        stepped, _ = postselect_step(composite, 0, psi, tau)
        acc = np.zeros_like(composite.h_system)
        for op in composite.a_ops:
            acc += op.conj().T @ op
        h_eff = composite.h_system - 0.5j * g * g * tau * acc
        ref = (np.eye(len(psi)) - 1j * tau * h_eff) @ psi
        ref = ref / np.linalg.norm(ref)
        phase = np.vdot(ref, stepped.amps)
        phase = phase / abs(phase)
        devs.append(float(np.abs(stepped.amps - phase * ref).max()))
        taus.append(tau)
    ratios = [devs[k] / devs[k + 1] for k in range(halvings)]
    exponent = float(np.log2(devs[0] / devs[-1]) / halvings) if halvings else 0.0
    return {
        "taus": taus,
        "deviations": devs,
        "ratios": ratios,
        "monotone": all(devs[k] > devs[k + 1] for k in range(halvings)),
        "exponent": exponent,
    }


def finite_diff(series, dt):
    """Centered-difference derivative of a uniformly sampled series.

    Returns (derivative, endpoint_flags); the two endpoint samples use
    one-sided first-order differences and are flagged True as lower
    accuracy.
    """
    y = np.asarray(series, dtype=float)
    if y.shape[0] < 3:
        raise ValueError(f"finite_diff needs at least 3 samples, got {y.shape[0]}")
    out = np.empty_like(y)
    out[1:-1] = (y[2:] - y[:-2]) / (2.0 * dt)
    out[0] = (y[1] - y[0]) / dt
    out[-1] = (y[-1] - y[-2]) / dt
    flags = np.zeros(y.shape[0], dtype=bool)
    flags[0] = flags[-1] = True
    return out, flags
