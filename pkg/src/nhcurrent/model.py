"""Model specification and operator construction.

The system Hamiltonian splits as H = H0 + i*Gamma with both parts Hermitian.
H0 is the standard hopping form

    (H0 psi)_x = -t * sum_nbr psi_y + (2 * dim * t + V_x) * psi_x,

whose constant diagonal makes it a discrete Laplacian plus potential. Gamma
encodes gain and loss and may be given site-diagonal, as a dense Hermitian
matrix, or through jump operators via Gamma = -1/2 sum_m L_m^dag L_m.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .lattice import LatticeSpec

HERMITICITY_TOL = 1e-12
STATE_NORM_TOL = 1e-9


@dataclass(frozen=True)
class OnsiteGamma:
    """Site-diagonal gain/loss profile: Gamma = diag(values)."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1:
            raise ValueError("onsite gamma values must be a 1D real array")
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class MatrixGamma:
    """Dense Hermitian Gamma, checked against the hermiticity tolerance."""

    entries: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("matrix gamma entries must be a square matrix")
        dev = np.abs(m - m.conj().T).max() if m.size else 0.0
        if dev > HERMITICITY_TOL:
            raise ValueError(
                f"gamma matrix is not Hermitian: max |G - G^dag| = {dev:.3e} "
                f"exceeds {HERMITICITY_TOL:.0e}")
        object.__setattr__(self, "entries", m)


@dataclass(frozen=True)
class JumpGamma:
    """Gamma derived from jump operators: -1/2 sum_m L_m^dag L_m."""

    ops: tuple

    def __post_init__(self):
        ops = tuple(np.asarray(op, dtype=complex) for op in self.ops)
        if not ops:
            raise ValueError("jump gamma needs at least one operator")
        n = ops[0].shape[0]
        for op in ops:
            if op.ndim != 2 or op.shape != (n, n):
                raise ValueError("jump operators must be square and same-shaped")
        object.__setattr__(self, "ops", ops)


# Any of the three variants is accepted wherever a GammaSpec is expected.
GammaSpec = (OnsiteGamma, MatrixGamma, JumpGamma)


@dataclass(frozen=True)
class ModelSpec:
    """Full model: lattice geometry, hopping, potential, charge and Gamma.

    Parameters
    ----------
    lattice : LatticeSpec
    hopping : float
        Hopping amplitude t > 0.
    potential : ndarray
        Real on-site potential, one value per site.
    charge : float
        Coupling charge q for the field reconstruction.
    gamma : OnsiteGamma | MatrixGamma | JumpGamma
    """

    lattice: LatticeSpec
    gamma: object
    hopping: float = 1.0
    potential: np.ndarray = None
    charge: float = 1.0

    def __post_init__(self):
        if not self.hopping > 0:
            raise ValueError(f"hopping must be positive, got {self.hopping}")
        n = self.lattice.n_sites
        v = self.potential
        v = np.zeros(n) if v is None else np.asarray(v, dtype=float)
        if v.shape != (n,):
            raise ValueError(
                f"potential has shape {v.shape}, expected ({n},)")
        object.__setattr__(self, "potential", v)
        if not isinstance(self.gamma, GammaSpec):
            raise TypeError(
                "gamma must be OnsiteGamma, MatrixGamma or JumpGamma, "
                f"got {type(self.gamma).__name__}")
        gn = _gamma_dim(self.gamma)
        if gn != n:
            raise ValueError(
                f"gamma acts on {gn} sites but the lattice has {n}")


def _gamma_dim(gamma):
    if isinstance(gamma, OnsiteGamma):
        return gamma.values.shape[0]
    if isinstance(gamma, MatrixGamma):
        return gamma.entries.shape[0]
    return gamma.ops[0].shape[0]


@dataclass
class QuantumState:
    """Normalized single-particle state on the lattice.

    amps is the complex amplitude vector (flat site index); time is the
    evolution time the state belongs to. The norm must be 1 within 1e-9.
    """

    amps: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        amps = np.asarray(self.amps, dtype=complex)
        if amps.ndim != 1:
            raise ValueError("state amplitudes must be a 1D complex array")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > STATE_NORM_TOL:
            raise ValueError(
                f"state norm {norm!r} deviates from 1 by more than "
                f"{STATE_NORM_TOL:.0e}")
        self.amps = amps
        self.time = float(self.time)

    @property
    def n_sites(self):
        return self.amps.shape[0]


def build_h0(model):
    """Dense Hermitian hopping Hamiltonian for the model, shape (N, N)."""
    lat = model.lattice
    n = lat.n_sites
    t = model.hopping
    h = np.zeros((n, n))
    idx = np.arange(n).reshape(lat.extent)
    for a in range(lat.dim):
        src = idx
        dst = np.roll(idx, -1, axis=a)
        if not lat.periodic:
            keep = [slice(None)] * lat.dim
            keep[a] = slice(None, -1)
            src = idx[tuple(keep)]
            dst = np.roll(idx, -1, axis=a)[tuple(keep)]
        np.subtract.at(h, (src.ravel(), dst.ravel()), t)
        np.subtract.at(h, (dst.ravel(), src.ravel()), t)
    h[np.arange(n), np.arange(n)] = 2.0 * lat.dim * t + model.potential
    return h


def build_gamma(model):
    """Dense Hermitian Gamma matrix for any of the three gamma variants."""
    g = model.gamma
    if isinstance(g, OnsiteGamma):
        return np.diag(g.values).astype(complex)
    if isinstance(g, MatrixGamma):
        return g.entries.copy()
    acc = np.zeros_like(g.ops[0])
    for op in g.ops:
        acc -= 0.5 * (op.conj().T @ op)
    return acc


@dataclass(frozen=True)
class MeterModel:
    """System plus meter composite used by the postselection oracle.

    The composite Hilbert space is system (x) meter with flat index
    i = x * meter_dim + m; the meter ready state chi sits at meter index
    chi_index = 0. The interaction couples each system operator A_m to the
    meter flip B_m = |chi_m><chi| with strength g.
    """

    h_composite: np.ndarray
    h_int: np.ndarray
    h_system: np.ndarray
    a_ops: tuple
    g: float
    n_sites: int
    meter_dim: int
    chi_index: int = 0


def build_meter_model(model, meter_dim, a_ops, g):
    """Assemble the system (x) meter composite for a set of couplings.

    Parameters
    ----------
    model : ModelSpec
        Supplies the system Hamiltonian H0 (its gamma variant is ignored
        here; the meter is the microscopic origin of Gamma).
    meter_dim : int
        Meter levels including the ready state; needs len(a_ops) + 1.
    a_ops : sequence of ndarray
        System operators A_m, each (N, N).
    g : float
        Coupling strength.
    """
    a_ops = tuple(np.asarray(op, dtype=complex) for op in a_ops)
    n = model.lattice.n_sites
    if meter_dim < len(a_ops) + 1:
        raise ValueError(
            f"meter_dim={meter_dim} cannot host {len(a_ops)} flip states "
            "plus the ready state")
    for op in a_ops:
        if op.shape != (n, n):
            raise ValueError(f"coupling operator shape {op.shape} != ({n}, {n})")
    h0 = build_h0(model).astype(complex)
    eye_m = np.eye(meter_dim)
    h_int = np.zeros((n * meter_dim, n * meter_dim), dtype=complex)
    for m, op in enumerate(a_ops):
        b = np.zeros((meter_dim, meter_dim))
        b[m + 1, 0] = 1.0  # |chi_m><chi|
        h_int += g * (np.kron(op, b) + np.kron(op.conj().T, b.T))
    h_composite = np.kron(h0, eye_m) + h_int
    return MeterModel(h_composite=h_composite, h_int=h_int, h_system=h0,
                      a_ops=a_ops, g=float(g), n_sites=n,
                      meter_dim=int(meter_dim))
