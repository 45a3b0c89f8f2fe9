"""Lattice geometry and discrete vector calculus.

Every solver in this package leans on the conventions fixed here:

* sites carry a flat row-major index in ``[0, N)``;
* a directed bond ``(x, a)`` lives on the link from site ``x`` to ``x + e_a``,
  so a bond field has shape ``(dim, N)``;
* divergence is outflow minus inflow, ``sum_a v_a[x] - v_a[x - e_a]``;
* on open lattices a bond that would leave the lattice carries exactly 0;
* spectral symbols use the forward-difference factor ``d_a(k) = exp(i k_a) - 1``
  rather than the continuum ``i k_a``, so that ``div(grad u)`` reproduces the
  2*dim + 1 point Laplacian exactly and the Helmholtz split commutes with the
  discrete divergence.

All lengths are measured in units of the lattice spacing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft
import scipy.sparse
import scipy.sparse.linalg

BOUNDARIES = ("periodic", "open")


@dataclass(frozen=True)
class LatticeSpec:
    """Geometry of a 1D chain or 2D rectangular lattice.

    Parameters
    ----------
    dim : int
        Spatial dimension, 1 or 2.
    extent : tuple of int
        Sites per axis, each at least 2. Length must equal ``dim``.
    boundary : str
        "periodic" or "open".
    spacing : float
        Lattice constant. Kept for bookkeeping; internal computations are in
        units where it equals 1.
    """

    dim: int
    extent: tuple
    boundary: str = "open"
    spacing: float = 1.0

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        extent = tuple(int(n) for n in self.extent)
        object.__setattr__(self, "extent", extent)
        if len(extent) != self.dim:
            raise ValueError(
                f"extent {extent} has {len(extent)} entries but dim={self.dim}")
        if any(n < 2 for n in extent):
            raise ValueError(f"every extent must be >= 2, got {extent}")
        if self.boundary not in BOUNDARIES:
            raise ValueError(
                f"boundary must be one of {BOUNDARIES}, got {self.boundary!r}")
        if not self.spacing > 0:
            raise ValueError(f"spacing must be positive, got {self.spacing}")

    @property
    def n_sites(self):
        return int(np.prod(self.extent))

    @property
    def periodic(self):
        return self.boundary == "periodic"

    def grid(self, f):
        """View a flat site array as a dim-dimensional grid."""
        f = np.asarray(f)
        return f.reshape(self.extent + f.shape[1:])

    def flat(self, g):
        """Flatten the grid axes of an array back to a site axis."""
        g = np.asarray(g)
        return g.reshape((self.n_sites,) + g.shape[self.dim:])

    def coordinates(self):
        """Integer coordinates of every site, shape (N, dim), row-major order."""
        axes = [np.arange(n) for n in self.extent]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)


def shift(lattice, f, axis, step):
    """Translate a flat site array: result[x] = f[x + step * e_axis].

    Periodic lattices wrap; open lattices fill with 0 where the neighbor is
    missing (Dirichlet padding).
    """
    g = np.roll(lattice.grid(f), -step, axis=axis)
    if not lattice.periodic:
        idx = [slice(None)] * lattice.dim
        idx[axis] = slice(-step, None) if step > 0 else slice(None, -step)
        g[tuple(idx)] = 0
    return lattice.flat(g)


def _zero_leaving_bonds(lattice, v):
    """Zero the bond components that would leave an open lattice, in place."""
    for a in range(lattice.dim):
        g = lattice.grid(v[a])
        idx = [slice(None)] * lattice.dim
        idx[a] = -1
        g[tuple(idx)] = 0
    return v


def grad_bond(lattice, u):
    """Forward-difference gradient of a site field, as a bond field (dim, N)."""
    u = np.asarray(u)
    out = np.empty((lattice.dim, lattice.n_sites), dtype=u.dtype)
    for a in range(lattice.dim):
        out[a] = shift(lattice, u, a, +1) - u
    if not lattice.periodic:
        _zero_leaving_bonds(lattice, out)
    return out


def div_bond(lattice, v):
    """Discrete divergence of a bond field: sum_a v_a[x] - v_a[x - e_a]."""
    v = np.asarray(v)
    out = np.zeros(lattice.n_sites, dtype=v.dtype)
    for a in range(lattice.dim):
        out += v[a] - shift(lattice, v[a], a, -1)
    return out


def curl_plaquette(lattice, v):
    """Plaquette circulation of a 2D bond field, one value per lower-left site.

    c[x] = (v1[x + e0] - v1[x]) - (v0[x + e1] - v0[x]). On open lattices the
    plaquettes that stick out past the boundary are reported as 0.
    """
    if lattice.dim != 2:
        raise ValueError("curl_plaquette needs a 2D lattice")
    c = (shift(lattice, v[1], 0, +1) - v[1]) - (shift(lattice, v[0], 1, +1) - v[0])
    if not lattice.periodic:
        g = lattice.grid(c)
        g[-1, :] = 0
        g[:, -1] = 0
        c = lattice.flat(g)
    return c


def laplacian_stencil(lattice, u):
    """2*dim + 1 point Laplacian; open boundaries use Dirichlet padding.

    Keeps the full -2*dim diagonal everywhere, with missing neighbors read
    as 0. For periodic lattices this is the unique translation-invariant
    Laplacian; for open ones it is the operator inverted by the Dirichlet
    Poisson solver.
    """
    u = np.asarray(u)
    out = -2.0 * lattice.dim * u
    for a in range(lattice.dim):
        out = out + shift(lattice, u, a, +1) + shift(lattice, u, a, -1)
    return out


def laplacian_neumann(lattice, u):
    """div(grad u) with leaving bonds zeroed: the zero-flux Laplacian."""
    return div_bond(lattice, grad_bond(lattice, u))


def fourier_symbols(lattice):
    """Forward-difference symbols on the Fourier grid.

    Returns
    -------
    d : list of ndarray
        Per-axis grids of d_a(k) = exp(i k_a) - 1.
    d2 : ndarray
        |d|^2 = sum_a 4 sin^2(k_a / 2), the (negated) Laplacian symbol.
    """
    ks = [2.0 * np.pi * np.fft.fftfreq(n) for n in lattice.extent]
    mesh = np.meshgrid(*ks, indexing="ij")
    d = [np.exp(1j * k) - 1.0 for k in mesh]
    d2 = np.zeros(lattice.extent)
    for k in mesh:
        d2 += 4.0 * np.sin(k / 2.0) ** 2
    return d, d2


def solve_poisson_periodic(lattice, rhs):
    """Solve lap(u) = rhs on a periodic lattice, returning the zero-mean u.

    The k = 0 component of rhs is projected out (the periodic Laplacian is
    singular there), so strictly this solves lap(u) = rhs - mean(rhs).
    """
    if not lattice.periodic:
        raise ValueError("solve_poisson_periodic needs a periodic lattice")
    _, d2 = fourier_symbols(lattice)
    rhat = scipy.fft.fftn(lattice.grid(np.asarray(rhs, dtype=float)))
    with np.errstate(divide="ignore", invalid="ignore"):
        uhat = rhat / (-d2)
    uhat[tuple([0] * lattice.dim)] = 0.0
    return lattice.flat(scipy.fft.ifftn(uhat).real)


def solve_poisson_neumann(lattice, rhs):
    """Solve lap_N(u) = rhs on an open lattice, zero-flux walls, zero-mean u.

    lap_N is div(grad .) with leaving bonds zeroed, diagonalized by the
    type-II cosine transform. rhs must have (numerically) zero mean; its
    constant component is projected out like the periodic solver does.
    """
    if lattice.periodic:
        raise ValueError("solve_poisson_neumann needs an open lattice")
    rhat = scipy.fft.dctn(lattice.grid(np.asarray(rhs, dtype=float)),
                          type=2, norm="ortho")
    lam = np.zeros(lattice.extent)
    for a, n in enumerate(lattice.extent):
        shape = [1] * lattice.dim
        shape[a] = n
        lam_a = 4.0 * np.sin(np.pi * np.arange(n) / (2.0 * n)) ** 2
        lam = lam + lam_a.reshape(shape)
    with np.errstate(divide="ignore", invalid="ignore"):
        uhat = rhat / (-lam)
    uhat[tuple([0] * lattice.dim)] = 0.0
    return lattice.flat(scipy.fft.idctn(uhat, type=2, norm="ortho"))


def solve_poisson_dirichlet(lattice, rhs):
    """Solve lap_D(u) = rhs on an open lattice with u = 0 outside.

    lap_D keeps the full -2*dim diagonal and reads missing neighbors as 0
    (the operator of laplacian_stencil); it is negative definite, so the
    solution is unique.
    """
    if lattice.periodic:
        raise ValueError("solve_poisson_dirichlet needs an open lattice")
    n = lattice.n_sites
    idx = np.arange(n).reshape(lattice.extent)
    rows, cols = [], []
    for a in range(lattice.dim):
        lo = [slice(None)] * lattice.dim
        hi = [slice(None)] * lattice.dim
        lo[a] = slice(None, -1)
        hi[a] = slice(1, None)
        rows.append(idx[tuple(lo)].ravel())
        cols.append(idx[tuple(hi)].ravel())
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    data = np.ones(rows.size)
    adj = scipy.sparse.coo_matrix((data, (rows, cols)), shape=(n, n))
    adj = (adj + adj.T).tocsr()
    lap = adj - 2.0 * lattice.dim * scipy.sparse.identity(n, format="csr")
    return scipy.sparse.linalg.spsolve(lap.tocsc(), np.asarray(rhs, dtype=float))


def pairwise_distances(lattice):
    """Euclidean distances between all site pairs, shape (N, N).

    Distances ignore periodic wrapping: the kernel solvers treat the lattice
    as embedded in flat space.
    """
    xyz = lattice.coordinates().astype(float)
    diff = xyz[:, None, :] - xyz[None, :, :]
    return np.sqrt((diff ** 2).sum(axis=-1))
