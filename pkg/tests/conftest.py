"""Shared model builders for the test suite."""

import numpy as np
import pytest

from nhcurrent import LatticeSpec, ModelSpec, OnsiteGamma


def canonical_2site():
    """Open 2-site chain, t=1, loss -1 on site 0."""
    lat = LatticeSpec(dim=1, extent=(2,), boundary="open")
    return ModelSpec(lattice=lat, gamma=OnsiteGamma(np.array([-1.0, 0.0])))


def mixed_chain(n=64):
    """Open chain with gain on sites 10..15 and loss on sites 40..50."""
    gamma = np.zeros(n)
    gamma[10:16] = 0.3
    gamma[40:51] = -0.5
    lat = LatticeSpec(dim=1, extent=(n,), boundary="open")
    return ModelSpec(lattice=lat, gamma=OnsiteGamma(gamma))


def cosine_ring(n=64, amp=0.4):
    """Periodic ring with a zero-mean cosine gain/loss profile."""
    x = np.arange(n)
    lat = LatticeSpec(dim=1, extent=(n,), boundary="periodic")
    return ModelSpec(lattice=lat,
                     gamma=OnsiteGamma(amp * np.cos(2.0 * np.pi * x / n)))


def cosine_torus(n=8, amp=0.5):
    """Periodic n x n torus with a separable cosine gain/loss profile."""
    lat = LatticeSpec(dim=2, extent=(n, n), boundary="periodic")
    x0 = np.repeat(np.arange(n), n)
    x1 = np.tile(np.arange(n), n)
    profile = amp * (np.cos(2.0 * np.pi * x0 / n)
                     * np.cos(2.0 * np.pi * x1 / n))
    return ModelSpec(lattice=lat, gamma=OnsiteGamma(profile))


def gaussian_state(lattice, center, width):
    """Normalized real gaussian packet (minimal-image distance if periodic)."""
    xyz = lattice.coordinates().astype(float)
    d2 = np.zeros(lattice.n_sites)
    for a in range(lattice.dim):
        delta = xyz[:, a] - center[a]
        if lattice.periodic:
            ext = lattice.extent[a]
            delta = (delta + ext / 2.0) % ext - ext / 2.0
        d2 += delta ** 2
    amps = np.exp(-d2 / (4.0 * width ** 2)).astype(complex)
    return amps / np.linalg.norm(amps)


def random_state(n, seed):
    rng = np.random.default_rng(seed)
    amps = rng.normal(size=n) + 1j * rng.normal(size=n)
    return amps / np.linalg.norm(amps)


def random_hermitian(n, seed, scale=1.0):
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return scale * 0.5 * (m + m.conj().T)


@pytest.fixture
def tmp_run_dir(tmp_path):
    return tmp_path / "run"
