"""Model construction: H0, the three Gamma variants, states, meter composite."""

import numpy as np
import pytest

from conftest import canonical_2site, random_hermitian
from nhcurrent import (JumpGamma, LatticeSpec, MatrixGamma, ModelSpec,
                       OnsiteGamma, QuantumState, build_gamma, build_h0,
                       build_meter_model)


def _model(lat, gamma=None, hopping=1.0, potential=None):
    gamma = OnsiteGamma(np.zeros(lat.n_sites)) if gamma is None else gamma
    return ModelSpec(lattice=lat, gamma=gamma, hopping=hopping,
                     potential=potential)


def test_h0_two_site_open():
    h = build_h0(canonical_2site())
    assert np.array_equal(h, [[2.0, -1.0], [-1.0, 2.0]])


def test_h0_three_site_ring_row_sums():
    lat = LatticeSpec(dim=1, extent=(3,), boundary="periodic")
    h = build_h0(_model(lat))
    assert np.abs(h.sum(axis=1)).max() < 1e-14
    assert np.array_equal(np.diag(h), [2.0, 2.0, 2.0])


def test_h0_two_site_ring_double_bond():
    # on a 2-ring both neighbors of a site are the same site
    lat = LatticeSpec(dim=1, extent=(2,), boundary="periodic")
    h = build_h0(_model(lat))
    assert np.array_equal(h, [[2.0, -2.0], [-2.0, 2.0]])


def test_h0_2d_periodic_symmetric_real_spectrum():
    rng = np.random.default_rng(11)
    lat = LatticeSpec(dim=2, extent=(4, 4), boundary="periodic")
    h = build_h0(_model(lat, hopping=0.5, potential=rng.normal(size=16)))
    assert np.array_equal(h, h.T)
    eig = np.linalg.eigvals(h)
    assert np.abs(eig.imag).max() < 1e-12


def test_h0_open_omits_boundary_neighbors():
    lat = LatticeSpec(dim=2, extent=(3, 3), boundary="open")
    h = build_h0(_model(lat))
    # corner site 0 couples only to sites 1 and 3
    row = h[0].copy()
    row[0] = 0.0
    assert row[1] == -1.0 and row[3] == -1.0
    assert np.count_nonzero(row) == 2


def test_gamma_onsite():
    g = build_gamma(canonical_2site())
    assert np.array_equal(g, np.diag([-1.0, 0.0]))


def test_gamma_jumps_single_projector():
    lat = LatticeSpec(dim=1, extent=(2,), boundary="open")
    op = np.sqrt(2.0) * np.diag([1.0, 0.0]).astype(complex)
    g = build_gamma(_model(lat, gamma=JumpGamma((op,))))
    assert np.abs(g - np.diag([-1.0, 0.0])).max() < 1e-15


def test_gamma_jumps_swap_pair_gives_half_identity():
    lat = LatticeSpec(dim=1, extent=(2,), boundary="open")
    l1 = np.zeros((2, 2), dtype=complex)
    l1[0, 1] = 1.0  # |0><1|
    l2 = np.zeros((2, 2), dtype=complex)
    l2[1, 0] = 1.0  # |1><0|
    g = build_gamma(_model(lat, gamma=JumpGamma((l1, l2))))
    assert np.abs(g + 0.5 * np.eye(2)).max() < 1e-15


def test_gamma_jumps_equals_onsite_for_square_rates():
    # kappas that are perfect squares make the float algebra exact
    lat = LatticeSpec(dim=1, extent=(3,), boundary="open")
    kappas = [4.0, 1.0, 16.0]
    ops = []
    for m, kappa in enumerate(kappas):
        op = np.zeros((3, 3), dtype=complex)
        op[m, m] = np.sqrt(kappa)
        ops.append(op)
    via_jumps = build_gamma(_model(lat, gamma=JumpGamma(tuple(ops))))
    via_onsite = build_gamma(
        _model(lat, gamma=OnsiteGamma(np.array([-k / 2 for k in kappas]))))
    assert np.array_equal(via_jumps, via_onsite)


def test_gamma_jumps_negative_semidefinite():
    rng = np.random.default_rng(12)
    lat = LatticeSpec(dim=1, extent=(5,), boundary="open")
    ops = tuple(rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
                for _ in range(3))
    g = build_gamma(_model(lat, gamma=JumpGamma(ops)))
    assert np.abs(g - g.conj().T).max() < 1e-12
    assert np.linalg.eigvalsh(g).max() <= 1e-12


def test_gamma_matrix_passthrough_and_rejection():
    m = random_hermitian(4, seed=13)
    lat = LatticeSpec(dim=1, extent=(4,), boundary="open")
    g = build_gamma(_model(lat, gamma=MatrixGamma(m)))
    assert np.array_equal(g, m)
    bad = m.copy()
    bad[0, 1] += 1e-6
    with pytest.raises(ValueError, match="not Hermitian"):
        MatrixGamma(bad)


def test_model_validation():
    lat = LatticeSpec(dim=1, extent=(4,), boundary="open")
    with pytest.raises(ValueError):
        _model(lat, hopping=0.0)
    with pytest.raises(ValueError):
        _model(lat, potential=np.zeros(3))
    with pytest.raises(ValueError):
        _model(lat, gamma=OnsiteGamma(np.zeros(5)))
    with pytest.raises(TypeError):
        ModelSpec(lattice=lat, gamma=np.zeros((4, 4)))


def test_quantum_state_norm_invariant():
    QuantumState(np.array([1.0, 0.0], dtype=complex))
    with pytest.raises(ValueError, match="norm"):
        QuantumState(np.array([1.0, 0.1], dtype=complex))


def test_meter_no_channels_is_bare_h0():
    model = canonical_2site()
    composite = build_meter_model(model, 1, [], 0.7)
    assert np.array_equal(composite.h_composite, build_h0(model))
    assert np.abs(composite.h_int).max() == 0.0


def test_meter_single_channel_block_structure():
    model = canonical_2site()
    a = np.diag([1.0, 0.0]).astype(complex)
    g = 0.8
    composite = build_meter_model(model, 2, [a], g)
    h = composite.h_composite
    assert h.shape == (4, 4)
    # composite index x * meter_dim + m; the chi -> chi_1 block is g*A
    flip = h[np.ix_([1, 3], [0, 2])]
    assert np.abs(flip - g * a).max() < 1e-15
    # no direct chi -> chi coupling beyond H0
    chi_block = h[np.ix_([0, 2], [0, 2])]
    assert np.abs(chi_block - composite.h_system).max() < 1e-15


def test_meter_second_moment_identity():
    rng = np.random.default_rng(14)
    lat = LatticeSpec(dim=1, extent=(2,), boundary="open")
    model = _model(lat)
    ops = [rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
           for _ in range(2)]
    g = 1.3
    composite = build_meter_model(model, 3, ops, g)
    md = composite.meter_dim
    h2 = composite.h_int @ composite.h_int
    block = h2[0::md, 0::md]
    target = sum(g * g * (op.conj().T @ op) for op in ops)
    assert np.abs(block - target).max() < 1e-12


def test_meter_dimension_checks():
    model = canonical_2site()
    a = np.eye(2, dtype=complex)
    with pytest.raises(ValueError):
        build_meter_model(model, 1, [a], 1.0)
    with pytest.raises(ValueError):
        build_meter_model(model, 3, [np.eye(3, dtype=complex)], 1.0)
