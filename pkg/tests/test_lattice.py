import math

import numpy as np
import pytest
import scipy.linalg as la

from kickedtg import (
    KickSchedule,
    LatticeModel,
    build_hopping_matrix,
    build_kick_matrix,
    fermi_energy,
    hopping_eigensystem,
    kick_amplitude,
    momentum_grid,
)

# frozen with mpmath (30 digits): 1023^2/(8 pi^2) and 1024^2/(8 pi^2)
J_SPACING_1023 = 13254.444624504013
J_ODD_1025 = 13280.370182368496
# frozen with mpmath: 6.6*(1 + 0.5*cos(2 pi sqrt 5)*cos(2 pi sqrt 13))
AMP_66_05_N1 = 6.3726502663587441


def test_hopping_matrix_3_sites():
    m = LatticeModel(n_sites=3, n_particles=1)
    J = 1.0 / (2.0 * math.pi**2)
    assert math.isclose(m.spacing, math.pi)
    assert math.isclose(m.coupling, J)
    expect = np.array([[2 * J, -J, 0.0], [-J, 2 * J, -J], [0.0, -J, 2 * J]])
    np.testing.assert_allclose(build_hopping_matrix(m), expect, rtol=0, atol=1e-15)


def test_hopping_matrix_structure_exact():
    m = LatticeModel(n_sites=33, n_particles=4)
    h = build_hopping_matrix(m)
    assert np.array_equal(h, h.T)
    off = h.copy()
    for d in (-1, 0, 1):
        np.fill_diagonal(off[max(0, -d):, max(0, d):], 0.0)
    assert np.all(off == 0.0)


@pytest.mark.parametrize("n_sites", [9, 33, 129])
def test_hopping_spectrum_bounds(n_sites):
    m = LatticeModel(n_sites=n_sites, n_particles=2)
    ev = np.linalg.eigvalsh(build_hopping_matrix(m))
    assert ev.min() >= -1e-12
    assert ev.max() <= 4.0 * m.coupling + 1e-12


def test_coupling_regression_values():
    # the coupling at box spacing 2*pi/1023 (pinned) and the odd default lattice
    a = 2.0 * math.pi / 1023
    assert math.isclose(1.0 / (2.0 * a**2), J_SPACING_1023, rel_tol=1e-14)
    m = LatticeModel(n_sites=1025, n_particles=31)
    assert math.isclose(m.coupling, J_ODD_1025, rel_tol=1e-14)
    assert math.isclose(m.spacing * (m.n_sites - 1), m.box_length, rel_tol=1e-15)


def test_spectrum_converges_to_free_dispersion():
    evs = {}
    for n in (513, 1025):
        m = LatticeModel(n_sites=n, n_particles=2)
        ev, _ = hopping_eigensystem(m)
        evs[n] = ev[:5]
    np.testing.assert_allclose(evs[513], evs[1025], rtol=1e-2)
    # lowest modes approach the open-box energies hbar^2 (m pi / L)^2 / 2;
    # the discrete modes live in an effective box a*(n+1), an O(1/n) shift
    box = 0.5 * (np.arange(1, 6) * math.pi / (2 * math.pi)) ** 2
    np.testing.assert_allclose(evs[1025], box, rtol=5e-3)


def test_analytic_eigensystem_matches_dense_solver():
    m = LatticeModel(n_sites=65, n_particles=4)
    ev, V = hopping_eigensystem(m)
    h = build_hopping_matrix(m)
    assert np.abs(V.T @ V - np.eye(65)).max() < 1e-12
    assert np.abs(h @ V - V * ev).max() < 1e-10 * m.coupling
    ev_ref = la.eigh(h, eigvals_only=True)
    np.testing.assert_allclose(ev, ev_ref, rtol=0, atol=1e-10 * m.coupling)


def test_kick_matrix_values():
    m3 = LatticeModel(n_sites=3, n_particles=1)
    np.testing.assert_allclose(np.diag(build_kick_matrix(m3)), [-1.0, 1.0, -1.0], atol=1e-15)
    m = LatticeModel(n_sites=65, n_particles=4)
    diag = np.diag(build_kick_matrix(m))
    center = (m.n_sites + 1) // 2 - 1
    assert diag[center] == pytest.approx(1.0, abs=1e-15)
    np.testing.assert_allclose(diag, diag[::-1], atol=1e-12)


def test_kick_amplitude_periodic_limit():
    sched = KickSchedule(strength=4.0, anisotropy=0.0)
    for n in (0, 1, 7, 123):
        assert kick_amplitude(sched, n) == pytest.approx(4.0, rel=1e-15)


def test_kick_amplitude_at_zero_and_pinned_value():
    sched = KickSchedule(strength=6.6, anisotropy=0.5)
    assert kick_amplitude(sched, 0) == pytest.approx(6.6 * 1.5, rel=1e-15)
    assert kick_amplitude(sched, 1) == pytest.approx(AMP_66_05_N1, rel=1e-12)


def test_kick_amplitude_bounds():
    sched = KickSchedule(strength=3.0, anisotropy=0.7)
    amps = np.array([kick_amplitude(sched, n) for n in range(2000)])
    assert amps.min() >= 3.0 * 0.3 - 1e-12
    assert amps.max() <= 3.0 * 1.7 + 1e-12


def test_momentum_grid_symmetric_uniform():
    m = LatticeModel(n_sites=257, n_particles=8)
    g = momentum_grid(m)
    assert g.values.size == 257
    np.testing.assert_allclose(g.values, -g.values[::-1], atol=1e-12)
    steps = np.diff(g.values)
    np.testing.assert_allclose(steps, 2 * math.pi / (257 * m.spacing), rtol=1e-12)


def test_fermi_energy():
    m = LatticeModel(n_sites=257, n_particles=31, hbar_eff=2.89)
    assert fermi_energy(m) == pytest.approx(2.89**2 * 31**2 / 8, rel=1e-15)


def test_model_validation():
    # even sizes are allowed at the model level (used by the tiny oracle
    # chains); the symmetric momentum grid is what requires odd
    with pytest.raises(ValueError):
        momentum_grid(LatticeModel(n_sites=64, n_particles=4))
    with pytest.raises(ValueError):
        LatticeModel(n_sites=9, n_particles=9)        # filled
    with pytest.raises(ValueError):
        LatticeModel(n_sites=9, n_particles=2, hbar_eff=0.0)
    with pytest.raises(ValueError):
        KickSchedule(strength=-1.0)
    with pytest.raises(ValueError):
        KickSchedule(strength=1.0, anisotropy=1.5)
