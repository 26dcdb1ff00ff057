import numpy as np
import pytest

from kickedtg import (
    KickSchedule,
    LatticeModel,
    bosonic_opdm,
    bosonic_opdm_row,
    bosonic_opdm_via_rows,
    evolve,
    fermi_energy,
    fermionic_opdm,
    initial_state,
    prepare_thermal_state,
    sign_string,
)
from kickedtg.oracle import build_fock_space, exact_evolve, exact_opdm


@pytest.fixture(scope="module")
def small_kicked():
    m = LatticeModel(n_sites=9, n_particles=2)
    th = prepare_thermal_state(m, 1.0)
    sched = KickSchedule(strength=2.0)
    state = evolve(initial_state(m, th), sched, 3)
    space = build_fock_space(m)
    exact = exact_evolve(space, sched, 3, 1.0, th.chemical_potential)
    return m, state, exact


def test_sign_string_is_involutive():
    for i in (0, 3, 8):
        s = sign_string(9, i)
        np.testing.assert_array_equal(s * s, np.ones(9))
        assert np.all(s[:i] == -1.0) and np.all(s[i:] == 1.0)


def test_fermionic_opdm_matches_oracle(small_kicked):
    m, state, exact = small_kicked
    fast = fermionic_opdm(state)
    ref = exact_opdm(exact, "fermionic")
    assert np.abs(fast.matrix - ref.matrix).max() < 1e-8
    assert fast.trace == pytest.approx(2.0, abs=1e-10)
    assert fast.hermiticity_defect() < 1e-12


def test_bosonic_opdm_matches_oracle(small_kicked):
    m, state, exact = small_kicked
    ref = exact_opdm(exact, "bosonic")
    for method in ("naive", "rows"):
        fast = bosonic_opdm(state, method=method)
        assert np.abs(fast.matrix - ref.matrix).max() < 1e-8, method


def test_diagonals_identical_between_flavors(small_kicked):
    m, state, _ = small_kicked
    b = bosonic_opdm(state, method="naive").matrix.diagonal()
    f = fermionic_opdm(state).matrix.diagonal()
    np.testing.assert_allclose(b, f, atol=1e-13)


def test_row_matches_naive_midsize():
    m = LatticeModel(n_sites=65, n_particles=6)
    th = prepare_thermal_state(m, 0.4 * fermi_energy(m))
    state = evolve(initial_state(m, th), KickSchedule(strength=3.0), 5)
    naive = bosonic_opdm(state, method="naive").matrix
    rows = bosonic_opdm_via_rows(state, refresh=16).matrix
    assert np.abs(rows - naive).max() < 1e-8
    for i in (0, 7, 32, 64):
        row = bosonic_opdm_row(state, i, refresh=8)
        assert np.abs(row - naive[i]).max() < 1e-8


def test_row_update_survives_tiny_temperature():
    # exponents reach +-1e3; nothing may overflow and the paths must agree
    m = LatticeModel(n_sites=33, n_particles=4)
    th = prepare_thermal_state(m, 1e-3 * fermi_energy(m))
    state = evolve(initial_state(m, th), KickSchedule(strength=2.0), 4)
    naive = bosonic_opdm(state, method="naive").matrix
    rows = bosonic_opdm_via_rows(state).matrix
    assert np.abs(rows - naive).max() < 1e-9


def test_projector_agrees_with_thermal_path_near_zero_temperature():
    m = LatticeModel(n_sites=65, n_particles=8)
    sched = KickSchedule(strength=2.0)
    cold = evolve(initial_state(m, prepare_thermal_state(m, 1e-3 * fermi_energy(m))), sched, 5)
    zero = evolve(initial_state(m, prepare_thermal_state(m, 0.0)), sched, 5)
    thermal = bosonic_opdm(cold, method="naive").matrix
    projector = bosonic_opdm(zero, method="projector").matrix
    assert np.abs(thermal - projector).max() < 1e-4


def test_projector_ground_state_density():
    # deep interior density of the low-filling ground state is nearly uniform
    m = LatticeModel(n_sites=129, n_particles=8)
    state = initial_state(m, prepare_thermal_state(m, 0.0))
    rho = bosonic_opdm(state).matrix
    interior = rho.diagonal().real[32:-32]
    np.testing.assert_allclose(interior, 8.0 / 129.0, rtol=0.15)
    assert rho.diagonal().real.sum() == pytest.approx(8.0, abs=1e-8)


def test_opdm_matrices_are_positive_semidefinite():
    m = LatticeModel(n_sites=33, n_particles=4)
    th = prepare_thermal_state(m, 0.5 * fermi_energy(m))
    state = evolve(initial_state(m, th), KickSchedule(strength=3.0), 6)
    for op in (fermionic_opdm(state), bosonic_opdm(state, method="naive")):
        ev = np.linalg.eigvalsh(op.matrix)
        assert ev.min() > -1e-8
        diag = op.matrix.diagonal()
        assert np.abs(diag.imag).max() < 1e-10
        assert diag.real.min() > -1e-10 and diag.real.max() < 1.0 + 1e-10


def test_zero_temperature_row_delegates_to_projector():
    m = LatticeModel(n_sites=33, n_particles=4)
    state = initial_state(m, prepare_thermal_state(m, 0.0))
    full = bosonic_opdm(state).matrix
    row = bosonic_opdm_row(state, 5)
    assert np.abs(row - full[5]).max() < 1e-10


def test_naive_method_rejects_zero_temperature():
    m = LatticeModel(n_sites=9, n_particles=2)
    state = initial_state(m, prepare_thermal_state(m, 0.0))
    with pytest.raises(ValueError):
        bosonic_opdm(state, method="naive")


def test_ground_state_long_range_coherence_power_law():
    # 1/sqrt(r) decay over intermediate separations of the unkicked T = 0 gas
    from kickedtg import correlation_function, fit_power_law_tail

    m = LatticeModel(n_sites=513, n_particles=21)
    state = initial_state(m, prepare_thermal_state(m, 0.0))
    g1 = correlation_function(bosonic_opdm(state))
    d = m.n_sites / m.n_particles
    fit = fit_power_law_tail(
        g1.separations.astype(float), np.abs(g1.values.real), (2 * d, m.n_sites / 6)
    )
    assert fit.length == pytest.approx(-0.5, abs=0.1)


def test_finite_temperature_kills_the_power_law():
    # at T > 0 the same fit window is much better described by an exponential
    from kickedtg import correlation_function

    m = LatticeModel(n_sites=257, n_particles=15)
    state = initial_state(m, prepare_thermal_state(m, 0.5 * fermi_energy(m)))
    g1 = correlation_function(bosonic_opdm_via_rows(state))
    r = g1.separations.astype(float)
    v = np.abs(g1.values.real)
    win = (r >= 5) & (r <= 60) & (v > 1e-14)
    logv = np.log(v[win])
    for x, label in ((r[win], "exp"), (np.log(r[win]), "pow")):
        A = np.vstack([x, np.ones_like(x)]).T
        resid = logv - A @ np.linalg.lstsq(A, logv, rcond=None)[0]
        if label == "exp":
            ssr_exp = float(resid @ resid)
        else:
            ssr_pow = float(resid @ resid)
    assert ssr_exp < 0.2 * ssr_pow


def test_band_correlation_matches_full_average_for_decay():
    # the band mode reproduces the decay (what it is for), while absolute
    # values at larger separations carry the documented bulk-weighting bias
    from kickedtg import band_correlation_function, correlation_function, fit_exponential_tail

    m = LatticeModel(n_sites=129, n_particles=10)
    th = prepare_thermal_state(m, 0.5 * fermi_energy(m))
    state = evolve(initial_state(m, th), KickSchedule(strength=3.0), 5)
    full = correlation_function(bosonic_opdm(state, method="naive"))
    band = band_correlation_function(state, band_fraction=0.5)
    assert band.values[0].real == pytest.approx(full.values[0].real, rel=0.05)
    r = np.arange(20, dtype=float)
    f_full = fit_exponential_tail(r, np.abs(full.values[:20].real), (1, 14), kind="correlation")
    f_band = fit_exponential_tail(r, np.abs(band.values[:20].real), (1, 14), kind="correlation")
    assert f_band.length == pytest.approx(f_full.length, rel=0.10)
