import math

import numpy as np
import pytest

from kickedtg import (
    LatticeModel,
    MomentumDistribution,
    classify_phase,
    dynamical_exponent,
    extract_p_loc,
    fermi_energy,
    fit_effective_thermo,
    fit_effective_thermo_arrays,
    momentum_grid,
    predict_p_loc_high_t,
    predict_p_loc_low_t,
    predict_r_c,
    prepare_thermal_state,
    scaling_collapse,
)
from kickedtg.thermo_analysis import NONDEGENERATE_PREFACTOR

# frozen with mpmath: pi/(2 sqrt 3) * 0.4 and sqrt(pi)/((1 - 2^-1.5) zeta(3/2))
P_LOC_LOW_04 = 0.362759872847
NONDEG_PREFACTOR_REF = 1.04955861427383


def fd_on_grid(model, t, mu):
    k = momentum_grid(model).values
    w = 0.5 * model.hbar_eff**2 * k**2
    return 1.0 / (np.exp((w - mu) / t) + 1.0)


def test_round_trip_synthetic_fermi_dirac():
    m = LatticeModel(n_sites=257, n_particles=15)
    vals = fd_on_grid(m, 3.7, 12.1)
    dist = MomentumDistribution(grid=momentum_grid(m), values=vals, flavor="fermionic",
                                kick_count=0)
    eff = fit_effective_thermo(dist, m)
    assert eff.t_eff == pytest.approx(3.7, rel=1e-6)
    assert eff.mu_eff == pytest.approx(12.1, rel=1e-6)
    assert abs(eff.residuals[0]) < 1e-8 and abs(eff.residuals[1]) < 1e-8


def test_initial_state_is_a_fixed_point():
    # the t = 0 distribution in the continuum description is the grid-sampled
    # Fermi-Dirac form at (T0, mu0); the fit must return it
    m = LatticeModel(n_sites=257, n_particles=15)
    t0 = 0.4 * fermi_energy(m)
    from kickedtg.thermo_analysis import _solve_mu_on_grid

    k = momentum_grid(m).values
    mu0 = _solve_mu_on_grid(0.5 * k**2, 15.0, t0)
    eff = fit_effective_thermo_arrays(k, fd_on_grid(m, t0, mu0), 1.0)
    assert eff.t_eff == pytest.approx(t0, rel=1e-4)
    assert eff.mu_eff == pytest.approx(mu0, rel=1e-4)


def test_zero_temperature_input_returns_zero():
    m = LatticeModel(n_sites=129, n_particles=10)
    k = momentum_grid(m).values
    w = 0.5 * k**2
    vals = (w <= np.sort(w)[9]).astype(float)
    eff = fit_effective_thermo_arrays(k, vals, 1.0)
    assert eff.t_eff == 0.0


def test_unattainable_energy_raises():
    m = LatticeModel(n_sites=65, n_particles=6)
    k = momentum_grid(m).values
    vals = np.zeros_like(k)
    vals[0] = vals[-1] = 3.0     # all weight at the grid edge: too broad
    with pytest.raises(RuntimeError):
        fit_effective_thermo_arrays(k, vals, 1.0)


def test_p_loc_low_temperature_predictor():
    eF = 2.0
    assert predict_p_loc_low_t(0.5 * eF, 0.3 * eF, eF) == pytest.approx(P_LOC_LOW_04, abs=1e-5)
    assert predict_p_loc_low_t(0.7, 0.7, eF) == 0.0
    # T0 = 0 reduces to the linear law
    t = 0.31 * eF
    assert predict_p_loc_low_t(t, 0.0, eF) == pytest.approx(
        math.pi / (2 * math.sqrt(3)) * t / eF, rel=1e-12
    )
    with pytest.raises(ValueError):
        predict_p_loc_low_t(0.2, 0.3, eF)


def test_p_loc_high_temperature_predictor():
    eF = 3.0
    assert predict_p_loc_high_t(1.0, 1.0, eF) == 0.0
    assert predict_p_loc_high_t(2.0 * eF + 1.0, 1.0, eF) == pytest.approx(1.0, rel=1e-12)


def test_predictors_scale_invariant():
    # pure functions of temperature ratios: joint rescaling changes nothing
    for f in (predict_p_loc_low_t, predict_p_loc_high_t):
        a = f(0.5, 0.2, 1.3)
        b = f(0.5 * 7, 0.2 * 7, 1.3 * 7)
        assert a == pytest.approx(b, rel=1e-12)


def test_extract_p_loc():
    assert extract_p_loc(5.0, 5.0, 9) == 0.0
    assert extract_p_loc(1.0, 1.0 + 4.5, 9) == pytest.approx(1.0, rel=1e-12)
    with pytest.raises(ValueError):
        extract_p_loc(2.0, 1.0, 9)


def test_r_c_degenerate_limit_matches_quadrature():
    # at mu/T = 50 the quadrature lands on the working relation 2 eF/T
    eF = 10.0
    t = 1.0
    mu = 50.0
    pred = predict_r_c(t, mu, eF, 1.0)
    # the degenerate closed form evaluated at eF := mu (the limit statement)
    target = (1.0 / math.sqrt(2 * mu)) * 2.0 * mu / t
    assert pred.r_c * math.sqrt(2 * mu) == pytest.approx(2 * mu / t, rel=0.02)
    assert pred.limits["degenerate"] == pytest.approx(2 * eF / t * (1 / math.sqrt(2 * eF)), rel=1e-12)


def test_r_c_nondegenerate_prefactor_pinned():
    assert NONDEGENERATE_PREFACTOR == pytest.approx(NONDEG_PREFACTOR_REF, abs=1e-8)
    pred = predict_r_c(1.0, 0.0, 4.0, 1.0)
    unit = 1.0 / math.sqrt(8.0)
    assert pred.limits["nondegenerate"] == pytest.approx(
        unit * NONDEG_PREFACTOR_REF * 2.0, rel=1e-12
    )


def test_r_c_negative_mu_limit():
    # |mu|/T >> 1, mu < 0: r_c p_F/hbar -> sqrt(eF/|mu|)
    eF, t, mu = 4.0, 1.0, -50.0
    pred = predict_r_c(t, mu, eF, 1.0)
    pf = math.sqrt(2 * eF)
    assert pred.r_c * pf == pytest.approx(math.sqrt(eF / abs(mu)), rel=1e-3)
    assert pred.limits["negative_mu_degenerate"] == pytest.approx(
        math.sqrt(eF / abs(mu)) / pf, rel=1e-12
    )


def test_r_c_validation():
    with pytest.raises(ValueError):
        predict_r_c(0.0, 1.0, 1.0, 1.0)


def test_dynamical_exponent_power_laws():
    t = np.arange(1, 400)
    g, se = dynamical_exponent(t, 3.0 * t)
    assert g == pytest.approx(1.0, abs=1e-6) and se < 1e-6
    g, _ = dynamical_exponent(t, np.full(t.size, 2.5))
    assert g == pytest.approx(0.0, abs=1e-12)
    g, _ = dynamical_exponent(t, 0.7 * t ** (2.0 / 3.0))
    assert g == pytest.approx(2.0 / 3.0, abs=1e-6)


def test_dynamical_exponent_rescaling_invariance():
    t = np.arange(1, 200)
    e = 2.0 * t**0.8
    g1, _ = dynamical_exponent(t, e)
    g2, _ = dynamical_exponent(t, 123.4 * e)
    assert g1 == pytest.approx(g2, rel=1e-12)


def test_dynamical_exponent_needs_points():
    t = np.arange(1, 6)
    with pytest.raises(ValueError):
        dynamical_exponent(t, t.astype(float))


def test_classify_phase():
    assert classify_phase(0.05) == ("localized", False)
    assert classify_phase(0.66) == ("critical", False)
    assert classify_phase(0.95) == ("delocalized", False)
    label, low = classify_phase(0.40)
    assert low and label in ("localized", "critical")
    assert classify_phase(0.35) == ("localized", True)
    with pytest.raises(ValueError):
        classify_phase(float("nan"))


def _gaussian_family(model, times, alpha):
    grid = momentum_grid(model)
    k = grid.values
    out = []
    for t in times:
        vals = t ** (-alpha) * np.exp(-((k * t ** (-alpha)) ** 2))
        out.append((t, MomentumDistribution(grid=grid, values=vals, flavor="fermionic",
                                            kick_count=t)))
    return out


def test_scaling_collapse_exact_family():
    m = LatticeModel(n_sites=1025, n_particles=8)
    snaps = _gaussian_family(m, (50, 100, 200), 0.5)
    res = scaling_collapse(snaps, alpha=0.5, regime="moderate")
    assert res.metric < 1e-6
    wrong = scaling_collapse(snaps, alpha=1.0 / 3.0, regime="moderate")
    assert wrong.metric > 100 * res.metric


def test_scaling_collapse_alpha_zero_is_identity():
    m = LatticeModel(n_sites=129, n_particles=8)
    snaps = _gaussian_family(m, (50, 100, 200), 0.0)
    res = scaling_collapse(snaps, alpha=0.0, regime="moderate")
    assert res.metric < 1e-12


def test_scaling_collapse_tail_regime():
    # a pure C(t)/k^4 tail with C ~ t^(2 alpha) collapses under the tail rescale
    m = LatticeModel(n_sites=1025, n_particles=8)
    grid = momentum_grid(m)
    k = grid.values
    snaps = []
    for t in (50, 100, 200):
        vals = np.where(np.abs(k) > 1, (t / np.abs(np.where(k == 0, 1, k)) ** 4), 1.0)
        snaps.append((t, MomentumDistribution(grid=grid, values=vals, flavor="bosonic",
                                              kick_count=t)))
    res = scaling_collapse(snaps, alpha=0.5, regime="tail")
    assert res.metric < 1e-5


def test_scaling_collapse_validation():
    m = LatticeModel(n_sites=129, n_particles=8)
    snaps = _gaussian_family(m, (50, 100), 0.5)
    with pytest.raises(ValueError):
        scaling_collapse(snaps, alpha=0.5)
    snaps = _gaussian_family(m, (50, 100, 200), 0.5)
    with pytest.raises(ValueError):
        scaling_collapse(snaps, alpha=0.5, regime="nope")
    with pytest.raises(ValueError):
        scaling_collapse(snaps, alpha=0.5, regime="moderate", x_window=(100.0, 200.0))


def test_scaling_record_bundles_predictions():
    from kickedtg import scaling_record

    m = LatticeModel(n_sites=257, n_particles=15)
    e_f = fermi_energy(m)
    rec = scaling_record(energy_initial=100.0, energy_final=130.0,
                         t_eff=0.3 * e_f, t0=0.0, mu_eff=0.8 * e_f, model=m, r_c=0.5)
    assert rec.p_fermi == pytest.approx(7.5)
    assert rec.p_loc == pytest.approx(math.sqrt(2 * 30.0 / 15))
    assert rec.predictions["p_loc_over_pf_degenerate"] == pytest.approx(
        math.pi / (2 * math.sqrt(3)) * 0.3
    )
    assert rec.predictions["r_c_degenerate"] == pytest.approx(
        (1 / rec.p_fermi) * 2.0 / 0.3, rel=1e-12
    )
