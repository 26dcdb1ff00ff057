"""Effective thermalization of the localized steady state.

The frozen momentum distribution of the kicked gas looks like a Fermi-Dirac
distribution at an effective temperature.  This script tracks the fitted
(T_eff, mu_eff) against kick number, then checks the closed-form relation
between the absorbed energy and T_eff: in the degenerate regime the
localization momentum obeys

    p_loc / p_F = (pi / 2 sqrt(3)) sqrt(T_eff^2 - T0^2) / eps_F,

the same line for every particle number.
"""

import pathlib

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from kickedtg import extract_p_loc, fermi_energy, predict_p_loc_low_t
from kickedtg.config import config_from_mapping
from kickedtg.runner import run

OUT = pathlib.Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

fig, axes = plt.subplots(1, 3, figsize=(13, 4))

# (a, b) effective temperature and chemical potential vs kick number
runs = {}
for t_frac in (0.0, 0.25, 1.0):
    config = config_from_mapping({
        "model.n_sites": "257", "model.n_particles": "15",
        "schedule.kick_strength": "4.0",
        "run.temperature": f"{t_frac}*fermi", "run.total_kicks": "200",
        "run.snapshot_times": "0", "observables.bosonic_times": "none",
    })
    print(f"running T0 = {t_frac} eps_F ...")
    runs[t_frac] = run(config)

e_f = fermi_energy(runs[0.0].config.model)
for t_frac, res in runs.items():
    axes[0].plot(res.kicks[1:], res.t_eff[1:] / e_f, label=f"$T_0={t_frac}\\,\\epsilon_F$")
    axes[1].plot(res.kicks[1:], res.mu_eff[1:] / e_f, label=f"$T_0={t_frac}\\,\\epsilon_F$")
axes[0].set_xscale("log"); axes[1].set_xscale("log")
axes[0].set_xlabel("$t$"); axes[0].set_ylabel("$T_{eff}/\\epsilon_F$")
axes[1].set_xlabel("$t$"); axes[1].set_ylabel("$\\mu_{eff}/\\epsilon_F$")
axes[0].set_title("effective temperature tracks the energy")
axes[1].set_title("effective chemical potential")
axes[0].legend(fontsize=8); axes[1].legend(fontsize=8)

# (c) scaling relation at T0 = 0: sweep kick strength, two particle numbers
ax = axes[2]
line = np.linspace(0, 0.45, 50)
ax.plot(line, np.pi / (2 * np.sqrt(3)) * line, "k-", lw=1,
        label="$\\frac{\\pi}{2\\sqrt{3}}\\,T_{eff}/\\epsilon_F$")
for n_particles, marker in ((15, "o"), (21, "s")):
    xs, ys = [], []
    for strength in (1.0, 1.3, 1.6, 2.0):
        config = config_from_mapping({
            "model.n_sites": "257", "model.n_particles": str(n_particles),
            "schedule.kick_strength": str(strength),
            "run.temperature": "0", "run.total_kicks": "300",
            "run.snapshot_times": "0", "observables.bosonic_times": "none",
        })
        res = run(config)
        model = config.model
        ef = fermi_energy(model)
        late = slice(150, None)
        p_loc = extract_p_loc(res.energy[0], res.energy[late].mean(), n_particles)
        xs.append(res.t_eff[late].mean() / ef)
        ys.append(p_loc / np.sqrt(2 * ef))
        print(f"N={n_particles} K={strength}: T_eff/eF={xs[-1]:.3f} p_loc/p_F={ys[-1]:.3f}")
    ax.plot(xs, ys, marker, ms=6, mfc="none", label=f"$N={n_particles}$")
ax.set_xlabel("$T_{eff}/\\epsilon_F$")
ax.set_ylabel("$p_{loc}/p_F$")
ax.set_title("absorbed energy vs $T_{eff}$: one line for all $N$")
ax.legend(fontsize=8)

fig.tight_layout()
fig.savefig(OUT / "effective_thermalization.png", dpi=150)
print(f"wrote {OUT / 'effective_thermalization.png'}")
