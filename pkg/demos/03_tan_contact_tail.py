"""Algebraic momentum tail and Tan's contact.

Hard-core interactions put a universal C/k^4 tail on the bosonic momentum
distribution.  After the kicked gas localizes, the steady-state tail sits at
a contact set by the absorbed energy.  This script plots the steady-state
bosonic n(k) on log-log axes, fits the top-decade slope (expect -4), and
compares k^4 n(k) against the thermal-gas contact estimate 8 N E/(L^2 hbar^2)
(the measured tail runs a constant factor above that estimate; see the
README discussion of the contact normalization).
"""

import pathlib

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from kickedtg import fit_power_law_tail
from kickedtg.config import config_from_mapping
from kickedtg.runner import run

OUT = pathlib.Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

KICKS = 250
fig, axes = plt.subplots(1, 2, figsize=(11, 4.2))
for t_frac, color in ((0.0, "C0"), (0.5, "C3")):
    config = config_from_mapping({
        "model.n_sites": "257", "model.n_particles": "15",
        "schedule.kick_strength": "4.0",
        "run.temperature": f"{t_frac}*fermi", "run.total_kicks": str(KICKS),
        "run.snapshot_times": f"0,{KICKS}", "observables.bosonic_times": str(KICKS),
    })
    print(f"running T0 = {t_frac} eps_F ...")
    res = run(config, workers=2)
    k = res.k_values
    pos = k > 0
    kp, nk = k[pos], res.snapshots[KICKS].nk_boson[pos]
    dk = res.k_values[1] - res.k_values[0]

    fit = fit_power_law_tail(kp, nk, (kp.max() / 10, kp.max()))
    print(f"  top-decade log-log slope: {fit.length:.3f} (expect ~ -4)")

    axes[0].loglog(kp, nk, color=color, lw=1.2,
                   label=f"$T_0={t_frac}\\,\\epsilon_F$, slope {fit.length:.2f}")
    guide = fit.amplitude * kp[kp > 8.0] ** fit.length
    axes[0].loglog(kp[kp > 8.0], guide, "--", color=color, lw=0.8)

    axes[1].loglog(kp, kp**4 * nk / dk, color=color, lw=1.2)
    axes[1].axhline(res.contact_thermal, color=color, ls=":",
                    label=f"$8NE/(L^2\\hbar^2)$, $T_0={t_frac}\\,\\epsilon_F$")

axes[0].set_xlabel("$k$"); axes[0].set_ylabel("$n^B(k)$")
axes[0].set_title(f"steady-state bosonic distribution ($t={KICKS}$)")
axes[0].legend(fontsize=8)
axes[1].set_xlabel("$k$"); axes[1].set_ylabel("$k^4\\, n^B(k)$")
axes[1].set_title("tail amplitude vs thermal contact estimate")
axes[1].legend(fontsize=8)
fig.tight_layout()
fig.savefig(OUT / "tan_contact_tail.png", dpi=150)
print(f"wrote {OUT / 'tan_contact_tail.png'}")
