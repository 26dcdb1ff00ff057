"""Kicked Tonks-Girardeau gas at finite temperature.

A numpy/scipy library for simulating a one-dimensional gas of hard-core
bosons on a lattice under periodic or quasiperiodic delta kicks, starting
from a grand-canonical thermal state of the mapped free fermions.  Provides
exact small-lattice cross-checks, momentum-space observables, effective
thermalization fits, and localization/delocalization scaling analysis.
"""

from .lattice import (
    LatticeModel,
    KickSchedule,
    MomentumGrid,
    build_hopping_matrix,
    build_kick_matrix,
    kick_amplitude,
    momentum_grid,
    hopping_eigensystem,
    fermi_energy,
)
from .thermal_state import (
    ThermalState,
    solve_chemical_potential,
    prepare_thermal_state,
    thermal_matrix,
    occupation_matrix,
)
from .evolution import (
    PropagatorState,
    initial_state,
    free_step_operator,
    kick_step_operator,
    advance,
    advance_inverse,
    evolve,
)
from .opdm import (
    Opdm,
    fermionic_opdm,
    bosonic_opdm,
    bosonic_opdm_row,
    bosonic_opdm_via_rows,
    sign_string,
)
from .observables import (
    MomentumDistribution,
    CorrelationFunction,
    EnergyRecord,
    momentum_distribution,
    correlation_function,
    band_correlation_function,
    kinetic_energy,
    tan_contact,
    fit_exponential_tail,
    fit_power_law_tail,
    tail_contact_estimate,
)
from .thermo_analysis import (
    EffectiveThermo,
    PhasePoint,
    RcPrediction,
    ScalingRecord,
    scaling_record,
    fit_effective_thermo,
    fit_effective_thermo_arrays,
    predict_p_loc_low_t,
    predict_p_loc_high_t,
    extract_p_loc,
    predict_r_c,
    dynamical_exponent,
    classify_phase,
    scaling_collapse,
)

__version__ = "0.1.0"
