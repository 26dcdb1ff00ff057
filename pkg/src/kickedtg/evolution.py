"""Floquet evolution of the single-particle propagator.

One period applies the kick (diagonal phases, amplitude taken from the
schedule at the integer kick time) followed by the free flight.  The state
carries W(t) = U(t) V, the evolved eigenbasis of the initial thermal state:
every downstream observable (fermionic matrix, determinant formulas) is a
function of W and the fixed occupation/Boltzmann exponents, so the thermal
matrix never has to be rebuilt.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .lattice import LatticeModel, KickSchedule, kick_amplitude, kick_site_potential, hopping_eigensystem
from .thermal_state import ThermalState

# advance() aborts beyond this unitarity defect; spot checks assert 1e-8
UNITARITY_ABORT = 1e-6


class EvolutionDivergence(RuntimeError):
    """Accumulated numerical error destroyed unitarity of the propagator."""


_free_cache: dict[LatticeModel, np.ndarray] = {}


def free_step_operator(model: LatticeModel) -> np.ndarray:
    """exp(-i h / hbar_eff) built from the hopping eigensystem, cached per model."""
    op = _free_cache.get(model)
    if op is None:
        ev, V = hopping_eigensystem(model)
        op = (V * np.exp(-1j * ev / model.hbar_eff)) @ V.T
        _free_cache[model] = op
    return op


def kick_phases(model: LatticeModel, amplitude: float) -> np.ndarray:
    """Diagonal of exp(-i * amplitude * cos(x_l) / hbar_eff)."""
    return np.exp(-1j * amplitude * kick_site_potential(model) / model.hbar_eff)


def kick_step_operator(model: LatticeModel, amplitude: float) -> np.ndarray:
    """Dense diagonal kick operator (unit-modulus phases)."""
    return np.diag(kick_phases(model, amplitude))


@dataclass(frozen=True, eq=False)
class PropagatorState:
    """Propagator after ``kick_count`` full Floquet periods.

    ``basis`` is W(t) = U(t) V with V the hopping eigenvectors; it stays
    unitary under exact arithmetic since every factor is.  A cheap probe
    vector check runs every step; the full defect is checked on demand.
    """

    model: LatticeModel
    thermal: ThermalState
    kick_count: int
    basis: np.ndarray = field(repr=False)

    @property
    def unitary(self) -> np.ndarray:
        """U(t) itself, recovered as W(t) V^T."""
        return self.basis @ self.thermal.eigenvectors.T

    @property
    def evolved_thermal(self) -> np.ndarray:
        """Occupation form U(t) rho_occ U(t)^dag = W diag(f) W^dag (Hermitian, trace N)."""
        W = self.basis
        return (W * self.thermal.occupations) @ W.conj().T

    def unitarity_defect(self) -> float:
        W = self.basis
        return float(np.abs(W.conj().T @ W - np.eye(W.shape[0])).max())


def initial_state(model: LatticeModel, thermal: ThermalState) -> PropagatorState:
    return PropagatorState(model=model, thermal=thermal, kick_count=0,
                           basis=thermal.eigenvectors.astype(complex))


def _probe_defect(W: np.ndarray) -> float:
    n = W.shape[0]
    e = np.full(n, 1.0 / np.sqrt(n), dtype=complex)
    return float(np.abs(W.conj().T @ (W @ e) - e).max())


def advance(state: PropagatorState, schedule: KickSchedule) -> PropagatorState:
    """Apply one Floquet period: kick at amplitude K(t = kick_count), then free flight."""
    amp = kick_amplitude(schedule, state.kick_count)
    W = free_step_operator(state.model) @ (kick_phases(state.model, amp)[:, None] * state.basis)
    if _probe_defect(W) > UNITARITY_ABORT:
        raise EvolutionDivergence(
            f"unitarity drift exceeded {UNITARITY_ABORT} at kick {state.kick_count + 1}"
        )
    return replace(state, kick_count=state.kick_count + 1, basis=W)


def advance_inverse(state: PropagatorState, schedule: KickSchedule) -> PropagatorState:
    """Exactly undo the most recent period (free flight back, then inverse kick)."""
    if state.kick_count <= 0:
        raise ValueError("no kick to undo")
    amp = kick_amplitude(schedule, state.kick_count - 1)
    W = free_step_operator(state.model).conj().T @ state.basis
    W = kick_phases(state.model, amp).conj()[:, None] * W
    if _probe_defect(W) > UNITARITY_ABORT:
        raise EvolutionDivergence(
            f"unitarity drift exceeded {UNITARITY_ABORT} while reversing kick {state.kick_count}"
        )
    return replace(state, kick_count=state.kick_count - 1, basis=W)


def evolve(state: PropagatorState, schedule: KickSchedule, kicks: int) -> PropagatorState:
    for _ in range(kicks):
        state = advance(state, schedule)
    return state
