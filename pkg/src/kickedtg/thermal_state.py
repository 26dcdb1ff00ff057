"""Grand-canonical thermal state of the mapped free fermions.

Solves the chemical potential at given (T0, N) on the hopping spectrum and
exposes the single-particle thermal matrix in its two useful forms: the
occupation (Fermi-Dirac) form used for fermionic observables, and the
unnormalized Boltzmann weight entering the determinant formulas.  The
partition function is never materialized; only log-ratios built from the
eigenvalue exponents are used downstream.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .lattice import LatticeModel, hopping_eigensystem

# beyond this the raw Boltzmann weight exp(-(E-mu)/T) is not representable
_EXP_LIMIT = 700.0


def fermi_occupations(eigenvalues: np.ndarray, mu: float, temperature: float) -> np.ndarray:
    """Fermi-Dirac occupations 1/(exp((E-mu)/T)+1), overflow-free via tanh."""
    z = (np.asarray(eigenvalues) - mu) / temperature
    return 0.5 * (1.0 - np.tanh(0.5 * z))


def solve_chemical_potential(
    eigenvalues: np.ndarray,
    n_particles: float,
    temperature: float,
    tol: float = 1e-10,
    max_iter: int = 400,
) -> float:
    """Chemical potential mu with sum_i 1/(exp((E_i-mu)/T)+1) = N.

    The constraint is strictly increasing in mu, so bracketed bisection on
    [E_min - 50 T, E_max + 50 T] converges unconditionally.  ``tol`` is an
    absolute tolerance on the particle number.
    """
    ev = np.asarray(eigenvalues, dtype=float)
    if temperature <= 0:
        raise ValueError("solve_chemical_potential needs T > 0; use the T=0 branch")
    if not 0 < n_particles < ev.size:
        raise ValueError(f"need 0 < N < {ev.size}, got {n_particles}")
    lo = ev.min() - 50.0 * temperature
    hi = ev.max() + 50.0 * temperature
    mid = 0.5 * (lo + hi)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        n_mid = fermi_occupations(ev, mid, temperature).sum()
        if abs(n_mid - n_particles) <= tol:
            return mid
        if n_mid < n_particles:
            lo = mid
        else:
            hi = mid
    raise RuntimeError(
        f"chemical potential did not converge to |dN| <= {tol} in {max_iter} iterations "
        f"(last dN = {n_mid - n_particles:.3e}); the spectrum/temperature input is ill-conditioned"
    )


@dataclass(frozen=True, eq=False)
class ThermalState:
    """Eigenbasis plus occupations of the initial grand-canonical state.

    ``temperature == 0`` is an explicit branch: occupations are a sharp step
    on the lowest ``n_particles`` orbitals and ``chemical_potential`` sits
    midway in the gap at the Fermi level.
    """

    temperature: float
    chemical_potential: float
    eigenvalues: np.ndarray = field(repr=False)
    eigenvectors: np.ndarray = field(repr=False)
    occupations: np.ndarray = field(repr=False)
    n_particles: float

    @property
    def exponents(self) -> np.ndarray:
        """(E - mu)/T per orbital; raises at T = 0 where the form is singular."""
        if self.temperature <= 0:
            raise ValueError("Boltzmann exponents are undefined at T = 0")
        return (self.eigenvalues - self.chemical_potential) / self.temperature

    @property
    def log_partition(self) -> float:
        """log det[I + exp(-(h - mu)/T)] accumulated stably from the exponents."""
        x = self.exponents
        return float(np.sum(np.maximum(0.0, -x) + np.log1p(np.exp(-np.abs(x)))))


def prepare_thermal_state(model: LatticeModel, temperature: float) -> ThermalState:
    """Diagonalize the hopping matrix and fill it at temperature T0."""
    ev, V = hopping_eigensystem(model)
    N = model.n_particles
    if temperature < 0:
        raise ValueError("temperature must be >= 0")
    if temperature == 0:
        occ = np.zeros(model.n_sites)
        occ[:N] = 1.0
        mu = 0.5 * (ev[N - 1] + ev[N])
    else:
        mu = solve_chemical_potential(ev, N, temperature)
        occ = fermi_occupations(ev, mu, temperature)
    return ThermalState(
        temperature=temperature,
        chemical_potential=mu,
        eigenvalues=ev,
        eigenvectors=V,
        occupations=occ,
        n_particles=float(N),
    )


def occupation_matrix(state: ThermalState) -> np.ndarray:
    """V diag(occupations) V^T: the t = 0 fermionic one-particle matrix, trace N."""
    V = state.eigenvectors
    return (V * state.occupations) @ V.T


def thermal_matrix(state: ThermalState) -> np.ndarray:
    """Unnormalized Boltzmann weight V diag(exp(-(E-mu)/T)) V^T.

    Guarded against overflow: for (mu - E_min)/T beyond the float64 range the
    raw matrix is not representable and the factorized exponent form used by
    the determinant pipeline must be used instead.
    """
    x = state.exponents
    if np.max(-x) > _EXP_LIMIT:
        raise OverflowError(
            "Boltzmann weights overflow float64 at this temperature; "
            "use the eigen-exponent factorization instead of the dense matrix"
        )
    V = state.eigenvectors
    return (V * np.exp(-x)) @ V.T
