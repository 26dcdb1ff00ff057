"""Brute-force many-body reference for tiny chains.

Enumerates the full hard-core occupation basis (particle number is conserved,
so everything is organized per number sector), prepares the grand-canonical
thermal ensemble at a given chemical potential, applies exact many-body
Floquet steps, and measures one-particle density matrices directly, with
Jordan-Wigner sign strings for the fermionic flavor.  This is the
independent check for the determinant machinery, and is wired to the
``oracle-check`` command; it is exact but exponential, so sites are capped.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .lattice import LatticeModel, KickSchedule, kick_amplitude, kick_site_potential
from .opdm import Opdm

MAX_SITES = 12
MAX_EVOLVE_SITES = 10


def _popcount_below(state: int, site: int) -> int:
    return bin(state & ((1 << site) - 1)).count("1")


@dataclass(frozen=True, eq=False)
class Sector:
    n_particles: int
    states: np.ndarray                      # occupation bit patterns
    index: dict                             # state -> position
    hamiltonian: np.ndarray = field(repr=False)
    eigenvalues: np.ndarray = field(repr=False)
    eigenvectors: np.ndarray = field(repr=False)
    kick_diagonal: np.ndarray = field(repr=False)   # sum_l c_l n_l per state


@dataclass(frozen=True, eq=False)
class FockSpace:
    model: LatticeModel
    sectors: tuple


def build_fock_space(model: LatticeModel) -> FockSpace:
    n = model.n_sites
    if n > MAX_SITES:
        raise ValueError(f"Fock-space oracle is capped at {MAX_SITES} sites, got {n}")
    J = model.coupling
    c = kick_site_potential(model)
    by_number: dict[int, list[int]] = {k: [] for k in range(n + 1)}
    for s in range(1 << n):
        by_number[bin(s).count("1")].append(s)
    sectors = []
    for num, states in by_number.items():
        states = np.array(states, dtype=np.int64)
        index = {int(s): k for k, s in enumerate(states)}
        dim = len(states)
        H = np.zeros((dim, dim))
        kick = np.zeros(dim)
        for k, s in enumerate(states):
            s = int(s)
            H[k, k] = 2.0 * J * num
            kick[k] = sum(c[l] for l in range(n) if (s >> l) & 1)
            for l in range(n - 1):
                if (s >> l) & 1 and not (s >> (l + 1)) & 1:
                    s2 = s ^ (1 << l) ^ (1 << (l + 1))
                    k2 = index[s2]
                    # adjacent hop: the Jordan-Wigner string cancels, so the
                    # matrix element is -J for bosons and fermions alike
                    H[k2, k] += -J
                    H[k, k2] += -J
        ev, V = np.linalg.eigh(H)
        sectors.append(Sector(num, states, index, H, ev, V, kick))
    return FockSpace(model=model, sectors=tuple(sectors))


def build_dense_hamiltonians(model: LatticeModel) -> tuple[np.ndarray, np.ndarray]:
    """Full 2^n many-body hopping and kick matrices (test helper, n <= 8)."""
    if model.n_sites > 8:
        raise ValueError("dense many-body matrices only below 9 sites")
    space = build_fock_space(model)
    dim = 1 << model.n_sites
    Hhop = np.zeros((dim, dim))
    Hkick = np.zeros((dim, dim))
    for sec in space.sectors:
        idx = sec.states
        Hhop[np.ix_(idx, idx)] = sec.hamiltonian
        Hkick[idx, idx] = sec.kick_diagonal
    return Hhop, Hkick


@dataclass(frozen=True, eq=False)
class EvolvedFock:
    """Evolved grand-canonical ensemble: one normalized block per sector."""

    space: FockSpace
    kick_count: int
    densities: tuple  # rho_n / Z, sector order matching space.sectors


def exact_evolve(
    space: FockSpace,
    schedule: KickSchedule | None,
    kicks: int,
    temperature: float,
    mu: float,
) -> EvolvedFock:
    """Exact Floquet evolution of e^{-(H - mu N)/T} / Z for ``kicks`` periods."""
    model = space.model
    if kicks > 0 and model.n_sites > MAX_EVOLVE_SITES:
        raise ValueError(f"many-body evolution is capped at {MAX_EVOLVE_SITES} sites")
    if temperature <= 0:
        raise ValueError("the oracle ensemble needs T > 0")
    # global shift keeps every Boltzmann weight representable
    shift = min(float(np.min(sec.eigenvalues - mu * sec.n_particles)) for sec in space.sectors)
    rhos = []
    Z = 0.0
    for sec in space.sectors:
        w = np.exp(-((sec.eigenvalues - mu * sec.n_particles) - shift) / temperature)
        Z += w.sum()
        rhos.append(((sec.eigenvectors * w) @ sec.eigenvectors.T).astype(complex))
    rhos = [r / Z for r in rhos]
    hbar = model.hbar_eff
    frees = [
        (sec.eigenvectors * np.exp(-1j * sec.eigenvalues / hbar)) @ sec.eigenvectors.T
        for sec in space.sectors
    ]
    for t in range(kicks):
        amp = kick_amplitude(schedule, t)
        for k, sec in enumerate(space.sectors):
            kick_phase = np.exp(-1j * amp * sec.kick_diagonal / hbar)
            F = frees[k] * kick_phase[None, :]
            rhos[k] = F @ rhos[k] @ F.conj().T
    return EvolvedFock(space=space, kick_count=kicks, densities=tuple(rhos))


def exact_opdm(evolved: EvolvedFock, flavor: str) -> Opdm:
    """<b_i^dag b_j> or <f_i^dag f_j> measured directly on the evolved ensemble."""
    if flavor not in ("fermionic", "bosonic"):
        raise ValueError(f"unknown flavor {flavor!r}")
    fermion = flavor == "fermionic"
    space = evolved.space
    n = space.model.n_sites
    out = np.zeros((n, n), dtype=complex)
    for sec, rho in zip(space.sectors, evolved.densities):
        for k, s in enumerate(sec.states):
            s = int(s)
            for j in range(n):
                if not (s >> j) & 1:
                    continue
                s1 = s ^ (1 << j)
                for i in range(n):
                    if (s1 >> i) & 1:
                        continue
                    s2 = s1 ^ (1 << i)
                    sign = 1.0
                    if fermion:
                        sign = (-1.0) ** (_popcount_below(s, j) + _popcount_below(s1, i))
                    out[i, j] += sign * rho[k, sec.index[s2]]
    return Opdm(flavor, out, evolved.kick_count)


def exact_thermal_opdm(space: FockSpace, temperature: float, mu: float, flavor: str) -> Opdm:
    """Unkicked grand-canonical one-particle density matrix at (T, mu)."""
    return exact_opdm(exact_evolve(space, None, 0, temperature, mu), flavor)


def exact_hopping_energy(evolved: EvolvedFock) -> float:
    """Grand-canonical mean of the lattice hopping Hamiltonian."""
    total = 0.0
    for sec, rho in zip(evolved.space.sectors, evolved.densities):
        total += float(np.trace(rho @ sec.hamiltonian).real)
    return total


def exact_mean_number(evolved: EvolvedFock) -> float:
    total = 0.0
    for sec, rho in zip(evolved.space.sectors, evolved.densities):
        total += sec.n_particles * float(np.trace(rho).real)
    return total
