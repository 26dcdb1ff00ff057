"""Discretized model: geometry, hopping and kick matrices, kick schedule, momentum grid.

The gas lives on an open chain of ``n_sites`` points spanning a box of
length ``2*pi``.  Hard-core bosons map to free fermions, so everything
downstream only needs the single-particle hopping matrix, the diagonal
kick potential, and the time-dependent kick amplitude.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * math.pi

OMEGA2 = TWO_PI * math.sqrt(5.0)
OMEGA3 = TWO_PI * math.sqrt(13.0)


@dataclass(frozen=True)
class LatticeModel:
    """Geometry and single-particle energy scales of the discretized chain.

    Attributes
    ----------
    n_sites : number of lattice points (odd for the symmetric momentum
        grid; even sizes are accepted for real-space-only work such as the
        tiny exact-oracle chains).
    n_particles : mean particle number of the grand-canonical state.
    hbar_eff : effective Planck constant of the rescaled units.
    box_length : fixed at 2*pi by the unit convention.
    """

    n_sites: int
    n_particles: int
    hbar_eff: float = 1.0
    box_length: float = TWO_PI

    def __post_init__(self):
        if self.n_sites < 3:
            raise ValueError(f"need at least 3 sites, got {self.n_sites}")
        if not 0 < self.n_particles < self.n_sites:
            raise ValueError(
                f"need 0 < n_particles < n_sites, got N={self.n_particles}, sites={self.n_sites}"
            )
        if self.hbar_eff <= 0:
            raise ValueError("hbar_eff must be positive")
        if not math.isclose(self.box_length, TWO_PI, rel_tol=1e-12):
            raise ValueError("box_length is fixed to 2*pi in these units")

    @property
    def spacing(self) -> float:
        """Lattice spacing a = L/(n_sites - 1); the chain spans the full box."""
        return self.box_length / (self.n_sites - 1)

    @property
    def coupling(self) -> float:
        """Hopping energy J = hbar_eff^2 / (2 a^2)."""
        return self.hbar_eff**2 / (2.0 * self.spacing**2)


@dataclass(frozen=True)
class KickSchedule:
    """Kick amplitude schedule K * [1 + eps * cos(omega2 t) cos(omega3 t)].

    ``anisotropy = 0`` gives strictly periodic kicking with constant
    amplitude; the two incommensurate tones make the drive quasiperiodic.
    """

    strength: float
    anisotropy: float = 0.0
    omega2: float = OMEGA2
    omega3: float = OMEGA3

    def __post_init__(self):
        if self.strength < 0:
            raise ValueError("kick strength must be >= 0")
        if not 0.0 <= self.anisotropy <= 1.0:
            raise ValueError("anisotropy must lie in [0, 1]")


@dataclass(frozen=True, eq=False)
class MomentumGrid:
    """Symmetric momentum grid k_m = 2*pi*m/(n_sites*a), m in [-(n-1)/2, (n-1)/2]."""

    values: np.ndarray = field(repr=False)

    @property
    def spacing(self) -> float:
        return float(self.values[1] - self.values[0])


def build_hopping_matrix(model: LatticeModel) -> np.ndarray:
    """Tridiagonal single-particle hopping matrix with open boundaries.

    Diagonal 2J, off-diagonal -J; the spectrum lies in [0, 4J] and its
    low-lying part approaches the free dispersion hbar^2 k^2 / 2.
    """
    n, J = model.n_sites, model.coupling
    h = np.zeros((n, n))
    np.fill_diagonal(h, 2.0 * J)
    idx = np.arange(n - 1)
    h[idx, idx + 1] = -J
    h[idx + 1, idx] = -J
    return h


def kick_site_potential(model: LatticeModel) -> np.ndarray:
    """Diagonal of the kick potential: cos(l*a - (n+1)*a/2) for l = 1..n.

    The site coordinates x_l = l*a - (n+1)*a/2 run symmetrically over
    [-L/2, L/2], so the cosine covers exactly one period of the pulse.
    """
    n, a = model.n_sites, model.spacing
    l = np.arange(1, n + 1)
    return np.cos(l * a - 0.5 * (n + 1) * a)


def build_kick_matrix(model: LatticeModel) -> np.ndarray:
    """Unit-amplitude kick matrix; the schedule amplitude multiplies it at kick time."""
    return np.diag(kick_site_potential(model))


def kick_amplitude(schedule: KickSchedule, kick_index: int) -> float:
    """Amplitude applied at the integer kick time t = kick_index."""
    t = float(kick_index)
    return schedule.strength * (
        1.0 + schedule.anisotropy * math.cos(schedule.omega2 * t) * math.cos(schedule.omega3 * t)
    )


def momentum_grid(model: LatticeModel) -> MomentumGrid:
    n, a = model.n_sites, model.spacing
    if n % 2 == 0:
        raise ValueError("the symmetric momentum grid needs an odd number of sites")
    m = np.arange(-(n // 2), n // 2 + 1)
    return MomentumGrid(values=TWO_PI * m / (n * a))


@functools.lru_cache(maxsize=8)
def hopping_eigensystem(model: LatticeModel) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and orthogonal eigenvectors of the hopping matrix.

    The open tridiagonal matrix diagonalizes analytically in the sine basis:
    E_m = 2J (1 - cos(m*pi/(n+1))), V[l, m] ~ sin(l*m*pi/(n+1)).  Building
    it in closed form is exact, fast, and gives a cleanly orthogonal basis;
    tests verify it against the matrix and a dense solver.
    """
    n, J = model.n_sites, model.coupling
    m = np.arange(1, n + 1)
    evals = 2.0 * J * (1.0 - np.cos(m * np.pi / (n + 1)))
    l = np.arange(1, n + 1)
    evecs = np.sqrt(2.0 / (n + 1)) * np.sin(np.outer(l, m) * np.pi / (n + 1))
    return evals, evecs


def fermi_energy(model: LatticeModel) -> float:
    """Fermi energy hbar_eff^2 N^2 / 8 of N fermions in the 2*pi box."""
    return model.hbar_eff**2 * model.n_particles**2 / 8.0
