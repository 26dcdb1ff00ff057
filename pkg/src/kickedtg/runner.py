"""End-to-end experiment runner: evolve, measure, fit, persist.

A run is fully deterministic (there is no randomness anywhere in the
pipeline), so identical configurations reproduce byte-identical CSV bodies.
Per-run outputs: ``energy.csv`` (kick, kinetic_energy, t_eff, mu_eff),
momentum snapshots ``nk_fermion_t{t}.csv`` / ``nk_boson_t{t}.csv`` (k, n),
correlation snapshots ``g1_t{t}.csv`` (r, re_g1, im_g1), and a structured
``summary.json`` with the fitted exponent, lengths, phase, and provenance.
"""

from __future__ import annotations

import hashlib
import json
import os
import platform
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .config import RunConfig
from .evolution import advance, initial_state
from .lattice import momentum_grid
from .observables import (
    MomentumDistribution,
    correlation_function,
    fit_exponential_tail,
    fit_power_law_tail,
    momentum_distribution,
    tail_contact_estimate,
    tan_contact,
)
from .opdm import bosonic_opdm, bosonic_opdm_via_rows, fermionic_opdm
from .oracle import build_fock_space, exact_evolve, exact_opdm
from .thermal_state import prepare_thermal_state
from .thermo_analysis import PhasePoint, classify_phase, dynamical_exponent, fit_effective_thermo

THREADS_ENV = "KICKEDTG_THREADS"


def default_workers() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw:
        return max(1, int(raw))
    return os.cpu_count() or 1


class StageError(RuntimeError):
    """A pipeline stage failed; the message names the stage."""


def _stage(name: str):
    class _Ctx:
        def __enter__(self):
            return self

        def __exit__(self, exc_type, exc, tb):
            if exc is not None and not isinstance(exc, StageError):
                raise StageError(f"stage '{name}' failed: {exc}") from exc
            return False

    return _Ctx()


def fermionic_nk(state) -> np.ndarray:
    """n^F(k) on the symmetric grid straight from the evolved basis.

    One FFT of W over the site axis gives the overlaps with every grid
    plane wave at once; summing |overlap|^2 against the occupations costs
    n^2 instead of the n^3 of materializing the matrix.
    """
    n = state.model.n_sites
    A = np.fft.fft(state.basis, axis=0)
    nm = (np.abs(A) ** 2 @ state.thermal.occupations) / (n - 1)
    # grid ordering, then the k -> -k mirror of the <f^dag f> convention
    return np.fft.fftshift(nm)[::-1]


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Snapshot:
    kick_count: int
    nk_fermion: np.ndarray = field(repr=False)
    nk_boson: np.ndarray | None = field(repr=False, default=None)
    g1: np.ndarray | None = field(repr=False, default=None)


@dataclass(frozen=True, eq=False)
class RunResult:
    config: RunConfig
    k_values: np.ndarray = field(repr=False)
    kicks: np.ndarray = field(repr=False)
    energy: np.ndarray = field(repr=False)
    t_eff: np.ndarray = field(repr=False)
    mu_eff: np.ndarray = field(repr=False)
    snapshots: dict = field(repr=False)
    gamma: float
    gamma_se: float
    phase: str | None
    low_confidence: bool
    k_loc: float
    r_c: float
    tail_exponent: float
    tail_amplitude: float
    contact_measured: float
    contact_thermal: float
    provenance: dict = field(repr=False)

    def summary(self) -> dict:
        return {
            "gamma": self.gamma,
            "gamma_se": self.gamma_se,
            "phase": self.phase,
            "low_confidence": self.low_confidence,
            "k_loc": self.k_loc,
            "r_c": self.r_c,
            "tail_exponent": self.tail_exponent,
            "tail_amplitude": self.tail_amplitude,
            "contact_measured": self.contact_measured,
            "contact_thermal": self.contact_thermal,
            "energy_initial": float(self.energy[0]),
            "energy_final": float(self.energy[-1]),
            "t_eff_final": float(self.t_eff[-1]),
            "mu_eff_final": float(self.mu_eff[-1]),
            "provenance": self.provenance,
        }

    def write(self, out_dir: str | Path) -> Path:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        cols = [self.kicks, self.energy, self.t_eff, self.mu_eff]
        _write_csv(out / "energy.csv", "kick,kinetic_energy,t_eff,mu_eff", cols)
        for t, snap in sorted(self.snapshots.items()):
            _write_csv(out / f"nk_fermion_t{t}.csv", "k,n", [self.k_values, snap.nk_fermion])
            if snap.nk_boson is not None:
                _write_csv(out / f"nk_boson_t{t}.csv", "k,n", [self.k_values, snap.nk_boson])
            if snap.g1 is not None:
                r = np.arange(snap.g1.size)
                _write_csv(out / f"g1_t{t}.csv", "r,re_g1,im_g1",
                           [r, snap.g1.real, snap.g1.imag])
        (out / "summary.json").write_text(json.dumps(self.summary(), indent=2, sort_keys=True))
        return out


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _write_csv(path: Path, header: str, columns) -> None:
    rows = zip(*columns)
    body = "\n".join(",".join(_fmt(v) for v in row) for row in rows)
    path.write_text(header + "\n" + body + "\n")


def _auto_g1_window(g1: np.ndarray, n_sites: int) -> tuple[float, float]:
    """Fit window bracketing the decay region: from r = 1 out to where the
    signal falls below 1e-6 of the r = 0 value (capped at n/4)."""
    mag = np.abs(g1.real)
    floor = 1e-6 * mag[0]
    hi = 1
    for r in range(1, min(g1.size, n_sites // 4)):
        if mag[r] <= floor:
            break
        hi = r
    return (1.0, float(max(hi, 3)))


def _kloc_window(k: np.ndarray, nk: np.ndarray, fractions: tuple[float, float]):
    pos = k > 0
    kp, vp = k[pos], nk[pos]
    occupied = kp[vp > 1e-10 * vp.max()]
    k_edge = occupied.max() if occupied.size else kp.max()
    return (fractions[0] * k_edge, fractions[1] * k_edge)


def run(config: RunConfig, out_dir: str | Path | None = None,
        workers: int | None = None) -> RunResult:
    """Execute one configuration end to end; optionally persist to ``out_dir``."""
    t_wall = time.perf_counter()
    workers = workers or default_workers()
    model, schedule = config.model, config.schedule
    grid = momentum_grid(model)
    k = grid.values
    w = 0.5 * model.hbar_eff**2 * k**2
    snap_times = set(config.snapshot_times)
    bos_times = set(config.bosonic_times)

    with _stage("thermal preparation"):
        thermal = prepare_thermal_state(model, config.temperature)
        state = initial_state(model, thermal)

    energies = np.empty(config.total_kicks + 1)
    t_effs = np.empty(config.total_kicks + 1)
    mu_effs = np.empty(config.total_kicks + 1)
    snapshots: dict[int, Snapshot] = {}

    def measure(state, t):
        nk = fermionic_nk(state)
        energies[t] = float(np.dot(w, nk))
        with _stage("effective-thermal fit"):
            dist = MomentumDistribution(grid=grid, values=nk, flavor="fermionic", kick_count=t)
            eff = fit_effective_thermo(dist, model, kick_count=t)
        t_effs[t], mu_effs[t] = eff.t_eff, eff.mu_eff
        if t in snap_times:
            with _stage(f"snapshot t={t}"):
                if state.unitarity_defect() > 1e-6:
                    raise RuntimeError("unitarity drift beyond 1e-6")
                nk_b = g1 = None
                if t in bos_times:
                    if thermal.temperature == 0:
                        bos = bosonic_opdm(state, method="projector")
                    else:
                        bos = bosonic_opdm_via_rows(state, workers=workers)
                    nk_b = momentum_distribution(bos, grid).values
                    g1 = correlation_function(bos).values
                snapshots[t] = Snapshot(t, nk, nk_b, g1)

    measure(state, 0)
    with _stage("evolution"):
        for t in range(1, config.total_kicks + 1):
            state = advance(state, schedule)
            measure(state, t)

    kicks = np.arange(config.total_kicks + 1)
    gamma = gamma_se = float("nan")
    phase = None
    lowconf = False
    if config.total_kicks >= 16:
        with _stage("dynamical exponent"):
            gamma, gamma_se = dynamical_exponent(kicks, energies, window=config.gamma_window)
            phase, lowconf = classify_phase(gamma, gamma_se)

    k_loc = r_c = tail_p = tail_a = contact_meas = float("nan")
    last_bos = max(bos_times) if bos_times else None
    if last_bos is not None and snapshots[last_bos].nk_boson is not None:
        snap = snapshots[last_bos]
        with _stage("length fits"):
            pos = k > 0
            window = _kloc_window(k, snap.nk_boson, config.kloc_window)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                fit = fit_exponential_tail(k[pos], snap.nk_boson[pos], window, kind="momentum")
            k_loc = fit.length
            g1w = config.g1_window or _auto_g1_window(snap.g1, model.n_sites)
            r = np.arange(snap.g1.size, dtype=float)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                gfit = fit_exponential_tail(r, np.abs(snap.g1.real), g1w, kind="correlation")
            r_c = gfit.length
            kp = k[pos]
            try:
                pfit = fit_power_law_tail(kp, snap.nk_boson[pos], (kp.max() / 10.0, kp.max()))
                tail_p, tail_a = pfit.length, pfit.amplitude
                bdist = MomentumDistribution(grid=grid, values=snap.nk_boson,
                                             flavor="bosonic", kick_count=last_bos)
                contact_meas = tail_contact_estimate(bdist, model)
            except ValueError:
                pass
    contact = tan_contact(float(energies[-1]), model)

    provenance = {
        "config": dict(config.raw),
        "version": __version__,
        "wall_time_s": round(time.perf_counter() - t_wall, 3),
        "platform": platform.platform(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
    }
    result = RunResult(
        config=config, k_values=k, kicks=kicks, energy=energies,
        t_eff=t_effs, mu_eff=mu_effs, snapshots=snapshots,
        gamma=gamma, gamma_se=gamma_se, phase=phase, low_confidence=lowconf,
        k_loc=k_loc, r_c=r_c, tail_exponent=tail_p, tail_amplitude=tail_a,
        contact_measured=contact_meas, contact_thermal=contact, provenance=provenance,
    )
    if out_dir is not None:
        result.write(out_dir)
    return result


# ---------------------------------------------------------------------------
# phase scan
# ---------------------------------------------------------------------------

def _point_hash(config: RunConfig, strength: float, anisotropy: float) -> str:
    payload = json.dumps(
        {
            "n_sites": config.model.n_sites,
            "n_particles": config.model.n_particles,
            "hbar_eff": config.model.hbar_eff,
            "temperature": config.temperature,
            "total_kicks": config.total_kicks,
            "K": strength,
            "eps": anisotropy,
        },
        sort_keys=True,
    )
    return hashlib.sha1(payload.encode()).hexdigest()[:12]


def _scan_point(args) -> dict:
    """Energy-only evolution of one (K, eps) grid point; cheap and share-nothing."""
    config, strength, anisotropy = args
    from .lattice import KickSchedule  # local import keeps the worker self-contained

    try:
        model = config.model
        schedule = KickSchedule(strength=strength, anisotropy=anisotropy)
        grid = momentum_grid(model)
        w = 0.5 * model.hbar_eff**2 * grid.values**2
        thermal = prepare_thermal_state(model, config.temperature)
        state = initial_state(model, thermal)
        energies = np.empty(config.total_kicks + 1)
        energies[0] = float(np.dot(w, fermionic_nk(state)))
        for t in range(1, config.total_kicks + 1):
            state = advance(state, schedule)
            energies[t] = float(np.dot(w, fermionic_nk(state)))
        gamma, se = dynamical_exponent(
            np.arange(config.total_kicks + 1), energies, window=config.gamma_window
        )
        phase, lowconf = classify_phase(gamma, se)
        return {
            "kick_strength": strength, "anisotropy": anisotropy,
            "gamma": gamma, "gamma_se": se, "phase": phase,
            "low_confidence": lowconf, "status": "ok",
            "config_hash": _point_hash(config, strength, anisotropy),
        }
    except Exception as exc:  # per-point failures must not kill the scan
        return {
            "kick_strength": strength, "anisotropy": anisotropy,
            "gamma": float("nan"), "gamma_se": float("nan"), "phase": None,
            "low_confidence": True, "status": f"error: {exc}",
            "config_hash": _point_hash(config, strength, anisotropy),
        }


def phase_point(record: dict) -> PhasePoint:
    """Domain-type view of one completed scan record."""
    return PhasePoint(
        strength=record["kick_strength"], anisotropy=record["anisotropy"],
        gamma=record["gamma"], gamma_se=record["gamma_se"],
        classification=record["phase"], low_confidence=record["low_confidence"],
    )


def phase_scan(
    config: RunConfig,
    out_dir: str | Path,
    workers: int | None = None,
    resume: bool = False,
) -> list[dict]:
    """Classify every (K, eps) grid point; parallel, checkpointed, resumable.

    Completed points are stored one JSON file each under ``points/``; with
    ``resume`` those are loaded instead of recomputed (a stale file whose
    config hash mismatches is redone).  The aggregated table is sorted by
    (K, eps) so the output order never depends on scheduling.
    """
    if not config.scan_strengths or not config.scan_anisotropies:
        raise ValueError("phase scan needs scan.kick_strengths and scan.anisotropies")
    out = Path(out_dir)
    points_dir = out / "points"
    points_dir.mkdir(parents=True, exist_ok=True)
    workers = workers or default_workers()

    tasks = []
    done: dict[tuple[float, float], dict] = {}
    for K in config.scan_strengths:
        for eps in config.scan_anisotropies:
            pfile = points_dir / f"K{K:g}_eps{eps:g}.json"
            if resume and pfile.exists():
                record = json.loads(pfile.read_text())
                if record.get("config_hash") == _point_hash(config, K, eps) \
                        and record.get("status") == "ok":
                    done[(K, eps)] = record
                    continue
            tasks.append((config, K, eps))

    if tasks:
        if workers > 1 and len(tasks) > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                records = list(pool.map(_scan_point, tasks))
        else:
            records = [_scan_point(t) for t in tasks]
        for rec in records:
            key = (rec["kick_strength"], rec["anisotropy"])
            done[key] = rec
            pfile = points_dir / f"K{key[0]:g}_eps{key[1]:g}.json"
            pfile.write_text(json.dumps(rec, indent=2, sort_keys=True))

    table = [done[key] for key in sorted(done)]
    header = "kick_strength,anisotropy,gamma,gamma_se,phase"
    lines = [header]
    for rec in table:
        lines.append(",".join([
            _fmt(rec["kick_strength"]), _fmt(rec["anisotropy"]),
            _fmt(rec["gamma"]), _fmt(rec["gamma_se"]), str(rec["phase"]),
        ]))
    (out / "phase_diagram.csv").write_text("\n".join(lines) + "\n")
    return table


# ---------------------------------------------------------------------------
# oracle check
# ---------------------------------------------------------------------------

def oracle_check(config: RunConfig) -> dict:
    """Entrywise fast-pipeline vs Fock-space comparison on a tiny chain."""
    model = config.model
    if model.n_sites > 10:
        raise ValueError("oracle-check is limited to 10 sites")
    if config.temperature <= 0:
        raise ValueError("oracle-check needs T > 0 (the ensemble trace)")
    thermal = prepare_thermal_state(model, config.temperature)
    space = build_fock_space(model)
    report: dict[str, float] = {}
    state = initial_state(model, thermal)
    last_t = 0
    for t in sorted(set(config.oracle_times)):
        for _ in range(t - last_t):
            state = advance(state, config.schedule)
        last_t = t
        exact = exact_evolve(space, config.schedule, t, config.temperature,
                             thermal.chemical_potential)
        pairs = {
            "fermionic": fermionic_opdm(state).matrix,
            "bosonic_naive": bosonic_opdm(state, method="naive").matrix,
            "bosonic_rows": bosonic_opdm_via_rows(state).matrix,
        }
        for name, mat in pairs.items():
            flavor = "fermionic" if name == "fermionic" else "bosonic"
            ref = exact_opdm(exact, flavor).matrix
            report[f"t{t}_{name}"] = float(np.abs(mat - ref).max())
    report["tolerance"] = config.oracle_tolerance
    report["passed"] = all(
        v <= config.oracle_tolerance for k, v in report.items()
        if k not in ("tolerance", "passed")
    )
    return report


# ---------------------------------------------------------------------------
# file-level helpers used by the CLI
# ---------------------------------------------------------------------------

def load_nk_csv(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    return data[:, 0], data[:, 1]


def fit_thermo_file(path: str | Path, hbar_eff: float = 1.0) -> dict:
    from .thermo_analysis import fit_effective_thermo_arrays

    k, vals = load_nk_csv(path)
    eff = fit_effective_thermo_arrays(k, vals, hbar_eff)
    return {"t_eff": eff.t_eff, "mu_eff": eff.mu_eff,
            "residual_number": eff.residuals[0], "residual_energy": eff.residuals[1]}


def collapse_directory(
    result_dir: str | Path,
    alpha: float,
    regime: str,
    flavor: str = "fermion",
    out_path: str | Path | None = None,
) -> dict:
    from .lattice import MomentumGrid
    from .thermo_analysis import scaling_collapse

    result_dir = Path(result_dir)
    snaps = []
    for f in sorted(result_dir.glob(f"nk_{flavor}_t*.csv")):
        t = int(f.stem.split("_t")[-1])
        if t <= 0:
            continue
        k, vals = load_nk_csv(f)
        dist = MomentumDistribution(grid=MomentumGrid(values=k), values=vals,
                                    flavor="fermionic" if flavor == "fermion" else "bosonic",
                                    kick_count=t)
        snaps.append((t, dist))
    if len(snaps) < 3:
        raise ValueError(f"need >= 3 positive-time nk_{flavor} snapshots in {result_dir}")
    res = scaling_collapse(snaps, alpha=alpha, regime=regime)
    if out_path is not None:
        header = "x," + ",".join(f"y_t{t}" for t in res.times)
        _write_csv(Path(out_path), header, [res.abscissa, *res.curves])
    return {"metric": res.metric, "times": list(res.times), "n_points": res.abscissa.size}
