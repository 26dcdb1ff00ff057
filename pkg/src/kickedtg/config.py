"""Run configuration: flat key-value text files with dotted section names.

Files hold ``key = value`` lines; ``#`` starts a comment.  Temperatures
accept either an absolute number or ``x*fermi`` notation, resolved against
the Fermi energy of the configured model.  The full key list is documented
in the README; unknown keys are rejected to catch typos.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .lattice import LatticeModel, KickSchedule, fermi_energy

_KNOWN_KEYS = {
    "model.n_sites",
    "model.n_particles",
    "model.hbar_eff",
    "schedule.kick_strength",
    "schedule.anisotropy",
    "run.temperature",
    "run.total_kicks",
    "run.snapshot_times",
    "observables.bosonic_times",
    "fit.kloc_window",
    "fit.g1_window",
    "fit.gamma_window",
    "scan.kick_strengths",
    "scan.anisotropies",
    "oracle.check_times",
    "oracle.tolerance",
}


def parse_config_text(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _KNOWN_KEYS:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
        if key in out:
            raise ValueError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def _parse_temperature(raw: str, model: LatticeModel) -> float:
    raw = raw.strip().lower()
    if raw.endswith("*fermi"):
        return float(raw[: -len("*fermi")]) * fermi_energy(model)
    if raw.endswith("fermi"):   # bare "fermi" means 1.0 * eps_F
        head = raw[: -len("fermi")].rstrip("*").strip()
        return (float(head) if head else 1.0) * fermi_energy(model)
    return float(raw)


def _parse_int_list(raw: str) -> list[int]:
    return [int(tok) for tok in raw.split(",") if tok.strip()]


def _parse_float_list(raw: str) -> list[float]:
    return [float(tok) for tok in raw.split(",") if tok.strip()]


def _parse_pair(raw: str) -> tuple[float, float] | None:
    if raw.strip().lower() == "auto":
        return None
    lo, hi = (float(tok) for tok in raw.split(","))
    return lo, hi


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved configuration for one run (or the base of a scan)."""

    model: LatticeModel
    schedule: KickSchedule
    temperature: float
    total_kicks: int
    snapshot_times: tuple[int, ...]
    bosonic_times: tuple[int, ...]          # subset of snapshot_times
    kloc_window: tuple[float, float] = (0.2, 0.8)   # fractions of occupied k range
    g1_window: tuple[float, float] | None = None    # None = auto
    gamma_window: tuple[float, float] | None = None
    scan_strengths: tuple[float, ...] = ()
    scan_anisotropies: tuple[float, ...] = ()
    oracle_times: tuple[int, ...] = (0, 3)
    oracle_tolerance: float = 1e-6
    raw: dict = field(default_factory=dict)

    def __post_init__(self):
        bad = [t for t in self.snapshot_times if not 0 <= t <= self.total_kicks]
        if bad:
            raise ValueError(f"snapshot times {bad} outside [0, {self.total_kicks}]")
        extra = set(self.bosonic_times) - set(self.snapshot_times)
        if extra:
            raise ValueError(f"bosonic snapshot times {sorted(extra)} are not snapshot times")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")


def config_from_mapping(kv: dict[str, str]) -> RunConfig:
    model = LatticeModel(
        n_sites=int(kv.get("model.n_sites", "1025")),
        n_particles=int(kv["model.n_particles"]),
        hbar_eff=float(kv.get("model.hbar_eff", "1.0")),
    )
    schedule = KickSchedule(
        strength=float(kv.get("schedule.kick_strength", "0.0")),
        anisotropy=float(kv.get("schedule.anisotropy", "0.0")),
    )
    temperature = _parse_temperature(kv.get("run.temperature", "0"), model)
    total = int(kv.get("run.total_kicks", "0"))
    snaps = tuple(_parse_int_list(kv.get("run.snapshot_times", f"0,{total}")))
    braw = kv.get("observables.bosonic_times", "all").strip().lower()
    if braw == "all":
        bosonic = snaps
    elif braw == "none":
        bosonic = ()
    else:
        bosonic = tuple(_parse_int_list(braw))
    kloc = _parse_pair(kv.get("fit.kloc_window", "0.2,0.8")) or (0.2, 0.8)
    return RunConfig(
        model=model,
        schedule=schedule,
        temperature=temperature,
        total_kicks=total,
        snapshot_times=snaps,
        bosonic_times=bosonic,
        kloc_window=kloc,
        g1_window=_parse_pair(kv.get("fit.g1_window", "auto")),
        gamma_window=_parse_pair(kv.get("fit.gamma_window", "auto")),
        scan_strengths=tuple(_parse_float_list(kv.get("scan.kick_strengths", ""))),
        scan_anisotropies=tuple(_parse_float_list(kv.get("scan.anisotropies", ""))),
        oracle_times=tuple(_parse_int_list(kv.get("oracle.check_times", "0,3"))),
        oracle_tolerance=float(kv.get("oracle.tolerance", "1e-6")),
        raw=dict(kv),
    )


def load_run_config(path: str | Path) -> RunConfig:
    return config_from_mapping(parse_config_text(Path(path).read_text()))
