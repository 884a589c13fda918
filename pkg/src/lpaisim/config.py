"""Configuration assembly: rate-derived defaults, YAML I/O, and the resolved
CycleConfig value that every simulation consumes.

Defaults reproduce the optimized operating envelope. For a requested data
rate, the non-interrogation overhead comes from the calibrated duty-cycle
anchors (see core.default_overhead_total); within it, prep and the two
readout pulses are fixed 100 us windows, the recapture window is back-solved
so the equilibrium atom number hits the configured target, and the molasses
hold absorbs the remainder. All windows can be pinned explicitly in the
config file, which bypasses the derivation for that window.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import yaml

from . import cloud as cloud_mod
from .cloud import CloudState, MotConfig, cloud_after_tof, recapture_fraction
from .core import (
    DEFAULT_QUANTUM,
    CycleOverheads,
    PhysicalParams,
    TimingSequence,
    build_timing,
    default_overhead_total,
    raman_pulse_durations,
)
from .detection import DetectionConfig
from .errors import ConfigError
from .fringe import FringeModel
from .noise import DisturbanceInjector, NoiseBudget

DEFAULT_DATA_RATE = 100.0
DEFAULT_EQUILIBRIUM_TARGET = 2.0e5   # atoms, used to back-solve the recapture window
DEFAULT_PREP_DURATION = 100e-6
DEFAULT_DETECT_DURATIONS = (100e-6, 100e-6)


@dataclass(frozen=True)
class GravityScanConfig:
    """Interrogation-time scan used for the gravity extraction (chirp off).

    amplitude/offset/phase_origin parametrize the chirped fringe; the prior
    window bounds the grid search of the fit.
    """

    amplitude: float = 0.5
    offset: float = 0.5
    phase_origin: float = math.pi
    envelope_tau: float = 10e-3
    t_max: float = 7e-3
    points: int = 141
    prior_center: float = 9.80
    prior_half_width: float = 0.05

    def __post_init__(self):
        if self.points < 8:
            raise ConfigError("gravity scan needs at least 8 points")
        if self.t_max <= 0 or self.envelope_tau <= 0:
            raise ConfigError("scan times must be positive")
        if self.prior_half_width <= 0:
            raise ConfigError("prior_half_width must be positive")


@dataclass(frozen=True)
class CycleConfig:
    """Fully resolved instrument configuration for one operating point."""

    physical: PhysicalParams = field(default_factory=PhysicalParams)
    timing: TimingSequence = None   # type: ignore[assignment]
    mot: MotConfig = field(default_factory=MotConfig)
    noise: NoiseBudget = field(default_factory=NoiseBudget)
    detection: DetectionConfig = field(default_factory=DetectionConfig)
    fringe: FringeModel = field(default_factory=FringeModel)
    gravity_scan: GravityScanConfig = field(default_factory=GravityScanConfig)
    data_rate: float = DEFAULT_DATA_RATE

    def __post_init__(self):
        if self.timing is None:
            raise ConfigError("CycleConfig requires a resolved TimingSequence")
        if self.data_rate <= 0:
            raise ConfigError("data_rate must be positive")
        period = 1.0 / self.data_rate
        if abs(period - self.timing.cycle_time) > self.timing.quantum + 1e-15:
            raise ConfigError(
                f"cycle_time {self.timing.cycle_time} inconsistent with data rate "
                f"{self.data_rate} Hz (period {period})"
            )

    @property
    def spectator_fraction(self) -> float:
        return self.detection.spectator_fraction


def _derived_overheads(
    rate: float,
    physical: PhysicalParams,
    mot: MotConfig,
    equilibrium_target: float,
    quantum: float,
) -> CycleOverheads:
    """Split the envelope overhead into windows; see the module docstring."""
    total = default_overhead_total(rate)
    pulses = sum(raman_pulse_durations(physical.rabi_frequency, quantum))
    prep = DEFAULT_PREP_DURATION
    detect = DEFAULT_DETECT_DURATIONS
    fixed = pulses + prep + detect[0] + detect[1]
    if total <= fixed:
        raise ConfigError(
            f"overhead envelope at {rate} Hz ({total * 1e3:.3f} ms) cannot hold "
            f"the fixed prep/readout windows ({fixed * 1e3:.3f} ms)"
        )

    # Recapture window back-solved from the atom-number fixed point at this
    # rate: t = (1 - r_eff) N_target / L. T is set by the overhead total
    # alone, so the retention factor can be computed before the split.
    cycle = 1.0 / rate
    T = (cycle - total) / 2.0
    free_fall = prep + pulses + 2.0 * T + detect[0] + detect[1]
    released = CloudState(
        atom_number=1.0,
        temperature=mot.post_cooling_temperature,
        rms_radius=mot.initial_cloud_radius,
    )
    fallen = cloud_after_tof(released, free_fall, physical.gravity, physical.atom_mass)
    r_eff = recapture_fraction(fallen, mot) * math.exp(
        -mot.background_loss_rate * cycle
    )
    if r_eff >= 1.0 or mot.loading_rate <= 0:
        recapture = 0.25e-3
    else:
        recapture = (1.0 - r_eff) * equilibrium_target / mot.loading_rate
    recapture = max(recapture, quantum)

    cool = total - fixed - recapture
    if cool < mot.min_cool_duration:
        raise ConfigError(
            f"overhead envelope at {rate} Hz leaves {cool * 1e3:.3f} ms for the "
            f"molasses hold, below the {mot.min_cool_duration * 1e3:.3f} ms minimum"
        )
    return CycleOverheads(cool=cool, prep=prep, detect=detect, recapture=recapture)


def default_config(
    rate: float = DEFAULT_DATA_RATE,
    equilibrium_target: float = DEFAULT_EQUILIBRIUM_TARGET,
    **overrides,
) -> CycleConfig:
    """Fully resolved default configuration at a data rate. Keyword overrides
    replace whole sections (physical=..., mot=..., noise=..., detection=...,
    fringe=..., gravity_scan=...)."""
    physical = overrides.pop("physical", PhysicalParams())
    mot = overrides.pop("mot", MotConfig())
    noise = overrides.pop("noise", NoiseBudget())
    detection = overrides.pop("detection", DetectionConfig())
    fringe = overrides.pop("fringe", FringeModel())
    gravity_scan = overrides.pop("gravity_scan", GravityScanConfig())
    quantum = overrides.pop("quantum", DEFAULT_QUANTUM)
    if overrides:
        raise ConfigError(f"unknown config sections: {sorted(overrides)}")
    overheads = _derived_overheads(rate, physical, mot, equilibrium_target, quantum)
    timing = build_timing(
        rate, overheads, quantum, rabi_frequency=physical.rabi_frequency
    )
    return CycleConfig(
        physical=physical,
        timing=timing,
        mot=mot,
        noise=noise,
        detection=detection,
        fringe=fringe,
        gravity_scan=gravity_scan,
        data_rate=rate,
    )


def with_data_rate(cfg: CycleConfig, rate: float) -> CycleConfig:
    """Same instrument, re-optimized cycle at a different data rate."""
    return default_config(
        rate,
        physical=cfg.physical,
        mot=cfg.mot,
        noise=cfg.noise,
        detection=cfg.detection,
        fringe=cfg.fringe,
        gravity_scan=cfg.gravity_scan,
        quantum=cfg.timing.quantum,
    )


# --- dict / YAML interface ---------------------------------------------------

_SECTION_TYPES = {
    "physical": PhysicalParams,
    "mot": MotConfig,
    "detection": DetectionConfig,
    "fringe": FringeModel,
    "gravity_scan": GravityScanConfig,
}


def _as_float(value, name: str) -> float:
    try:
        if isinstance(value, (str, bool)) or value is None:
            raise TypeError
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be a number, got {value!r}") from None


def _build_section(cls, data: dict, section: str):
    fields = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - fields
    if unknown:
        raise ConfigError(f"unknown keys in [{section}]: {sorted(unknown)}")
    coerced = {}
    for key, value in data.items():
        if isinstance(value, str):
            raise ConfigError(
                f"[{section}] {key}: expected a number, got string {value!r} "
                "(YAML floats need a decimal point, e.g. 4.0e+7)"
            )
        coerced[key] = tuple(value) if isinstance(value, list) else value
    return cls(**coerced)


def _build_noise(data: dict) -> NoiseBudget:
    data = dict(data)
    injectors = data.pop("injectors", [])
    budget = _build_section(NoiseBudget, data, "noise")
    if injectors:
        inj = tuple(
            DisturbanceInjector(
                **{k: _as_float(v, f"injector {k}") for k, v in d.items()}
            )
            for d in injectors
        )
        budget = dataclasses.replace(budget, injectors=inj)
    return budget


def config_from_dict(data: dict) -> CycleConfig:
    """Build a resolved config from a plain dict (YAML layer or manifest).

    A timing section with `interrogation_T` is taken as fully resolved and
    used verbatim (manifest replay); otherwise the cycle is derived for the
    data rate with any provided windows overriding the derived ones.
    """
    if not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")
    known = {"data_rate", "equilibrium_target", "timing", "noise", *_SECTION_TYPES}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")

    rate = _as_float(data.get("data_rate", DEFAULT_DATA_RATE), "data_rate")
    target = _as_float(
        data.get("equilibrium_target", DEFAULT_EQUILIBRIUM_TARGET),
        "equilibrium_target",
    )
    sections = {}
    for name, cls in _SECTION_TYPES.items():
        sections[name] = _build_section(cls, data.get(name, {}) or {}, name)
    noise = _build_noise(data.get("noise", {}) or {})

    timing_in = dict(data.get("timing", {}) or {})
    quantum = _as_float(timing_in.pop("quantum", DEFAULT_QUANTUM), "timing.quantum")
    if "interrogation_T" in timing_in:
        for key in ("pulse_durations", "detect_durations"):
            if key in timing_in:
                timing_in[key] = tuple(timing_in[key])
        timing = TimingSequence(quantum=quantum, **timing_in)
    else:
        derived = _derived_overheads(
            rate, sections["physical"], sections["mot"], target, quantum
        )
        unknown_t = set(timing_in) - {"cool", "prep", "detect", "recapture"}
        if unknown_t:
            raise ConfigError(f"unknown keys in [timing]: {sorted(unknown_t)}")
        overheads = CycleOverheads(
            cool=_as_float(timing_in.get("cool", derived.cool), "timing.cool"),
            prep=_as_float(timing_in.get("prep", derived.prep), "timing.prep"),
            detect=tuple(timing_in.get("detect", derived.detect)),
            recapture=_as_float(
                timing_in.get("recapture", derived.recapture), "timing.recapture"
            ),
        )
        timing = build_timing(
            rate, overheads, quantum,
            rabi_frequency=sections["physical"].rabi_frequency,
        )

    return CycleConfig(
        physical=sections["physical"],
        timing=timing,
        mot=sections["mot"],
        noise=noise,
        detection=sections["detection"],
        fringe=sections["fringe"],
        gravity_scan=sections["gravity_scan"],
        data_rate=rate,
    )


def config_to_dict(cfg: CycleConfig) -> dict:
    """Fully resolved snapshot, round-trippable through config_from_dict."""
    out = {
        "data_rate": cfg.data_rate,
        "physical": dataclasses.asdict(cfg.physical),
        "timing": {
            "cool_duration": cfg.timing.cool_duration,
            "prep_duration": cfg.timing.prep_duration,
            "pulse_durations": list(cfg.timing.pulse_durations),
            "interrogation_T": cfg.timing.interrogation_T,
            "detect_durations": list(cfg.timing.detect_durations),
            "recapture_duration": cfg.timing.recapture_duration,
            "cycle_time": cfg.timing.cycle_time,
            "quantum": cfg.timing.quantum,
        },
        "mot": dataclasses.asdict(cfg.mot),
        "noise": dataclasses.asdict(cfg.noise),
        "detection": dataclasses.asdict(cfg.detection),
        "fringe": dataclasses.asdict(cfg.fringe),
        "gravity_scan": dataclasses.asdict(cfg.gravity_scan),
    }
    out["noise"]["injectors"] = [
        dataclasses.asdict(inj) for inj in cfg.noise.injectors
    ]
    return out


def load_config(path) -> CycleConfig:
    """Load a YAML config file (missing sections fall back to defaults)."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed YAML in {path}: {exc}") from exc
    if data is None:
        data = {}
    return config_from_dict(data)


def equilibrium_atom_number(cfg: CycleConfig) -> float:
    return cloud_mod.equilibrium_atom_number(cfg)
