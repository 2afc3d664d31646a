"""Bench model for the two polarimeter geometries and Poisson count sampling.

Two arrangements are modelled.  In the *ghost* arrangement each arm carries
one polarizer and the sample cell sits in the sample arm before its
polarizer, so the cell is probed by unpolarized light and the optical
rotation appears only in the coincidence fringe.  In the *heralded*
arrangement both polarizers sit in the sample arm, one on each side of the
cell, and the reference detector merely flags pair creation; there the
sample-arm singles oscillate together with the coincidences.

Angle bookkeeping
-----------------
Polarizer orientations inside the shared H/V basis are "basis angles".
Sweep records store the rotation-stage readout instead.  The sample-arm
stage readout equals its basis angle; the reference-arm stage is mounted
mirror-handed, so basis angle = -readout.  With this convention a
dextrorotatory sample advances the recorded coincidence fringe by +delta
in every geometry, so ghost and heralded scans report the same sign of
rotation.

Randomness
----------
Counts are independent Poisson draws per angle and channel.  Each sweep
uses ``numpy``'s counter-based Philox generator keyed by
``(rng_seed, stream)``, so repetitions are mutually independent yet
bit-reproducible and safe to generate concurrently in any order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .states import polarizer, rotator, apply_local, werner_like, ARM_SAMPLE, ARM_REFERENCE

#: Canonical full-rotation scan: 36 settings on a 10-degree grid.
DEFAULT_SWEEP_ANGLES_DEG = tuple(float(a) for a in range(0, 360, 10))

#: Analyzer settings (theta_S, theta_R, theta_S', theta_R') that maximise
#: the Bell-test value for the phi+ state.
CHSH_SETTINGS_DEG = (22.5, 0.0, 67.5, 45.0)

#: Specific rotation of D-Limonene at room temperature, degrees per cm.
LIMONENE_ROTATION_DEG_PER_CM = 12.4

DEFAULT_CELL_TRANSMISSION = 0.85
ROTATION_DWELL_S = 12.2
CHSH_DWELL_S = 3.5
DEFAULT_SEED = 101


def accidental_rate(singles_sample_rate: float, singles_reference_rate: float,
                    gate_time: float) -> float:
    """Uncorrelated-coincidence rate S * R * gate for two Poissonian streams."""
    return singles_sample_rate * singles_reference_rate * gate_time


@dataclass(frozen=True)
class ApparatusConfig:
    """Source, detection and timing parameters of the bench.

    Rates are per second; efficiencies are end-to-end detection-path
    probabilities; ``gate_time`` is the coincidence window; ``dwell_time``
    is the integration time per angle setting.
    """

    pair_rate: float
    eta_sample: float
    eta_reference: float
    bg_sample: float
    bg_reference: float
    gate_time: float
    dwell_time: float
    visibility: float
    rng_seed: int

    def __post_init__(self):
        if self.pair_rate < 0 or self.bg_sample < 0 or self.bg_reference < 0:
            raise ValueError("rates must be nonnegative")
        for name in ("eta_sample", "eta_reference", "visibility"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")
        if self.gate_time <= 0:
            raise ValueError("gate_time must be positive")
        if self.dwell_time <= 0:
            raise ValueError("dwell_time must be positive")
        if self.rng_seed < 0:
            raise ValueError("rng_seed must be a nonnegative integer")


@dataclass(frozen=True)
class SampleSpec:
    """Chiral cell inserted in the sample arm.

    ``specific_rotation`` is in degrees per cm; ``transmission`` is the
    broadband insertion loss of the cell (glass plus solution).
    """

    specific_rotation: float
    length: float
    transmission: float = DEFAULT_CELL_TRANSMISSION

    def __post_init__(self):
        if self.length < 0:
            raise ValueError("length must be nonnegative")
        if not 0.0 < self.transmission <= 1.0:
            raise ValueError("transmission must be in (0, 1]")

    @property
    def rotation_deg(self) -> float:
        """Total optical rotation, specific rotation times path length."""
        return self.specific_rotation * self.length


@dataclass(frozen=True)
class Geometry:
    """Which arrangement is on the bench and which stage is scanned.

    ``fixed_angle_deg`` is the stage readout of the non-rotating polarizer.
    Ghost mode may rotate either arm; heralded mode has no reference
    polarizer, so only the sample-arm analyzer can rotate.
    """

    mode: str
    rotating_arm: str
    fixed_angle_deg: float = 0.0

    def __post_init__(self):
        if self.mode not in ("ghost", "heralded"):
            raise ValueError(f"mode must be 'ghost' or 'heralded', got {self.mode!r}")
        if self.rotating_arm not in (ARM_SAMPLE, ARM_REFERENCE):
            raise ValueError(f"rotating_arm must be 'sample' or 'reference', got {self.rotating_arm!r}")
        if self.mode == "heralded" and self.rotating_arm != ARM_SAMPLE:
            raise ValueError("heralded mode has no reference polarizer to rotate")
        if not np.isfinite(self.fixed_angle_deg):
            raise ValueError("fixed_angle_deg must be finite")


@dataclass(frozen=True)
class CountRecord:
    """Counts accumulated at one stage setting."""

    angle_deg: float
    singles_sample: int
    singles_reference: int
    coincidences: int
    duration_s: float

    def __post_init__(self):
        if min(self.singles_sample, self.singles_reference, self.coincidences) < 0:
            raise ValueError("counts must be nonnegative")
        if self.duration_s <= 0:
            raise ValueError("duration_s must be positive")


@dataclass(frozen=True)
class SweepResult:
    """One full scan of the rotating polarizer."""

    geometry: Geometry
    apparatus: ApparatusConfig
    sample: SampleSpec | None
    records: tuple[CountRecord, ...]

    def __post_init__(self):
        if len(self.records) < 4:
            raise ValueError("a sweep needs at least 4 records for fitting")
        angles = [r.angle_deg for r in self.records]
        if any(b <= a for a, b in zip(angles, angles[1:])):
            raise ValueError("record angles must be strictly increasing")

    @property
    def angles_deg(self) -> np.ndarray:
        return np.array([r.angle_deg for r in self.records])


class Rates(NamedTuple):
    """Expected mean rates (per second) at one setting.

    ``coincidences`` already includes ``accidentals``.
    """

    singles_sample: float
    singles_reference: float
    coincidences: float
    accidentals: float


def _ghost_rates_basis(apparatus: ApparatusConfig, sample: SampleSpec | None,
                       theta_sample_deg: float, theta_reference_deg: float) -> Rates:
    """Mean rates for one polarizer per arm, angles given in the shared basis."""
    delta = sample.rotation_deg if sample is not None else 0.0
    transmission = sample.transmission if sample is not None else 1.0
    state = werner_like(apparatus.visibility)

    # Light in the sample arm crosses the cell, then the polarizer.
    sample_element = polarizer(theta_sample_deg) @ rotator(delta)
    after_sample = apply_local(state, ARM_SAMPLE, sample_element)
    p_single_sample = float(np.trace(after_sample).real)
    p_single_reference = float(
        np.trace(apply_local(state, ARM_REFERENCE, polarizer(theta_reference_deg))).real
    )
    p_coinc = float(
        np.trace(apply_local(after_sample, ARM_REFERENCE, polarizer(theta_reference_deg))).real
    )

    rate_s = apparatus.pair_rate * apparatus.eta_sample * transmission * p_single_sample \
        + apparatus.bg_sample
    rate_r = apparatus.pair_rate * apparatus.eta_reference * p_single_reference \
        + apparatus.bg_reference
    true_c = apparatus.pair_rate * apparatus.eta_sample * apparatus.eta_reference \
        * transmission * p_coinc
    acc = accidental_rate(rate_s, rate_r, apparatus.gate_time)
    return Rates(rate_s, rate_r, true_c + acc, acc)


def _heralded_rates(apparatus: ApparatusConfig, sample: SampleSpec | None,
                    theta_first_deg: float, theta_second_deg: float) -> Rates:
    """Mean rates with both polarizers flanking the cell in the sample arm."""
    delta = sample.rotation_deg if sample is not None else 0.0
    transmission = sample.transmission if sample is not None else 1.0
    state = werner_like(apparatus.visibility)

    chain = polarizer(theta_second_deg) @ rotator(delta) @ polarizer(theta_first_deg)
    p_pass = float(np.trace(apply_local(state, ARM_SAMPLE, chain)).real)

    rate_s = apparatus.pair_rate * apparatus.eta_sample * transmission * p_pass \
        + apparatus.bg_sample
    rate_r = apparatus.pair_rate * apparatus.eta_reference + apparatus.bg_reference
    true_c = apparatus.pair_rate * apparatus.eta_sample * apparatus.eta_reference \
        * transmission * p_pass
    acc = accidental_rate(rate_s, rate_r, apparatus.gate_time)
    return Rates(rate_s, rate_r, true_c + acc, acc)


def expected_rates(geometry: Geometry, apparatus: ApparatusConfig,
                   sample: SampleSpec | None, angle_deg: float) -> Rates:
    """Mean detector rates at one stage setting of the rotating polarizer.

    ``angle_deg`` is the rotating stage's readout; the fixed polarizer sits
    at ``geometry.fixed_angle_deg`` on its own stage.  Reference-arm stage
    readouts map to basis angles with a sign flip (see module docstring).
    """
    if geometry.mode == "ghost":
        if geometry.rotating_arm == ARM_REFERENCE:
            theta_s = geometry.fixed_angle_deg
            theta_r = -angle_deg
        else:
            theta_s = angle_deg
            theta_r = -geometry.fixed_angle_deg
        return _ghost_rates_basis(apparatus, sample, theta_s, theta_r)
    return _heralded_rates(apparatus, sample, geometry.fixed_angle_deg, angle_deg)


def sweep_rates(geometry: Geometry, apparatus: ApparatusConfig,
                sample: SampleSpec | None,
                angles_deg: Sequence[float]) -> list[Rates]:
    """Expected rates at every setting of a scan."""
    return [expected_rates(geometry, apparatus, sample, a) for a in angles_deg]


def sweep_rng(seed: int, stream: int) -> np.random.Generator:
    """Counter-based generator for one independent count stream.

    ``stream`` enumerates sweeps or repetitions; distinct streams never
    overlap regardless of how much each one draws.
    """
    return np.random.Generator(np.random.Philox(key=[seed, stream]))


def simulate_sweep(geometry: Geometry, apparatus: ApparatusConfig,
                   sample: SampleSpec | None = None,
                   angles_deg: Sequence[float] | None = None,
                   stream: int = 0,
                   dwell_s: float | None = None) -> SweepResult:
    """Draw one full scan of Poissonian counts.

    Every angle yields independent draws for the two singles channels and
    the coincidence channel, with means ``rate * dwell``.  The result is a
    pure function of (configuration, ``apparatus.rng_seed``, ``stream``).
    """
    if angles_deg is None:
        angles_deg = DEFAULT_SWEEP_ANGLES_DEG
    angles = [float(a) for a in angles_deg]
    if len(angles) < 4:
        raise ValueError(f"need at least 4 angles, got {len(angles)}")
    dwell = apparatus.dwell_time if dwell_s is None else float(dwell_s)
    if dwell <= 0:
        raise ValueError("dwell must be positive")

    rates = sweep_rates(geometry, apparatus, sample, angles)
    mean_s = np.array([r.singles_sample for r in rates]) * dwell
    mean_r = np.array([r.singles_reference for r in rates]) * dwell
    mean_c = np.array([r.coincidences for r in rates]) * dwell

    rng = sweep_rng(apparatus.rng_seed, stream)
    counts_s = rng.poisson(mean_s)
    counts_r = rng.poisson(mean_r)
    counts_c = rng.poisson(mean_c)

    records = tuple(
        CountRecord(a, int(ns), int(nr), int(nc), dwell)
        for a, ns, nr, nc in zip(angles, counts_s, counts_r, counts_c)
    )
    return SweepResult(geometry, apparatus, sample, records)


# ---------------------------------------------------------------------------
# Bench presets
# ---------------------------------------------------------------------------

class Preset(NamedTuple):
    geometry: Geometry
    apparatus: ApparatusConfig
    sample: SampleSpec | None


# Shared source and detection parameters.  The singles totals 19000/s
# (sample) and 36000/s (reference) and the sweep-mean coincidence rate
# 140/s fix only the products below; how the singles split between pair
# light and background is an assumption:
#   sample arm:    3.2e6 * 0.0100 / 2 = 16000 from pairs + 3000 background
#   reference arm: 3.2e6 * 0.0175 / 2 = 28000 from pairs + 8000 background
#   coincidences:  3.2e6 * 0.0100 * 0.0175 / 4 = 140 (sweep mean, no cell)
_BENCH = dict(
    pair_rate=3.2e6,
    eta_sample=0.0100,
    eta_reference=0.0175,
    bg_sample=3000.0,
    bg_reference=8000.0,
    gate_time=1.523e-9,
    visibility=0.845,
)

_GHOST = Geometry(mode="ghost", rotating_arm=ARM_REFERENCE, fixed_angle_deg=0.0)
_HERALDED = Geometry(mode="heralded", rotating_arm=ARM_SAMPLE, fixed_angle_deg=0.0)


def _limonene(length_cm: float) -> SampleSpec:
    return SampleSpec(specific_rotation=LIMONENE_ROTATION_DEG_PER_CM,
                      length=length_cm,
                      transmission=DEFAULT_CELL_TRANSMISSION)


def _apparatus(dwell_s: float, seed: int) -> ApparatusConfig:
    return ApparatusConfig(dwell_time=dwell_s, rng_seed=seed, **_BENCH)


_PRESET_BUILDERS = {
    "ghost_blank": lambda seed: Preset(_GHOST, _apparatus(ROTATION_DWELL_S, seed), None),
    "ghost_limonene_1cm": lambda seed: Preset(_GHOST, _apparatus(ROTATION_DWELL_S, seed), _limonene(1.0)),
    "ghost_limonene_2cm": lambda seed: Preset(_GHOST, _apparatus(ROTATION_DWELL_S, seed), _limonene(2.0)),
    "ghost_limonene_5cm": lambda seed: Preset(_GHOST, _apparatus(ROTATION_DWELL_S, seed), _limonene(5.0)),
    "heralded_blank": lambda seed: Preset(_HERALDED, _apparatus(ROTATION_DWELL_S, seed), None),
    "heralded_limonene_1cm": lambda seed: Preset(_HERALDED, _apparatus(ROTATION_DWELL_S, seed), _limonene(1.0)),
    "heralded_limonene_2cm": lambda seed: Preset(_HERALDED, _apparatus(ROTATION_DWELL_S, seed), _limonene(2.0)),
    "heralded_limonene_5cm": lambda seed: Preset(_HERALDED, _apparatus(ROTATION_DWELL_S, seed), _limonene(5.0)),
    "chsh_bare": lambda seed: Preset(_GHOST, _apparatus(CHSH_DWELL_S, seed), None),
    "chsh_1cm": lambda seed: Preset(_GHOST, _apparatus(CHSH_DWELL_S, seed), _limonene(1.0)),
}

PRESET_NAMES = tuple(sorted(_PRESET_BUILDERS))


def paper_preset(name: str, seed: int = DEFAULT_SEED) -> Preset:
    """Bench configuration matching the published rates and timings.

    Rotation presets integrate 12.2 s per angle; the Bell-test presets
    integrate 3.5 s per analyzer setting.  D-Limonene cells rotate by
    12.4 degrees per cm and transmit 85 percent.
    """
    try:
        build = _PRESET_BUILDERS[name]
    except KeyError:
        known = ", ".join(PRESET_NAMES)
        raise KeyError(f"unknown preset {name!r}; known presets: {known}") from None
    return build(seed)
