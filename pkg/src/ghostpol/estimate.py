"""Estimators for fringe phase, optical rotation, Bell statistics and
shot-noise scaling.

Fringe fitting is linear: the model a0 + a1 cos 2t + a2 sin 2t is solved by
least squares, so there is no iterative optimizer and no starting guess.
Counts enter with uniform weights.  Because a polarization orientation is
bi-directional, the fitted fringe phase is halved before being reported;
all phase statistics are computed on the 180-degree circle to stay correct
near the wrap.

Uncertainties are repeatability standard deviations over repeated sweeps
with independent random streams, not fit covariances.  Repetitions use the
stream discipline of :mod:`ghostpol.simulate` and may be fanned out to a
process pool; results are identical for any worker count.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .simulate import (
    ApparatusConfig,
    CountRecord,
    Geometry,
    SampleSpec,
    SweepResult,
    CHSH_SETTINGS_DEG,
    DEFAULT_SWEEP_ANGLES_DEG,
    _ghost_rates_basis,
    simulate_sweep,
    sweep_rates,
    sweep_rng,
)
from .states import (
    ARM_REFERENCE,
    ARM_SAMPLE,
    apply_local,
    polarizer,
    rotator,
    wrap_orientation_deg,
    wrap_rotation_deg,
)

S_QUANTUM_MAX = 2.0 * np.sqrt(2.0)

CHANNELS = ("coincidence", "singles_sample")


class EstimationError(Exception):
    """Base class for estimation failures."""


class UnderdeterminedFitError(EstimationError):
    """Too few records or distinct angles to fit a fringe."""


class DegenerateFringeError(EstimationError):
    """Fringe amplitude indistinguishable from zero; the phase is meaningless."""


class DegenerateCountsError(EstimationError):
    """Correlation undefined because all four counts vanish."""


@dataclass(frozen=True)
class FringeFit:
    """Sinusoidal fit of one count channel over a polarizer scan.

    ``phase_deg`` is the polarization orientation in [0, 180), i.e. half
    the fringe phase.  ``amplitude_se`` is the standard error of the
    amplitude from the fit residuals, used only for the degeneracy guard.
    """

    offset: float
    amplitude: float
    phase_deg: float
    residual_rms: float
    n_total: int
    amplitude_se: float

    def __post_init__(self):
        if self.amplitude < 0:
            raise ValueError("amplitude must be nonnegative")
        if not 0.0 <= self.phase_deg < 180.0:
            raise ValueError("phase_deg must lie in [0, 180)")


@dataclass(frozen=True)
class RotationMeasurement:
    """Optical rotation extracted from blank and sample scans."""

    delta_deg: float
    sigma_deg: float | None
    n_repeats: int

    def __post_init__(self):
        if self.sigma_deg is not None:
            if self.sigma_deg < 0:
                raise ValueError("sigma_deg must be nonnegative")
            if self.n_repeats < 2:
                raise ValueError("a repeatability sigma needs at least 2 repeats")


@dataclass(frozen=True)
class ChshResult:
    """Bell-test statistic S = |E1| + |E2| + |E3| + |E4|."""

    E_values: tuple[float, float, float, float]
    S: float
    sigma_S: float | None
    n_repeats: int

    def __post_init__(self):
        if self.sigma_S is not None:
            if self.sigma_S < 0:
                raise ValueError("sigma_S must be nonnegative")
            if self.n_repeats < 2:
                raise ValueError("a repeatability sigma needs at least 2 repeats")


def _records(records) -> list[CountRecord]:
    if isinstance(records, SweepResult):
        return list(records.records)
    return list(records)


def fit_fringe(records, channel: str = "coincidence",
               subtract_accidentals: bool = False,
               gate_time: float | None = None) -> FringeFit:
    """Least-squares harmonic fit of counts versus polarizer angle.

    Solves counts = a0 + a1 cos 2t + a2 sin 2t and reports the orientation
    phase atan2(a2, a1)/2 reduced to [0, 180).  With
    ``subtract_accidentals`` the estimated uncorrelated background
    ``singles_sample * singles_reference * gate_time / duration`` is removed
    from each coincidence count before fitting (``gate_time`` required).

    Raises UnderdeterminedFitError for fewer than 4 records or fewer than 3
    distinct angles modulo 180, and DegenerateFringeError when the fitted
    amplitude is below five standard errors (no meaningful phase).
    """
    recs = _records(records)
    if len(recs) < 4:
        raise UnderdeterminedFitError(f"need at least 4 records, got {len(recs)}")
    angles = np.array([r.angle_deg for r in recs], dtype=float)
    if np.unique(np.round(np.mod(angles, 180.0), 9)).size < 3:
        raise UnderdeterminedFitError("need at least 3 distinct angles modulo 180 degrees")

    if channel == "coincidence":
        raw = np.array([r.coincidences for r in recs], dtype=float)
    elif channel == "singles_sample":
        raw = np.array([r.singles_sample for r in recs], dtype=float)
    else:
        raise ValueError(f"unknown channel {channel!r}; expected one of {CHANNELS}")
    n_total = int(raw.sum())

    y = raw
    if subtract_accidentals:
        if channel != "coincidence":
            raise ValueError("accidental subtraction applies to the coincidence channel only")
        if gate_time is None:
            raise ValueError("gate_time is required to subtract accidentals")
        acc = np.array(
            [r.singles_sample * r.singles_reference * gate_time / r.duration_s for r in recs]
        )
        y = raw - acc

    t = np.radians(angles)
    design = np.column_stack([np.ones_like(t), np.cos(2 * t), np.sin(2 * t)])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    a0, a1, a2 = (float(c) for c in coef)
    amplitude = float(np.hypot(a1, a2))

    resid = y - design @ coef
    residual_rms = float(np.sqrt(np.mean(resid**2)))
    dof = len(y) - 3
    sigma2 = float(resid @ resid) / dof if dof > 0 else 0.0
    cov = sigma2 * np.linalg.inv(design.T @ design)
    if amplitude > 0:
        u = np.array([a1, a2]) / amplitude
        amp_var = float(u @ cov[1:, 1:] @ u)
    else:
        amp_var = float(max(cov[1, 1], cov[2, 2]))
    amp_se = float(np.sqrt(max(amp_var, 0.0)))

    if amplitude <= 5.0 * amp_se + 1e-9 * max(1.0, abs(a0)):
        raise DegenerateFringeError(
            f"amplitude {amplitude:.4g} is within 5 standard errors ({amp_se:.4g}) of zero"
        )

    phase_deg = wrap_orientation_deg(np.degrees(np.arctan2(a2, a1)) / 2.0)
    return FringeFit(a0, amplitude, phase_deg, residual_rms, n_total, amp_se)


def extract_rotation(fit_blank: FringeFit, fit_sample: FringeFit,
                     unwrap_hint_deg: float | None = None) -> RotationMeasurement:
    """Rotation as the orientation-phase shift between two fits.

    The shift is reduced to (-90, +90], or to the 180-degree window around
    ``unwrap_hint_deg`` when the rotation is known to exceed the principal
    branch.  A single pair of fits carries no repeatability information, so
    ``sigma_deg`` is None.
    """
    shift = fit_sample.phase_deg - fit_blank.phase_deg
    return RotationMeasurement(wrap_rotation_deg(shift, unwrap_hint_deg), None, 1)


# ---------------------------------------------------------------------------
# Repeated-measurement pipelines
# ---------------------------------------------------------------------------

def _pool_map(fn, args_list, workers: int) -> list:
    if workers <= 1:
        return [fn(args) for args in args_list]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, args_list))


def _rotation_rep(args):
    geometry, apparatus, sample, angles, channel, subtract, hint, rep = args
    blank = simulate_sweep(geometry, apparatus, None, angles, stream=2 * rep)
    loaded = simulate_sweep(geometry, apparatus, sample, angles, stream=2 * rep + 1)
    fit_b = fit_fringe(blank, channel, subtract, apparatus.gate_time)
    fit_s = fit_fringe(loaded, channel, subtract, apparatus.gate_time)
    return extract_rotation(fit_b, fit_s, hint).delta_deg


def measure_rotation(geometry: Geometry, apparatus: ApparatusConfig,
                     sample: SampleSpec, repeats: int,
                     angles_deg: Sequence[float] | None = None,
                     channel: str = "coincidence",
                     subtract_accidentals: bool = False,
                     unwrap_hint_deg: float | None = None,
                     workers: int = 1) -> RotationMeasurement:
    """Repeat blank and sample sweeps and report the mean rotation.

    Repetition ``i`` uses streams ``2i`` (blank) and ``2i+1`` (sample), so
    every sweep in the campaign is independent yet reproducible from
    ``apparatus.rng_seed`` alone.
    """
    if repeats < 1:
        raise ValueError("repeats must be at least 1")
    if angles_deg is None:
        angles_deg = DEFAULT_SWEEP_ANGLES_DEG
    args = [
        (geometry, apparatus, sample, tuple(angles_deg), channel,
         subtract_accidentals, unwrap_hint_deg, rep)
        for rep in range(repeats)
    ]
    deltas = np.array(_pool_map(_rotation_rep, args, workers))
    mean = float(deltas.mean())
    sigma = float(deltas.std(ddof=1)) if repeats >= 2 else None
    return RotationMeasurement(mean, sigma, repeats)


# ---------------------------------------------------------------------------
# Bell test
# ---------------------------------------------------------------------------

def chsh_E(counts: Sequence[float]) -> float:
    """Correlation from the four counts C(a,b), C(a+90,b+90), C(a+90,b), C(a,b+90).

    E = (C1 + C2 - C3 - C4) / (C1 + C2 + C3 + C4).  Accepts exact rates or
    probabilities as well as integer counts; the ratio is scale invariant.
    """
    c = [float(x) for x in counts]
    if len(c) != 4:
        raise ValueError(f"expected 4 counts, got {len(c)}")
    if min(c) < 0:
        raise ValueError("counts must be nonnegative")
    total = sum(c)
    if total == 0:
        raise DegenerateCountsError("all four counts are zero")
    return (c[0] + c[1] - c[2] - c[3]) / total


def _setting_quadruple(a: float, b: float) -> list[tuple[float, float]]:
    return [(a, b), (a + 90.0, b + 90.0), (a + 90.0, b), (a, b + 90.0)]


def _chsh_pairs(settings: Sequence[float]) -> list[list[tuple[float, float]]]:
    a, b, a2, b2 = settings
    return [
        _setting_quadruple(a, b),
        _setting_quadruple(a, b2),
        _setting_quadruple(a2, b),
        _setting_quadruple(a2, b2),
    ]


def chsh_from_state(state: np.ndarray,
                    settings: Sequence[float] = CHSH_SETTINGS_DEG,
                    sample_rotation_deg: float = 0.0,
                    compensate: bool = True) -> ChshResult:
    """Bell statistic from exact coincidence probabilities (no sampling).

    When a rotation precedes the sample-arm analyzer, ``compensate=True``
    offsets that analyzer by the same amount, which restores the bare-state
    statistic exactly.
    """
    offset = sample_rotation_deg if compensate else 0.0
    e_values = []
    for quad in _chsh_pairs(settings):
        probs = []
        for theta_s, theta_r in quad:
            chain = polarizer(theta_s + offset) @ rotator(sample_rotation_deg)
            after = apply_local(state, ARM_SAMPLE, chain)
            after = apply_local(after, ARM_REFERENCE, polarizer(theta_r))
            probs.append(float(np.trace(after).real))
        e_values.append(chsh_E(probs))
    e_values = tuple(e_values)
    return ChshResult(e_values, sum(abs(e) for e in e_values), None, 1)


def _chsh_rep(args):
    means, seed, rep = args
    rng = sweep_rng(seed, rep)
    counts = rng.poisson(means)
    return [chsh_E(counts[4 * k: 4 * k + 4]) for k in range(4)]


def chsh_S(geometry: Geometry, apparatus: ApparatusConfig,
           sample: SampleSpec | None = None,
           settings: Sequence[float] = CHSH_SETTINGS_DEG,
           repeats: int = 1,
           dwell_s: float | None = None,
           compensate: bool = True,
           workers: int = 1) -> ChshResult:
    """Monte Carlo Bell test over the 16-setting measurement sequence.

    Each repetition draws Poisson counts at all 16 analyzer combinations
    (mean rate times dwell, accidentals included) and evaluates S.  The
    reported ``E_values`` are per-setting means across repetitions and
    ``sigma_S`` is the repeatability standard deviation of S.  With a
    chiral sample present, ``compensate=True`` shifts the sample-arm
    settings by the nominal rotation so the correlations are evaluated in
    the rotated frame.
    """
    if geometry.mode != "ghost":
        raise ValueError("the Bell test needs one analyzer per arm (ghost arrangement)")
    if repeats < 1:
        raise ValueError("repeats must be at least 1")
    dwell = apparatus.dwell_time if dwell_s is None else float(dwell_s)
    offset = sample.rotation_deg if (sample is not None and compensate) else 0.0

    means = []
    for quad in _chsh_pairs(settings):
        for theta_s, theta_r in quad:
            rate = _ghost_rates_basis(apparatus, sample, theta_s + offset, theta_r)
            means.append(rate.coincidences * dwell)
    means = np.array(means)

    args = [(means, apparatus.rng_seed, rep) for rep in range(repeats)]
    e_per_rep = np.array(_pool_map(_chsh_rep, args, workers))
    s_per_rep = np.abs(e_per_rep).sum(axis=1)

    e_values = tuple(float(e) for e in e_per_rep.mean(axis=0))
    s_value = sum(abs(e) for e in e_values)
    sigma = float(s_per_rep.std(ddof=1)) if repeats >= 2 else None
    return ChshResult(e_values, s_value, sigma, repeats)


def infer_visibility(s_measured: float) -> float:
    """Source visibility of the isotropic-noise model from a measured S."""
    if not 0.0 <= s_measured <= S_QUANTUM_MAX:
        raise ValueError(f"S must be in [0, {S_QUANTUM_MAX:.6f}], got {s_measured}")
    return s_measured / S_QUANTUM_MAX


# ---------------------------------------------------------------------------
# Shot-noise scaling
# ---------------------------------------------------------------------------

def phase_spread_rad(phases_deg: Iterable[float]) -> float:
    """Standard deviation of orientation phases on the 180-degree circle.

    Computed on the doubled (fringe) phase via circular moments, then
    halved, so values straddling the 0/180 wrap do not inflate the spread.
    """
    z = np.exp(2j * np.radians(np.asarray(list(phases_deg), dtype=float)))
    if z.size < 2:
        raise ValueError("need at least 2 phases")
    mean_dir = np.angle(z.mean())
    dev = np.angle(z * np.exp(-1j * mean_dir))
    return float(np.std(dev, ddof=1) / 2.0)


@dataclass(frozen=True)
class ScalingPoint:
    """Phase repeatability at one coincidence budget."""

    n_target: float
    n_mean: float
    dwell_s: float
    sigma_phi_rad: float
    repeats: int


@dataclass(frozen=True)
class ScalingResult:
    """Shot-noise scaling study output.

    ``loglog_slope_vs_n`` is the slope of log sigma_phi against log n
    (-1/2 at the shot-noise limit); ``loglog_slope_vs_inv_sqrt_n`` is the
    same fit expressed against log(1/sqrt(n)) (+1 at the limit).
    ``mean_sigma_sqrt_n`` is the measured prefactor k in
    sigma_phi = k / sqrt(n).
    """

    points: tuple[ScalingPoint, ...]
    loglog_slope_vs_n: float
    loglog_slope_vs_inv_sqrt_n: float
    mean_sigma_sqrt_n: float


def _scaling_rep(args):
    geometry, apparatus, sample, angles, channel, dwell, stream = args
    sweep = simulate_sweep(geometry, apparatus, sample, angles, stream=stream, dwell_s=dwell)
    fit = fit_fringe(sweep, channel)
    n_real = sum(r.coincidences for r in sweep.records)
    return fit.phase_deg, n_real


def scaling_study(geometry: Geometry, apparatus: ApparatusConfig,
                  sample: SampleSpec | None,
                  n_targets: Sequence[float],
                  repeats_per_target: int,
                  angles_deg: Sequence[float] | None = None,
                  channel: str = "coincidence",
                  workers: int = 1) -> ScalingResult:
    """Phase repeatability versus total coincidence counts per sweep.

    For each target n the dwell per angle is chosen so a full sweep
    collects about n coincidences; ``repeats_per_target`` sweeps with
    independent streams are fitted and the spread of their phases is the
    repeatability.  Targets must contain at least 3 values spanning at
    least two decades.
    """
    targets = [float(n) for n in n_targets]
    if len(targets) < 3:
        raise ValueError("need at least 3 coincidence targets")
    if max(targets) / min(targets) < 100.0:
        raise ValueError("targets must span at least two decades")
    if repeats_per_target < 2:
        raise ValueError("need at least 2 repeats per target")
    if angles_deg is None:
        angles_deg = DEFAULT_SWEEP_ANGLES_DEG
    angles = tuple(float(a) for a in angles_deg)

    coinc_per_second = sum(r.coincidences for r in sweep_rates(geometry, apparatus, sample, angles))
    points = []
    for t_index, n_target in enumerate(targets):
        dwell = n_target / coinc_per_second
        args = [
            (geometry, apparatus, sample, angles, channel, dwell,
             t_index * repeats_per_target + rep)
            for rep in range(repeats_per_target)
        ]
        results = _pool_map(_scaling_rep, args, workers)
        phases = [phase for phase, _ in results]
        n_mean = float(np.mean([n for _, n in results]))
        points.append(ScalingPoint(n_target, n_mean, dwell,
                                   phase_spread_rad(phases), repeats_per_target))

    log_n = np.log10([p.n_mean for p in points])
    log_sigma = np.log10([p.sigma_phi_rad for p in points])
    slope = float(np.polyfit(log_n, log_sigma, 1)[0])
    prefactor = float(np.mean([p.sigma_phi_rad * np.sqrt(p.n_mean) for p in points]))
    return ScalingResult(tuple(points), slope, -2.0 * slope, prefactor)
