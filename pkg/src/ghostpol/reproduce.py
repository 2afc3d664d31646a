"""End-to-end checks of the published anchor values.

Each check simulates the relevant bench preset with documented seeds and
compares the result to the published number at a stated tolerance.  The
rows double as the acceptance surface: the CLI prints them as a table and
the test suite asserts on them one by one.

Tolerances
----------
* Exact Bell statistic at unit visibility: |S - 2 sqrt 2| < 1e-9.
* Uncorrelated-background formula: equal to S*R*gate within 1e-6 relative
  (the published 1.0417 1/s is that product rounded to five digits).
* Bell preset, 100 repetitions: mean S within 2.39 +/- 0.07; repeatability
  within a factor of 2 of 0.07.
* Rotations: mean within 3 sigma of the mean of 12.4 / 24.8 / 62.0 degrees,
  repeatability within a factor of 10 of the published 0.62 / 0.77 / 1.5
  degrees.  The published 5 cm value (69.49 deg) includes a cell-path
  systematic that is deliberately not modelled; the linear value 62.0 deg
  is the simulation truth.
* Ghost and heralded rotations agree within twice their combined standard
  error.
* Scaling: log-log slope of sigma_phi versus n in -0.50 +/- 0.05 over
  n = 1e3 .. 1e6.
* Anchor: sigma_phi at n ~= 203000 within a factor of 1.5 of 0.002 rad.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .estimate import (
    S_QUANTUM_MAX,
    chsh_from_state,
    chsh_S,
    measure_rotation,
    phase_spread_rad,
    scaling_study,
    _pool_map,
    _scaling_rep,
)
from .simulate import (
    CHSH_SETTINGS_DEG,
    DEFAULT_SWEEP_ANGLES_DEG,
    accidental_rate,
    paper_preset,
    sweep_rates,
)
from .states import werner_like

#: Base seed for the reproduction campaign; each check derives its own so
#: no two checks share a (seed, stream) pair.
DEFAULT_BASE_SEED = 20406

_SEED_OFFSETS = {
    "chsh_bare": 1,
    "rotation_1cm": 2,
    "rotation_2cm": 3,
    "rotation_5cm": 4,
    "consistency_ghost": 5,
    "consistency_heralded": 6,
    "scaling": 7,
    "anchor": 8,
    "chsh_1cm": 9,
}


@dataclass(frozen=True)
class CheckRow:
    """One line of the reproduction table."""

    name: str
    paper_value: str
    simulated: str
    requirement: str
    passed: bool
    note: str = ""


def _seed(base: int, name: str) -> int:
    return base + _SEED_OFFSETS[name]


def check_exact_chsh() -> CheckRow:
    """Analytic Bell statistic of the pure state at the optimal settings."""
    result = chsh_from_state(werner_like(1.0), CHSH_SETTINGS_DEG)
    err = abs(result.S - S_QUANTUM_MAX)
    return CheckRow(
        name="exact CHSH, V=1",
        paper_value="S = 2*sqrt(2) = 2.828427",
        simulated=f"S = {result.S:.9f}",
        requirement="|S - 2*sqrt(2)| < 1e-9",
        passed=err < 1e-9,
    )


def check_accidentals() -> CheckRow:
    """Background coincidence formula at the published rates."""
    acc = accidental_rate(19000.0, 36000.0, 1.523e-9)
    exact = 19000.0 * 36000.0 * 1.523e-9
    rel = abs(acc - exact) / exact
    rounded_ok = abs(acc - 1.0417) <= 5e-5
    return CheckRow(
        name="accidental rate",
        paper_value="acc ~= 1.0417 1/s",
        simulated=f"acc = {acc:.6f} 1/s",
        requirement="S*R*gate within 1e-6 relative; rounds to 1.0417",
        passed=(rel <= 1e-6) and rounded_ok,
    )


def check_chsh_bare(base_seed: int = DEFAULT_BASE_SEED, workers: int = 1) -> CheckRow:
    """Bell preset: 16 settings, 3.5 s each, repeated 100 times."""
    geometry, apparatus, sample = paper_preset("chsh_bare",
                                               seed=_seed(base_seed, "chsh_bare"))
    result = chsh_S(geometry, apparatus, sample, repeats=100, workers=workers)
    mean_ok = abs(result.S - 2.39) <= 0.07
    std_ok = 0.07 / 2.0 <= result.sigma_S <= 0.07 * 2.0
    return CheckRow(
        name="CHSH bare source",
        paper_value="S = 2.39 +/- 0.07",
        simulated=f"S = {result.S:.3f} +/- {result.sigma_S:.3f}",
        requirement="mean within 2.39 +/- 0.07; std within 2x of 0.07",
        passed=mean_ok and std_ok,
    )


def check_chsh_with_cell(base_seed: int = DEFAULT_BASE_SEED, workers: int = 1) -> CheckRow:
    """Entanglement survives a 1 cm chiral cell: S stays above 2."""
    geometry, apparatus, sample = paper_preset("chsh_1cm",
                                               seed=_seed(base_seed, "chsh_1cm"))
    result = chsh_S(geometry, apparatus, sample, repeats=100, workers=workers)
    return CheckRow(
        name="CHSH with 1 cm cell",
        paper_value="S > 2 (measured 2.46 +/- 0.02)",
        simulated=f"S = {result.S:.3f} +/- {result.sigma_S:.3f}",
        requirement="S - 2 sigma > 2 with compensated settings",
        passed=result.S - 2.0 * result.sigma_S > 2.0,
        note="the simulated source keeps V = 0.845, so its S stays near 2.39",
    )


_ROTATION_CASES = (
    ("rotation_1cm", "ghost_limonene_1cm", 12.4, 0.62),
    ("rotation_2cm", "ghost_limonene_2cm", 24.8, 0.77),
    ("rotation_5cm", "ghost_limonene_5cm", 62.0, 1.5),
)


def check_rotation(case: str, base_seed: int = DEFAULT_BASE_SEED,
                   repeats: int = 40, workers: int = 1) -> CheckRow:
    """Ghost rotation for one cell length against the linear truth."""
    (name, preset, target, paper_sigma), = (
        c for c in _ROTATION_CASES if c[0] == case
    )
    geometry, apparatus, sample = paper_preset(preset, seed=_seed(base_seed, name))
    result = measure_rotation(geometry, apparatus, sample, repeats=repeats,
                              workers=workers)
    mean_tol = 3.0 * result.sigma_deg / np.sqrt(result.n_repeats)
    mean_ok = abs(result.delta_deg - target) <= mean_tol
    sigma_ok = paper_sigma / 10.0 <= result.sigma_deg <= paper_sigma * 10.0
    note = ""
    if name == "rotation_5cm":
        note = ("published 69.49 deg includes a cell-path systematic; "
                "the linear 62.0 deg is the configured truth")
    return CheckRow(
        name=f"ghost rotation {preset.rsplit('_', 1)[-1]}",
        paper_value=f"{target:.1f} deg (published sigma {paper_sigma:.2f} deg)",
        simulated=f"{result.delta_deg:.3f} +/- {result.sigma_deg:.3f} deg "
                  f"({result.n_repeats} repeats)",
        requirement=f"mean within 3 sigma/sqrt(n) = {mean_tol:.3f} deg; "
                    "sigma within 10x of published",
        passed=mean_ok and sigma_ok,
        note=note,
    )


def check_consistency(base_seed: int = DEFAULT_BASE_SEED, repeats: int = 40,
                      workers: int = 1) -> CheckRow:
    """Ghost and heralded agree on the 2 cm rotation within combined 2 sigma."""
    ghost = paper_preset("ghost_limonene_2cm",
                         seed=_seed(base_seed, "consistency_ghost"))
    heralded = paper_preset("heralded_limonene_2cm",
                            seed=_seed(base_seed, "consistency_heralded"))
    m_g = measure_rotation(ghost.geometry, ghost.apparatus, ghost.sample,
                           repeats=repeats, workers=workers)
    m_h = measure_rotation(heralded.geometry, heralded.apparatus, heralded.sample,
                           repeats=repeats, workers=workers)
    gap = abs(m_g.delta_deg - m_h.delta_deg)
    bound = 2.0 * np.sqrt(m_g.sigma_deg**2 + m_h.sigma_deg**2) / np.sqrt(repeats)
    return CheckRow(
        name="ghost vs heralded, 2 cm",
        paper_value="statistically consistent",
        simulated=f"ghost {m_g.delta_deg:.3f} deg, heralded {m_h.delta_deg:.3f} deg, "
                  f"gap {gap:.3f} deg",
        requirement=f"gap within combined 2 sigma of the means = {bound:.3f} deg",
        passed=gap <= bound,
    )


def check_scaling(base_seed: int = DEFAULT_BASE_SEED, repeats: int = 100,
                  workers: int = 1) -> CheckRow:
    """Shot-noise slope of phase repeatability over three decades of counts."""
    geometry, apparatus, sample = paper_preset("ghost_blank",
                                               seed=_seed(base_seed, "scaling"))
    study = scaling_study(geometry, apparatus, sample,
                          n_targets=(1e3, 1e4, 1e5, 1e6),
                          repeats_per_target=repeats, workers=workers)
    slope = study.loglog_slope_vs_n
    return CheckRow(
        name="shot-noise scaling",
        paper_value="slope +1 against 1/sqrt(n)",
        simulated=f"slope vs n = {slope:.3f} (vs 1/sqrt(n): "
                  f"{study.loglog_slope_vs_inv_sqrt_n:.3f}); "
                  f"sigma*sqrt(n) = {study.mean_sigma_sqrt_n:.2f}",
        requirement="slope vs n in -0.50 +/- 0.05",
        passed=abs(slope + 0.5) <= 0.05,
    )


def check_anchor(base_seed: int = DEFAULT_BASE_SEED, repeats: int = 100,
                 workers: int = 1) -> CheckRow:
    """Phase repeatability at about 203000 coincidences per sweep."""
    geometry, apparatus, sample = paper_preset("ghost_limonene_1cm",
                                               seed=_seed(base_seed, "anchor"))
    angles = DEFAULT_SWEEP_ANGLES_DEG
    per_second = sum(r.coincidences
                     for r in sweep_rates(geometry, apparatus, sample, angles))
    dwell = 203000.0 / per_second
    args = [(geometry, apparatus, sample, angles, "coincidence", dwell, rep)
            for rep in range(repeats)]
    results = _pool_map(_scaling_rep, args, workers)
    sigma = phase_spread_rad([phase for phase, _ in results])
    n_mean = float(np.mean([n for _, n in results]))
    return CheckRow(
        name="phase repeatability anchor",
        paper_value="0.002 rad at n = 203000",
        simulated=f"{sigma:.5f} rad at n = {n_mean:.0f}",
        requirement="within a factor of 1.5 of 0.002 rad",
        passed=0.002 / 1.5 <= sigma <= 0.002 * 1.5,
    )


def run_all_checks(base_seed: int = DEFAULT_BASE_SEED,
                   workers: int = 1) -> list[CheckRow]:
    """Run the full reproduction campaign in a deterministic order."""
    rows = [
        check_exact_chsh(),
        check_accidentals(),
        check_chsh_bare(base_seed, workers),
        check_chsh_with_cell(base_seed, workers),
    ]
    for case, *_ in _ROTATION_CASES:
        rows.append(check_rotation(case, base_seed, workers=workers))
    rows.append(check_consistency(base_seed, workers=workers))
    rows.append(check_scaling(base_seed, workers=workers))
    rows.append(check_anchor(base_seed, workers=workers))
    return rows
