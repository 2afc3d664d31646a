"""Command-line driver.

Subcommands: ``simulate``, ``fit``, ``rotation``, ``chsh``, ``scaling`` and
``reproduce-paper``.  Reports go to stdout as plain text; ``--out`` writes
the machine-readable CSV.  All angles on the command line and in files are
degrees.

Exit status: 0 on success; 2 for usage, scenario, CSV, I/O or degenerate-
data errors (one ``E_*``-prefixed line on stderr); 3 when a statistical
reproduction check fails.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .estimate import (
    DegenerateCountsError,
    DegenerateFringeError,
    EstimationError,
    UnderdeterminedFitError,
    chsh_from_state,
    chsh_S,
    extract_rotation,
    fit_fringe,
    scaling_study,
)
from .reproduce import DEFAULT_BASE_SEED, run_all_checks
from .scenario import (
    Scenario,
    ScenarioError,
    ScenarioKeyError,
    ScenarioSyntaxError,
    ScenarioValueError,
    SweepCsvError,
    load_scenario,
    read_sweep_csv,
    write_sweep_csv,
)
from .simulate import simulate_sweep
from .states import werner_like

EXIT_OK = 0
EXIT_ERROR = 2
EXIT_CHECK_FAILED = 3


def _error_code(exc: Exception) -> str:
    if isinstance(exc, ScenarioSyntaxError):
        return "E_SCENARIO_SYNTAX"
    if isinstance(exc, ScenarioKeyError):
        return "E_SCENARIO_KEY"
    if isinstance(exc, ScenarioValueError):
        return "E_SCENARIO_VALUE"
    if isinstance(exc, ScenarioError):
        return "E_SCENARIO"
    if isinstance(exc, SweepCsvError):
        return "E_CSV"
    if isinstance(exc, (UnderdeterminedFitError, DegenerateFringeError,
                        DegenerateCountsError, EstimationError)):
        return "E_DATA"
    if isinstance(exc, OSError):
        return "E_IO"
    return "E_VALUE"


def _apply_overrides(scenario: Scenario, args) -> Scenario:
    apparatus = scenario.apparatus
    if getattr(args, "seed", None) is not None:
        apparatus = replace(apparatus, rng_seed=args.seed)
    if getattr(args, "dwell", None) is not None:
        apparatus = replace(apparatus, dwell_time=args.dwell)
    return replace(scenario, apparatus=apparatus)


def _banner(seed) -> str:
    return f"ghostpol {__version__} | seed {seed}"


def _write_report_csv(path, header: list[str], rows: list[list]) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(repr(v) if isinstance(v, float) else str(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def cmd_simulate(args) -> int:
    scenario = _apply_overrides(load_scenario(args.scenario), args)
    sweep = simulate_sweep(scenario.geometry, scenario.apparatus, scenario.sample,
                           scenario.angles_deg, stream=args.stream)
    write_sweep_csv(args.out, sweep, extra_meta={"stream": args.stream,
                                                 "tool_version": __version__})
    total = sum(r.coincidences for r in sweep.records)
    print(_banner(scenario.apparatus.rng_seed) + f" | stream {args.stream}")
    print(f"wrote {len(sweep.records)} records to {args.out} "
          f"({total} coincidences in total)")
    return EXIT_OK


def _fit_from_csv(path, channel: str, subtract: bool):
    records, meta = read_sweep_csv(path)
    gate = float(meta["gate_time"]) if "gate_time" in meta else None
    return fit_fringe(records, channel, subtract, gate), meta


def cmd_fit(args) -> int:
    fit, meta = _fit_from_csv(args.csv, args.channel, args.subtract_accidentals)
    print(_banner(meta.get("rng_seed", "unknown")))
    print(f"channel        {args.channel}")
    print(f"offset         {fit.offset:.3f} counts")
    print(f"amplitude      {fit.amplitude:.3f} counts")
    print(f"phase          {fit.phase_deg:.4f} deg")
    print(f"residual rms   {fit.residual_rms:.3f} counts")
    print(f"total counts   {fit.n_total}")
    if args.out:
        _write_report_csv(args.out,
                          ["offset", "amplitude", "phase_deg", "residual_rms", "n_total"],
                          [[fit.offset, fit.amplitude, fit.phase_deg,
                            fit.residual_rms, fit.n_total]])
    return EXIT_OK


def cmd_rotation(args) -> int:
    if len(args.blank) != len(args.sample):
        raise ValueError(
            f"need matching blank/sample runs, got {len(args.blank)} and {len(args.sample)}"
        )
    deltas = []
    for blank_path, sample_path in zip(args.blank, args.sample):
        fit_blank, meta = _fit_from_csv(blank_path, args.channel,
                                        args.subtract_accidentals)
        fit_sample, _ = _fit_from_csv(sample_path, args.channel,
                                      args.subtract_accidentals)
        deltas.append(
            extract_rotation(fit_blank, fit_sample, args.unwrap_hint).delta_deg
        )
    mean = sum(deltas) / len(deltas)
    print(_banner(meta.get("rng_seed", "unknown")))
    if len(deltas) >= 2:
        var = sum((d - mean) ** 2 for d in deltas) / (len(deltas) - 1)
        sigma = var**0.5
        print(f"rotation       {mean:.4f} +/- {sigma:.4f} deg ({len(deltas)} pairs)")
    else:
        sigma = ""
        print(f"rotation       {mean:.4f} deg (single pair, no repeatability sigma)")
    if args.out:
        _write_report_csv(args.out, ["delta_deg", "sigma_deg", "n_pairs"],
                          [[mean, sigma, len(deltas)]])
    return EXIT_OK


def cmd_chsh(args) -> int:
    scenario = _apply_overrides(load_scenario(args.scenario), args)
    repeats = args.repeats if args.repeats is not None else scenario.analysis.repeats
    print(_banner(scenario.apparatus.rng_seed))
    if args.exact:
        state = werner_like(scenario.apparatus.visibility)
        rotation = scenario.sample.rotation_deg if scenario.sample else 0.0
        result = chsh_from_state(state, sample_rotation_deg=rotation)
        print("exact analytic rates (no sampling, no background)")
    else:
        result = chsh_S(scenario.geometry, scenario.apparatus, scenario.sample,
                        repeats=repeats, workers=args.workers)
    for label, e in zip(("E(a,b)", "E(a,b')", "E(a',b)", "E(a',b')"), result.E_values):
        print(f"{label:9s} {e:+.6f}")
    if result.sigma_S is None:
        print(f"S = {result.S:.6f}")
    else:
        print(f"S = {result.S:.4f} +/- {result.sigma_S:.4f} ({result.n_repeats} repeats)")
    if args.out:
        _write_report_csv(args.out,
                          ["E1", "E2", "E3", "E4", "S", "sigma_S", "repeats", "seed"],
                          [[*result.E_values, result.S,
                            "" if result.sigma_S is None else result.sigma_S,
                            result.n_repeats, scenario.apparatus.rng_seed]])
    return EXIT_OK


def cmd_scaling(args) -> int:
    scenario = _apply_overrides(load_scenario(args.scenario), args)
    targets = [float(x) for x in args.n_targets.split(",")]
    repeats = args.repeats if args.repeats is not None else scenario.analysis.repeats
    study = scaling_study(scenario.geometry, scenario.apparatus, scenario.sample,
                          targets, repeats, angles_deg=scenario.angles_deg,
                          channel=scenario.analysis.channel, workers=args.workers)
    print(_banner(scenario.apparatus.rng_seed))
    print(f"{'n_target':>12} {'n_mean':>12} {'dwell_s':>10} {'sigma_phi_rad':>14}")
    for p in study.points:
        print(f"{p.n_target:12.0f} {p.n_mean:12.1f} {p.dwell_s:10.4f} {p.sigma_phi_rad:14.6f}")
    print(f"log-log slope vs n:         {study.loglog_slope_vs_n:+.4f}")
    print(f"log-log slope vs 1/sqrt(n): {study.loglog_slope_vs_inv_sqrt_n:+.4f}")
    print(f"mean sigma_phi*sqrt(n):     {study.mean_sigma_sqrt_n:.3f}")
    if args.out:
        _write_report_csv(
            args.out,
            ["n_target", "n_mean", "dwell_s", "sigma_phi_rad", "repeats"],
            [[p.n_target, p.n_mean, p.dwell_s, p.sigma_phi_rad, p.repeats]
             for p in study.points],
        )
    return EXIT_OK


def cmd_reproduce_paper(args) -> int:
    seed = args.seed if args.seed is not None else DEFAULT_BASE_SEED
    rows = run_all_checks(seed, workers=args.workers)
    print(_banner(seed))
    name_w = max(len(r.name) for r in rows)
    paper_w = max(len(r.paper_value) for r in rows)
    sim_w = max(len(r.simulated) for r in rows)
    print(f"{'check':<{name_w}}  {'published':<{paper_w}}  {'simulated':<{sim_w}}  result")
    for r in rows:
        status = "PASS" if r.passed else "FAIL"
        print(f"{r.name:<{name_w}}  {r.paper_value:<{paper_w}}  {r.simulated:<{sim_w}}  {status}")
        if r.note:
            print(f"{'':<{name_w}}  note: {r.note}")
    failed = [r for r in rows if not r.passed]
    print(f"{len(rows) - len(failed)}/{len(rows)} checks passed")
    if args.out:
        _write_report_csv(
            args.out,
            ["name", "paper_value", "simulated", "requirement", "passed"],
            [[r.name, f'"{r.paper_value}"', f'"{r.simulated}"',
              f'"{r.requirement}"', r.passed] for r in rows],
        )
    return EXIT_OK if not failed else EXIT_CHECK_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ghostpol",
        description="Ghost and heralded polarimetry with entangled photon pairs: "
                    "simulate polarizer sweeps, fit fringes, measure optical "
                    "rotation, run Bell tests and shot-noise scaling studies.",
        epilog="Exit status: 0 success, 2 input or data error (single E_* line "
               "on stderr), 3 statistical reproduction check failed.",
    )
    parser.add_argument("--version", action="version", version=f"ghostpol {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, seed=True, workers=False, dwell=False):
        if seed:
            p.add_argument("--seed", type=int, default=None,
                           help="override the scenario RNG seed")
        if dwell:
            p.add_argument("--dwell", type=float, default=None,
                           help="override the per-setting dwell time in seconds")
        if workers:
            p.add_argument("--workers", type=int, default=1,
                           help="worker processes for repetitions (default 1)")

    p = sub.add_parser("simulate", help="simulate one polarizer sweep to CSV")
    p.add_argument("scenario", help="scenario file")
    p.add_argument("--out", required=True, help="output sweep CSV path")
    p.add_argument("--stream", type=int, default=0,
                   help="independent repetition stream index (default 0)")
    add_common(p, dwell=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="fit a fringe to a sweep CSV")
    p.add_argument("csv", help="sweep CSV file")
    p.add_argument("--channel", choices=("coincidence", "singles_sample"),
                   default="coincidence")
    p.add_argument("--subtract-accidentals", action="store_true",
                   help="remove estimated S*R*gate background before fitting")
    p.add_argument("--out", default=None, help="write the fit report CSV here")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("rotation", help="optical rotation from blank/sample CSV pairs")
    p.add_argument("--blank", nargs="+", required=True, help="blank sweep CSVs")
    p.add_argument("--sample", nargs="+", required=True, help="sample sweep CSVs")
    p.add_argument("--channel", choices=("coincidence", "singles_sample"),
                   default="coincidence")
    p.add_argument("--subtract-accidentals", action="store_true")
    p.add_argument("--unwrap-hint", type=float, default=None,
                   help="centre of the 180 deg window for large rotations")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_rotation)

    p = sub.add_parser("chsh", help="Bell-test statistic for a scenario")
    p.add_argument("scenario")
    p.add_argument("--repeats", type=int, default=None,
                   help="measurement sequences (default: scenario analysis block)")
    p.add_argument("--exact", action="store_true",
                   help="analytic probabilities instead of Monte Carlo counts")
    p.add_argument("--out", default=None)
    add_common(p, workers=True, dwell=True)
    p.set_defaults(func=cmd_chsh)

    p = sub.add_parser("scaling", help="phase repeatability vs total coincidences")
    p.add_argument("scenario")
    p.add_argument("--n-targets", default="1e3,1e4,1e5,1e6",
                   help="comma-separated coincidence budgets")
    p.add_argument("--repeats", type=int, default=None,
                   help="sweeps per budget (default: scenario analysis block)")
    p.add_argument("--out", default=None)
    add_common(p, workers=True)
    p.set_defaults(func=cmd_scaling)

    p = sub.add_parser("reproduce-paper",
                       help="run every published-value check and print a table")
    p.add_argument("--out", default=None, help="write the check table CSV here")
    add_common(p, workers=True)
    p.set_defaults(func=cmd_reproduce_paper)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, SweepCsvError, EstimationError, OSError, ValueError) as exc:
        print(f"{_error_code(exc)}: {exc}", file=sys.stderr)
        return EXIT_ERROR


def console_main() -> None:
    raise SystemExit(main())
