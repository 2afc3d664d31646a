"""Scenario files and sweep CSV serialization.

Scenario format
---------------
Plain text, one ``key = value`` per line, grouped under bracketed section
headers.  ``#`` starts a comment; blank lines are ignored.  Unknown
sections or keys are rejected with the offending line number.  All angles
are degrees, all times seconds, all rates per second.

::

    [geometry]
    mode = ghost                 # ghost | heralded (required)
    rotating_arm = reference     # default: reference for ghost, sample for heralded
    fixed_angle_deg = 0.0
    angle_start_deg = 0.0
    angle_step_deg = 10.0
    angle_count = 36

    [apparatus]                  # defaults reproduce the published bench
    pair_rate = 3200000.0
    eta_sample = 0.01
    eta_reference = 0.0175
    bg_sample = 3000.0
    bg_reference = 8000.0
    gate_time = 1.523e-09
    dwell_time = 12.2
    visibility = 0.845
    rng_seed = 101

    [sample]                     # omit the whole section for a blank run
    specific_rotation_deg_per_cm = 12.4
    length_cm = 2.0
    transmission = 0.85

    [analysis]
    channel = coincidence        # coincidence | singles_sample
    repeats = 40
    subtract_accidentals = false
    unwrap_hint_deg = 25.0       # optional; omit to use the principal branch

Sweep CSV format
----------------
``# key = value`` metadata lines, then the header
``angle_deg,singles_sample,singles_reference,coincidences,duration_s`` and
one row per record.  Floats are written with ``repr`` so a write-then-read
round trip reproduces them bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .simulate import (
    ApparatusConfig,
    CountRecord,
    Geometry,
    SampleSpec,
    SweepResult,
    DEFAULT_CELL_TRANSMISSION,
    DEFAULT_SEED,
    LIMONENE_ROTATION_DEG_PER_CM,
    ROTATION_DWELL_S,
)
from .states import ARM_REFERENCE, ARM_SAMPLE

SWEEP_CSV_HEADER = "angle_deg,singles_sample,singles_reference,coincidences,duration_s"
SWEEP_CSV_SCHEMA = "ghostpol sweep-csv v1"


class ScenarioError(Exception):
    """Scenario file problem; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


class ScenarioSyntaxError(ScenarioError):
    """Malformed line or section header."""


class ScenarioKeyError(ScenarioError):
    """Unknown or duplicated section or key."""


class ScenarioValueError(ScenarioError):
    """Value failed to parse or is out of range."""


class SweepCsvError(Exception):
    """Malformed sweep CSV."""


@dataclass(frozen=True)
class AnalysisOptions:
    channel: str = "coincidence"
    repeats: int = 40
    subtract_accidentals: bool = False
    unwrap_hint_deg: float | None = None


@dataclass(frozen=True)
class Scenario:
    geometry: Geometry
    apparatus: ApparatusConfig
    sample: SampleSpec | None
    analysis: AnalysisOptions
    angles_deg: tuple[float, ...]


def _parse_float(raw: str, line: int, key: str) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise ScenarioValueError(f"key '{key}' expects a number, got {raw!r}", line) from None
    if value != value or value in (float("inf"), float("-inf")):
        raise ScenarioValueError(f"key '{key}' must be finite, got {raw!r}", line)
    return value


def _parse_int(raw: str, line: int, key: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ScenarioValueError(f"key '{key}' expects an integer, got {raw!r}", line) from None


def _parse_bool(raw: str, line: int, key: str) -> bool:
    low = raw.lower()
    if low in ("true", "false"):
        return low == "true"
    raise ScenarioValueError(f"key '{key}' expects true or false, got {raw!r}", line)


def _parse_choice(raw: str, line: int, key: str, choices: tuple[str, ...]) -> str:
    if raw in choices:
        return raw
    raise ScenarioValueError(
        f"key '{key}' must be one of {', '.join(choices)}; got {raw!r}", line
    )


def _require_range(value, line: int, key: str, lo=None, hi=None,
                   lo_open: bool = False) -> None:
    if lo is not None and (value < lo or (lo_open and value == lo)):
        bound = f"> {lo}" if lo_open else f">= {lo}"
        raise ScenarioValueError(f"key '{key}' must be {bound}, got {value}", line)
    if hi is not None and value > hi:
        raise ScenarioValueError(f"key '{key}' must be <= {hi}, got {value}", line)


_SECTIONS = ("geometry", "apparatus", "sample", "analysis")

_GEOMETRY_KEYS = ("mode", "rotating_arm", "fixed_angle_deg",
                  "angle_start_deg", "angle_step_deg", "angle_count")
_APPARATUS_KEYS = ("pair_rate", "eta_sample", "eta_reference", "bg_sample",
                   "bg_reference", "gate_time", "dwell_time", "visibility", "rng_seed")
_SAMPLE_KEYS = ("specific_rotation_deg_per_cm", "length_cm", "transmission")
_ANALYSIS_KEYS = ("channel", "repeats", "subtract_accidentals", "unwrap_hint_deg")
_KEYS_BY_SECTION = {
    "geometry": _GEOMETRY_KEYS,
    "apparatus": _APPARATUS_KEYS,
    "sample": _SAMPLE_KEYS,
    "analysis": _ANALYSIS_KEYS,
}

_APPARATUS_DEFAULTS = {
    "pair_rate": 3.2e6,
    "eta_sample": 0.0100,
    "eta_reference": 0.0175,
    "bg_sample": 3000.0,
    "bg_reference": 8000.0,
    "gate_time": 1.523e-9,
    "dwell_time": ROTATION_DWELL_S,
    "visibility": 0.845,
    "rng_seed": DEFAULT_SEED,
}


def _scan_lines(text: str):
    """Tokenize into ((line, section, key, raw_value) entries, section_lines)."""
    section = None
    seen: set[tuple[str, str]] = set()
    section_lines: dict[str, int] = {}
    entries: list[tuple[int, str, str, str]] = []
    for number, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ScenarioSyntaxError(f"malformed section header {raw_line.strip()!r}", number)
            name = line[1:-1].strip()
            if name not in _SECTIONS:
                raise ScenarioKeyError(
                    f"unknown section '[{name}]'; expected one of "
                    + ", ".join(f"[{s}]" for s in _SECTIONS),
                    number,
                )
            if name in section_lines:
                raise ScenarioKeyError(f"duplicate section '[{name}]'", number)
            section_lines[name] = number
            section = name
            continue
        if "=" not in line:
            raise ScenarioSyntaxError(f"expected 'key = value', got {raw_line.strip()!r}", number)
        if section is None:
            raise ScenarioSyntaxError("key outside any section; start with a section header", number)
        key, raw_value = (part.strip() for part in line.split("=", 1))
        if key not in _KEYS_BY_SECTION[section]:
            raise ScenarioKeyError(f"unknown key '{key}' in [{section}]", number)
        if (section, key) in seen:
            raise ScenarioKeyError(f"duplicate key '{key}' in [{section}]", number)
        if not raw_value:
            raise ScenarioSyntaxError(f"key '{key}' has no value", number)
        seen.add((section, key))
        entries.append((number, section, key, raw_value))
    return entries, section_lines


def parse_scenario(text: str) -> Scenario:
    """Parse and validate a scenario, applying documented defaults.

    Raises ScenarioSyntaxError, ScenarioKeyError or ScenarioValueError with
    the offending line number.
    """
    entries, section_lines = _scan_lines(text)
    values: dict[str, dict[str, object]] = {s: {} for s in _SECTIONS}
    lines: dict[tuple[str, str], int] = {}
    for number, section, key, raw in entries:
        lines[(section, key)] = number
        values[section][key] = raw

    geo = values["geometry"]
    if "mode" not in geo:
        raise ScenarioValueError("missing required key 'mode' in [geometry]",
                                 section_lines.get("geometry"))

    def conv(section: str, key: str, parser, default=None, **kwargs):
        if key not in values[section]:
            return default
        line = lines[(section, key)]
        return parser(values[section][key], line, key, **kwargs)

    mode = conv("geometry", "mode", _parse_choice, choices=("ghost", "heralded"))
    default_arm = ARM_REFERENCE if mode == "ghost" else ARM_SAMPLE
    rotating_arm = conv("geometry", "rotating_arm", _parse_choice,
                        default=default_arm, choices=(ARM_SAMPLE, ARM_REFERENCE))
    fixed_angle = conv("geometry", "fixed_angle_deg", _parse_float, default=0.0)
    start = conv("geometry", "angle_start_deg", _parse_float, default=0.0)
    step = conv("geometry", "angle_step_deg", _parse_float, default=10.0)
    count = conv("geometry", "angle_count", _parse_int, default=36)
    if step <= 0:
        raise ScenarioValueError(f"key 'angle_step_deg' must be > 0, got {step}",
                                 lines.get(("geometry", "angle_step_deg")))
    if count < 4:
        raise ScenarioValueError(f"key 'angle_count' must be >= 4, got {count}",
                                 lines.get(("geometry", "angle_count")))
    try:
        geometry = Geometry(mode=mode, rotating_arm=rotating_arm, fixed_angle_deg=fixed_angle)
    except ValueError as exc:
        raise ScenarioValueError(str(exc), section_lines.get("geometry")) from None
    angles = tuple(start + i * step for i in range(count))

    app: dict[str, object] = dict(_APPARATUS_DEFAULTS)
    for key in _APPARATUS_KEYS:
        if key not in values["apparatus"]:
            continue
        line = lines[("apparatus", key)]
        raw = values["apparatus"][key]
        if key == "rng_seed":
            value = _parse_int(raw, line, key)
            _require_range(value, line, key, lo=0)
        else:
            value = _parse_float(raw, line, key)
            if key in ("eta_sample", "eta_reference", "visibility"):
                _require_range(value, line, key, lo=0.0, hi=1.0)
            elif key in ("gate_time", "dwell_time"):
                _require_range(value, line, key, lo=0.0, lo_open=True)
            else:
                _require_range(value, line, key, lo=0.0)
        app[key] = value
    apparatus = ApparatusConfig(**app)  # range checks above keep this from raising

    sample = None
    if values["sample"] or "sample" in section_lines:
        if "length_cm" not in values["sample"]:
            raise ScenarioValueError("a [sample] section requires key 'length_cm'",
                                     section_lines.get("sample"))
        length = conv("sample", "length_cm", _parse_float)
        _require_range(length, lines[("sample", "length_cm")], "length_cm", lo=0.0)
        rotation = conv("sample", "specific_rotation_deg_per_cm", _parse_float,
                        default=LIMONENE_ROTATION_DEG_PER_CM)
        transmission = conv("sample", "transmission", _parse_float,
                            default=DEFAULT_CELL_TRANSMISSION)
        if ("sample", "transmission") in lines:
            _require_range(transmission, lines[("sample", "transmission")],
                           "transmission", lo=0.0, hi=1.0, lo_open=True)
        sample = SampleSpec(specific_rotation=rotation, length=length,
                            transmission=transmission)

    channel = conv("analysis", "channel", _parse_choice, default="coincidence",
                   choices=("coincidence", "singles_sample"))
    repeats = conv("analysis", "repeats", _parse_int, default=40)
    if repeats < 1:
        raise ScenarioValueError(f"key 'repeats' must be >= 1, got {repeats}",
                                 lines.get(("analysis", "repeats")))
    subtract = conv("analysis", "subtract_accidentals", _parse_bool, default=False)
    hint = conv("analysis", "unwrap_hint_deg", _parse_float, default=None)
    analysis = AnalysisOptions(channel=channel, repeats=repeats,
                               subtract_accidentals=subtract, unwrap_hint_deg=hint)

    return Scenario(geometry, apparatus, sample, analysis, angles)


def load_scenario(path) -> Scenario:
    return parse_scenario(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# Sweep CSV
# ---------------------------------------------------------------------------

def _fmt(value) -> str:
    return repr(value) if isinstance(value, float) else str(value)


def sweep_metadata(sweep: SweepResult, extra: dict | None = None) -> dict[str, str]:
    """Flat metadata block written into a sweep CSV."""
    meta = {
        "schema": SWEEP_CSV_SCHEMA,
        "mode": sweep.geometry.mode,
        "rotating_arm": sweep.geometry.rotating_arm,
        "fixed_angle_deg": _fmt(sweep.geometry.fixed_angle_deg),
    }
    for key in ("pair_rate", "eta_sample", "eta_reference", "bg_sample",
                "bg_reference", "gate_time", "dwell_time", "visibility", "rng_seed"):
        meta[key] = _fmt(getattr(sweep.apparatus, key))
    if sweep.sample is not None:
        meta["sample_specific_rotation_deg_per_cm"] = _fmt(sweep.sample.specific_rotation)
        meta["sample_length_cm"] = _fmt(sweep.sample.length)
        meta["sample_transmission"] = _fmt(sweep.sample.transmission)
    for key, value in (extra or {}).items():
        meta[str(key)] = _fmt(value)
    return meta


def write_sweep_csv(path, sweep: SweepResult, extra_meta: dict | None = None) -> None:
    """Write a sweep with metadata comments; the output is byte-deterministic."""
    lines = [f"# {key} = {value}" for key, value in sweep_metadata(sweep, extra_meta).items()]
    lines.append(SWEEP_CSV_HEADER)
    for r in sweep.records:
        lines.append(
            f"{_fmt(r.angle_deg)},{r.singles_sample},{r.singles_reference},"
            f"{r.coincidences},{_fmt(r.duration_s)}"
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_sweep_csv(path) -> tuple[tuple[CountRecord, ...], dict[str, str]]:
    """Read records and metadata back from :func:`write_sweep_csv` output."""
    meta: dict[str, str] = {}
    records: list[CountRecord] = []
    header_seen = False
    for number, raw_line in enumerate(
        Path(path).read_text(encoding="utf-8").splitlines(), start=1
    ):
        line = raw_line.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                key, value = (part.strip() for part in body.split("=", 1))
                meta[key] = value
            continue
        if not header_seen:
            if line != SWEEP_CSV_HEADER:
                raise SweepCsvError(f"line {number}: expected header {SWEEP_CSV_HEADER!r}")
            header_seen = True
            continue
        fields = line.split(",")
        if len(fields) != 5:
            raise SweepCsvError(f"line {number}: expected 5 fields, got {len(fields)}")
        try:
            record = CountRecord(
                angle_deg=float(fields[0]),
                singles_sample=int(fields[1]),
                singles_reference=int(fields[2]),
                coincidences=int(fields[3]),
                duration_s=float(fields[4]),
            )
        except ValueError as exc:
            raise SweepCsvError(f"line {number}: {exc}") from None
        records.append(record)
    if not header_seen:
        raise SweepCsvError("missing header row")
    if not records:
        raise SweepCsvError("no data rows")
    angles = [r.angle_deg for r in records]
    if any(b <= a for a, b in zip(angles, angles[1:])):
        raise SweepCsvError("angles must be strictly increasing")
    return tuple(records), meta
