"""Measuring optical activity with unpolarized light.

For each D-Limonene cell length the campaign repeats 40 blank/sample sweep
pairs, fits the coincidence fringe of each sweep, and reports the mean
fringe shift with its repeatability.  The ghost numbers come from a sample
that only ever saw unpolarized light; the heralded numbers are the
conventional polarized-light measurement run on the same bench for
comparison.  Rotation grows linearly with path length at 12.4 deg per cm.

Run from the repository root:  python demos/03_optical_rotation.py
"""

from ghostpol import measure_rotation, paper_preset

REPEATS = 40

print(f"{'cell':>6} {'configured':>11} | {'ghost':>22} | {'heralded':>22}")
for length in (1, 2, 5):
    truth = 12.4 * length
    row = [f"{length:>4}cm {truth:>10.1f}d"]
    for mode in ("ghost", "heralded"):
        geometry, apparatus, sample = paper_preset(f"{mode}_limonene_{length}cm")
        m = measure_rotation(geometry, apparatus, sample, repeats=REPEATS)
        row.append(f"{m.delta_deg:8.2f} +/- {m.sigma_deg:4.2f} deg")
    print(" | ".join(row))

print(
    "\nBoth columns recover the configured rotation; the published bench also"
    "\nsaw its 5 cm value pulled above the linear trend by the light path"
    "\nthrough the longer cell, a systematic this model leaves out."
)
