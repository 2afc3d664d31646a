"""Two-qubit polarization states and Jones-matrix elements.

The two photons are labelled by arm; the sample-arm qubit comes first in
the tensor-product basis (HH, HV, VH, VV).  Public functions take and
return angles in degrees; trigonometry happens in radians internally.

Orientation angles are only meaningful modulo 180 degrees because a
linear-polarization axis is a line, not a direction.  ``wrap_orientation_deg``
and ``wrap_rotation_deg`` implement the two wrapping conventions used
throughout: fitted orientations live in [0, 180), measured rotations in
(-90, +90] (optionally re-centred on an unwrap hint).
"""

from __future__ import annotations

import numpy as np

BASIS_LABELS = ("HH", "HV", "VH", "VV")

ARM_SAMPLE = "sample"
ARM_REFERENCE = "reference"

_EYE2 = np.eye(2, dtype=complex)


def bell_phi_plus() -> np.ndarray:
    """Density matrix of the maximally entangled state (|HH> + |VV>)/sqrt(2)."""
    psi = np.array([1.0, 0.0, 0.0, 1.0], dtype=complex) / np.sqrt(2.0)
    return np.outer(psi, psi.conj())


def werner_like(visibility: float) -> np.ndarray:
    """Bell state diluted with isotropic noise: V |phi+><phi+| + (1-V) I/4.

    The single parameter V sets both the coincidence fringe contrast and the
    Bell-test value (S = 2*sqrt(2)*V at the optimal analyzer settings), which
    is how an imperfect pair source is calibrated here.
    """
    if not 0.0 <= visibility <= 1.0:
        raise ValueError(f"visibility must be in [0, 1], got {visibility}")
    iso = np.eye(4, dtype=complex) / 4.0
    return visibility * bell_phi_plus() + (1.0 - visibility) * iso


def polarizer(theta_deg: float) -> np.ndarray:
    """Jones matrix of an ideal linear polarizer with its axis at theta_deg."""
    t = np.radians(theta_deg)
    c, s = np.cos(t), np.sin(t)
    return np.array([[c * c, c * s], [c * s, s * s]], dtype=complex)


def rotator(delta_deg: float) -> np.ndarray:
    """Rotation of the polarization plane; positive delta takes H toward V."""
    d = np.radians(delta_deg)
    c, s = np.cos(d), np.sin(d)
    return np.array([[c, -s], [s, c]], dtype=complex)


def identity_element() -> np.ndarray:
    """Jones matrix of a transparent element."""
    return _EYE2.copy()


def apply_local(state: np.ndarray, arm: str, element: np.ndarray) -> np.ndarray:
    """Conjugate one arm of a two-photon state by a Jones element.

    Returns the unnormalized state (E (x) I) rho (E (x) I)^H for the sample
    arm, or (I (x) E) rho (I (x) E)^H for the reference arm.  Its trace is
    the probability that the photon in that arm survives the element;
    Hermiticity and positivity are preserved.
    """
    if arm == ARM_SAMPLE:
        op = np.kron(element, _EYE2)
    elif arm == ARM_REFERENCE:
        op = np.kron(_EYE2, element)
    else:
        raise ValueError(f"arm must be 'sample' or 'reference', got {arm!r}")
    return op @ state @ op.conj().T


def coincidence_probability(
    state: np.ndarray, theta_sample_deg: float, theta_reference_deg: float
) -> float:
    """Probability that both photons pass their respective polarizers.

    For the Bell state this is cos^2(theta_S - theta_R)/2; for the
    werner_like family, (1 + V cos 2(theta_S - theta_R))/4.
    """
    after = apply_local(state, ARM_SAMPLE, polarizer(theta_sample_deg))
    after = apply_local(after, ARM_REFERENCE, polarizer(theta_reference_deg))
    return float(np.trace(after).real)


def singles_probability(state: np.ndarray, arm: str, theta_deg: float | None = None) -> float:
    """Probability that the photon in one arm passes its polarizer.

    With ``theta_deg=None`` there is no polarizer and the probability is the
    state trace (1 for a normalized state).  For any werner_like state the
    marginal is unpolarized, so the result is 1/2 regardless of angle.
    """
    if theta_deg is None:
        return float(np.trace(state).real)
    after = apply_local(state, arm, polarizer(theta_deg))
    return float(np.trace(after).real)


def correlation_E(
    state: np.ndarray, theta_sample_deg: float, theta_reference_deg: float
) -> float:
    """Polarization correlation built from four coincidence probabilities.

    E(a, b) = [P(a,b) + P(a+90,b+90) - P(a+90,b) - P(a,b+90)] / (sum of the
    four).  Equals V cos 2(a-b) for the werner_like family.
    """
    a, b = theta_sample_deg, theta_reference_deg
    p_pp = coincidence_probability(state, a, b)
    p_mm = coincidence_probability(state, a + 90.0, b + 90.0)
    p_mp = coincidence_probability(state, a + 90.0, b)
    p_pm = coincidence_probability(state, a, b + 90.0)
    total = p_pp + p_mm + p_mp + p_pm
    return (p_pp + p_mm - p_mp - p_pm) / total


def partial_trace(state: np.ndarray, keep_arm: str) -> np.ndarray:
    """Single-qubit reduced state of one arm."""
    r = np.asarray(state).reshape(2, 2, 2, 2)
    if keep_arm == ARM_SAMPLE:
        return np.einsum("ikjk->ij", r)
    if keep_arm == ARM_REFERENCE:
        return np.einsum("kikj->ij", r)
    raise ValueError(f"keep_arm must be 'sample' or 'reference', got {keep_arm!r}")


def purity(state: np.ndarray) -> float:
    """tr(rho^2); 1 for pure states, 1/4 for the fully mixed two-qubit state."""
    return float(np.trace(state @ state).real)


def validate_state(state: np.ndarray, atol: float = 1e-10) -> None:
    """Raise ValueError unless ``state`` is a valid two-photon density matrix.

    Checks shape, Hermiticity, unit trace and positive semidefiniteness
    (eigenvalues above -atol).
    """
    rho = np.asarray(state)
    if rho.shape != (4, 4):
        raise ValueError(f"expected a 4x4 matrix, got shape {rho.shape}")
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > atol:
        raise ValueError(f"not Hermitian: max |rho - rho^H| = {herm:.3e}")
    tr = np.trace(rho)
    if abs(tr - 1.0) > atol:
        raise ValueError(f"trace is {tr}, expected 1")
    lo = float(np.linalg.eigvalsh(rho)[0])
    if lo < -atol:
        raise ValueError(f"not positive semidefinite: min eigenvalue {lo:.3e}")


def wrap_orientation_deg(angle_deg: float) -> float:
    """Reduce an orientation to the canonical representative in [0, 180)."""
    return float(np.mod(angle_deg, 180.0))


def wrap_rotation_deg(angle_deg: float, hint_deg: float | None = None) -> float:
    """Reduce a rotation to (-90, +90], or to the 180-degree window centred
    on ``hint_deg`` when the value is expected to leave the principal branch
    (large rotations accumulated over long cells)."""
    centre = 0.0 if hint_deg is None else float(hint_deg)
    y = angle_deg - centre
    wrapped = 90.0 - np.mod(90.0 - y, 180.0)
    return float(centre + wrapped)
