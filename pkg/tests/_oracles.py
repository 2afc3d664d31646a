"""Independent oracles used to cross-check the library.

Everything here is built directly from numpy primitives (outer products,
Kronecker products, explicit traces) so the checks do not share code paths
with the package under test.
"""

import numpy as np


def projector(theta_deg: float) -> np.ndarray:
    t = np.radians(theta_deg)
    ket = np.array([np.cos(t), np.sin(t)], dtype=complex)
    return np.outer(ket, ket.conj())


def rho_phi_plus() -> np.ndarray:
    ket = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
    return np.outer(ket, ket.conj())


def rho_werner(visibility: float) -> np.ndarray:
    return visibility * rho_phi_plus() + (1 - visibility) * np.eye(4) / 4


def contract(rho: np.ndarray, theta_sample_deg: float, theta_reference_deg: float) -> float:
    """Coincidence probability by direct 4x4 contraction tr[(Pa x Pb) rho]."""
    joint = np.kron(projector(theta_sample_deg), projector(theta_reference_deg))
    return float(np.trace(joint @ rho).real)


def correlation_from_contraction(rho: np.ndarray, a_deg: float, b_deg: float) -> float:
    p_pp = contract(rho, a_deg, b_deg)
    p_mm = contract(rho, a_deg + 90, b_deg + 90)
    p_mp = contract(rho, a_deg + 90, b_deg)
    p_pm = contract(rho, a_deg, b_deg + 90)
    return (p_pp + p_mm - p_mp - p_pm) / (p_pp + p_mm + p_mp + p_pm)


def random_density_matrix(rng: np.random.Generator) -> np.ndarray:
    """Random valid two-qubit state: normalized A A^H for complex Ginibre A."""
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real
