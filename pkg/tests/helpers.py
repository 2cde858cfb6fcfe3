"""Shared test utilities: random states and the brute-force purity oracle."""

from __future__ import annotations

import numpy as np

from zzsim.sme import MeasurementModel, drift_term, innovation_term


def random_density_matrix(rng: np.random.Generator, dim: int = 4) -> np.ndarray:
    """Full-rank random state from a Ginibre matrix."""
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_pure_state(rng: np.random.Generator, dim: int = 4) -> np.ndarray:
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())


def random_dfs_plus_state(rng: np.random.Generator) -> np.ndarray:
    """Random state supported on span{|00>, |11>} (the +1 parity subspace)."""
    sigma = random_density_matrix(rng, dim=2)
    rho = np.zeros((4, 4), dtype=complex)
    rho[np.ix_([0, 3], [0, 3])] = sigma
    return rho


def dP_direct(rho: np.ndarray, model: MeasurementModel, dt: float, dW: float) -> float:
    """Direct Ito purity increment: 2 Tr[rho drho] + Tr[innovation^2] dt.

    Built from the matrix-valued drift and innovation terms, independent of
    the Pauli-coefficient formula it cross-checks.
    """
    drift = drift_term(rho, model)
    innov = innovation_term(rho, model)
    d_rho = drift * dt + innov * dW
    return float(np.real(2.0 * np.trace(rho @ d_rho) + np.trace(innov @ innov) * dt))


def ket(vec) -> np.ndarray:
    v = np.asarray(vec, dtype=complex)
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())


PHI_PLUS = ket([1, 0, 0, 1])
PSI_PLUS = ket([0, 1, 1, 0])
CLASSICAL_MIX = np.diag([0.5, 0.0, 0.0, 0.5]).astype(complex)
MAXIMALLY_MIXED = np.eye(4, dtype=complex) / 4.0
