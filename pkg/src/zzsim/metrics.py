"""Scalar diagnostics of the conditional two-qubit state.

Purity, the two-qubit correlation measure R2^2, the closed-form purity
increment of the ZZ parity monitor, parity-subspace weights, encoded-qubit
purities, concurrence and Bell fidelity.  Everything here is a pure
function; batched variants operate on (B, 4, 4) stacks for the ensemble
runner.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .pauli import INDEX, LABELS, MATRIX_STACK, MATRICES, EncodedBloch, commutes_with, pauli_product

#: Indices of the 9 strings with both factors in {X, Y, Z}.
R2_INDICES = np.array([INDEX[a + b] for a in "XYZ" for b in "XYZ"])

_ENC1_IDX = np.array([INDEX[s] for s in ("XZ", "YI", "ZZ")])
_ENC2_IDX = np.array([INDEX[s] for s in ("XX", "XY", "IZ")])
_IDX_ZZ = INDEX["ZZ"]

# Commuting / anticommuting splits relative to the ZZ parity operator, with
# the signed partner r_{ZZ.s} = sign * r[partner] for each commuting string.
_COMM = [s for s in LABELS if commutes_with(s, "ZZ")]
_ANTI_IDX = np.array([INDEX[s] for s in LABELS if not commutes_with(s, "ZZ")])
_COMM_IDX = np.array([INDEX[s] for s in _COMM])
_COMM_PARTNER = np.array([INDEX[pauli_product("ZZ", s).string] for s in _COMM])
_COMM_SIGN = np.array([float(np.real(pauli_product("ZZ", s).phase)) for s in _COMM])

_YY = MATRICES["YY"]

_BELL_KETS = (
    np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2.0),   # (|00> + |11>)/sqrt2
    np.array([1, 0, 0, -1], dtype=complex) / np.sqrt(2.0),  # (|00> - |11>)/sqrt2
    np.array([0, 1, 1, 0], dtype=complex) / np.sqrt(2.0),   # (|01> + |10>)/sqrt2
    np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2.0),  # (|01> - |10>)/sqrt2
)
_BELL_STACK = np.stack(_BELL_KETS)


@dataclass(frozen=True)
class MetricsRow:
    """One sampled diagnostics row along a trajectory."""

    tau: float
    purity: float
    r2sq: float
    rzz: float
    enc1_purity: float
    enc2_purity: float
    wplus: float
    concurrence: float
    bell_fidelity: float
    warnings: int


#: Field order shared by TimeSeries, EnsembleStats and the CSV writer.
METRIC_FIELDS = (
    "purity",
    "r2sq",
    "rzz",
    "enc1_purity",
    "enc2_purity",
    "wplus",
    "concurrence",
    "bell_fidelity",
    "warnings",
)


def purity(rho: np.ndarray) -> float:
    """P = Tr[rho^2]; 1/4 for the maximally mixed state, 1 for pure states."""
    return float(np.real(np.trace(rho @ rho)))


def r2_squared(table: dict[str, float]) -> float:
    """Sum of r_ij^2 over the 9 strings with both factors non-identity.

    0 with no correlations, at most 1 for product states, 3 for a Bell
    state; invariant under local rotations of either qubit.
    """
    return float(sum(table[a + b] ** 2 for a in "XYZ" for b in "XYZ"))


def purity_increment(table: dict[str, float], k: float, dt: float, dW: float) -> float:
    """Predicted purity change over one parity-measurement step.

    Evaluated from the Pauli coefficients alone, with s running over the 8
    strings commuting with ZZ and a over the 8 anticommuting ones:

        dP = 2k ( sum_s (r_{ZZ.s} - r_ZZ r_s)^2 - (1 - r_ZZ^2) sum_a r_a^2 ) dt
           + sqrt(2k) ( sum_s (r_{ZZ.s} - r_ZZ r_s) r_s - r_ZZ sum_a r_a^2 ) dW

    where r_{ZZ.s} is the coefficient of the signed product ZZ.s.  The
    prefactors are pinned by the direct Ito oracle in the test suite.
    """
    r = np.array([table[s] for s in LABELS])
    rzz = r[_IDX_ZZ]
    diff = _COMM_SIGN * r[_COMM_PARTNER] - rzz * r[_COMM_IDX]
    anti_sq = float(np.sum(r[_ANTI_IDX] ** 2))
    drift = 2.0 * k * (float(np.sum(diff**2)) - (1.0 - rzz * rzz) * anti_sq)
    noise = np.sqrt(2.0 * k) * (float(np.sum(diff * r[_COMM_IDX])) - rzz * anti_sq)
    return drift * dt + noise * dW


def dfs_weights(table: dict[str, float]) -> tuple[float, float]:
    """Populations (w+, w-) of the even and odd parity subspaces."""
    rzz = table["ZZ"]
    return (1.0 + rzz) / 2.0, (1.0 - rzz) / 2.0


def encoded_purity(bloch: EncodedBloch) -> float:
    """Single-qubit purity (1 + |b|^2)/2 of an encoded Bloch vector."""
    return (1.0 + bloch.length_sq) / 2.0


def concurrence(rho: np.ndarray) -> float:
    """Wootters concurrence via the spin-flip eigenvalue formula, clipped to [0, 1]."""
    rho_tilde = _YY @ rho.conj() @ _YY
    lam = np.linalg.eigvals(rho @ rho_tilde)
    lam = np.sqrt(np.clip(lam.real, 0.0, None))
    lam.sort()
    c = lam[3] - lam[2] - lam[1] - lam[0]
    if c < 0.0:
        return 0.0
    return min(float(c), 1.0)


def bell_fidelity(rho: np.ndarray) -> float:
    """Largest overlap <B| rho |B> over the four Bell states."""
    fids = np.real(np.einsum("ki,ij,kj->k", _BELL_STACK.conj(), rho, _BELL_STACK))
    return float(fids.max())


def metrics_row(rho: np.ndarray, tau: float, warnings: int = 0) -> MetricsRow:
    """All diagnostics of one state, as sampled along a trajectory."""
    vals = _metrics_batch(rho[None, :, :])
    return MetricsRow(
        tau=tau,
        purity=float(vals["purity"][0]),
        r2sq=float(vals["r2sq"][0]),
        rzz=float(vals["rzz"][0]),
        enc1_purity=float(vals["enc1_purity"][0]),
        enc2_purity=float(vals["enc2_purity"][0]),
        wplus=float(vals["wplus"][0]),
        concurrence=float(vals["concurrence"][0]),
        bell_fidelity=float(vals["bell_fidelity"][0]),
        warnings=warnings,
    )


def _table_batch(rho: np.ndarray) -> np.ndarray:
    """Coefficient vectors Tr[s rho] for a (B,4,4) stack, shape (B,16)."""
    return np.real(np.einsum("pij,bji->bp", MATRIX_STACK, rho))


def _concurrence_batch(rho: np.ndarray) -> np.ndarray:
    rho_tilde = _YY @ np.conj(rho) @ _YY
    lam = np.linalg.eigvals(rho @ rho_tilde)
    lam = np.sqrt(np.clip(lam.real, 0.0, None))
    lam = np.sort(lam, axis=1)
    c = lam[:, 3] - lam[:, 2] - lam[:, 1] - lam[:, 0]
    return np.clip(c, 0.0, 1.0)


def _metrics_batch(rho: np.ndarray) -> dict[str, np.ndarray]:
    """All MetricsRow fields except tau/warnings for a (B,4,4) stack."""
    table = _table_batch(rho)
    enc1 = (table[:, _ENC1_IDX] ** 2).sum(axis=1)
    enc2 = (table[:, _ENC2_IDX] ** 2).sum(axis=1)
    rzz = table[:, _IDX_ZZ]
    fids = np.real(np.einsum("ki,bij,kj->bk", _BELL_STACK.conj(), rho, _BELL_STACK))
    return {
        "purity": np.real(np.einsum("bij,bji->b", rho, rho)),
        "r2sq": (table[:, R2_INDICES] ** 2).sum(axis=1),
        "rzz": rzz,
        "enc1_purity": (1.0 + enc1) / 2.0,
        "enc2_purity": (1.0 + enc2) / 2.0,
        "wplus": (1.0 + rzz) / 2.0,
        "concurrence": _concurrence_batch(rho),
        "bell_fidelity": fids.max(axis=1),
    }
