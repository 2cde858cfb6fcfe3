"""Exact two-qubit Pauli algebra on dense 4x4 density matrices.

Provides the 16-element Pauli product basis, expansion of a density matrix
into real coefficients r_s = Tr[s rho] and the inverse reconstruction,
signed products and commutation tests of basis strings, local axis-angle
rotations, the Hadamard frame flip that swaps the ZZ and XX parity axes,
and the two encoded Bloch vectors built from parity-adapted operator
triples.

Rotation convention, fixed once for the whole package: a rotation of qubit
q by angle theta about unit axis n applies U = exp(-i theta (n.sigma)/2),
which rotates Bloch components right-handedly about n.  For a rotation
about y this reads (x, z) -> (x cos theta + z sin theta,
z cos theta - x sin theta).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

LABELS_1Q = "IXYZ"

PAULI_1Q = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    "Y": np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    "Z": np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
}

#: The 16 two-qubit Pauli labels, row-major in (first, second) with order I,X,Y,Z.
LABELS = tuple(a + b for a in LABELS_1Q for b in LABELS_1Q)

MATRICES = {s: np.kron(PAULI_1Q[s[0]], PAULI_1Q[s[1]]) for s in LABELS}

#: Stack of the 16 basis matrices in LABELS order, shape (16, 4, 4).
MATRIX_STACK = np.stack([MATRICES[s] for s in LABELS])

INDEX = {s: i for i, s in enumerate(LABELS)}

HERMITIAN_ATOL = 1e-12
TRACE_ATOL = 1e-12
EIGENVALUE_FLOOR = -1e-9


def _single_qubit_products():
    """Multiplication table a.b = phase * c for single-qubit Pauli labels."""
    table = {}
    for a, b in product(LABELS_1Q, repeat=2):
        m = PAULI_1Q[a] @ PAULI_1Q[b]
        for c in LABELS_1Q:
            overlap = np.trace(PAULI_1Q[c].conj().T @ m) / 2.0
            if abs(overlap) > 0.5:
                table[a, b] = (complex(overlap), c)
                break
    return table


_PRODUCTS_1Q = _single_qubit_products()


@dataclass(frozen=True)
class SignedPauliProduct:
    """Product of two Pauli strings: a phase in {1, -1, i, -i} and a string."""

    phase: complex
    string: str


def pauli_product(a: str, b: str) -> SignedPauliProduct:
    """Exact product a.b of two two-qubit Pauli strings."""
    p1, c1 = _PRODUCTS_1Q[a[0], b[0]]
    p2, c2 = _PRODUCTS_1Q[a[1], b[1]]
    return SignedPauliProduct(p1 * p2, c1 + c2)


def commutes_with(a: str, b: str) -> bool:
    """True iff the two strings commute (even per-factor anticommutation count)."""
    anti = 0
    for fa, fb in zip(a, b):
        if fa != "I" and fb != "I" and fa != fb:
            anti += 1
    return anti % 2 == 0


def check_density_matrix(rho: np.ndarray) -> None:
    """Validate Hermiticity, unit trace and eigenvalue positivity; raise on failure."""
    if rho.shape != (4, 4):
        raise ValueError(f"density matrix must be 4x4, got {rho.shape}")
    if not np.allclose(rho, rho.conj().T, atol=HERMITIAN_ATOL, rtol=0.0):
        raise ValueError("density matrix is not Hermitian within 1e-12")
    tr = complex(np.trace(rho))
    if abs(tr - 1.0) > TRACE_ATOL:
        raise ValueError(f"density matrix trace {tr} is not 1 within 1e-12")
    w = np.linalg.eigvalsh(rho)
    if w.min() < EIGENVALUE_FLOOR:
        raise ValueError(f"density matrix has eigenvalue {w.min()} below -1e-9")


def pauli_expand(rho: np.ndarray) -> dict[str, float]:
    """Coefficients r_s = Tr[s rho] for all 16 basis strings.

    Rejects non-unit-trace input, which signals an upstream normalization
    bug rather than a state this function should repair.
    """
    tr = complex(np.trace(rho))
    if abs(tr - 1.0) > 1e-9:
        raise ValueError(f"pauli_expand requires unit trace, got {tr}")
    coeffs = np.einsum("pij,ji->p", MATRIX_STACK, rho)
    return {s: float(coeffs[i].real) for i, s in enumerate(LABELS)}


def pauli_reconstruct(table: dict[str, float]) -> np.ndarray:
    """Assemble rho = sum_s r_s s / 4 from a coefficient table."""
    if abs(table["II"] - 1.0) > 1e-9:
        raise ValueError("pauli_reconstruct requires r(II) = 1")
    vec = np.array([table[s] for s in LABELS])
    return np.einsum("p,pij->ij", vec, MATRIX_STACK) / 4.0


def table_vector(table: dict[str, float]) -> np.ndarray:
    """Coefficient table as a length-16 vector in LABELS order."""
    return np.array([table[s] for s in LABELS])


@dataclass(frozen=True)
class Rotation:
    """Axis-angle rotation of one physical qubit in Bloch coordinates."""

    axis: tuple[float, float, float]
    angle: float


@dataclass(frozen=True)
class ControlAction:
    """One local rotation per physical qubit, applied between measurement steps."""

    qubit1: Rotation
    qubit2: Rotation

    @classmethod
    def identity(cls) -> "ControlAction":
        return cls(Rotation((0.0, 1.0, 0.0), 0.0), Rotation((0.0, 1.0, 0.0), 0.0))

    @classmethod
    def rotate_qubit1(cls, axis, angle) -> "ControlAction":
        return cls(Rotation(tuple(axis), float(angle)), Rotation((0.0, 1.0, 0.0), 0.0))

    @classmethod
    def rotate_qubit2(cls, axis, angle) -> "ControlAction":
        return cls(Rotation((0.0, 1.0, 0.0), 0.0), Rotation(tuple(axis), float(angle)))

    def inverse(self) -> "ControlAction":
        return ControlAction(
            Rotation(self.qubit1.axis, -self.qubit1.angle),
            Rotation(self.qubit2.axis, -self.qubit2.angle),
        )

    @property
    def is_identity(self) -> bool:
        return self.qubit1.angle == 0.0 and self.qubit2.angle == 0.0


def single_qubit_unitary(rotation: Rotation) -> np.ndarray:
    """U = exp(-i angle (axis.sigma)/2) as a 2x2 matrix."""
    if rotation.angle == 0.0:
        return np.eye(2, dtype=complex)
    n = np.asarray(rotation.axis, dtype=float)
    norm = np.linalg.norm(n)
    if norm == 0.0:
        raise ValueError("rotation axis must be nonzero for a nonzero angle")
    n = n / norm
    sigma_n = n[0] * PAULI_1Q["X"] + n[1] * PAULI_1Q["Y"] + n[2] * PAULI_1Q["Z"]
    half = rotation.angle / 2.0
    return np.cos(half) * np.eye(2, dtype=complex) - 1j * np.sin(half) * sigma_n


def apply_local_rotation(rho: np.ndarray, action: ControlAction) -> np.ndarray:
    """Conjugate rho by U1 (x) U2 built from the per-qubit axis-angle pairs."""
    u = np.kron(single_qubit_unitary(action.qubit1), single_qubit_unitary(action.qubit2))
    return u @ rho @ u.conj().T


_HADAMARD_1Q = (PAULI_1Q["X"] + PAULI_1Q["Z"]) / np.sqrt(2.0)
_HADAMARD_2Q = np.kron(_HADAMARD_1Q, _HADAMARD_1Q)


def hadamard_frame_toggle(rho: np.ndarray) -> np.ndarray:
    """Conjugate by H (x) H, swapping the ZZ and XX parity frames.

    On coefficients this swaps X and Z labels on each factor and flips the
    sign once per Y factor; applying it twice is the identity.
    """
    return _HADAMARD_2Q @ rho @ _HADAMARD_2Q


@dataclass(frozen=True)
class EncodedBloch:
    """Bloch vector of one of the two encoded (parity-adapted) qubits."""

    which: str
    x: float
    y: float
    z: float

    @property
    def length_sq(self) -> float:
        return self.x * self.x + self.y * self.y + self.z * self.z


#: Operator triples (x, y, z) defining the two encoded Bloch spheres.
ENCODED_AXES = {
    "one": ("XZ", "YI", "ZZ"),
    "two": ("XX", "XY", "IZ"),
}


def encoded_bloch(table: dict[str, float], which: str) -> EncodedBloch:
    """Encoded Bloch vector read off the coefficient table.

    Encoded qubit "one" tracks which parity subspace holds the state; its
    axes are (XZ, YI, ZZ).  Encoded qubit "two" tracks the information
    protected inside the subspace; its axes (XX, XY, IZ) all commute with
    the ZZ parity operator.
    """
    try:
        ax, ay, az = ENCODED_AXES[which]
    except KeyError:
        raise ValueError(f"encoded qubit must be 'one' or 'two', got {which!r}")
    return EncodedBloch(which, table[ax], table[ay], table[az])
