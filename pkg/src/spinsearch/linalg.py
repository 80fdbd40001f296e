"""Dense complex linear algebra for small spin-1/2 systems.

Everything downstream works on plain complex ndarrays of dimension 2**d.
Conventions, fixed once here:

* hbar = 1 and Iz = diag(1, -1)/2, so |0> is the M = +1/2 state.
* Qubit 1 is the most significant tensor factor; auxiliary qubits (if any)
  occupy the least significant factors.  The computational-basis index of a
  product state is then the integer read off the qubit bit string.
* Matrix exponentials of Hermitian generators go through the
  eigendecomposition, which keeps the result unitary to roundoff.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import schur

HERMITIAN_TOL = 1e-10
UNITARY_TOL = 1e-10
BRANCH_TOL = 1e-8

PAULI_HALF = {
    "x": 0.5 * np.array([[0, 1], [1, 0]], dtype=complex),
    "y": 0.5 * np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": 0.5 * np.array([[1, 0], [0, -1]], dtype=complex),
    "+": np.array([[0, 1], [0, 0]], dtype=complex),
    "-": np.array([[0, 0], [1, 0]], dtype=complex),
}


class BranchCutError(ValueError):
    """A matrix logarithm hit the principal-branch cut (eigenphase at pi)."""


@dataclass(frozen=True)
class SpinSystem:
    """Qubit bookkeeping: n_work work spins, optionally two auxiliary spins.

    Work qubits are numbered 1..n_work (most significant first); auxiliary
    qubits, when present, are n_work+1 and n_work+2 in the least significant
    positions.
    """

    n_work: int
    n_aux: int = 0

    def __post_init__(self):
        if self.n_work < 1:
            raise ValueError(f"need at least one work qubit, got {self.n_work}")
        if self.n_aux not in (0, 2):
            raise ValueError(f"n_aux must be 0 or 2, got {self.n_aux}")

    @property
    def n_total(self) -> int:
        return self.n_work + self.n_aux

    @property
    def dim(self) -> int:
        return 2**self.n_total

    @property
    def dim_work(self) -> int:
        return 2**self.n_work


def kron_all(factors) -> np.ndarray:
    out = np.eye(1, dtype=complex)
    for f in factors:
        out = np.kron(out, f)
    return out


def spin_op(system: SpinSystem, k: int, axis: str) -> np.ndarray:
    """Single-spin operator for qubit k (1-based), embedded in the full space."""
    if axis not in PAULI_HALF:
        raise ValueError(f"unknown axis {axis!r}")
    if not 1 <= k <= system.n_total:
        raise IndexError(f"qubit index {k} outside 1..{system.n_total}")
    factors = [np.eye(2, dtype=complex)] * system.n_total
    factors[k - 1] = PAULI_HALF[axis]
    return kron_all(factors)


def total_op(system: SpinSystem, axis: str) -> np.ndarray:
    """Collective operator sum_k I_k_axis over the *work* qubits."""
    if axis not in ("x", "y", "z"):
        raise ValueError(f"total_op axis must be x, y or z, got {axis!r}")
    out = np.zeros((system.dim, system.dim), dtype=complex)
    for k in range(1, system.n_work + 1):
        out += spin_op(system, k, axis)
    return out


def magnetic_quantum_numbers(n: int) -> np.ndarray:
    """Diagonal of the collective z operator for n spins, indexed by basis state.

    Basis index x has M = (n - 2 popcount(x)) / 2.
    """
    return np.array([(n - 2 * bin(x).count("1")) / 2 for x in range(2**n)])


def dagger(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def comm(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def acomm(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b + b @ a


def hermiticity_defect(a: np.ndarray) -> float:
    return float(np.abs(a - a.conj().T).max())


def unitarity_defect(u: np.ndarray) -> float:
    return float(np.abs(u.conj().T @ u - np.eye(u.shape[0])).max())


def is_hermitian(a: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    return hermiticity_defect(a) <= tol


def is_unitary(u: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    return unitarity_defect(u) <= tol


def expm_unitary(h: np.ndarray, t: float = 1.0) -> np.ndarray:
    """exp(-i*h*t) for Hermitian h, via eigendecomposition.

    Diagonal generators short-circuit to an elementwise exponential.
    """
    defect = hermiticity_defect(h)
    if defect > HERMITIAN_TOL:
        raise ValueError(f"generator is not Hermitian (defect {defect:.3e})")
    if np.abs(h - np.diag(np.diag(h))).max() == 0.0:
        return np.diag(np.exp(-1j * np.diag(h).real * t))
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def matrix_log_skew(u: np.ndarray, branch_tol: float = BRANCH_TOL) -> np.ndarray:
    """Hermitian h with u = exp(i*h) and eigenphases on the principal branch.

    Uses a complex Schur form, which stays numerically orthonormal even for
    (near-)degenerate eigenvalues where a plain eigendecomposition of a
    unitary may not.  Eigenphases within branch_tol of +-pi are ambiguous
    and raise BranchCutError; pass branch_tol=0 to override.
    """
    defect = unitarity_defect(u)
    if defect > UNITARY_TOL:
        raise ValueError(f"matrix is not unitary (defect {defect:.3e})")
    t, z = schur(u, output="complex")
    phases = np.angle(np.diag(t))
    if branch_tol > 0 and np.any(np.pi - np.abs(phases) < branch_tol):
        raise BranchCutError(
            "eigenphase within "
            f"{branch_tol:.1e} of the +-pi branch cut; logarithm is ambiguous"
        )
    return (z * phases) @ z.conj().T
