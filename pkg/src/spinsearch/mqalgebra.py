"""Coherence-order grading and multiple-quantum operator machinery.

A matrix element <j|A|k> has coherence order m = M_j - M_k, where M is the
collective z quantum number of the basis state.  Grading an operator by m
is the bookkeeping behind gradient crushing (keep m = 0), zero-quantum
dephasing (keep the diagonal), phase-cycling order selection, and the
construction of multiple-quantum generators from diagonal projectors.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    SpinSystem,
    expm_unitary,
    kron_all,
    magnetic_quantum_numbers,
    spin_op,
    total_op,
)
from .oracle import MarkedState, diag_projector


class AliasingError(ValueError):
    """Phase-cycle step count too small to separate the coherence orders."""


def _n_from_dim(dim: int) -> int:
    n = int(round(np.log2(dim)))
    if 2**n != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    return n


def order_matrix(n: int) -> np.ndarray:
    """order_matrix[j, k] = M_j - M_k, the coherence order of element (j, k)."""
    m = magnetic_quantum_numbers(n)
    return m[:, None] - m[None, :]


@dataclass
class CoherenceDecomposition:
    """An operator split into its coherence-order components."""

    n: int
    components: dict[int, np.ndarray] = field(default_factory=dict)

    @property
    def reconstructed(self) -> np.ndarray:
        return sum(self.components.values())

    def support(self, tol: float = 1e-12) -> list[int]:
        return sorted(m for m, a in self.components.items() if np.abs(a).max() > tol)


def decompose_orders(a: np.ndarray, system: SpinSystem) -> CoherenceDecomposition:
    """Split a work-qubit operator into components of definite order."""
    n = system.n_work
    if a.shape != (2**n, 2**n):
        raise ValueError("operator dimension does not match the work qubits")
    om = order_matrix(n)
    comps = {}
    for m in range(-n, n + 1):
        mask = np.abs(om - m) < 0.5
        comps[m] = np.where(mask, a, 0.0)
    return CoherenceDecomposition(n=n, components=comps)


def order_component(a: np.ndarray, m: int) -> np.ndarray:
    """Order-m component of an operator; qubit count inferred from the shape."""
    n = _n_from_dim(a.shape[0])
    mask = np.abs(order_matrix(n) - m) < 0.5
    return np.where(mask, a, 0.0)


def gradient_crush(rho: np.ndarray) -> np.ndarray:
    """Idealized z-gradient dephasing: keep only the order-0 part."""
    return order_component(rho, 0)


def zq_dephase(rho: np.ndarray) -> np.ndarray:
    """Idealized zero-quantum dephasing: keep only the computational diagonal."""
    return np.diag(np.diag(rho))


@dataclass
class LomsoBasis:
    """Diagonal product-operator basis {Z_l} with the projector transform.

    Z_0 = E and, for a nonempty qubit subset T (encoded in the bits of l,
    qubit 1 = most significant), Z_l = 2^(|T|-1) * prod_{k in T} I_kz.
    The matrix `a` satisfies D_k = sum_l a[k, l] Z_l for every basis
    projector D_k, and `a_inv` is its inverse.
    """

    n: int
    z_ops: list[np.ndarray]
    a: np.ndarray
    a_inv: np.ndarray

    def x_product(self, l: int) -> np.ndarray:
        """Rotate Z_l into the x basis: 2^(|T|-1) * prod_{k in T} I_kx."""
        system = SpinSystem(n_work=self.n)
        ry = expm_unitary(total_op(system, "y"), np.pi / 2)
        return ry @ self.z_ops[l] @ ry.conj().T


def lomso_transform(n: int) -> LomsoBasis:
    """Build the diagonal product-operator basis and projector transform."""
    if n > 8:
        raise ValueError("basis construction is limited to n <= 8")
    dim = 2**n
    # diag(Z_l)[x] = (1/2) * (-1)^popcount(l & x) for l >= 1, and 1 for l = 0
    z_diag = np.empty((dim, dim))
    for l in range(dim):
        for x in range(dim):
            z_diag[l, x] = 0.5 * (-1) ** bin(l & x).count("1") if l else 1.0
    a = np.linalg.inv(z_diag)
    z_ops = [np.diag(z_diag[l].astype(complex)) for l in range(dim)]
    return LomsoBasis(n=n, z_ops=z_ops, a=a, a_inv=z_diag.copy())


def lomso_expand_projector(basis: LomsoBasis, k: int) -> np.ndarray:
    """Reassemble D_k from its coordinates in the {Z_l} basis."""
    out = np.zeros((2**basis.n, 2**basis.n), dtype=complex)
    for l, z in enumerate(basis.z_ops):
        out += basis.a[k, l] * z
    return out


def phase_cycle_project(f_op: np.ndarray, n1: int, target_order: int) -> np.ndarray:
    """Select one coherence order by discrete Fourier phase cycling.

    Averages exp(-i phi Fz) f exp(+i phi Fz) over phi = 2 pi k / n1 with
    weights exp(+i phi * target_order).  Orders congruent to the target
    modulo n1 alias onto it, hence the n1 >= 2n + 1 requirement.
    """
    n = _n_from_dim(f_op.shape[0])
    if n1 < 2 * n + 1:
        raise AliasingError(
            f"n1 = {n1} cannot separate orders in [-{n}, {n}]; need n1 >= {2 * n + 1}"
        )
    fz = total_op(SpinSystem(n_work=n), "z")
    out = np.zeros_like(f_op, dtype=complex)
    for k in range(n1):
        phi = 2 * np.pi * k / n1
        r = expm_unitary(fz, phi)
        out += np.exp(1j * phi * target_order) * (r @ f_op @ r.conj().T)
    return out / n1


def x_product_op(n: int, qubits) -> np.ndarray:
    """2^(l-1) * prod I_kx over the given qubit subset (l = subset size)."""
    qubits = sorted(set(qubits))
    if not qubits:
        raise ValueError("need at least one qubit index")
    system = SpinSystem(n_work=n)
    out = np.eye(2**n, dtype=complex) * 2.0 ** (len(qubits) - 1)
    for k in qubits:
        out = out @ spin_op(system, k, "x")
    return out


def mq_generator(n: int, l_indices, variant: str = "comm") -> np.ndarray:
    """Hermitian multiple-quantum generator with support only at orders +-l.

    comm:     i [X_l, D_first - D_last]
    anticomm:   [X_l, D_first + D_last]_+

    where X_l is the x product operator over the chosen qubits and
    D_first/D_last project onto the all-zeros / all-ones states.
    """
    x_l = x_product_op(n, l_indices)
    d_first = diag_projector(MarkedState(s=0, n=n))
    d_last = diag_projector(MarkedState(s=2**n - 1, n=n))
    if variant == "comm":
        d = d_first - d_last
        return 1j * (x_l @ d - d @ x_l)
    if variant == "anticomm":
        d = d_first + d_last
        return x_l @ d + d @ x_l
    raise ValueError(f"unknown variant {variant!r}")


def mq_generator_expanded(n: int, l_indices) -> np.ndarray:
    """Four-term raising/lowering product expansion of the comm generator.

    Independent construction used to cross-check mq_generator: each term is
    a tensor product of pure raising or lowering factors on the chosen
    qubits and (E/2 +- I_z) projectors on the rest.
    """
    chosen = sorted(set(l_indices))
    rest = [k for k in range(1, n + 1) if k not in chosen]
    e2 = np.eye(2, dtype=complex)
    ip = np.array([[0, 1], [0, 0]], dtype=complex)   # I_x + i I_y
    im = np.array([[0, 0], [1, 0]], dtype=complex)   # I_x - i I_y
    up = 0.5 * e2 + np.diag([0.5, -0.5]).astype(complex)
    dn = 0.5 * e2 - np.diag([0.5, -0.5]).astype(complex)

    def term(ladder, proj):
        factors = []
        for k in range(1, n + 1):
            factors.append(ladder if k in chosen else proj)
        return kron_all(factors)

    return 0.5j * (term(im, up) - term(ip, dn) - term(ip, up) + term(im, dn))
