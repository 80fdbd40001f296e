"""Search-problem oracles on work + auxiliary qubits.

The marked basis index s is carried equivalently by a sign vector
{a_k = +-1}: a_k = +1 when bit k of s (qubit 1 = most significant) is 0.
The diagonal projector onto |s><s| factorizes as the product of single-spin
projectors (E/2 + a_k I_kz), which is what makes product-operator analysis
of the oracle possible.

Two oracle realizations are provided and are interchangeable on the
auxiliary |0>|1> sector:

* the explicit bit-flip oracle U_f on two auxiliary qubits, with the
  conditional aux phase V_S, composed as U_o = U_f V_S U_f (U_f is an
  involution, so this equals U_f^-1 V_S U_f), and
* the aux-free selective phase shift C_s(theta) = exp(-i theta D_s)
  acting on the work qubits alone.

Oracle cost accounting: one U_o (or its C_s stand-in) consumes two
applications of U_f.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import SpinSystem, kron_all, spin_op

UF_CALLS_PER_UO = 2


class ConfigurationError(ValueError):
    """System layout incompatible with the requested oracle construction."""


@dataclass(frozen=True)
class MarkedState:
    """The unique search solution s on n work qubits."""

    s: int
    n: int

    def __post_init__(self):
        if not 0 <= self.s < 2**self.n:
            raise ValueError(f"marked index {self.s} outside [0, {2**self.n})")

    @property
    def signs(self) -> tuple[int, ...]:
        return tuple(sign_vector(self.s, self.n))

    @classmethod
    def from_signs(cls, signs) -> "MarkedState":
        signs = list(signs)
        n = len(signs)
        if any(a not in (1, -1) for a in signs):
            raise ValueError("signs must be +-1")
        s = sum((1 << (n - k)) for k in range(1, n + 1) if signs[k - 1] == -1)
        return cls(s=s, n=n)


@dataclass(frozen=True)
class OracleSpec:
    """A marked state with the oracle phase and realization choice."""

    marked: MarkedState
    theta: float
    aux_mode: str = "selective-cs"  # or "explicit-uf"

    def __post_init__(self):
        if self.aux_mode not in ("selective-cs", "explicit-uf"):
            raise ValueError(f"unknown aux_mode {self.aux_mode!r}")

    def build(self, system: SpinSystem) -> np.ndarray:
        """The oracle unitary for this realization on the given system."""
        if self.aux_mode == "selective-cs":
            if system.n_aux != 0:
                raise ConfigurationError(
                    "the selective-phase realization acts on work qubits only"
                )
            return selective_phase(self.marked, self.theta)
        return oracle_uo(self.marked, system, self.theta)


def sign_vector(s: int, n: int) -> np.ndarray:
    """Sign vector {a_k} of basis index s; bit 0 maps to a = +1."""
    if not 0 <= s < 2**n:
        raise ValueError(f"index {s} outside [0, {2**n})")
    return np.array([1 if ((s >> (n - k)) & 1) == 0 else -1 for k in range(1, n + 1)])


def state_from_signs(signs) -> int:
    return MarkedState.from_signs(signs).s


def diag_projector(marked: MarkedState) -> np.ndarray:
    """Rank-1 projector |s><s| built from the single-spin product form."""
    half = 0.5 * np.eye(2, dtype=complex)
    iz = np.array([[0.5, 0], [0, -0.5]], dtype=complex)
    return kron_all(half + a * iz for a in marked.signs)


def basis_projector(index: int, dim: int) -> np.ndarray:
    """diag(0,...,1,...,0) with the 1 at the given basis index."""
    d = np.zeros(dim, dtype=complex)
    d[index] = 1.0
    return np.diag(d)


def selective_phase(marked: MarkedState, theta: float) -> np.ndarray:
    """C_s(theta) = E + (exp(-i theta) - 1) |s><s|, diagonal and unitary."""
    d = np.ones(2**marked.n, dtype=complex)
    d[marked.s] = np.exp(-1j * theta)
    return np.diag(d)


def _require_aux(system: SpinSystem):
    if system.n_aux != 2:
        raise ConfigurationError("this oracle needs a system with two auxiliary qubits")


def oracle_uf(marked: MarkedState, system: SpinSystem) -> np.ndarray:
    """Bit-flip oracle |x>|a>|b> -> |x>|a xor f(x)>|b>, f(x) = [x == s]."""
    _require_aux(system)
    if system.n_work != marked.n:
        raise ConfigurationError("marked state and system disagree on work-qubit count")
    dim = system.dim
    u = np.zeros((dim, dim), dtype=complex)
    for idx in range(dim):
        x, ab = divmod(idx, 4)
        if x == marked.s:
            ab ^= 0b10  # flip aux qubit a
        u[x * 4 + ab, idx] = 1.0
    return u


def conditional_aux_phase(system: SpinSystem, theta: float) -> np.ndarray:
    """V_S(theta): phase exp(-i theta) on auxiliary states with a = 1, b = 1."""
    _require_aux(system)
    d = np.ones(system.dim, dtype=complex)
    for x in range(system.dim_work):
        d[x * 4 + 0b11] = np.exp(-1j * theta)
    return np.diag(d)


def oracle_uo(marked: MarkedState, system: SpinSystem, theta: float) -> np.ndarray:
    """Phase oracle U_o(theta) = U_f V_S(theta) U_f on the full system."""
    uf = oracle_uf(marked, system)
    return uf @ conditional_aux_phase(system, theta) @ uf


def restrict_to_aux01(u: np.ndarray, system: SpinSystem) -> np.ndarray:
    """Block of a full-system operator on the auxiliary |0>|1> sector."""
    _require_aux(system)
    idx = np.arange(system.dim_work) * 4 + 0b01
    return u[np.ix_(idx, idx)]


def aux_pure_state(system: SpinSystem) -> np.ndarray:
    """Projector |0><0| x |1><1| on the two auxiliary spins (4x4)."""
    _require_aux(system)
    aux = SpinSystem(n_work=2)
    s1z = spin_op(aux, 1, "z")
    s2z = spin_op(aux, 2, "z")
    return 0.25 * np.eye(4) + 0.5 * (s1z - s2z) - s1z @ s2z
