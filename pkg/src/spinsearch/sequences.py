"""Ensemble search sequences on mixed spin states.

Two layers live here:

* the two-oracle-call search: prepare transverse magnetization, apply one
  selective phase shift, rotate, crush everything except the longitudinal
  part, and read the marked-state sign vector off the per-spin z
  coefficients;
* the Grover-type iteration [exp(-i pi D_last) exp(-i pi D_s^x)]^m, whose
  action stays inside a five-operator algebra.  The expansion coefficients
  obey a two-by-two linear recursion with a trigonometric closed form, and
  they determine how much longitudinal magnetization survives m iterations
  (the conversion coefficient).

The analytic conjugation identities and coefficient formulas are always
checked against brute-force matrix computation in the test suite; the
matrix pipeline is the ground truth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import SpinSystem, expm_unitary, spin_op, total_op
from .mqalgebra import gradient_crush, zq_dephase
from .oracle import (
    UF_CALLS_PER_UO,
    MarkedState,
    aux_pure_state,
    diag_projector,
    oracle_uo,
    sign_vector,
)

DEFAULT_SEARCH_THETA = -np.pi / 2
READOUT_REL_THRESHOLD = 1e-9


class AmbiguousReadoutError(RuntimeError):
    """A per-qubit readout coefficient is too small to assign a sign."""


@dataclass
class EnsembleState:
    """Density operator, or its traceless deviation part, with polarizations."""

    rho: np.ndarray
    epsilons: np.ndarray
    is_deviation: bool = True

    def validate(self, tol: float = 1e-10):
        herm = np.abs(self.rho - self.rho.conj().T).max()
        if herm > 1e-12:
            raise ValueError(f"state is not Hermitian (defect {herm:.3e})")
        tr = complex(np.trace(self.rho))
        if self.is_deviation:
            if abs(tr) > 1e-12:
                raise ValueError(f"deviation part must be traceless, trace = {tr}")
        else:
            if abs(tr - 1) > tol:
                raise ValueError(f"density operator trace {tr} != 1")
            w = np.linalg.eigvalsh(self.rho)
            if w.min() < -tol:
                raise ValueError(f"density operator not PSD (min eig {w.min():.3e})")


def initial_state(system: SpinSystem, epsilons, axis: str = "y") -> EnsembleState:
    """Deviation part sum_k eps_k I_k_axis, tensored with the auxiliary
    |0>|1> projector when the system carries auxiliary qubits."""
    epsilons = np.asarray(epsilons, dtype=float)
    if epsilons.shape != (system.n_work,):
        raise ValueError("need one polarization per work qubit")
    work = SpinSystem(n_work=system.n_work)
    dev = sum(
        epsilons[k - 1] * spin_op(work, k, axis) for k in range(1, system.n_work + 1)
    )
    if system.n_aux == 2:
        dev = np.kron(dev, aux_pure_state(system))
    return EnsembleState(rho=dev, epsilons=epsilons)


def conjugate_selective(rho: np.ndarray, marked: MarkedState, theta: float) -> np.ndarray:
    """C_s(theta) rho C_s(theta)^-1 via the four-term closed form.

    rho - (1-cos t)[rho, D]_+ + i sin t [rho, D] + ((1-cos t)^2 + sin^2 t) D rho D
    """
    d = diag_projector(marked)
    u = 1.0 - math.cos(theta)
    v = math.sin(theta)
    rd = rho @ d
    dr = d @ rho
    return rho - u * (rd + dr) + 1j * v * (rd - dr) + (u * u + v * v) * (d @ rho @ d)


def conjugate_multi_selective(rho: np.ndarray, markeds, thetas) -> np.ndarray:
    """Conjugation by a product of selective phase shifts, in closed form.

    The cross terms D_k rho D_l carry a symmetric cosine/sine weight plus an
    antisymmetric correction; orthogonality of the projectors keeps the
    whole expression exact for distinct marked indices.
    """
    markeds = list(markeds)
    thetas = [float(t) for t in thetas]
    if len(markeds) != len(thetas):
        raise ValueError("need one phase per marked state")
    indices = [m.s for m in markeds]
    if len(set(indices)) != len(indices):
        raise ValueError("marked indices must be distinct")
    projs = [diag_projector(m) for m in markeds]
    us = [1.0 - math.cos(t) for t in thetas]
    vs = [math.sin(t) for t in thetas]

    out = rho.copy().astype(complex)
    d_u = sum(u * p for u, p in zip(us, projs))
    d_v = sum(v * p for v, p in zip(vs, projs))
    out -= rho @ d_u + d_u @ rho
    out += 1j * (rho @ d_v - d_v @ rho)
    m = len(projs)
    for k in range(m):
        pk_rho = projs[k] @ rho
        for l in range(m):
            w = us[k] * us[l] + vs[k] * vs[l]
            out += w * (pk_rho @ projs[l])
    for k in range(m):
        for l in range(k + 1, m):
            w = vs[k] * us[l] - vs[l] * us[k]
            out += 1j * w * (projs[k] @ rho @ projs[l] - projs[l] @ rho @ projs[k])
    return out


@dataclass
class SearchResult:
    """Outcome of the two-call search sequence."""

    recovered_s: int
    per_qubit_signal: np.ndarray
    confidence: float
    oracle_uf_calls: int
    theta: float
    measured_prefactor: float
    reference_prefactor: float

    @property
    def prefactor_ratio(self) -> float:
        return self.measured_prefactor / self.reference_prefactor


def simple_search(
    marked: MarkedState,
    epsilons,
    theta: float = DEFAULT_SEARCH_THETA,
    aux_mode: str = "selective-cs",
) -> SearchResult:
    """Recover the marked index with a single oracle conjugation.

    Pipeline: transverse initial state (y axis) -> oracle phase shift ->
    pi/2 pulse about y on the work qubits -> gradient crush -> zero-quantum
    dephase -> per-qubit z projection.  The surviving state is proportional
    to sum_k eps_k a_k I_kz; the sign pattern recovers s once the known
    sign of sin(theta) is divided out.  The measured proportionality
    constant is reported next to the 2/N reference value, which omits the
    sin(theta) dependence seen in the matrix computation.
    """
    n = marked.n
    epsilons = np.asarray(epsilons, dtype=float)
    if epsilons.shape != (n,):
        raise ValueError("need one polarization per work qubit")
    if np.any(epsilons == 0):
        raise ValueError("polarizations must be nonzero")

    if aux_mode == "selective-cs":
        system = SpinSystem(n_work=n)
        rho = initial_state(system, epsilons, "y").rho
        rho = conjugate_selective(rho, marked, theta)
    elif aux_mode == "explicit-uf":
        system = SpinSystem(n_work=n, n_aux=2)
        rho = initial_state(system, epsilons, "y").rho
        uo = oracle_uo(marked, system, theta)
        rho = uo @ rho @ uo.conj().T
    else:
        raise ValueError(f"unknown aux_mode {aux_mode!r}")

    pulse = expm_unitary(total_op(system, "y"), np.pi / 2)
    rho = pulse @ rho @ pulse.conj().T
    rho = zq_dephase(gradient_crush(rho))

    if system.n_aux == 2:
        rho = _trace_out_aux(rho, n)

    work = SpinSystem(n_work=n)
    dim = 2**n
    coeffs = np.array(
        [
            np.real(np.trace(rho @ spin_op(work, k, "z"))) / (dim / 4)
            for k in range(1, n + 1)
        ]
    )

    mags = np.abs(coeffs)
    # relative threshold, with an absolute floor so an all-roundoff readout
    # (e.g. sin(theta) = 0) is flagged instead of amplified into signs
    threshold = max(
        READOUT_REL_THRESHOLD * mags.max(), 1e-12 * np.abs(epsilons).max()
    )
    if np.any(mags <= threshold):
        raise AmbiguousReadoutError(
            f"readout coefficients {coeffs} below threshold {threshold:.3e}"
        )

    sin_t = math.sin(theta)
    signs = np.sign(coeffs / (epsilons * sin_t)).astype(int)
    recovered = MarkedState.from_signs(signs).s
    prefactors = coeffs / (epsilons * sign_vector(recovered, n))
    return SearchResult(
        recovered_s=recovered,
        per_qubit_signal=coeffs,
        confidence=float(mags.min() / threshold) if threshold > 0 else math.inf,
        oracle_uf_calls=UF_CALLS_PER_UO,
        theta=theta,
        measured_prefactor=float(np.mean(prefactors)),
        reference_prefactor=2.0 / dim,
    )


def _trace_out_aux(rho: np.ndarray, n_work: int) -> np.ndarray:
    dim_w = 2**n_work
    r = rho.reshape(dim_w, 4, dim_w, 4)
    return np.einsum("iaja->ij", r)


# ---------------------------------------------------------------------------
# spin-echo decoupled projector sums


def spin_echo_hamiltonian(marked: MarkedState, k: int) -> np.ndarray:
    """Projector sum independent of the last k qubits, built recursively.

    Each step adds the pi-x-pulse conjugate on one more trailing qubit,
    which replaces that qubit's projector factor by the identity.  The
    result is the tensor product of the leading n-k single-spin projectors
    with identities, and has trace 2^k.
    """
    n = marked.n
    if not 0 <= k <= n - 1:
        raise ValueError(f"decoupled-qubit count {k} outside [0, {n - 1}]")
    system = SpinSystem(n_work=n)
    d = diag_projector(marked)
    for j in range(k):
        qubit = n - j
        pulse = expm_unitary(spin_op(system, qubit, "x"), np.pi)
        d = d + pulse @ d @ pulse.conj().T
    return d


def vos_oracle_operations(k: int) -> int:
    """Oracle operations consumed by one exp(-i theta D(n-k)) application."""
    return 2**k


# ---------------------------------------------------------------------------
# Grover-type iteration and its closed coefficient algebra


def projector_x_basis(marked: MarkedState) -> np.ndarray:
    """D_s^x: the marked projector rotated from z products into x products."""
    system = SpinSystem(n_work=marked.n)
    ry = expm_unitary(total_op(system, "y"), np.pi / 2)
    return ry @ diag_projector(marked) @ ry.conj().T


def grover_propagator(marked: MarkedState, m: int) -> np.ndarray:
    """[exp(-i pi D_last) exp(-i pi D_s^x)]^m by direct matrix products."""
    if m < 0:
        raise ValueError("iteration count must be >= 0")
    n = marked.n
    dim = 2**n
    d_last = diag_projector(MarkedState(s=dim - 1, n=n))
    dsx = projector_x_basis(marked)
    step = (np.eye(dim) - 2 * d_last) @ (np.eye(dim) - 2 * dsx)
    u = np.eye(dim, dtype=complex)
    for _ in range(m):
        u = step @ u
    return u


def sign_flip_frame(marked: MarkedState) -> np.ndarray:
    """Unitary W with D_s = W D_first W^dagger, built from x rotations.

    W = exp(-i pi/2 Fx) * prod_k exp(+i pi/2 a_k I_kx); conjugating the
    all-zeros projector by W lands on the marked projector.
    """
    n = marked.n
    system = SpinSystem(n_work=n)
    w = expm_unitary(total_op(system, "x"), np.pi / 2)
    for k in range(1, n + 1):
        w = w @ expm_unitary(marked.signs[k - 1] * spin_op(system, k, "x"), -np.pi / 2)
    return w


def grover_propagator_factored(marked: MarkedState, m: int) -> np.ndarray:
    """The same propagator with the marked-state dependence pulled into a
    fixed frame change around a marked-independent core iteration."""
    n = marked.n
    system = SpinSystem(n_work=n)
    ry = expm_unitary(total_op(system, "y"), np.pi / 2)
    w = ry @ sign_flip_frame(marked)
    return w @ grover_core(n, m) @ w.conj().T


@dataclass
class GroverCoefficients:
    """Expansion coefficients of the m-fold core iteration.

    G(m) = E + a1 D0 + a2 D0x + a3 D0 D0x + a4 D0x D0, with a1 = a2 and
    a4 = -(2 a1 + a3) on the iteration trajectory.
    """

    m: int
    N: int
    alpha: tuple[complex, complex, complex, complex]
    gamma: tuple[complex, ...] = field(default=())

    def identity_defects(self) -> tuple[float, float]:
        a1, a2, a3, a4 = self.alpha
        return (abs(a1 - a2), abs(a4 + 2 * a1 + a3))


def _iteration_angle(N: int) -> float:
    return math.atan2(2 * math.sqrt(N - 1) / N, -1 + 2 / N)


def grover_coefficients(m: int, N: int) -> GroverCoefficients:
    """Closed-form coefficients, plus the derived gamma set."""
    if m < 0:
        raise ValueError("iteration count must be >= 0")
    th = _iteration_angle(N)
    c, s = math.cos(m * th), math.sin(m * th)
    q = N / (N - 1)
    r = math.sqrt(N - 1)
    a1 = -q * (1 - c)
    a3 = -q * (-1 + c + r * s)
    a4 = q * (1 - c + r * s)
    alpha = (a1, a1, a3, a4)
    return GroverCoefficients(m=m, N=N, alpha=alpha, gamma=gamma_coefficients(alpha, N))


def grover_coefficients_recursion(m: int, N: int) -> GroverCoefficients:
    """The same coefficients by iterating the linear recursion from zero."""
    a1 = a2 = a3 = a4 = 0.0 + 0j
    for _ in range(m):
        a1, a2, a3, a4 = (
            (-1 + 4 / N) * a1 + (2 / N) * a3 - 2,
            -a2 - (2 / N) * a4 - 2,
            -2 * a1 - a3,
            2 * a2 + (-1 + 4 / N) * a4 + 4,
        )
    alpha = (a1, a2, a3, a4)
    return GroverCoefficients(m=m, N=N, alpha=alpha, gamma=gamma_coefficients(alpha, N))


def grover_basis(n: int) -> list[np.ndarray]:
    """The closed five-operator basis {E, D0, D0x, D0 D0x, D0x D0}."""
    d0 = diag_projector(MarkedState(s=0, n=n))
    d0x = projector_x_basis(MarkedState(s=0, n=n))
    return [np.eye(2**n, dtype=complex), d0, d0x, d0 @ d0x, d0x @ d0]


def grover_core(n: int, m: int) -> np.ndarray:
    """The marked-independent core iteration [exp(-i pi D0x) exp(-i pi D0)]^m."""
    dim = 2**n
    d0 = diag_projector(MarkedState(s=0, n=n))
    d0x = projector_x_basis(MarkedState(s=0, n=n))
    step = (np.eye(dim) - 2 * d0x) @ (np.eye(dim) - 2 * d0)
    g = np.eye(dim, dtype=complex)
    for _ in range(m):
        g = step @ g
    return g


def extract_alpha_from_matrix(n: int, m: int) -> tuple[np.ndarray, float]:
    """Least-squares coefficients of the core G(m) over the five-operator basis.

    The basis is not orthogonal under the trace inner product, so the
    normal equations go through the Gram matrix.  Returns the five
    coefficients (leading one should be 1) and the max-entry residual of
    the reconstruction.
    """
    basis = grover_basis(n)
    g = grover_core(n, m)
    gram = np.array([[np.trace(a.conj().T @ b) for b in basis] for a in basis])
    rhs = np.array([np.trace(b.conj().T @ g) for b in basis])
    coeffs = np.linalg.solve(gram, rhs)
    recon = sum(c * b for c, b in zip(coeffs, basis))
    return coeffs, float(np.abs(g - recon).max())


def gamma_coefficients(alpha, N: int) -> tuple[complex, ...]:
    """Derived coefficients for the conjugation of transverse magnetization.

    These are taken at face value from the closed-algebra expansion; the
    conversion-coefficient code always offers a brute-force counterpart so
    any defect in them is observable rather than silent.
    """
    a1, a2, a3, a4 = [complex(a) for a in alpha]
    g1 = (a1.conjugate() * a3 + a1 * a3.conjugate() + a3.conjugate() * a3) / (2 * N)
    g2 = 0.5 * (
        a2
        + a2.conjugate()
        + a2.conjugate() * a2
        + (a2.conjugate() * a4 + a2 * a4.conjugate()) / N
    )
    g3 = 0.5 * (a3 + a1 * a2.conjugate() + a2.conjugate() * a3 + a3 * a4.conjugate() / N)
    g4 = 0.5 * (
        a3.conjugate() + a1.conjugate() * a2 + a2 * a3.conjugate() + a3.conjugate() * a4 / N
    )
    return (g1, g2, g3, g4, a1, a1.conjugate(), a4, a4.conjugate())


def conversion_coefficient(m: int, N: int, epsilons, k: int) -> float:
    """Analytic fraction of spin-k longitudinal magnetization surviving m
    iterations: 1 + (g5 + g6)/N - (2/N) (sum_l eps_l / eps_k) g1."""
    epsilons = np.asarray(epsilons, dtype=float)
    if epsilons[k - 1] == 0:
        raise ValueError("polarization of the read spin must be nonzero")
    g = grover_coefficients(m, N).gamma
    ratio = float(np.sum(epsilons) / epsilons[k - 1])
    return float(np.real(1 + (g[4] + g[5]) / N - (2 / N) * ratio * g[0]))


def measured_conversion_coefficient(
    marked: MarkedState, m: int, epsilons, k: int
) -> float:
    """Brute-force counterpart: propagate sum eps_l I_lz and project I_kz."""
    n = marked.n
    epsilons = np.asarray(epsilons, dtype=float)
    system = SpinSystem(n_work=n)
    rho0 = sum(epsilons[l - 1] * spin_op(system, l, "z") for l in range(1, n + 1))
    u = grover_propagator(marked, m)
    rho = u @ rho0 @ u.conj().T
    ikz = spin_op(system, k, "z")
    coeff = float(np.real(np.trace(rho @ ikz)) / (2**n / 4))
    return coeff / epsilons[k - 1]


@dataclass
class ConversionReport:
    m: int
    N: int
    analytic: float
    measured: float

    @property
    def residual(self) -> float:
        return abs(self.analytic - self.measured)


def conversion_report(
    marked: MarkedState, m: int, epsilons, k: int = 1
) -> ConversionReport:
    n = marked.n
    return ConversionReport(
        m=m,
        N=2**n,
        analytic=conversion_coefficient(m, 2**n, epsilons, k),
        measured=measured_conversion_coefficient(marked, m, epsilons, k),
    )


def gamma1_first_peak(N: int, rel_tol: float = 0.01) -> tuple[int, float]:
    """Location and height of the first near-maximal |gamma_1(m)| peak.

    |gamma_1| has near-degenerate replica peaks at odd multiples of the
    first one, so the global argmax over a wide window is a lattice
    accident; the first m reaching within rel_tol of the global maximum is
    the stable location.  Scans m in [1, 4 sqrt(N)].
    """
    m_max = int(4 * math.sqrt(N)) + 1
    vals = np.array(
        [abs(grover_coefficients(m, N).gamma[0]) for m in range(1, m_max + 1)]
    )
    peak = vals.max()
    first = int(np.argmax(vals >= (1 - rel_tol) * peak)) + 1
    return first, float(peak)
