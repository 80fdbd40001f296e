"""Two-dimensional multiple-quantum spectroscopy pipeline.

The five-step experiment: excite with a unitary U, evolve for t1 under a
labeling Hamiltonian, reconvert with a unitary V, detect a collective spin
component, Fourier transform over t1.  The signal is

    s(t1) = Tr{ Q exp(-i H t1) P exp(+i H t1) },   P = U rho0 U+,
                                                   Q = V+ F_q V,

so every spectral line sits at a transition frequency w_j - w_k of H with
complex amplitude conj(Q_jk) P_jk.  With the uniform labeling Hamiltonian
H = w Fz all lines of coherence order m collapse onto the single frequency
m*w, which is what makes order-resolved detection scale.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import SpinSystem, expm_unitary, magnetic_quantum_numbers, spin_op, total_op
from .mqalgebra import phase_cycle_project
from .sequences import EnsembleState

PEAK_REL_THRESHOLD = 1e-6


class NyquistError(ValueError):
    """The t1 sampling grid cannot represent the labeling frequencies."""


@dataclass
class SpinHamiltonian:
    """Labeling Hamiltonian for the t1 evolution period."""

    kind: str
    matrix: np.ndarray
    omega: float = 0.0

    @classmethod
    def uniform_fz(cls, n: int, omega: float) -> "SpinHamiltonian":
        system = SpinSystem(n_work=n)
        return cls(kind="uniform-fz", matrix=omega * total_op(system, "z"), omega=omega)

    @classmethod
    def weak_coupling(cls, n: int, offsets, couplings=None) -> "SpinHamiltonian":
        """sum_k Omega_k I_kz + sum_{k>l} 2 pi J_kl I_kz I_lz (diagonal).

        offsets in rad/s, couplings {(k, l): J_hz} in Hz.
        """
        system = SpinSystem(n_work=n)
        offsets = np.asarray(offsets, dtype=float)
        if offsets.shape != (n,):
            raise ValueError("need one offset per spin")
        h = sum(offsets[k - 1] * spin_op(system, k, "z") for k in range(1, n + 1))
        for (k, l), j_hz in (couplings or {}).items():
            if k == l:
                raise ValueError("couplings need two distinct spins")
            h = h + 2 * np.pi * j_hz * (spin_op(system, k, "z") @ spin_op(system, l, "z"))
        return cls(kind="weak-coupling", matrix=h)

    @classmethod
    def custom(cls, matrix: np.ndarray) -> "SpinHamiltonian":
        return cls(kind="custom", matrix=np.asarray(matrix, dtype=complex))

    @property
    def max_transition_frequency(self) -> float:
        w = np.linalg.eigvalsh(self.matrix)
        return float(w.max() - w.min())


@dataclass
class PipelineConfig:
    """Excitation/reconversion unitaries plus the t1 grid and detection."""

    u_seq: np.ndarray
    v_seq: np.ndarray
    h_evol: SpinHamiltonian
    dt: float
    n_points: int
    detect_axis: str = "z"
    phi: float = 0.0

    def validate(self):
        if self.dt <= 0:
            raise ValueError("dwell time must be positive")
        if self.n_points < 2 or self.n_points & (self.n_points - 1):
            raise ValueError("point count must be a power of two")
        if self.detect_axis not in ("x", "y", "z"):
            raise ValueError(f"detect axis must be x, y or z, got {self.detect_axis!r}")
        wmax = self.h_evol.max_transition_frequency
        nyquist = np.pi / self.dt
        if wmax >= nyquist:
            raise NyquistError(
                f"max transition frequency {wmax:.6g} rad/s >= Nyquist {nyquist:.6g}"
            )


def run_pipeline(rho0: EnsembleState, cfg: PipelineConfig) -> np.ndarray:
    """Complex signal s(t1) on the grid, by conjugation and trace per point."""
    cfg.validate()
    n = int(round(np.log2(rho0.rho.shape[0])))
    system = SpinSystem(n_work=n)
    f_q = total_op(system, cfg.detect_axis)
    p = cfg.u_seq @ rho0.rho @ cfg.u_seq.conj().T
    q = cfg.v_seq.conj().T @ f_q @ cfg.v_seq
    h = cfg.h_evol.matrix
    out = np.empty(cfg.n_points, dtype=complex)
    for j in range(cfg.n_points):
        u_t = expm_unitary(h, j * cfg.dt)
        out[j] = np.trace(q @ u_t @ p @ u_t.conj().T)
    return out


def eigen_expand(p: np.ndarray, q: np.ndarray, h: SpinHamiltonian):
    """All transition lines (w_jk, conj(Q_jk) P_jk) in the H eigenbasis."""
    w, v = np.linalg.eigh(h.matrix)
    p_e = v.conj().T @ p @ v
    q_e = v.conj().T @ q @ v
    omegas = w[:, None] - w[None, :]
    amps = q_e.conj() * p_e
    return omegas.ravel(), amps.ravel()


def resum_lines(omegas: np.ndarray, amps: np.ndarray, times: np.ndarray) -> np.ndarray:
    """Reassemble the time signal sum_jk amp * exp(-i w t)."""
    return np.exp(-1j * np.outer(times, omegas)) @ amps


def inphase_check(
    u_seq: np.ndarray,
    v_seq: np.ndarray,
    phi: float,
    n: int,
    p_axis: str = "z",
    q_axis: str = "z",
    tol: float = 1e-9,
) -> tuple[bool, float]:
    """Does the reconversion mirror the excitation up to a z rotation?

    Checks Q = exp(-i phi Fz) P exp(+i phi Fz) with P = U F_p U+ and
    Q = V+ F_q V.  When it holds, every order-m line has amplitude
    |P_jk|^2 exp(i m phi), so lines of one order share a single phase.
    """
    system = SpinSystem(n_work=n)
    p = u_seq @ total_op(system, p_axis) @ u_seq.conj().T
    q = v_seq.conj().T @ total_op(system, q_axis) @ v_seq
    rz = expm_unitary(total_op(system, "z"), phi)
    target = rz @ p @ rz.conj().T
    residual = float(np.abs(q.conj().T - target).max())
    return residual <= tol, residual


@dataclass
class Peak:
    frequency: float
    amplitude: complex
    order: int | None = None


@dataclass
class Spectrum:
    """Discrete spectrum with a picked peak table."""

    frequencies: np.ndarray
    amplitudes: np.ndarray
    peaks: list[Peak] = field(default_factory=list)

    def parseval_defect(self, series: np.ndarray) -> float:
        et = float(np.sum(np.abs(series) ** 2)) / len(series)
        ef = float(np.sum(np.abs(self.amplitudes) ** 2))
        return abs(et - ef) / max(et, 1e-300)


def spectrum(
    series: np.ndarray,
    dt: float,
    label_omega: float | None = None,
    rel_threshold: float = PEAK_REL_THRESHOLD,
) -> Spectrum:
    """DFT of the signal with local-maximum peak picking.

    The transform is normalized so a unit tone exp(-i w t) gives a peak of
    amplitude 1 at +w.  No apodization or zero filling.  When label_omega
    is given, peak orders are assigned as round(frequency / label_omega).
    """
    m = len(series)
    if m < 2 or m & (m - 1):
        raise ValueError("series length must be a power of two")
    amps = np.fft.ifft(series)
    freqs = 2 * np.pi * np.fft.fftfreq(m, d=dt)
    mags = np.abs(amps)
    thr = rel_threshold * mags.max()
    peaks = []
    for k in range(m):
        if mags[k] <= thr:
            continue
        if mags[k] >= mags[(k - 1) % m] and mags[k] >= mags[(k + 1) % m]:
            order = int(round(freqs[k] / label_omega)) if label_omega else None
            peaks.append(Peak(frequency=float(freqs[k]), amplitude=complex(amps[k]), order=order))
    peaks.sort(key=lambda p: p.frequency)
    return Spectrum(frequencies=freqs, amplitudes=amps, peaks=peaks)


def order_intensities(p: np.ndarray, q: np.ndarray) -> dict[int, complex]:
    """Line-amplitude sums grouped by coherence order m = M_j - M_k.

    Summing over all orders reproduces the t1 = 0 signal Tr(Q P).
    """
    n = int(round(np.log2(p.shape[0])))
    mm = magnetic_quantum_numbers(n)
    om = np.rint(mm[:, None] - mm[None, :]).astype(int)
    amps = q.conj() * p
    return {m: complex(amps[om == m].sum()) for m in range(-n, n + 1)}


def cross_zq_hamiltonian(f_s: np.ndarray, f_r: np.ndarray, n1: int) -> np.ndarray:
    """Zero-quantum part of the sum of an oracle-dependent and an
    oracle-independent operator function, by phase cycling."""
    return phase_cycle_project(f_s + f_r, n1, 0)


def interaction_frame(
    h_s: np.ndarray, h_r: np.ndarray, t: float, series_order: int
) -> tuple[np.ndarray, np.ndarray]:
    """Toggling-frame Hamiltonian exp(+i t H_r) H_s exp(-i t H_r), exact and
    as the nested-commutator series truncated at the given order."""
    if series_order > 6:
        raise ValueError("series truncation supported up to order 6")
    u = expm_unitary(h_r, -t)  # exp(+i t H_r)
    exact = u @ h_s @ u.conj().T
    term = h_s.astype(complex)
    series = h_s.astype(complex)
    for k in range(1, series_order + 1):
        term = (1j * t / k) * (h_r @ term - term @ h_r)
        series = series + term
    return exact, series
