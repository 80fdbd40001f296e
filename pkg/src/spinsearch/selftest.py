"""Built-in invariant suite, runnable from the command line.

Each group computes a max residual over a deterministic set of cases at
n <= 4 and compares it against a fixed tolerance.  The SPINSEARCH_TOL_SCALE
environment variable multiplies every tolerance (useful for probing how
much numerical headroom the build has).
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from . import composition, mqalgebra, oracle, sequences, spectroscopy
from .linalg import SpinSystem, comm, expm_unitary, magnetic_quantum_numbers, spin_op, total_op, unitarity_defect
from .oracle import MarkedState


@dataclass
class InvariantResult:
    name: str
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.residual <= self.tolerance


def _rand_herm(rng, dim, scale=1.0):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return scale * (a + a.conj().T) / 2


def _check_spin_commutators() -> float:
    worst = 0.0
    for n in range(2, 5):
        system = SpinSystem(n_work=n)
        for k in range(1, n + 1):
            for l in range(1, n + 1):
                if k == l:
                    continue
                for ax1 in "xyz":
                    for ax2 in "xyz":
                        c = comm(spin_op(system, k, ax1), spin_op(system, l, ax2))
                        worst = max(worst, float(np.abs(c).max()))
    # su(2) algebra on one spin: [Ix, Iy] = i Iz and cyclic
    system = SpinSystem(n_work=2)
    for k in (1, 2):
        for a, b, c in (("x", "y", "z"), ("y", "z", "x"), ("z", "x", "y")):
            d = comm(spin_op(system, k, a), spin_op(system, k, b)) - 1j * spin_op(system, k, c)
            worst = max(worst, float(np.abs(d).max()))
    return worst


def _check_expm_unitary() -> float:
    rng = np.random.default_rng(11)
    worst = 0.0
    for dim in (2, 4, 8, 16):
        h = _rand_herm(rng, dim)
        worst = max(worst, unitarity_defect(expm_unitary(h, 0.37)))
        u = expm_unitary(h, 0.2) @ expm_unitary(h, 0.55)
        worst = max(worst, float(np.abs(u - expm_unitary(h, 0.75)).max()))
    return worst


def _check_fz_eigenvalues() -> float:
    worst = 0.0
    for n in range(1, 5):
        fz = total_op(SpinSystem(n_work=n), "z")
        worst = max(
            worst, float(np.abs(np.diag(fz).real - magnetic_quantum_numbers(n)).max())
        )
        worst = max(worst, float(np.abs(fz - np.diag(np.diag(fz))).max()))
    return worst


def _check_oracle_equivalence() -> float:
    worst = 0.0
    for n in (1, 2, 3):
        system = SpinSystem(n_work=n, n_aux=2)
        for s in range(2**n):
            marked = MarkedState(s=s, n=n)
            for theta in (0.0, np.pi / 4, np.pi / 2, np.pi):
                uo = oracle.oracle_uo(marked, system, theta)
                block = oracle.restrict_to_aux01(uo, system)
                cs = oracle.selective_phase(marked, theta)
                worst = max(worst, float(np.abs(block - cs).max()))
    return worst


def _check_projector_frame_relation() -> float:
    worst = 0.0
    for n in (1, 2, 3):
        for s in range(2**n):
            marked = MarkedState(s=s, n=n)
            w = sequences.sign_flip_frame(marked)
            d0 = oracle.diag_projector(MarkedState(s=0, n=n))
            ds = oracle.diag_projector(marked)
            worst = max(worst, float(np.abs(ds - w @ d0 @ w.conj().T).max()))
    return worst


def _check_conjugation_identities() -> float:
    rng = np.random.default_rng(23)
    worst = 0.0
    thetas = np.linspace(0, 2 * np.pi, 8, endpoint=False)
    for n in (2, 3, 4):
        dim = 2**n
        for _ in range(6):
            rho = _rand_herm(rng, dim)
            s = int(rng.integers(dim))
            marked = MarkedState(s=s, n=n)
            for theta in thetas:
                analytic = sequences.conjugate_selective(rho, marked, theta)
                c = oracle.selective_phase(marked, theta)
                worst = max(worst, float(np.abs(analytic - c @ rho @ c.conj().T).max()))
            picks = rng.choice(dim, size=min(3, dim), replace=False)
            ths = rng.uniform(0, 2 * np.pi, size=len(picks))
            markeds = [MarkedState(s=int(p), n=n) for p in picks]
            analytic = sequences.conjugate_multi_selective(rho, markeds, ths)
            u = np.eye(dim, dtype=complex)
            for mk, th in zip(markeds, ths):
                u = u @ oracle.selective_phase(mk, th)
            worst = max(worst, float(np.abs(analytic - u @ rho @ u.conj().T).max()))
    return worst


def _check_search_recovery() -> float:
    worst = 0.0
    for n in (1, 2, 3, 4):
        eps = np.ones(n)
        for s in range(2**n):
            res = sequences.simple_search(MarkedState(s=s, n=n), eps)
            worst = max(worst, float(abs(res.recovered_s - s)))
    return worst


def _check_lomso_reconstruction() -> float:
    worst = 0.0
    for n in (1, 2, 3):
        basis = mqalgebra.lomso_transform(n)
        worst = max(
            worst,
            float(np.abs(basis.a @ basis.a_inv - np.eye(2**n)).max()),
        )
        for k in range(2**n):
            d = oracle.diag_projector(MarkedState(s=k, n=n))
            worst = max(
                worst, float(np.abs(d - mqalgebra.lomso_expand_projector(basis, k)).max())
            )
    return worst


def _check_phase_cycling() -> float:
    rng = np.random.default_rng(37)
    worst = 0.0
    for n in (2, 3, 4):
        system = SpinSystem(n_work=n)
        for _ in range(8):
            f = _rand_herm(rng, 2**n)
            dec = mqalgebra.decompose_orders(f, system)
            for target in range(-n, n + 1):
                proj = mqalgebra.phase_cycle_project(f, 2 * n + 1, target)
                worst = max(worst, float(np.abs(proj - dec.components[target]).max()))
    return worst


def _check_mq_generator_orders() -> float:
    worst = 0.0
    for n, subsets in ((2, [(1, 2)]), (3, [(1, 2), (1, 3), (1, 2, 3)])):
        system = SpinSystem(n_work=n)
        for qubits in subsets:
            l = len(qubits)
            g = mqalgebra.mq_generator(n, qubits, "comm")
            worst = max(worst, float(np.abs(g - g.conj().T).max()))
            dec = mqalgebra.decompose_orders(g, system)
            for m, a in dec.components.items():
                if abs(m) != l:
                    worst = max(worst, float(np.abs(a).max()))
    return worst


def _check_zero_quantum_closure() -> float:
    rng = np.random.default_rng(53)
    worst = 0.0
    for n in (2, 3):
        system = SpinSystem(n_work=n)
        for _ in range(6):
            h = mqalgebra.order_component(_rand_herm(rng, 2**n), 0)
            zq_op = mqalgebra.order_component(_rand_herm(rng, 2**n), 0)
            u = expm_unitary(zq_op, 0.9)
            moved = u @ h @ u.conj().T
            dec = mqalgebra.decompose_orders(moved, system)
            for m, a in dec.components.items():
                if m != 0:
                    worst = max(worst, float(np.abs(a).max()))
    return worst


def _check_even_order_closure() -> float:
    rng = np.random.default_rng(59)
    worst = 0.0
    for n in (2, 3):
        system = SpinSystem(n_work=n)
        om = mqalgebra.order_matrix(n)
        even_mask = np.abs(np.rint(om)) % 2 == 0
        for _ in range(6):
            h = np.where(even_mask, _rand_herm(rng, 2**n), 0)
            gen = np.where(even_mask, _rand_herm(rng, 2**n), 0)
            u = expm_unitary(gen, 0.8)
            moved = u @ h @ u.conj().T
            dec = mqalgebra.decompose_orders(moved, system)
            for m, a in dec.components.items():
                if m % 2 != 0:
                    worst = max(worst, float(np.abs(a).max()))
    return worst


def _check_grover_three_way() -> float:
    worst = 0.0
    for n in (2, 3, 4):
        N = 2**n
        for m in range(0, 26):
            closed = np.array(sequences.grover_coefficients(m, N).alpha)
            rec = np.array(sequences.grover_coefficients_recursion(m, N).alpha)
            worst = max(worst, float(np.abs(closed - rec).max()))
            coeffs, recon_res = sequences.extract_alpha_from_matrix(n, m)
            worst = max(worst, float(abs(coeffs[0] - 1.0)))
            worst = max(worst, float(np.abs(coeffs[1:] - closed).max()))
            worst = max(worst, recon_res)
    return worst


def _check_grover_reexpression() -> float:
    worst = 0.0
    for n in (2, 3):
        for s in (0, 2**n - 1, 1):
            marked = MarkedState(s=s, n=n)
            for m in (1, 3, 6):
                direct = sequences.grover_propagator(marked, m)
                factored = sequences.grover_propagator_factored(marked, m)
                worst = max(worst, float(np.abs(direct - factored).max()))
    return worst


def _check_pipeline_vs_lines() -> float:
    rng = np.random.default_rng(71)
    worst = 0.0
    for n in (2, 3):
        system = SpinSystem(n_work=n)
        u = expm_unitary(_rand_herm(rng, 2**n), 1.0)
        v = expm_unitary(_rand_herm(rng, 2**n), 1.0)
        h = spectroscopy.SpinHamiltonian.uniform_fz(n, 2 * np.pi * 10)
        cfg = spectroscopy.PipelineConfig(
            u_seq=u, v_seq=v, h_evol=h, dt=1e-3, n_points=64
        )
        rho0 = sequences.initial_state(system, np.ones(n), "z")
        series = spectroscopy.run_pipeline(rho0, cfg)
        p = u @ rho0.rho @ u.conj().T
        q = v.conj().T @ total_op(system, "z") @ v
        om, amps = spectroscopy.eigen_expand(p, q, h)
        times = np.arange(64) * 1e-3
        resum = spectroscopy.resum_lines(om, amps, times)
        worst = max(worst, float(np.abs(series - resum).max()))
    return worst


def _check_composition_unitarity() -> float:
    rng = np.random.default_rng(83)
    worst = 0.0
    a = _rand_herm(rng, 4)
    b = _rand_herm(rng, 4)
    worst = max(worst, unitarity_defect(composition.trotter_product([a, b], 0.7, 8).propagator))
    worst = max(worst, unitarity_defect(composition.commutator_product(a, b, 16).propagator))
    worst = max(worst, unitarity_defect(composition.symmetric_sandwich(a, b, 0.3).propagator))
    worst = max(worst, unitarity_defect(composition.cross_interaction(a, b, 0.2).propagator))
    p1 = 1 / (2 - 2 ** (1 / 3))
    worst = max(
        worst,
        unitarity_defect(
            composition.fractal_compose(a, b, 0.3, [p1, 1 - 2 * p1, p1]).propagator
        ),
    )
    return worst


def _check_sandwich_time_symmetry() -> float:
    rng = np.random.default_rng(97)
    a = _rand_herm(rng, 4)
    b = _rand_herm(rng, 4)
    worst = 0.0
    for x in (0.4, 0.15):
        s_pos = composition.symmetric_sandwich(a, b, x).propagator
        s_neg = composition.symmetric_sandwich(a, b, -x).propagator
        worst = max(worst, float(np.abs(s_pos @ s_neg - np.eye(4)).max()))
    return worst


INVARIANT_GROUPS = (
    ("spin-commutators", _check_spin_commutators, 1e-13),
    ("expm-unitarity-and-group-law", _check_expm_unitary, 1e-10),
    ("fz-eigenvalues", _check_fz_eigenvalues, 1e-13),
    ("oracle-sector-equivalence", _check_oracle_equivalence, 1e-12),
    ("projector-frame-relation", _check_projector_frame_relation, 1e-11),
    ("selective-conjugation-identities", _check_conjugation_identities, 1e-10),
    ("search-recovery", _check_search_recovery, 0.5),
    ("lomso-reconstruction", _check_lomso_reconstruction, 1e-12),
    ("phase-cycling-vs-grading", _check_phase_cycling, 1e-11),
    ("mq-generator-orders", _check_mq_generator_orders, 1e-12),
    ("zero-quantum-closure", _check_zero_quantum_closure, 1e-10),
    ("even-order-closure", _check_even_order_closure, 1e-10),
    ("grover-coefficients-three-way", _check_grover_three_way, 1e-9),
    ("grover-propagator-reexpression", _check_grover_reexpression, 1e-10),
    ("pipeline-vs-line-expansion", _check_pipeline_vs_lines, 1e-9),
    ("composition-unitarity", _check_composition_unitarity, 1e-10),
    ("sandwich-time-symmetry", _check_sandwich_time_symmetry, 1e-12),
)


def tolerance_scale() -> float:
    return float(os.environ.get("SPINSEARCH_TOL_SCALE", "1.0"))


def run_selftest() -> list[InvariantResult]:
    scale = tolerance_scale()
    results = []
    for name, fn, tol in INVARIANT_GROUPS:
        results.append(InvariantResult(name=name, residual=fn(), tolerance=tol * scale))
    return results
