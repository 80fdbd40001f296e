import numpy as np
import pytest

from spinsearch.linalg import SpinSystem, expm_unitary, spin_op, total_op
from spinsearch.mqalgebra import decompose_orders
from spinsearch.oracle import MarkedState
from spinsearch.sequences import grover_propagator, initial_state
from spinsearch.spectroscopy import (
    NyquistError,
    PipelineConfig,
    SpinHamiltonian,
    cross_zq_hamiltonian,
    eigen_expand,
    inphase_check,
    interaction_frame,
    order_intensities,
    resum_lines,
    run_pipeline,
    spectrum,
)

from conftest import maxabs, random_hermitian, random_unitary


def uniform_cfg(n, u, v, omega=2 * np.pi * 10, dt=1e-3, points=64, detect="z"):
    return PipelineConfig(
        u_seq=u,
        v_seq=v,
        h_evol=SpinHamiltonian.uniform_fz(n, omega),
        dt=dt,
        n_points=points,
        detect_axis=detect,
    )


class TestSpinHamiltonian:
    def test_weak_coupling_is_diagonal(self):
        h = SpinHamiltonian.weak_coupling(
            2, [2 * np.pi * 5, 2 * np.pi * 8], {(1, 2): 3.0}
        )
        assert maxabs(h.matrix - np.diag(np.diag(h.matrix))) == 0
        system = SpinSystem(n_work=2)
        expected = (
            2 * np.pi * 5 * spin_op(system, 1, "z")
            + 2 * np.pi * 8 * spin_op(system, 2, "z")
            + 2 * np.pi * 3 * spin_op(system, 1, "z") @ spin_op(system, 2, "z")
        )
        assert maxabs(h.matrix - expected) <= 1e-12

    def test_uniform_fz(self):
        h = SpinHamiltonian.uniform_fz(2, 7.0)
        assert maxabs(h.matrix - 7.0 * total_op(SpinSystem(n_work=2), "z")) == 0

    def test_max_transition_frequency(self):
        h = SpinHamiltonian.uniform_fz(3, 2.0)
        assert abs(h.max_transition_frequency - 6.0) < 1e-12


class TestRunPipeline:
    def test_commuting_everything_is_constant(self):
        n = 2
        system = SpinSystem(n_work=n)
        rho0 = initial_state(system, np.ones(n), "z")
        eye = np.eye(2**n, dtype=complex)
        series = run_pipeline(rho0, uniform_cfg(n, eye, eye))
        fz = total_op(system, "z")
        expected = np.trace(fz @ fz)
        assert maxabs(series - expected) <= 1e-12

    def test_t0_value_is_trace_qp(self, rng):
        n = 2
        system = SpinSystem(n_work=n)
        u = random_unitary(rng, 4)
        v = random_unitary(rng, 4)
        rho0 = initial_state(system, np.ones(n), "x")
        series = run_pipeline(rho0, uniform_cfg(n, u, v))
        p = u @ rho0.rho @ u.conj().T
        q = v.conj().T @ total_op(system, "z") @ v
        assert abs(series[0] - np.trace(q @ p)) <= 1e-12

    @pytest.mark.parametrize("n", [2, 3])
    def test_matches_line_expansion(self, n, rng):
        system = SpinSystem(n_work=n)
        dim = 2**n
        u = random_unitary(rng, dim)
        v = random_unitary(rng, dim)
        cfg = uniform_cfg(n, u, v, points=128)
        rho0 = initial_state(system, rng.uniform(0.5, 1.5, n), "y")
        series = run_pipeline(rho0, cfg)
        p = u @ rho0.rho @ u.conj().T
        q = v.conj().T @ total_op(system, "z") @ v
        om, amps = eigen_expand(p, q, cfg.h_evol)
        times = np.arange(cfg.n_points) * cfg.dt
        assert maxabs(series - resum_lines(om, amps, times)) <= 1e-9

    def test_nyquist_guard(self):
        n = 2
        eye = np.eye(4, dtype=complex)
        cfg = uniform_cfg(n, eye, eye, omega=2 * np.pi * 600, dt=1e-3)
        rho0 = initial_state(SpinSystem(n_work=n), np.ones(n), "z")
        with pytest.raises(NyquistError):
            run_pipeline(rho0, cfg)

    def test_power_of_two_guard(self):
        eye = np.eye(4, dtype=complex)
        cfg = uniform_cfg(2, eye, eye, points=100)
        rho0 = initial_state(SpinSystem(n_work=2), np.ones(2), "z")
        with pytest.raises(ValueError, match="power of two"):
            run_pipeline(rho0, cfg)


class TestEigenExpand:
    def test_fz_against_itself_single_line(self):
        n = 2
        fz = total_op(SpinSystem(n_work=n), "z")
        h = SpinHamiltonian.uniform_fz(n, 5.0)
        om, amps = eigen_expand(fz, fz, h)
        live = np.abs(amps) > 1e-12
        assert np.allclose(om[live], 0.0)

    def test_line_count_bound(self, rng):
        n = 2
        p = random_hermitian(rng, 4)
        q = random_hermitian(rng, 4)
        om, amps = eigen_expand(p, q, SpinHamiltonian.uniform_fz(n, 5.0))
        assert len(amps) <= 16**2

    def test_uniform_label_frequencies_are_integer_multiples(self, rng):
        n = 3
        omega = 4.0
        p = random_hermitian(rng, 8)
        q = random_hermitian(rng, 8)
        om, amps = eigen_expand(p, q, SpinHamiltonian.uniform_fz(n, omega))
        live = np.abs(amps) > 1e-12
        ratios = om[live] / omega
        assert maxabs(ratios - np.rint(ratios)) <= 1e-9
        assert np.abs(np.rint(ratios)).max() <= n


class TestInphase:
    def _constructed_v(self, u, phi, n, p_axis="z", q_axis="z"):
        # V+ = exp(-i phi Fz) U R with R mapping F_q onto F_p by conjugation
        system = SpinSystem(n_work=n)
        if (p_axis, q_axis) == ("z", "z"):
            r = np.eye(2**n, dtype=complex)
        elif (p_axis, q_axis) == ("x", "z"):
            r = expm_unitary(total_op(system, "y"), np.pi / 2)
        else:
            raise NotImplementedError
        rz = expm_unitary(total_op(system, "z"), phi)
        v_dag = rz @ u @ r
        return v_dag.conj().T

    def test_constructed_reconversion_passes(self, rng):
        n, phi = 2, 0.6
        u = random_unitary(rng, 4)
        v = self._constructed_v(u, phi, n)
        ok, residual = inphase_check(u, v, phi, n)
        assert ok and residual <= 1e-9

    def test_generic_pair_fails(self, rng):
        ok, residual = inphase_check(
            random_unitary(rng, 4), random_unitary(rng, 4), 0.3, 2
        )
        assert not ok and residual > 1e-3

    def test_same_order_lines_share_phase(self, rng):
        n, phi = 2, 0.815
        system = SpinSystem(n_work=n)
        u = random_unitary(rng, 4)
        v = self._constructed_v(u, phi, n)
        p = u @ total_op(system, "z") @ u.conj().T
        q = v.conj().T @ total_op(system, "z") @ v
        mm = np.diag(total_op(system, "z")).real
        amps = q.conj() * p
        for m in range(-n, n + 1):
            mask = np.isclose(mm[:, None] - mm[None, :], m)
            vals = amps[mask]
            vals = vals[np.abs(vals) > 1e-10]
            if len(vals) > 1:
                # spread of phases around their circular mean, wrap-safe
                mean_dir = vals.sum()
                spread = np.abs(np.angle(vals * np.conj(mean_dir))).max()
                assert spread <= 1e-8


class TestSpectrum:
    def test_constant_series(self):
        spec = spectrum(np.full(64, 2.5, dtype=complex), 0.01)
        assert len(spec.peaks) == 1
        assert spec.peaks[0].frequency == 0.0
        assert abs(spec.peaks[0].amplitude - 2.5) < 1e-12

    def test_two_tone(self):
        # dt chosen so both tones sit exactly on DFT bins (1 Hz resolution)
        m, dt = 256, 1 / 256
        omega = 2 * np.pi * 50
        t = np.arange(m) * dt
        series = np.exp(-1j * omega * t) + np.exp(-2j * omega * t)
        spec = spectrum(series, dt, label_omega=omega)
        assert [p.order for p in spec.peaks] == [1, 2]
        amps = [abs(p.amplitude) for p in spec.peaks]
        assert abs(amps[0] / amps[1] - 1) < 1e-9

    def test_parseval(self, rng):
        series = rng.normal(size=128) + 1j * rng.normal(size=128)
        spec = spectrum(series, 1e-3)
        assert spec.parseval_defect(series) <= 1e-9

    def test_three_qubit_pipeline_peak_budget(self):
        n = 3
        omega = 2 * np.pi * 10
        system = SpinSystem(n_work=n)
        u = grover_propagator(MarkedState(s=5, n=n), 2)
        cfg = uniform_cfg(n, u, u.conj().T, omega=omega, dt=1 / 256, points=256)
        rho0 = initial_state(system, np.ones(n), "z")
        series = run_pipeline(rho0, cfg)
        spec = spectrum(series, cfg.dt, label_omega=omega)
        assert 1 <= len(spec.peaks) <= 2 * n + 1
        for p in spec.peaks:
            ratio = p.frequency / omega
            assert abs(ratio - round(ratio)) <= 1e-9


class TestOrderIntensities:
    def test_diagonal_pair_all_order_zero(self, rng):
        p = np.diag(rng.normal(size=8)).astype(complex)
        q = np.diag(rng.normal(size=8)).astype(complex)
        intens = order_intensities(p, q)
        for m, val in intens.items():
            if m != 0:
                assert abs(val) == 0

    def test_sum_rule(self, rng):
        p = random_hermitian(rng, 8)
        q = random_hermitian(rng, 8)
        total = sum(order_intensities(p, q).values())
        assert abs(total - np.trace(q.conj().T @ p)) <= 1e-10

    def test_hermitian_symmetry(self, rng):
        p = random_hermitian(rng, 8)
        q = random_hermitian(rng, 8)
        intens = order_intensities(p, q)
        for m in range(1, 4):
            assert abs(intens[-m] - np.conj(intens[m])) <= 1e-12

    def test_matches_spectrum_amplitudes(self, rng):
        n = 2
        omega = 2 * np.pi * 20
        system = SpinSystem(n_work=n)
        u = random_unitary(rng, 4)
        v = random_unitary(rng, 4)
        cfg = uniform_cfg(n, u, v, omega=omega, dt=1 / 128, points=128)
        rho0 = initial_state(system, np.ones(n), "z")
        series = run_pipeline(rho0, cfg)
        spec = spectrum(series, cfg.dt, label_omega=omega, rel_threshold=1e-9)
        p = u @ rho0.rho @ u.conj().T
        q = v.conj().T @ total_op(system, "z") @ v
        intens = order_intensities(p, q)
        by_order = {pk.order: pk.amplitude for pk in spec.peaks}
        for m, amp in by_order.items():
            assert abs(amp - intens[m]) <= 1e-9

    def test_t0_signal_independent_of_labeling(self, rng):
        n = 2
        system = SpinSystem(n_work=n)
        u = random_unitary(rng, 4)
        v = random_unitary(rng, 4)
        rho0 = initial_state(system, np.ones(n), "y")
        cfg_a = uniform_cfg(n, u, v, omega=2 * np.pi * 10)
        cfg_b = PipelineConfig(
            u_seq=u,
            v_seq=v,
            h_evol=SpinHamiltonian.weak_coupling(
                n, [2 * np.pi * 7, 2 * np.pi * 13], {(1, 2): 2.0}
            ),
            dt=1e-3,
            n_points=64,
        )
        sa = run_pipeline(rho0, cfg_a)
        sb = run_pipeline(rho0, cfg_b)
        assert abs(sa[0] - sb[0]) <= 1e-12


class TestCrossZq:
    def test_reduces_to_single_term(self, rng):
        f_s = random_hermitian(rng, 8)
        zero = np.zeros((8, 8), dtype=complex)
        got = cross_zq_hamiltonian(f_s, zero, 7)
        assert maxabs(got - cross_zq_hamiltonian(zero, f_s, 7)) <= 1e-12

    def test_output_is_zero_quantum(self, rng):
        n = 3
        system = SpinSystem(n_work=n)
        h = cross_zq_hamiltonian(
            random_hermitian(rng, 8), random_hermitian(rng, 8), 2 * n + 1
        )
        assert maxabs(h - h.conj().T) <= 1e-12
        dec = decompose_orders(h, system)
        for m, compnt in dec.components.items():
            if m != 0:
                assert maxabs(compnt) <= 1e-11

    def test_linearity(self, rng):
        f1 = random_hermitian(rng, 8)
        f2 = random_hermitian(rng, 8)
        zero = np.zeros_like(f1)
        lhs = cross_zq_hamiltonian(f1, f2, 7)
        rhs = cross_zq_hamiltonian(f1, zero, 7) + cross_zq_hamiltonian(zero, f2, 7)
        assert maxabs(lhs - rhs) <= 1e-12


class TestInteractionFrame:
    def test_zero_time(self, rng):
        h_s = random_hermitian(rng, 4)
        h_r = random_hermitian(rng, 4)
        exact, series = interaction_frame(h_s, h_r, 0.0, 3)
        assert maxabs(exact - h_s) <= 1e-13
        assert maxabs(series - h_s) <= 1e-13

    def test_commuting_frame_is_static(self, rng):
        h_r = random_hermitian(rng, 4)
        w, v = np.linalg.eigh(h_r)
        h_s = (v * rng.normal(size=4)) @ v.conj().T  # commutes with h_r
        exact, _ = interaction_frame(h_s, h_r, 0.9, 2)
        assert maxabs(exact - h_s) <= 1e-12

    def test_order2_halving_ratio(self, rng):
        h_s = random_hermitian(rng, 4)
        h_r = random_hermitian(rng, 4)

        def err(t):
            exact, series = interaction_frame(h_s, h_r, t, 2)
            return maxabs(exact - series)

        ratio = err(0.1) / err(0.05)
        assert 8 * 0.7 <= ratio <= 8 * 1.3

    def test_truncation_order_capped(self, rng):
        h = random_hermitian(rng, 2)
        with pytest.raises(ValueError, match="order"):
            interaction_frame(h, h, 0.1, 7)
