import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from spinsearch.linalg import SpinSystem, kron_all
from spinsearch.oracle import (
    ConfigurationError,
    MarkedState,
    OracleSpec,
    aux_pure_state,
    basis_projector,
    conditional_aux_phase,
    diag_projector,
    oracle_uf,
    oracle_uo,
    restrict_to_aux01,
    selective_phase,
    sign_vector,
)

from conftest import maxabs


class TestSignVector:
    def test_all_zero_bits(self):
        assert list(sign_vector(0, 2)) == [1, 1]

    def test_all_one_bits(self):
        assert list(sign_vector(3, 2)) == [-1, -1]

    def test_msb_convention(self):
        # s = 2 = 0b10: qubit 1 carries the high bit
        assert list(sign_vector(2, 2)) == [-1, 1]
        d = diag_projector(MarkedState.from_signs([-1, 1]))
        assert int(np.argmax(np.diag(d).real)) == 2

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            sign_vector(4, 2)
        with pytest.raises(ValueError):
            MarkedState(s=-1, n=2)

    @given(n=st.integers(1, 6), data=st.data())
    def test_round_trip(self, n, data):
        s = data.draw(st.integers(0, 2**n - 1))
        assert MarkedState.from_signs(sign_vector(s, n)).s == s


class TestDiagProjector:
    def test_single_qubit(self):
        assert maxabs(diag_projector(MarkedState(s=0, n=1)) - np.diag([1.0, 0.0])) == 0

    def test_two_qubit_last_state(self):
        d = diag_projector(MarkedState(s=3, n=2))
        assert maxabs(d - np.diag([0.0, 0.0, 0.0, 1.0])) == 0

    def test_product_form_matches_index_form(self):
        for n in (1, 2, 3):
            for s in range(2**n):
                d = diag_projector(MarkedState(s=s, n=n))
                assert maxabs(d - basis_projector(s, 2**n)) < 1e-15
                assert abs(np.trace(d) - 1) < 1e-15


class TestSelectivePhase:
    def test_zero_phase(self):
        c = selective_phase(MarkedState(s=2, n=2), 0.0)
        assert maxabs(c - np.eye(4)) == 0

    def test_pi_phase_is_reflection(self):
        m = MarkedState(s=2, n=2)
        c = selective_phase(m, np.pi)
        assert maxabs(c - (np.eye(4) - 2 * diag_projector(m))) < 1e-15

    def test_quarter_phase_entries(self):
        c = selective_phase(MarkedState(s=1, n=2), np.pi / 2)
        assert maxabs(c - np.diag([1, np.exp(-1j * np.pi / 2), 1, 1])) < 1e-15

    def test_single_entry_differs(self):
        for s in range(8):
            c = selective_phase(MarkedState(s=s, n=3), 0.9)
            d = np.diag(c) - 1
            assert np.count_nonzero(np.abs(d) > 1e-15) == 1
            assert maxabs(c - np.diag(np.diag(c))) == 0

    def test_matches_exponential(self):
        m = MarkedState(s=5, n=3)
        from spinsearch.linalg import expm_unitary

        for theta in (0.3, 1.2, np.pi):
            direct = selective_phase(m, theta)
            viaexp = expm_unitary(diag_projector(m), theta)
            assert maxabs(direct - viaexp) < 1e-14


class TestExplicitOracle:
    def test_uf_squares_to_identity(self):
        system = SpinSystem(n_work=2, n_aux=2)
        uf = oracle_uf(MarkedState(s=1, n=2), system)
        assert maxabs(uf @ uf - np.eye(16)) == 0

    def test_uf_flips_aux_a_on_marked(self):
        system = SpinSystem(n_work=2, n_aux=2)
        s = 1
        uf = oracle_uf(MarkedState(s=s, n=2), system)
        for b in (0, 1):
            ket = np.zeros(16)
            ket[s * 4 + 0b00 + b] = 1.0  # |s>|0>|b>
            out = uf @ ket
            expect = np.zeros(16)
            expect[s * 4 + 0b10 + b] = 1.0  # |s>|1>|b>
            assert maxabs(out - expect) == 0

    def test_phase_kickback_on_minus_state(self):
        # aux a in (|0> - |1>)/sqrt2 turns the bit flip into (-1)^f(x)
        n, s = 2, 2
        system = SpinSystem(n_work=n, n_aux=2)
        uf = oracle_uf(MarkedState(s=s, n=n), system)
        for x in range(4):
            for b in (0, 1):
                ket = np.zeros(16)
                ket[x * 4 + 0b00 + b] = 1 / np.sqrt(2)
                ket[x * 4 + 0b10 + b] = -1 / np.sqrt(2)
                out = uf @ ket
                sign = -1.0 if x == s else 1.0
                assert maxabs(out - sign * ket) < 1e-15

    def test_needs_aux_qubits(self):
        with pytest.raises(ConfigurationError):
            oracle_uf(MarkedState(s=1, n=2), SpinSystem(n_work=2))


class TestPhaseOracle:
    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_sector_restriction_equals_selective_phase(self, n):
        system = SpinSystem(n_work=n, n_aux=2)
        for s in range(2**n):
            marked = MarkedState(s=s, n=n)
            for theta in (0.0, np.pi / 4, np.pi / 2, np.pi):
                uo = oracle_uo(marked, system, theta)
                block = restrict_to_aux01(uo, system)
                assert maxabs(block - selective_phase(marked, theta)) <= 1e-12

    def test_zero_phase_identity(self):
        system = SpinSystem(n_work=2, n_aux=2)
        uo = oracle_uo(MarkedState(s=3, n=2), system, 0.0)
        assert maxabs(uo - np.eye(16)) == 0

    def test_superposition_action(self, rng):
        n, s, theta = 2, 1, 0.77
        system = SpinSystem(n_work=n, n_aux=2)
        uo = oracle_uo(MarkedState(s=s, n=n), system, theta)
        amp = rng.normal(size=4) + 1j * rng.normal(size=4)
        ket = np.zeros(16, dtype=complex)
        for x in range(4):
            ket[x * 4 + 0b01] = amp[x]  # sum_x a_x |x>|0>|1>
        out = uo @ ket
        expect = ket.copy()
        expect[s * 4 + 0b01] *= np.exp(-1j * theta)
        assert maxabs(out - expect) < 1e-14

    def test_uses_two_uf_calls(self):
        from spinsearch.oracle import UF_CALLS_PER_UO

        assert UF_CALLS_PER_UO == 2


class TestOracleSpec:
    def test_selective_mode_needs_bare_work_register(self):
        spec = OracleSpec(marked=MarkedState(s=1, n=2), theta=0.4)
        got = spec.build(SpinSystem(n_work=2))
        assert maxabs(got - selective_phase(spec.marked, 0.4)) == 0
        with pytest.raises(ConfigurationError):
            spec.build(SpinSystem(n_work=2, n_aux=2))

    def test_explicit_mode_builds_full_oracle(self):
        spec = OracleSpec(marked=MarkedState(s=1, n=2), theta=0.4, aux_mode="explicit-uf")
        system = SpinSystem(n_work=2, n_aux=2)
        got = spec.build(system)
        assert maxabs(got - oracle_uo(spec.marked, system, 0.4)) == 0

    def test_unknown_mode_rejected(self):
        with pytest.raises(ValueError):
            OracleSpec(marked=MarkedState(s=0, n=1), theta=0.1, aux_mode="psychic")


class TestAuxPureState:
    def test_matches_direct_projector(self):
        system = SpinSystem(n_work=1, n_aux=2)
        direct = kron_all([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])])
        assert maxabs(aux_pure_state(system) - direct) <= 1e-13

    def test_trace_one(self):
        p = aux_pure_state(SpinSystem(n_work=3, n_aux=2))
        assert abs(np.trace(p) - 1) < 1e-14

    def test_idempotent(self):
        p = aux_pure_state(SpinSystem(n_work=1, n_aux=2))
        assert maxabs(p @ p - p) <= 1e-12

    def test_conditional_phase_targets_a1_b1(self):
        system = SpinSystem(n_work=1, n_aux=2)
        v = conditional_aux_phase(system, np.pi / 3)
        d = np.diag(v)
        for x in (0, 1):
            for ab in range(4):
                expected = np.exp(-1j * np.pi / 3) if ab == 0b11 else 1.0
                assert abs(d[x * 4 + ab] - expected) < 1e-15
