"""Protocol primitives: phase flip, atomic rotation, measurement."""
import math

import numpy as np
import pytest

from fockdistill import (ReflectionPair, SourceSpec, apply_atom_unitary,
                         apply_cpf, apply_reflection_exact,
                         branch_probabilities, coherent_state, measure_atom,
                         prepare_superposition)
from fockdistill.errors import (ContractViolationError, DegenerateStateError,
                                ImpossibleOutcomeError)
from fockdistill.fock import FockVector
from fockdistill.gates import unit_phase


def small_state():
    return coherent_state(SourceSpec(alpha=2.0))


class TestUnitPhase:
    def test_snaps_quarter_turns(self):
        # multiples of pi/2 must be exact units so parity cancellations
        # are exactly zero downstream
        assert unit_phase(math.pi) == -1.0
        assert unit_phase(101 * math.pi) == -1.0
        assert unit_phase(0.5 * math.pi * 999) in (1, 1j, -1, -1j)
        assert unit_phase(130 * math.pi / 2) == -1.0  # 65 pi mod 2 pi = pi

    def test_generic_angle(self):
        ang = 0.7
        assert unit_phase(ang) == pytest.approx(complex(math.cos(ang),
                                                        math.sin(ang)))

    def test_unit_modulus(self):
        for ang in np.linspace(-10, 10, 57):
            assert abs(abs(unit_phase(ang)) - 1.0) < 1e-15


class TestPrepare:
    def test_equal_branches(self):
        st = prepare_superposition(small_state())
        pg, ps = branch_probabilities(st)
        assert pg == pytest.approx(0.5, abs=1e-12)
        assert ps == pytest.approx(0.5, abs=1e-12)
        assert st.norm_sq() == pytest.approx(1.0, abs=1e-12)

    def test_rejects_unnormalized(self):
        bad = FockVector(0, 1, np.array([0.5, 0.5]), norm_flag=False)
        with pytest.raises(ContractViolationError):
            prepare_superposition(bad)


class TestCpf:
    def test_phases_only_on_s_branch(self):
        st = prepare_superposition(small_state())
        out = apply_cpf(st, 0.3)
        np.testing.assert_array_equal(out.amp_g, st.amp_g)
        expect = st.amp_s * np.exp(1j * 0.3 * st.n_values)
        np.testing.assert_allclose(out.amp_s, expect, atol=1e-12)

    def test_pi_flip_exact(self):
        st = prepare_superposition(small_state())
        out = apply_cpf(st, math.pi)
        signs = (-1.0) ** (st.n_values % 2)
        np.testing.assert_array_equal(out.amp_s, st.amp_s * signs)

    def test_norm_preserved(self):
        st = prepare_superposition(small_state())
        assert apply_cpf(st, 1.234).norm_sq() == pytest.approx(1.0, abs=1e-12)


class TestAtomUnitary:
    def test_involution_at_theta_zero(self):
        st = prepare_superposition(small_state())
        st = apply_cpf(st, 0.77)
        twice = apply_atom_unitary(apply_atom_unitary(st, 0.0), 0.0)
        np.testing.assert_allclose(twice.amp_g, st.amp_g, atol=1e-12)
        np.testing.assert_allclose(twice.amp_s, st.amp_s, atol=1e-12)

    def test_unitary_inverse(self):
        # general theta: U[theta] is unitary with inverse U[theta]^dagger,
        # i.e. the map g -> (e^{-i t} g + s)/sqrt(2), s -> (g - e^{i t} s)/sqrt(2)
        st = prepare_superposition(small_state())
        st = apply_cpf(st, 0.77)
        theta = 0.4
        out = apply_atom_unitary(st, theta)
        eit = np.exp(1j * theta)
        back_g = (np.conj(eit) * out.amp_g + out.amp_s) / math.sqrt(2)
        back_s = (out.amp_g - eit * out.amp_s) / math.sqrt(2)
        np.testing.assert_allclose(back_g, st.amp_g, atol=1e-12)
        np.testing.assert_allclose(back_s, st.amp_s, atol=1e-12)

    def test_norm_preserved(self):
        st = prepare_superposition(small_state())
        out = apply_atom_unitary(st, 1.9)
        assert out.norm_sq() == pytest.approx(1.0, abs=1e-12)

    def test_theta_zero_action(self):
        st = prepare_superposition(small_state())
        out = apply_atom_unitary(st, 0.0)
        root = 1 / math.sqrt(2)
        np.testing.assert_allclose(out.amp_g,
                                   root * (st.amp_g + st.amp_s), atol=1e-12)
        np.testing.assert_allclose(out.amp_s,
                                   root * (st.amp_g - st.amp_s), atol=1e-12)


class TestReflectionExact:
    def test_pure_phases_lossless(self):
        st = prepare_superposition(small_state())
        refl = ReflectionPair(r1=1.0 + 0j, r0=complex(math.cos(0.5),
                                                      math.sin(0.5)))
        out, loss = apply_reflection_exact(st, refl)
        assert loss == pytest.approx(0.0, abs=1e-12)
        assert out.norm_sq() == pytest.approx(1.0, abs=1e-12)

    def test_lossy_r1_reports_loss(self):
        st = prepare_superposition(small_state())
        refl = ReflectionPair(r1=0.998 + 0j, r0=1.0 + 0j)
        out, loss = apply_reflection_exact(st, refl)
        assert loss > 0.0
        assert out.norm_sq() == pytest.approx(1.0, abs=1e-12)

    def test_amplifying_rejected(self):
        st = prepare_superposition(small_state())
        with pytest.raises(ContractViolationError):
            apply_reflection_exact(st, ReflectionPair(r1=1.5 + 0j, r0=1.0))

    def test_collapse_detected(self):
        st = prepare_superposition(coherent_state(SourceSpec(alpha=10.0)))
        with pytest.raises(DegenerateStateError):
            apply_reflection_exact(st, ReflectionPair(r1=1e-3, r0=1e-3))


class TestMeasurement:
    def test_born_probabilities(self):
        st = prepare_superposition(small_state())
        st = apply_cpf(st, math.pi)
        st = apply_atom_unitary(st, 0.0)
        pg, ps = branch_probabilities(st)
        assert pg + ps == pytest.approx(1.0, abs=1e-12)
        rec = measure_atom(st, postselect="G")
        assert rec.probability == pytest.approx(pg, abs=1e-15)
        assert rec.post_state.norm_sq() == pytest.approx(1.0, abs=1e-12)

    def test_impossible_outcome(self):
        # atom stays in (|g> + |s>)/sqrt(2); rotating by theta=0 empties S
        st = prepare_superposition(small_state())
        st = apply_atom_unitary(st, 0.0)
        with pytest.raises(ImpossibleOutcomeError):
            measure_atom(st, postselect="S")

    def test_seeded_sampling_deterministic(self):
        st = prepare_superposition(small_state())
        st = apply_cpf(st, math.pi)
        st = apply_atom_unitary(st, 0.0)
        outcomes = {measure_atom(st, seed=7).outcome for _ in range(5)}
        assert len(outcomes) == 1

    def test_unknown_outcome_rejected(self):
        st = prepare_superposition(small_state())
        with pytest.raises(ContractViolationError):
            measure_atom(st, postselect="X")
