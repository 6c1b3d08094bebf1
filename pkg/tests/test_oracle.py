import math

import numpy as np
import pytest
from scipy.linalg import expm

from qiopa.errors import CutoffError
from qiopa.fock import make_gain_params
from qiopa.oracle import (TruncatedState, amplified_qubit_state,
                          analysis_basis_matrix, build_hamiltonian_generator,
                          check_branch_mixture, check_phase_covariance,
                          eq2_amplitude_deviation, equatorial_photon, evolve,
                          fock_state, joint_number_probabilities,
                          joint_probability_deviation, rotate_modes)


class TestGenerator:
    def test_vacuum_maps_to_pair(self):
        k = build_hamiltonian_generator(2)
        out = k @ fock_state(2, 0, 0).amplitudes.reshape(-1)
        state = out.reshape(2, 2)
        assert state[1, 1] == pytest.approx(1.0)
        assert abs(state[0, 0]) == 0.0

    def test_matrix_element(self):
        k = build_hamiltonian_generator(5).toarray()
        idx = lambda nh, nv: nh * 5 + nv
        assert k[idx(1, 1), idx(0, 0)] == pytest.approx(1.0)
        assert k[idx(2, 2), idx(1, 1)] == pytest.approx(2.0)

    def test_anti_hermitian(self):
        k = build_hamiltonian_generator(12)
        assert abs((k + k.conj().T)).max() == 0.0

    def test_rejects_tiny_dimension(self):
        with pytest.raises(ValueError):
            build_hamiltonian_generator(1)


class TestEvolve:
    def test_zero_gain_is_identity(self):
        state = equatorial_photon(20, 0.7)
        out = evolve(state, 0.0)
        np.testing.assert_allclose(out.amplitudes, state.amplitudes, atol=1e-14)

    def test_two_mode_squeezed_vacuum(self):
        # exp(gK)|0,0> = (1/cosh g) sum tanh^n g |n,n>
        g = 0.5
        out = evolve(fock_state(40, 0, 0), g)
        c, gamma = math.cosh(g), math.tanh(g)
        for n in range(12):
            assert out.amplitudes[n, n].real == pytest.approx(gamma ** n / c, abs=1e-8)
            assert abs(out.amplitudes[n, n].imag) < 1e-12
        off = out.amplitudes.copy()
        off[np.arange(40), np.arange(40)] = 0.0
        assert np.abs(off).max() < 1e-12

    def test_mean_growth(self):
        g = 1.0
        out = evolve(fock_state(40, 0, 0), g)
        probs = out.probabilities()
        n = np.arange(40)
        assert float((n[:, None] * probs).sum()) == pytest.approx(math.sinh(g) ** 2, abs=1e-7)
        assert float((n[None, :] * probs).sum()) == pytest.approx(math.sinh(g) ** 2, abs=1e-7)

    def test_matches_dense_expm(self):
        # independent route: dense matrix exponential on the same
        # buffered grid, restricted to the requested window
        dim, g = 12, 0.4
        work = 2 * dim
        k = build_hamiltonian_generator(work).toarray()
        padded = np.zeros((work, work), dtype=complex)
        padded[:dim, :dim] = equatorial_photon(dim, 1.1).amplitudes
        dense = (expm(g * k) @ padded.reshape(-1)).reshape(work, work)[:dim, :dim]
        out = evolve(equatorial_photon(dim, 1.1), g)
        np.testing.assert_allclose(out.amplitudes, dense, atol=1e-12)

    def test_unitarity_with_headroom(self):
        for g, dim in [(0.5, 40), (1.0, 48), (1.0, 60)]:
            out = evolve(fock_state(dim, 1, 0), g)
            assert out.norm_leak < 1e-8

    def test_leak_honestly_measured_at_marginal_cutoff(self):
        # the amplified photon's true mass beyond a 40-level window at
        # g = 1 is 1.03e-8, just over the default tolerance; a unitary
        # truncation would report zero here
        with pytest.raises(CutoffError) as err:
            evolve(fock_state(40, 1, 0), 1.0)
        assert 1e-8 < err.value.norm_leak < 2e-8

    def test_leak_shrinks_when_cutoff_doubles(self):
        leak_small = evolve(fock_state(24, 1, 0), 1.0, leak_tol=1.0).norm_leak
        leak_large = evolve(fock_state(48, 1, 0), 1.0, leak_tol=1.0).norm_leak
        assert leak_large < leak_small / 2.0

    def test_cutoff_too_small_raises(self):
        with pytest.raises(CutoffError) as err:
            evolve(fock_state(10, 1, 0), 2.0)
        assert err.value.norm_leak > 1e-8


class TestRotation:
    def test_single_photon_sector_matches_mode_matrix(self):
        phi = 0.9
        rotated = rotate_modes(equatorial_photon(8, phi), analysis_basis_matrix(phi))
        assert abs(rotated.amplitudes[1, 0]) == pytest.approx(1.0, abs=1e-12)
        assert abs(rotated.amplitudes[0, 1]) < 1e-12

    def test_exactly_norm_preserving(self):
        state = evolve(fock_state(30, 1, 0), 0.8)
        rotated = rotate_modes(state, analysis_basis_matrix(0.3))
        assert abs(rotated.norm_leak - state.norm_leak) < 1e-12

    def test_hv_photon_splits_evenly_in_plus_minus_basis(self):
        rotated = rotate_modes(fock_state(6, 1, 0), analysis_basis_matrix(0.0))
        probs = rotated.probabilities()
        assert probs[1, 0] == pytest.approx(0.5, abs=1e-12)
        assert probs[0, 1] == pytest.approx(0.5, abs=1e-12)


class TestClosedFormEquivalence:
    @pytest.mark.parametrize("g", [0.2, 0.5, 0.8])
    def test_signed_amplitudes(self, g):
        assert eq2_amplitude_deviation(g, 40) < 1e-6

    @pytest.mark.parametrize("g", [0.2, 0.8])
    def test_joint_probabilities(self, g):
        assert joint_probability_deviation(g, 40) < 1e-6

    def test_parity_structure_of_amplified_qubit(self):
        probs = joint_number_probabilities(amplified_qubit_state(0.6, 30, 0.0), 0.0)
        even_plus = probs[0::2, :].sum()
        odd_minus = probs[:, 1::2].sum()
        assert even_plus < 1e-12
        assert odd_minus < 1e-12


class TestPhaseCovariance:
    def test_reference_phase_is_exact(self):
        assert check_phase_covariance(0.5, 30, 0.0) == 0.0

    @pytest.mark.parametrize("phi", [math.pi / 4.0, math.pi / 2.0, 1.9])
    def test_rotated_statistics_match(self, phi):
        assert check_phase_covariance(0.8, 40, phi) < 1e-8


class TestBranchMixture:
    @pytest.mark.parametrize("phi", [math.pi / 4.0, math.pi / 2.0, 2.5])
    def test_two_branch_decomposition(self, phi):
        assert check_branch_mixture(0.8, 40, phi) < 1e-6

    def test_truncated_state_norm_leak_sign(self):
        state = TruncatedState(np.zeros((4, 4), dtype=complex))
        assert state.norm_leak == pytest.approx(1.0)
