"""Brute-force validator on a truncated two-mode Fock space.

Independently evolves injected states under the quadratic interaction
generator and reproduces the closed-form photon statistics, so the
log-space tables and the sampler's branch decomposition can be checked
without trusting either.  Only feasible at small gain (g <~ 1); the
closed forms carry the extrapolation to experimental gain, backed here
plus by their analytic normalization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm, logm
from scipy.sparse import diags, identity, kron
from scipy.sparse.linalg import expm_multiply

from .errors import CutoffError
from .fock import (DistributionKind, GainParams, joint_distribution,
                   log_amplitude_phi_plus, make_gain_params)
from .model import branch_weights

DEFAULT_LEAK_TOL = 1e-8


@dataclass
class TruncatedState:
    """Two-mode state on the grid n_H, n_V < dim_per_mode.

    amplitudes[n_H, n_V] is the coefficient of |n_H, n_V>.
    """

    amplitudes: np.ndarray

    @property
    def dim_per_mode(self) -> int:
        return self.amplitudes.shape[0]

    @property
    def norm_leak(self) -> float:
        return 1.0 - float(np.sum(np.abs(self.amplitudes) ** 2))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


def fock_state(dim: int, n_h: int, n_v: int) -> TruncatedState:
    amp = np.zeros((dim, dim), dtype=complex)
    amp[n_h, n_v] = 1.0
    return TruncatedState(amp)


def equatorial_photon(dim: int, phi: float) -> TruncatedState:
    """Single photon at equatorial phase phi: (|1,0> + e^{i phi}|0,1>)/sqrt2."""
    amp = np.zeros((dim, dim), dtype=complex)
    amp[1, 0] = 1.0 / math.sqrt(2.0)
    amp[0, 1] = np.exp(1j * phi) / math.sqrt(2.0)
    return TruncatedState(amp)


def build_hamiltonian_generator(dim: int):
    """Anti-Hermitian K = a_H^dag a_V^dag - a_H a_V (sparse CSR), so the
    amplifier unitary is exp(g K) with g the dimensionless gain."""
    if dim < 2:
        raise ValueError("need at least two Fock levels per mode")
    a = diags(np.sqrt(np.arange(1, dim)), 1)
    adag = a.conj().T
    k = kron(adag, adag) - kron(a, a)
    return k.tocsr()


def evolve(state: TruncatedState, g: float,
           leak_tol: float = DEFAULT_LEAK_TOL) -> TruncatedState:
    """Apply exp(g K) and restrict the result to the state's grid.

    The generator is exponentiated on a doubled working grid: truncating
    K keeps it anti-Hermitian, so exponentiating it directly would be
    exactly unitary and hide the cutoff error as boundary reflection.
    With the buffer, the returned norm_leak honestly measures the mass
    the amplified state pushed past the requested window; above
    leak_tol that is a cutoff-too-small failure.
    """
    dim = state.dim_per_mode
    work = max(2 * dim, dim + 8)
    k = build_hamiltonian_generator(work)
    padded = np.zeros((work, work), dtype=complex)
    padded[:dim, :dim] = state.amplitudes
    psi = expm_multiply(g * k, padded.reshape(-1))
    out = TruncatedState(psi.reshape(work, work)[:dim, :dim].copy())
    if out.norm_leak > leak_tol:
        raise CutoffError(
            f"norm leak {out.norm_leak:.3e} exceeds {leak_tol:.1e} at "
            f"dim={dim}, g={g}; increase the per-mode cutoff",
            norm_leak=out.norm_leak)
    return out


def analysis_basis_matrix(phi: float) -> np.ndarray:
    """Mode matrix sending (a_H, a_V) to the equatorial pair at phase
    phi: rows are the annihilators of the analysis mode and its
    orthogonal partner."""
    return np.array([[1.0, np.exp(-1j * phi)],
                     [-np.exp(1j * phi), 1.0]]) / math.sqrt(2.0)


def rotate_modes(state: TruncatedState, mode_matrix: np.ndarray) -> TruncatedState:
    """Re-express the state in the rotated mode pair b = V a.

    Passive rotations conserve total photon number, so the map is
    applied exactly block-by-block; the output grid is enlarged to
    2*dim - 1 per mode so no block is clipped and the rotation is
    unitary to machine precision.
    """
    amps = state.amplitudes
    dim = state.dim_per_mode
    n_max = 2 * (dim - 1)
    h = 1j * logm(mode_matrix)
    h = 0.5 * (h + h.conj().T)
    out = np.zeros((n_max + 1, n_max + 1), dtype=complex)
    for n in range(n_max + 1):
        # block basis: k photons in the first mode, n - k in the second
        k = np.arange(n + 1)
        gen = np.zeros((n + 1, n + 1), dtype=complex)
        gen[k, k] = h[0, 0] * k + h[1, 1] * (n - k)
        if n >= 1:
            ladder = np.sqrt((k[:-1] + 1.0) * (n - k[:-1]))
            gen[k[:-1] + 1, k[:-1]] = h[0, 1] * ladder
            gen[k[:-1], k[:-1] + 1] = h[1, 0] * ladder
        vec = np.zeros(n + 1, dtype=complex)
        lo = max(0, n - dim + 1)
        hi = min(n, dim - 1)
        if lo > hi:
            continue
        sel = np.arange(lo, hi + 1)
        vec[sel] = amps[sel, n - sel]
        rotated = expm(-1j * gen) @ vec
        out[k, n - k] = rotated
    return TruncatedState(out)


def amplified_qubit_state(g: float, dim: int, phi: float,
                          leak_tol: float = DEFAULT_LEAK_TOL) -> TruncatedState:
    """Evolve a single equatorial photon at phase phi."""
    return evolve(equatorial_photon(dim, phi), g, leak_tol)


def joint_number_probabilities(state: TruncatedState, phi_a: float) -> np.ndarray:
    """Joint count distribution measured in the equatorial basis at
    phase phi_a; axis 0 is the analysis mode."""
    rotated = rotate_modes(state, analysis_basis_matrix(phi_a))
    return rotated.probabilities()


def closed_form_amplitude_grid(gp: GainParams, n_i: int, n_j: int) -> np.ndarray:
    """Signed closed-form amplitudes A[i, j] of the |2i+1>|2j> terms."""
    grid = np.zeros((n_i, n_j))
    for i in range(n_i):
        for j in range(n_j):
            logmag, sign = log_amplitude_phi_plus(i, j, gp)
            grid[i, j] = sign * math.exp(logmag)
    return grid


def eq2_amplitude_deviation(g: float, dim: int,
                            leak_tol: float = DEFAULT_LEAK_TOL) -> float:
    """Max absolute deviation between evolved and closed-form signed
    amplitudes of the amplified qubit.

    The closed form's sign convention ((-1)^i on the odd-mode index)
    corresponds to the phi = pi origin of the equatorial phase, so the
    injected photon and analysis basis are both taken at phi = pi; the
    probabilities are origin-independent.
    """
    state = amplified_qubit_state(g, dim, math.pi, leak_tol)
    rotated = rotate_modes(state, analysis_basis_matrix(math.pi))
    amps = rotated.amplitudes
    n_i = (dim - 1) // 2
    n_j = dim // 2
    # evolved amplitudes live on (2i+1, 2j)
    evolved = amps[np.ix_(2 * np.arange(n_i) + 1, 2 * np.arange(n_j))]
    closed = closed_form_amplitude_grid(make_gain_params(g), n_i, n_j)
    dev_imag = float(np.max(np.abs(evolved.imag)))
    dev_real = float(np.max(np.abs(evolved.real - closed)))
    return max(dev_real, dev_imag)


def joint_probability_deviation(g: float, dim: int,
                                leak_tol: float = DEFAULT_LEAK_TOL) -> float:
    """Max absolute deviation between the evolved qubit's joint count
    probabilities (any phase origin; taken at phi = 0) and the
    closed-form product distribution."""
    probs = joint_number_probabilities(amplified_qubit_state(g, dim, 0.0, leak_tol), 0.0)
    dist = joint_distribution(DistributionKind.PHI_PLUS, make_gain_params(g),
                              tail_eps=1e-14, max_index=4 * dim)
    closed = np.zeros_like(probs)
    n_odd = min(len(dist.odd.counts), (probs.shape[0] - 1) // 2)
    n_even = min(len(dist.even.counts), (probs.shape[1] + 1) // 2)
    po = np.exp(dist.odd.log_probs[:n_odd])
    pe = np.exp(dist.even.log_probs[:n_even])
    closed[np.ix_(dist.odd.counts[:n_odd], dist.even.counts[:n_even])] = np.outer(po, pe)
    return float(np.max(np.abs(probs - closed)))


def check_phase_covariance(g: float, dim: int, phi: float,
                           leak_tol: float = DEFAULT_LEAK_TOL) -> float:
    """Max deviation between the count statistics of a phi-equatorial
    photon analyzed at phi and the phi = 0 reference."""
    reference = joint_number_probabilities(
        amplified_qubit_state(g, dim, 0.0, leak_tol), 0.0)
    shifted = joint_number_probabilities(
        amplified_qubit_state(g, dim, phi, leak_tol), phi)
    return float(np.max(np.abs(shifted - reference)))


def check_branch_mixture(g: float, dim: int, phi: float,
                         leak_tol: float = DEFAULT_LEAK_TOL) -> float:
    """Max deviation between the phi-qubit's count statistics in the
    phi = 0 basis and the two-branch incoherent mixture with weights
    cos^2(phi/2), sin^2(phi/2).

    This is the check that licenses the sampler's branch decomposition.
    """
    actual = joint_number_probabilities(
        amplified_qubit_state(g, dim, phi, leak_tol), 0.0)
    plus = joint_number_probabilities(
        amplified_qubit_state(g, dim, 0.0, leak_tol), 0.0)
    minus = joint_number_probabilities(
        amplified_qubit_state(g, dim, math.pi, leak_tol), 0.0)
    w = branch_weights(phi, 0.0)
    mixture = w.w_odd * plus + w.w_even * minus
    return float(np.max(np.abs(actual - mixture)))
