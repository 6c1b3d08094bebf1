"""Closed-form predictions for the amplified qubit.

Mean fringes, clone numbers, the three visibility models, and the
equatorial branch decomposition that the Monte Carlo sampler relies on:
in any equatorial analysis basis the amplifier factorizes into two
independent single-mode squeezers, so an injected qubit at phase phi
contributes an odd-count branch with weight cos^2((phi - phi_a)/2) and
an even-count branch with the complementary weight.  At the level of
photon-number statistics the two branches mix incoherently because
their supports are disjoint.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .fock import GainParams


@dataclass(frozen=True)
class FringePrediction:
    """Expected photon numbers in the two analysis modes at phase phi."""

    phi: float
    n_plus_mean: float
    n_minus_mean: float


@dataclass(frozen=True)
class BranchWeights:
    w_odd: float
    w_even: float


def mean_fringe(phi: float, gp: GainParams) -> FringePrediction:
    """N_pm(phi) = m_bar + (2 m_bar + 1)(1 +- cos phi)/2."""
    m = gp.m_bar
    half = 0.5 * (2.0 * m + 1.0)
    return FringePrediction(
        phi=phi,
        n_plus_mean=m + half * (1.0 + math.cos(phi)),
        n_minus_mean=m + half * (1.0 - math.cos(phi)),
    )


def visibility_ideal(gp: GainParams) -> float:
    """Gain-limited fringe contrast (2 m_bar + 1)/(4 m_bar + 1); tends
    to 1/2 at high gain."""
    return (2.0 * gp.m_bar + 1.0) / (4.0 * gp.m_bar + 1.0)


def visibility_effective(gp: GainParams, p: float) -> float:
    """Contrast when only a fraction p of heralded photons actually
    stimulates the amplifier, the rest contributing spontaneous noise."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"injection probability must lie in [0, 1], got {p!r}")
    m = gp.m_bar
    num = p * (2.0 * m + 1.0)
    return num / (num + 2.0 * m) if (num + 2.0 * m) > 0.0 else 1.0


def visibility_no_coherence(gp: GainParams) -> float:
    """Contrast if amplification destroyed the input coherence:
    1/(4 m_bar + 1)."""
    return 1.0 / (4.0 * gp.m_bar + 1.0)


def clone_number(gp: GainParams, p: float | None = None) -> float:
    """Mean total output photons.

    Pure injection gives 4 m_bar + 1.  With injection probability p the
    spontaneous complement contributes 2 m_bar, giving the mixture mean
    p (4 m_bar + 1) + (1 - p) 2 m_bar.
    """
    pure = 4.0 * gp.m_bar + 1.0
    if p is None:
        return pure
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"injection probability must lie in [0, 1], got {p!r}")
    return p * pure + (1.0 - p) * 2.0 * gp.m_bar


def branch_weights(phi: float, phi_a: float = 0.0) -> BranchWeights:
    """Odd/even branch weights of a phase-phi qubit decomposed in the
    equatorial analysis basis at phase phi_a."""
    w = math.cos((phi - phi_a) / 2.0) ** 2
    return BranchWeights(w_odd=w, w_even=1.0 - w)


def estimate_p(transmittivity: float, spectral_match: float,
               spatial_match: float) -> float:
    """Product estimate of the injection probability from the three
    mode-matching budget factors."""
    factors = (transmittivity, spectral_match, spatial_match)
    for name, value in zip(("transmittivity", "spectral_match", "spatial_match"),
                           factors):
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"{name} must lie in [0, 1], got {value!r}")
    return transmittivity * spectral_match * spatial_match
