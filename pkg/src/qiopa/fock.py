"""Exact photon-number statistics of the collinear amplifier.

The amplified single-photon state in an equatorial analysis basis is a
product of a squeezed single photon (odd photon numbers, the mode that
received the photon) and a squeezed vacuum (even photon numbers, the
orthogonal mode).  Both series are evaluated in log space via the
log-gamma function; raw factorials overflow doubles near n = 170 while
the high-gain regime populates counts in the tens of thousands.

Truncation is certified: each marginal series is extended until a
geometric tail bound (successive-term ratio -> Gamma^2 < 1) proves the
omitted mass is below the requested epsilon.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, NamedTuple

import numpy as np
from scipy.special import gammaln

from .errors import TruncationError

DEFAULT_TAIL_EPS = 1e-9
DEFAULT_MAX_INDEX = 200_000


class DistributionKind(Enum):
    PHI_PLUS = "phi-plus"
    PHI_MINUS = "phi-minus"
    SQUEEZED_VACUUM = "squeezed-vacuum"
    SQUEEZED_SINGLE_PHOTON = "squeezed-single-photon"


@dataclass(frozen=True)
class GainParams:
    """Derived amplifier constants for a nonlinear gain g.

    c = cosh g, gamma = tanh g, m_bar = sinh^2 g (mean spontaneous
    photons per polarization mode).  g absorbs the coupling-times-time
    product; the two never appear separately.
    """

    g: float
    c: float
    gamma: float
    m_bar: float


def make_gain_params(g: float) -> GainParams:
    if not math.isfinite(g) or g < 0.0:
        raise ValueError(f"gain must be a finite non-negative real, got {g!r}")
    return GainParams(g=float(g), c=math.cosh(g), gamma=math.tanh(g),
                      m_bar=math.sinh(g) ** 2)


class PhotonPair(NamedTuple):
    """Photon counts in the analysis mode and its orthogonal partner."""

    n_plus: int
    n_minus: int


def parity_eigenvalue(pair: PhotonPair) -> int:
    """+1 if the analysis-mode count is odd, -1 if even.

    This is the eigenvalue of the odd/even parity observable that
    perfectly separates the two amplified orthogonal states.
    """
    return 1 if pair[0] % 2 else -1


def log_amplitude_phi_plus(i: int, j: int, gp: GainParams) -> tuple[float, int]:
    """Log-magnitude and sign of the |2i+1>_+ |2j>_- term of the
    amplified "+" state.

    amplitude = C^-2 (-Gamma/2)^i (Gamma/2)^j sqrt((2i+1)!(2j)!) / (i! j!)
    """
    if i < 0 or j < 0:
        raise ValueError("term indices must be non-negative")
    sign = -1 if i % 2 else 1
    if gp.gamma == 0.0:
        logmag = 0.0 if (i == 0 and j == 0) else -math.inf
        return logmag, sign
    # log(gamma/2) via the difference: gamma/2 itself can underflow
    logmag = (
        -2.0 * math.log(gp.c)
        + (i + j) * (math.log(gp.gamma) - math.log(2.0))
        + 0.5 * (gammaln(2 * i + 2) + gammaln(2 * j + 1))
        - gammaln(i + 1)
        - gammaln(j + 1)
    )
    return float(logmag), sign


def _marginal_table(gp: GainParams, odd: bool, tail_eps: float,
                    max_index: int) -> tuple[np.ndarray, np.ndarray, float]:
    """Log-probability table for one marginal series with a certified
    tail bound <= tail_eps.

    Odd series (squeezed single photon):
        P(2k+1) = (2k+1)!/(k!)^2 (Gamma/2)^(2k) / C^3
    Even series (squeezed vacuum):
        P(2k)   = (2k)!/(k!)^2   (Gamma/2)^(2k) / C
    Successive-term ratios approach Gamma^2: from below for the even
    series, from above (factor (2k+3)/(2k+2)) for the odd one, so the
    geometric bound past index k uses that k-dependent ratio cap.
    """
    if gp.gamma == 0.0:
        counts = np.array([1 if odd else 0], dtype=np.int64)
        return counts, np.array([0.0]), 0.0

    log_target = math.log(tail_eps)
    gamma_sq = gp.gamma ** 2
    log_half_gamma = math.log(gp.gamma) - math.log(2.0)
    size = min(256, max_index + 1)
    while True:
        k = np.arange(size, dtype=np.float64)
        if odd:
            logp = (-3.0 * math.log(gp.c) + gammaln(2 * k + 2)
                    - 2.0 * gammaln(k + 1) + 2 * k * log_half_gamma)
            rho = gamma_sq * (2 * k + 3) / (2 * k + 2)
        else:
            logp = (-math.log(gp.c) + gammaln(2 * k + 1)
                    - 2.0 * gammaln(k + 1) + 2 * k * log_half_gamma)
            rho = np.full(size, gamma_sq)
        log_bound = np.full(size, np.inf)
        valid = rho < 1.0
        with np.errstate(divide="ignore"):
            log_bound[valid] = (logp[valid] + np.log(rho[valid])
                                - np.log1p(-rho[valid]))
        hits = np.nonzero(log_bound <= log_target)[0]
        if hits.size:
            last = int(hits[0])
            counts = 2 * np.arange(last + 1, dtype=np.int64) + (1 if odd else 0)
            return counts, logp[:last + 1], float(np.exp(log_bound[last]))
        if size > max_index:
            raise TruncationError(
                f"tail bound {np.exp(log_bound[-1]):.3e} at max index "
                f"{max_index} exceeds requested {tail_eps:.3e} (g={gp.g})",
                achieved_bound=float(np.exp(log_bound[-1])))
        size = min(size * 4, max_index + 1)


@dataclass(frozen=True)
class MarginalDistribution:
    """Truncated single-mode photon-number table in log space."""

    kind: DistributionKind
    gain: GainParams
    counts: np.ndarray
    log_probs: np.ndarray
    tail_mass_bound: float

    def __post_init__(self):
        self.counts.flags.writeable = False
        self.log_probs.flags.writeable = False

    @property
    def total_mass(self) -> float:
        return float(np.exp(self.log_probs).sum())

    def mean(self) -> float:
        return float(np.sum(self.counts * np.exp(self.log_probs)))

    def log_prob(self, n: int) -> float:
        offset = 1 if self.kind is DistributionKind.SQUEEZED_SINGLE_PHOTON else 0
        if n < 0 or n % 2 != offset:
            return -math.inf
        idx = (n - offset) // 2
        if idx >= len(self.counts):
            return -math.inf
        return float(self.log_probs[idx])

    def items(self) -> Iterator[tuple[int, float]]:
        yield from zip(self.counts.tolist(), self.log_probs.tolist())


def marginal_distribution(kind: DistributionKind, gp: GainParams,
                          tail_eps: float = DEFAULT_TAIL_EPS,
                          max_index: int = DEFAULT_MAX_INDEX) -> MarginalDistribution:
    """Build the squeezed-vacuum or squeezed-single-photon table.

    The full tail budget goes to the single series.
    """
    if not 0.0 < tail_eps < 1.0:
        raise ValueError(f"tail_eps must lie in (0, 1), got {tail_eps!r}")
    if kind not in (DistributionKind.SQUEEZED_VACUUM,
                    DistributionKind.SQUEEZED_SINGLE_PHOTON):
        raise ValueError(f"not a marginal kind: {kind}")
    odd = kind is DistributionKind.SQUEEZED_SINGLE_PHOTON
    counts, logp, bound = _marginal_table(gp, odd, tail_eps, max_index)
    return MarginalDistribution(kind=kind, gain=gp, counts=counts,
                                log_probs=logp, tail_mass_bound=bound)


@dataclass(frozen=True)
class JointDistribution:
    """Joint (n_plus, n_minus) distribution of an amplified qubit state.

    Stored in factorized form: the state is an exact product of the odd
    and even marginals (the dense grid at experimental gain would hold
    ~1e9 entries).  PHI_PLUS puts the odd counts in n_plus, PHI_MINUS is
    the mirror image.
    """

    kind: DistributionKind
    gain: GainParams
    odd: MarginalDistribution
    even: MarginalDistribution
    tail_mass_bound: float

    @property
    def total_mass(self) -> float:
        return self.odd.total_mass * self.even.total_mass

    def _split(self, n_plus: int, n_minus: int) -> tuple[int, int]:
        if self.kind is DistributionKind.PHI_PLUS:
            return n_plus, n_minus
        return n_minus, n_plus

    def log_prob(self, n_plus: int, n_minus: int) -> float:
        n_odd, n_even = self._split(n_plus, n_minus)
        return self.odd.log_prob(n_odd) + self.even.log_prob(n_even)

    def prob(self, n_plus: int, n_minus: int) -> float:
        return float(np.exp(self.log_prob(n_plus, n_minus)))

    def mean_pair(self) -> tuple[float, float]:
        """(mean n_plus, mean n_minus) over the truncated support."""
        if self.kind is DistributionKind.PHI_PLUS:
            return self.odd.mean(), self.even.mean()
        return self.even.mean(), self.odd.mean()

    def support_shape(self) -> tuple[int, int]:
        a, b = len(self.odd.counts), len(self.even.counts)
        return (a, b) if self.kind is DistributionKind.PHI_PLUS else (b, a)

    def items(self) -> Iterator[tuple[PhotonPair, float]]:
        """Lazy iteration over every retained (pair, log-prob) entry.

        Materializes nothing; at high gain the product support is huge,
        so callers should prefer the factorized accessors.
        """
        for n_o, lp_o in self.odd.items():
            for n_e, lp_e in self.even.items():
                n_odd_first = (self.kind is DistributionKind.PHI_PLUS)
                pair = PhotonPair(n_o, n_e) if n_odd_first else PhotonPair(n_e, n_o)
                yield pair, lp_o + lp_e


def joint_distribution(kind: DistributionKind, gp: GainParams,
                       tail_eps: float = DEFAULT_TAIL_EPS,
                       max_index: int = DEFAULT_MAX_INDEX) -> JointDistribution:
    """Joint distribution of the amplified "+" or "-" state.

    The tail budget is split evenly between the two marginal series, so
    the omitted joint mass is at most tail_eps (union bound).
    """
    if not 0.0 < tail_eps < 1.0:
        raise ValueError(f"tail_eps must lie in (0, 1), got {tail_eps!r}")
    if kind not in (DistributionKind.PHI_PLUS, DistributionKind.PHI_MINUS):
        raise ValueError(f"not a joint kind: {kind}")
    odd = marginal_distribution(DistributionKind.SQUEEZED_SINGLE_PHOTON, gp,
                                tail_eps / 2.0, max_index)
    even = marginal_distribution(DistributionKind.SQUEEZED_VACUUM, gp,
                                 tail_eps / 2.0, max_index)
    return JointDistribution(kind=kind, gain=gp, odd=odd, even=even,
                             tail_mass_bound=odd.tail_mass_bound + even.tail_mass_bound)
