"""Monte Carlo generation of heralded single-shot detection records.

Each trial: with probability 1 - p the herald fails to stimulate and
both analysis modes carry independent squeezed vacuum; otherwise the
injected qubit (phase flipped to phi + pi with probability (1 - v_in)/2)
splits into the odd or even branch with the equatorial branch weights,
the stimulated mode drawing from the squeezed-single-photon table and
the other from squeezed vacuum.  Detection is independent binomial
thinning at efficiency eta, followed by analog signal formation.

Randomness comes from counter-based Philox streams keyed by
(seed, phase-index); all draws per phase point happen as vectorized
calls in a fixed order, so results are bit-reproducible and independent
of how points are scheduled across threads.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from .fock import (DEFAULT_MAX_INDEX, DEFAULT_TAIL_EPS, DistributionKind,
                   GainParams, PhotonPair, make_gain_params,
                   marginal_distribution)
from .model import branch_weights


class Branch(IntEnum):
    SPONTANEOUS = 0
    STIMULATED_ODD = 1
    STIMULATED_EVEN = 2


@dataclass(frozen=True)
class DetectionConfig:
    """Detector and signal-formation parameters."""

    eta: float = 1.0
    analog_gain: float = 1.0
    noise_sigma: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"eta must lie in [0, 1], got {self.eta!r}")
        if not self.analog_gain > 0.0:
            raise ValueError(f"analog_gain must be positive, got {self.analog_gain!r}")
        if self.noise_sigma < 0.0:
            raise ValueError(f"noise_sigma must be non-negative, got {self.noise_sigma!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    """Full parameter set of one simulated fringe experiment."""

    g: float = 4.34
    p: float = 0.40
    v_in: float = 0.784
    detection: DetectionConfig = field(default_factory=DetectionConfig)
    phi_grid: tuple[float, ...] = ()
    shots_per_point: int = 2500
    seed: int = 0
    tail_eps: float = DEFAULT_TAIL_EPS
    max_index: int = DEFAULT_MAX_INDEX
    filter_q: float = 0.0

    def __post_init__(self):
        if not self.g >= 0.0:
            raise ValueError(f"g must be non-negative, got {self.g!r}")
        for name in ("p", "v_in"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value!r}")
        if len(self.phi_grid) == 0:
            raise ValueError("phi_grid must not be empty")
        if self.shots_per_point < 1:
            raise ValueError("shots_per_point must be at least 1")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must fit an unsigned 64-bit integer")
        if not 0.0 < self.tail_eps < 1.0:
            raise ValueError(f"tail_eps must lie in (0, 1), got {self.tail_eps!r}")
        if self.max_index < 1:
            raise ValueError("max_index must be positive")
        if self.filter_q < 0.0:
            raise ValueError("filter_q must be non-negative")

    @property
    def gain(self) -> GainParams:
        return make_gain_params(self.g)


@dataclass(frozen=True)
class Shot:
    """One heralded trial."""

    true_branch: Branch
    true_counts: PhotonPair
    detected_counts: PhotonPair
    signals: tuple[float, float]


class ShotBatch:
    """Column-wise store of many shots; indexable like a sequence of Shot."""

    __slots__ = ("branch", "true_plus", "true_minus", "det_plus", "det_minus",
                 "i_plus", "i_minus")

    def __init__(self, branch, true_plus, true_minus, det_plus, det_minus,
                 i_plus, i_minus):
        self.branch = np.asarray(branch, dtype=np.int8)
        self.true_plus = np.asarray(true_plus, dtype=np.int64)
        self.true_minus = np.asarray(true_minus, dtype=np.int64)
        self.det_plus = np.asarray(det_plus, dtype=np.int64)
        self.det_minus = np.asarray(det_minus, dtype=np.int64)
        self.i_plus = np.asarray(i_plus, dtype=np.float64)
        self.i_minus = np.asarray(i_minus, dtype=np.float64)
        for arr in (self.branch, self.true_plus, self.true_minus,
                    self.det_plus, self.det_minus, self.i_plus, self.i_minus):
            if arr.shape != self.branch.shape:
                raise ValueError("all shot columns must share one length")
            arr.flags.writeable = False

    def __len__(self) -> int:
        return len(self.branch)

    def __getitem__(self, index) -> Shot:
        i = int(index)
        return Shot(
            true_branch=Branch(int(self.branch[i])),
            true_counts=PhotonPair(int(self.true_plus[i]), int(self.true_minus[i])),
            detected_counts=PhotonPair(int(self.det_plus[i]), int(self.det_minus[i])),
            signals=(float(self.i_plus[i]), float(self.i_minus[i])),
        )

    def select(self, mask: np.ndarray) -> "ShotBatch":
        return ShotBatch(self.branch[mask], self.true_plus[mask],
                         self.true_minus[mask], self.det_plus[mask],
                         self.det_minus[mask], self.i_plus[mask],
                         self.i_minus[mask])


@dataclass(frozen=True)
class SamplingTables:
    """Inverse-CDF tables for the two marginal photon-number series."""

    gain: GainParams
    odd_counts: np.ndarray
    odd_cdf: np.ndarray
    even_counts: np.ndarray
    even_cdf: np.ndarray

    @classmethod
    def from_gain(cls, gp: GainParams, tail_eps: float = DEFAULT_TAIL_EPS,
                  max_index: int = DEFAULT_MAX_INDEX) -> "SamplingTables":
        odd = marginal_distribution(DistributionKind.SQUEEZED_SINGLE_PHOTON,
                                    gp, tail_eps, max_index)
        even = marginal_distribution(DistributionKind.SQUEEZED_VACUUM,
                                     gp, tail_eps, max_index)
        return cls(gain=gp,
                   odd_counts=odd.counts,
                   odd_cdf=np.cumsum(np.exp(odd.log_probs)),
                   even_counts=even.counts,
                   even_cdf=np.cumsum(np.exp(even.log_probs)))

    def draw_odd(self, u: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(self.odd_cdf, u * self.odd_cdf[-1], side="right")
        return self.odd_counts[idx]

    def draw_even(self, u: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(self.even_cdf, u * self.even_cdf[-1], side="right")
        return self.even_counts[idx]


def point_stream(seed: int, point_index: int) -> np.random.Generator:
    """Philox stream for one phase point, keyed by (seed, index)."""
    return np.random.Generator(np.random.Philox(key=[seed, point_index]))


def sample_true_counts(phi: float, gp: GainParams, p: float, v_in: float,
                       rng: np.random.Generator,
                       tables: SamplingTables | None = None,
                       phi_a: float = 0.0) -> tuple[Branch, PhotonPair]:
    """Single-shot reference sampler (the batch path is vectorized)."""
    if tables is None:
        tables = SamplingTables.from_gain(gp)
    u = rng.random(3)
    if u[0] >= p:
        branch = Branch.SPONTANEOUS
    else:
        phi_eff = phi + np.pi if u[1] < (1.0 - v_in) / 2.0 else phi
        w = branch_weights(phi_eff, phi_a).w_odd
        branch = Branch.STIMULATED_ODD if u[2] < w else Branch.STIMULATED_EVEN
    u_plus, u_minus = rng.random(2)
    if branch is Branch.STIMULATED_ODD:
        pair = PhotonPair(int(tables.draw_odd(u_plus)), int(tables.draw_even(u_minus)))
    elif branch is Branch.STIMULATED_EVEN:
        pair = PhotonPair(int(tables.draw_even(u_plus)), int(tables.draw_odd(u_minus)))
    else:
        pair = PhotonPair(int(tables.draw_even(u_plus)), int(tables.draw_even(u_minus)))
    return branch, pair


def apply_loss(counts: PhotonPair, eta: float,
               rng: np.random.Generator) -> PhotonPair:
    """Independent binomial thinning of each mode at efficiency eta."""
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta must lie in [0, 1], got {eta!r}")
    if eta == 1.0:
        return PhotonPair(*counts)
    if eta == 0.0:
        return PhotonPair(0, 0)
    return PhotonPair(int(rng.binomial(counts[0], eta)),
                      int(rng.binomial(counts[1], eta)))


def form_signals(detected: PhotonPair, cfg: DetectionConfig,
                 rng: np.random.Generator) -> tuple[float, float]:
    """Analog signals: gain * count + optional Gaussian noise, clamped
    at zero (photomultiplier outputs cannot go negative)."""
    i_plus = cfg.analog_gain * detected[0]
    i_minus = cfg.analog_gain * detected[1]
    if cfg.noise_sigma > 0.0:
        noise = rng.normal(0.0, cfg.noise_sigma, size=2)
        i_plus = max(i_plus + noise[0], 0.0)
        i_minus = max(i_minus + noise[1], 0.0)
    return float(i_plus), float(i_minus)


def sample_shot_batch(phi: float, n_shots: int, p: float, v_in: float,
                      detection: DetectionConfig, tables: SamplingTables,
                      rng: np.random.Generator,
                      phi_a: float = 0.0) -> ShotBatch:
    """Vectorized sampler for all shots of one phase point.

    Draw order is fixed: five uniform blocks (branch selection and the
    two inverse-CDF lookups), then the two thinning draws, then noise.
    """
    u = rng.random((5, n_shots))
    stimulated = u[0] < p
    flipped = u[1] < (1.0 - v_in) / 2.0
    phi_eff = np.where(flipped, phi + np.pi, phi)
    w_odd = np.cos((phi_eff - phi_a) / 2.0) ** 2
    odd = stimulated & (u[2] < w_odd)
    even = stimulated & ~odd

    true_plus = np.where(odd, tables.draw_odd(u[3]), tables.draw_even(u[3]))
    true_minus = np.where(even, tables.draw_odd(u[4]), tables.draw_even(u[4]))
    branch = np.where(odd, int(Branch.STIMULATED_ODD),
                      np.where(even, int(Branch.STIMULATED_EVEN),
                               int(Branch.SPONTANEOUS)))

    if detection.eta == 1.0:
        det_plus, det_minus = true_plus, true_minus
    elif detection.eta == 0.0:
        det_plus = np.zeros_like(true_plus)
        det_minus = np.zeros_like(true_minus)
    else:
        det_plus = rng.binomial(true_plus, detection.eta)
        det_minus = rng.binomial(true_minus, detection.eta)

    i_plus = detection.analog_gain * det_plus.astype(np.float64)
    i_minus = detection.analog_gain * det_minus.astype(np.float64)
    if detection.noise_sigma > 0.0:
        noise = rng.normal(0.0, detection.noise_sigma, size=(2, n_shots))
        i_plus = np.maximum(i_plus + noise[0], 0.0)
        i_minus = np.maximum(i_minus + noise[1], 0.0)

    return ShotBatch(branch, true_plus, true_minus, det_plus, det_minus,
                     i_plus, i_minus)


def run_experiment(cfg: ExperimentConfig,
                   threads: int = 1) -> list[tuple[float, ShotBatch]]:
    """Simulate every phase point of the configured scan.

    Deterministic for a fixed config and seed; the per-point streams
    make the result independent of thread scheduling.
    """
    tables = SamplingTables.from_gain(cfg.gain, cfg.tail_eps, cfg.max_index)

    def one_point(index_phi):
        index, phi = index_phi
        rng = point_stream(cfg.seed, index)
        return phi, sample_shot_batch(phi, cfg.shots_per_point, cfg.p,
                                      cfg.v_in, cfg.detection, tables, rng)

    jobs = list(enumerate(cfg.phi_grid))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one_point, jobs))
    return [one_point(job) for job in jobs]
