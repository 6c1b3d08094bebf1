"""Everything downstream of the simulated shots.

Fringe fitting with a fixed unit angular frequency, the post-selection
filter on |I+ - I-|, state discrimination from the signal ratio or the
photon-number parity, fidelity verdicts against the classical
estimation bound, and the logarithmic visibility-vs-retained-fraction
curve fit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import curve_fit

from .detection import Branch, ShotBatch
from .errors import FitError, InsufficientDataError

CLASSICAL_FIDELITY = 0.75

GUESS_PLUS = 1
GUESS_MINUS = -1
GUESS_UNDECIDED = 0


@dataclass(frozen=True)
class FilterConfig:
    """Discard shots with |I+ - I-| below q."""

    q: float = 0.0

    def __post_init__(self):
        if self.q < 0.0:
            raise ValueError(f"filter threshold must be non-negative, got {self.q!r}")


@dataclass(frozen=True)
class FringeFit:
    """Weighted cosine fit A cos(phi + phase0) + B at unit frequency."""

    amplitude: float
    offset: float
    phase0: float
    visibility: float
    visibility_error: float
    amplitude_error: float
    offset_error: float


@dataclass(frozen=True)
class FringeScanResult:
    """Per-phase means with their fits for one (possibly filtered) scan."""

    phis: np.ndarray
    mean_plus: np.ndarray
    se_plus: np.ndarray
    mean_minus: np.ndarray
    se_minus: np.ndarray
    n_shots: np.ndarray
    fit_plus: FringeFit
    fit_minus: FringeFit
    retained_fraction: float

    @property
    def visibility(self) -> float:
        return self.fit_plus.visibility

    @property
    def visibility_error(self) -> float:
        return self.fit_plus.visibility_error


@dataclass(frozen=True)
class FilterCurvePoint:
    q: float
    retained_fraction: float
    visibility: float
    visibility_error: float
    status: str  # "ok" or "insufficient-data"


@dataclass(frozen=True)
class DiscriminationResult:
    guesses: np.ndarray
    success_rate: float
    decided_fraction: float


def _check_phase_grid(phis: np.ndarray):
    wrapped = np.mod(phis, 2.0 * np.pi)
    distinct = np.unique(np.round(wrapped, 12))
    if len(distinct) < 4:
        raise FitError(f"need at least 4 distinct phases, got {len(distinct)}")
    if distinct.max() - distinct.min() < np.pi - 1e-9:
        raise FitError("phase grid must span at least pi")


def fit_fringe(phis, means, errors=None) -> FringeFit:
    """Least-squares fit of A cos(phi + phase0) + B with the frequency
    pinned to one cycle per 2 pi of input phase.

    With per-point errors the fit is inverse-variance weighted and the
    parameter covariance comes from the known errors; without them the
    covariance is estimated from the residuals.
    """
    phis = np.asarray(phis, dtype=float)
    means = np.asarray(means, dtype=float)
    _check_phase_grid(phis)
    if means.shape != phis.shape:
        raise FitError("phase grid and means must have equal length")

    design = np.column_stack([np.cos(phis), np.sin(phis), np.ones_like(phis)])
    use_weights = errors is not None
    if use_weights:
        errors = np.asarray(errors, dtype=float)
        if errors.shape != phis.shape:
            raise FitError("errors must match the phase grid")
        if not np.all(np.isfinite(errors)) or np.any(errors <= 0.0):
            use_weights = False
    if use_weights:
        w = 1.0 / errors
        xw = design * w[:, None]
        yw = means * w
    else:
        xw = design
        yw = means

    gram = xw.T @ xw
    try:
        cov = np.linalg.inv(gram)
    except np.linalg.LinAlgError as exc:
        raise FitError("degenerate phase grid, normal equations singular") from exc
    beta = cov @ (xw.T @ yw)
    if not use_weights:
        resid = means - design @ beta
        dof = max(len(means) - 3, 1)
        cov = cov * float(resid @ resid) / dof

    a, b, offset = beta
    amplitude = math.hypot(a, b)
    phase0 = math.atan2(-b, a)
    if offset <= 0.0:
        raise FitError(f"non-positive fitted offset {offset:.3g}; no contrast defined")
    visibility = amplitude / offset

    # error propagation through V = sqrt(a^2 + b^2) / B
    if amplitude > 0.0:
        grad = np.array([a / (amplitude * offset), b / (amplitude * offset),
                         -amplitude / offset ** 2])
    else:
        grad = np.array([1.0 / offset, 1.0 / offset, 0.0])
    visibility_error = float(np.sqrt(max(grad @ cov @ grad, 0.0)))
    amp_grad = (np.array([a, b, 0.0]) / amplitude if amplitude > 0.0
                else np.array([1.0, 1.0, 0.0]))
    return FringeFit(
        amplitude=float(amplitude),
        offset=float(offset),
        phase0=float(phase0),
        visibility=float(visibility),
        visibility_error=visibility_error,
        amplitude_error=float(np.sqrt(max(amp_grad @ cov @ amp_grad, 0.0))),
        offset_error=float(np.sqrt(max(cov[2, 2], 0.0))),
    )


def o_filter(batch: ShotBatch, fc: FilterConfig | float) -> tuple[ShotBatch, float]:
    """Retain exactly the shots with |I+ - I-| >= q."""
    q = fc.q if isinstance(fc, FilterConfig) else FilterConfig(float(fc)).q
    if len(batch) == 0:
        return batch, 1.0
    mask = np.abs(batch.i_plus - batch.i_minus) >= q
    return batch.select(mask), float(mask.mean())


def _point_stats(batch: ShotBatch) -> tuple[float, float, float, float]:
    n = len(batch)
    mp = float(batch.i_plus.mean())
    mm = float(batch.i_minus.mean())
    sp = float(batch.i_plus.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    sm = float(batch.i_minus.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return mp, sp, mm, sm


def scan_fringe(points: list[tuple[float, ShotBatch]],
                q: float = 0.0) -> FringeScanResult:
    """Per-phase means (after filtering at q) plus fringe fits."""
    phis, stats, counts = [], [], []
    total = retained = 0
    for phi, batch in points:
        total += len(batch)
        kept, _ = o_filter(batch, q)
        retained += len(kept)
        if len(kept) < 2:
            raise InsufficientDataError(
                f"fewer than 2 shots retained at phi={phi:.4f} (q={q})")
        phis.append(phi)
        stats.append(_point_stats(kept))
        counts.append(len(kept))
    phis = np.asarray(phis)
    stats = np.asarray(stats)
    fit_plus = fit_fringe(phis, stats[:, 0], stats[:, 1] if np.all(stats[:, 1] > 0) else None)
    fit_minus = fit_fringe(phis, stats[:, 2], stats[:, 3] if np.all(stats[:, 3] > 0) else None)
    return FringeScanResult(
        phis=phis, mean_plus=stats[:, 0], se_plus=stats[:, 1],
        mean_minus=stats[:, 2], se_minus=stats[:, 3],
        n_shots=np.asarray(counts, dtype=np.int64),
        fit_plus=fit_plus, fit_minus=fit_minus,
        retained_fraction=retained / total if total else 1.0,
    )


def filtered_visibility_curve(points: list[tuple[float, ShotBatch]],
                              q_list) -> list[FilterCurvePoint]:
    """Visibility and retained fraction for each filter threshold.

    Thresholds that leave fewer than 2 shots at some phase are flagged
    insufficient-data rather than dropped.
    """
    out = []
    for q in q_list:
        try:
            scan = scan_fringe(points, q=q)
        except InsufficientDataError:
            total = sum(len(b) for _, b in points)
            kept = sum(int(np.sum(np.abs(b.i_plus - b.i_minus) >= q))
                       for _, b in points)
            out.append(FilterCurvePoint(q=float(q),
                                        retained_fraction=kept / total if total else 0.0,
                                        visibility=float("nan"),
                                        visibility_error=float("nan"),
                                        status="insufficient-data"))
            continue
        out.append(FilterCurvePoint(q=float(q),
                                    retained_fraction=scan.retained_fraction,
                                    visibility=scan.visibility,
                                    visibility_error=scan.visibility_error,
                                    status="ok"))
    return out


def fit_visibility_log_curve(retained_fractions, visibilities,
                             errors=None) -> tuple[float, float, float]:
    """Fit V(x) = a - b ln(x + c) to the filter curve; returns (a, b, c)."""
    x = np.asarray(retained_fractions, dtype=float)
    y = np.asarray(visibilities, dtype=float)
    keep = np.isfinite(x) & np.isfinite(y)
    x, y = x[keep], y[keep]
    if len(x) < 4:
        raise InsufficientDataError("need at least 4 curve points for the log fit")
    sigma = None
    if errors is not None:
        sigma = np.asarray(errors, dtype=float)[keep]
        if np.any(~np.isfinite(sigma)) or np.any(sigma <= 0.0):
            sigma = None

    def f(xv, a, b, c):
        return a - b * np.log(xv + c)

    p0 = (float(y.min()), max((y.max() - y.min()) / 4.0, 1e-3), 0.05)
    popt, _ = curve_fit(f, x, y, p0=p0, sigma=sigma,
                        bounds=([-np.inf, 0.0, 1e-12], [np.inf, np.inf, np.inf]),
                        maxfev=20000)
    return float(popt[0]), float(popt[1]), float(popt[2])


def _labels(batch: ShotBatch) -> np.ndarray:
    """Ground truth per shot: +1 odd branch, -1 even branch, 0 for
    spontaneous shots, which carry no orthogonal-state identity."""
    return np.where(batch.branch == Branch.STIMULATED_ODD, GUESS_PLUS,
                    np.where(batch.branch == Branch.STIMULATED_EVEN,
                             GUESS_MINUS, GUESS_UNDECIDED))


def _score(guesses: np.ndarray, labels: np.ndarray) -> DiscriminationResult:
    decided = guesses != GUESS_UNDECIDED
    scoreable = decided & (labels != GUESS_UNDECIDED)
    success = float(np.mean(guesses[scoreable] == labels[scoreable])) \
        if scoreable.any() else float("nan")
    return DiscriminationResult(
        guesses=guesses,
        success_rate=success,
        decided_fraction=float(decided.mean()) if len(guesses) else 0.0,
    )


def discriminate(batch: ShotBatch) -> DiscriminationResult:
    """Assign each shot to the + or - state by which signal is larger;
    exact ties stay undecided so results remain deterministic."""
    delta = batch.i_plus - batch.i_minus
    guesses = np.sign(delta).astype(np.int8)
    return _score(guesses, _labels(batch))


def parity_discriminate(batch: ShotBatch) -> DiscriminationResult:
    """Assign by the parity of the detected analysis-mode count.

    Exact on lossless shots; loss scrambles the parity, which is what
    motivates the signal-difference filter."""
    guesses = np.where(batch.det_plus % 2 == 1, GUESS_PLUS, GUESS_MINUS).astype(np.int8)
    return _score(guesses, _labels(batch))


def fidelity_verdict(visibility: float) -> tuple[float, bool]:
    """F = (1 + V)/2 and whether it strictly beats the classical
    estimation bound of 3/4."""
    if not 0.0 <= visibility <= 1.0:
        raise ValueError(f"visibility must lie in [0, 1], got {visibility!r}")
    fidelity = 0.5 * (1.0 + visibility)
    return fidelity, fidelity > CLASSICAL_FIDELITY
