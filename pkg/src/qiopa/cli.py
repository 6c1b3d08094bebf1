"""Command-line front end.

Subcommands: fringe | gain-sweep | distribution | filter-sweep |
oracle-check.  Each run writes CSV outputs plus a plain-text manifest
whose config echo round-trips through the config parser, so a manifest
pins everything needed to reproduce its outputs byte for byte.

Exit codes: 0 success, 2 config error, 3 numerical failure
(truncation or cutoff), 4 insufficient data.
"""

from __future__ import annotations

import argparse
import hashlib
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (FilterCurvePoint, fidelity_verdict, fit_fringe,
                       fit_visibility_log_curve, filtered_visibility_curve,
                       scan_fringe)
from .config import (KEY_REGISTRY, PRESETS, experiment_config,
                     resolve_settings, settings_lines)
from .detection import run_experiment
from .errors import (ConfigError, CutoffError, InsufficientDataError,
                     QiopaError, TruncationError)
from .fock import DistributionKind, joint_distribution, make_gain_params
from .model import (clone_number, visibility_effective, visibility_ideal,
                    visibility_no_coherence)
from .oracle import (check_phase_covariance, eq2_amplitude_deviation,
                     joint_probability_deviation)

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_INSUFFICIENT = 4

DIST_KINDS = {
    "phi-plus": DistributionKind.PHI_PLUS,
    "phi-minus": DistributionKind.PHI_MINUS,
}
MAX_DIST_ROWS = 20_000_000


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        return f"{x:.17g}"
    return str(x)


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _write_manifest(out_dir: Path, command: str, settings: dict,
                    outputs: list[Path], duration: float,
                    extra: dict | None = None) -> Path:
    lines = [
        f"artifact = qiopa {__version__}",
        f"schema_version = {SCHEMA_VERSION}",
        f"command = {command}",
        f"duration_seconds = {duration:.3f}",
        f"seed = {settings['run.seed']}",
    ]
    lines += [f"config.{line}" for line in settings_lines(settings)]
    if extra:
        lines += [f"{key} = {_fmt(value)}" for key, value in extra.items()]
    for path in outputs:
        lines.append(f"output.{path.name}.sha256 = {_sha256(path)}")
    manifest = out_dir / "manifest.txt"
    manifest.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return manifest


def _parse_float_list(text: str, flag: str) -> list[float]:
    try:
        values = [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise ConfigError(f"{flag} expects a comma-separated list of numbers") from exc
    if not values:
        raise ConfigError(f"{flag} must contain at least one value")
    return values


def cmd_fringe(args) -> int:
    settings = resolve_settings(args.config, args.preset, args.seed)
    cfg = experiment_config(settings)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    points = run_experiment(cfg, threads=args.threads)
    scan = scan_fringe(points, q=cfg.filter_q)
    rows = [
        (phi, mp, sp, mm, sm, int(n))
        for phi, mp, sp, mm, sm, n in zip(scan.phis, scan.mean_plus, scan.se_plus,
                                          scan.mean_minus, scan.se_minus, scan.n_shots)
    ]
    csv_path = out_dir / "fringe.csv"
    _write_csv(csv_path, ["phi_rad", "mean_I_plus", "se_plus",
                          "mean_I_minus", "se_minus", "n_shots"], rows)
    extra = {
        "fit.visibility_plus": scan.fit_plus.visibility,
        "fit.visibility_plus_err": scan.fit_plus.visibility_error,
        "fit.visibility_minus": scan.fit_minus.visibility,
        "fit.phase_plus": scan.fit_plus.phase0,
        "fit.phase_minus": scan.fit_minus.phase0,
        "retained_fraction": scan.retained_fraction,
    }
    _write_manifest(out_dir, "fringe", settings, [csv_path],
                    time.perf_counter() - start, extra)
    return EXIT_OK


def cmd_gain_sweep(args) -> int:
    settings = resolve_settings(args.config, args.preset, args.seed)
    g_values = _parse_float_list(args.g_values, "--g-values")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    rows = []
    for index, g in enumerate(g_values):
        if g < 0:
            raise ConfigError(f"gain values must be non-negative, got {g}")
        point = dict(settings)
        point["gain.g"] = g
        # decorrelate the sweep points without losing reproducibility
        point["run.seed"] = (settings["run.seed"] + index) % 2 ** 64
        cfg = experiment_config(point)
        gp = cfg.gain
        scan = scan_fringe(run_experiment(cfg, threads=args.threads), q=cfg.filter_q)
        rows.append((
            g, gp.m_bar, clone_number(gp), clone_number(gp, cfg.p),
            visibility_ideal(gp), visibility_effective(gp, cfg.p),
            visibility_no_coherence(gp),
            scan.fit_plus.visibility, scan.fit_plus.visibility_error,
        ))
    csv_path = out_dir / "gain_sweep.csv"
    _write_csv(csv_path, ["g", "m_bar", "clones_pure", "clones_mixture",
                          "V_th", "V_eff", "V_nc", "V_simulated", "V_sim_err"], rows)
    _write_manifest(out_dir, "gain-sweep", settings, [csv_path],
                    time.perf_counter() - start,
                    {"sweep.g_values": ",".join(_fmt(g) for g in g_values)})
    return EXIT_OK


def cmd_distribution(args) -> int:
    settings = resolve_settings(args.config, args.preset, args.seed)
    if args.tail_eps is not None:
        if not 0.0 < args.tail_eps < 1.0:
            raise ConfigError("--tail-eps must lie in (0, 1)")
        settings["dist.tail_eps"] = args.tail_eps
    if args.g is not None:
        if args.g < 0:
            raise ConfigError("--g must be non-negative")
        settings["gain.g"] = args.g
    kind = DIST_KINDS.get(args.kind)
    if kind is None:
        raise ConfigError(f"--kind must be one of {sorted(DIST_KINDS)}")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    gp = make_gain_params(settings["gain.g"])
    dist = joint_distribution(kind, gp, settings["dist.tail_eps"],
                              settings["dist.max_index"])
    n_rows = len(dist.odd.counts) * len(dist.even.counts)
    if n_rows > MAX_DIST_ROWS:
        raise TruncationError(
            f"joint support holds {n_rows} entries; too large to emit as CSV "
            f"(cap {MAX_DIST_ROWS}). Raise --tail-eps for a coarser table.")

    log_po = dist.odd.log_probs
    log_pe = dist.even.log_probs
    probs = np.exp(np.add.outer(log_po, log_pe))
    counts_odd = dist.odd.counts
    counts_even = dist.even.counts

    def rows():
        for i, n_o in enumerate(counts_odd):
            for j, n_e in enumerate(counts_even):
                if kind is DistributionKind.PHI_PLUS:
                    yield (int(n_o), int(n_e), float(probs[i, j]))
                else:
                    yield (int(n_e), int(n_o), float(probs[i, j]))

    csv_path = out_dir / "dist.csv"
    _write_csv(csv_path, ["n_plus", "n_minus", "probability"], rows())
    _write_manifest(out_dir, "distribution", settings, [csv_path],
                    time.perf_counter() - start,
                    {"dist.kind": args.kind,
                     "dist.tail_mass_bound": dist.tail_mass_bound,
                     "dist.total_mass": dist.total_mass})
    return EXIT_OK


def cmd_filter_sweep(args) -> int:
    settings = resolve_settings(args.config, args.preset, args.seed)
    q_values = _parse_float_list(args.q_values, "--q-values")
    if any(q < 0 for q in q_values):
        raise ConfigError("filter thresholds must be non-negative")
    cfg = experiment_config(settings)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    points = run_experiment(cfg, threads=args.threads)
    curve = filtered_visibility_curve(points, q_values)
    if all(pt.status != "ok" for pt in curve):
        raise InsufficientDataError("every filter threshold left too few shots")
    rows = []
    for pt in curve:
        if pt.status == "ok":
            fid, beats = fidelity_verdict(min(max(pt.visibility, 0.0), 1.0))
        else:
            fid, beats = float("nan"), False
        rows.append((pt.q, pt.retained_fraction, pt.visibility,
                     pt.visibility_error, fid, beats, pt.status))
    csv_path = out_dir / "filter_sweep.csv"
    _write_csv(csv_path, ["q", "retained_fraction", "visibility",
                          "visibility_err", "F", "beats_classical", "status"], rows)
    extra = {}
    good = [pt for pt in curve if pt.status == "ok"]
    try:
        a, b, c = fit_visibility_log_curve(
            [pt.retained_fraction for pt in good],
            [pt.visibility for pt in good],
            [pt.visibility_error for pt in good])
        extra.update({"fit.a": a, "fit.b": b, "fit.c": c})
    except (InsufficientDataError, RuntimeError):
        extra["fit.status"] = "did-not-converge"
    _write_manifest(out_dir, "filter-sweep", settings, [csv_path],
                    time.perf_counter() - start, extra)
    return EXIT_OK


ORACLE_AMPLITUDE_TOL = 1e-6
ORACLE_COVARIANCE_TOL = 1e-8


def cmd_oracle_check(args) -> int:
    g_values = _parse_float_list(args.g_values, "--g-values")
    if args.dim < 2:
        raise ConfigError("--dim must be at least 2")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    lines = [f"oracle check: dim={args.dim}"]
    worst = 0.0
    failed = False
    for g in g_values:
        amp_dev = eq2_amplitude_deviation(g, args.dim)
        prob_dev = joint_probability_deviation(g, args.dim)
        cov_devs = [check_phase_covariance(g, args.dim, phi)
                    for phi in (math.pi / 4.0, math.pi / 2.0)]
        ok = (amp_dev < ORACLE_AMPLITUDE_TOL
              and prob_dev < ORACLE_AMPLITUDE_TOL
              and max(cov_devs) < ORACLE_COVARIANCE_TOL)
        failed |= not ok
        worst = max(worst, amp_dev, prob_dev, *cov_devs)
        lines.append(
            f"g={g}: amplitude_dev={amp_dev:.3e} probability_dev={prob_dev:.3e} "
            f"covariance_dev={max(cov_devs):.3e} [{'ok' if ok else 'FAIL'}]")
    lines.append(f"max_deviation = {worst:.3e}")
    report = "\n".join(lines)
    print(report)
    report_path = Path(out_dir) / "oracle_check.txt"
    report_path.write_text(report + "\n", encoding="utf-8")
    settings = resolve_settings(None, "paper", None)
    _write_manifest(out_dir, "oracle-check", settings, [report_path],
                    time.perf_counter() - start,
                    {"oracle.g_values": ",".join(_fmt(g) for g in g_values),
                     "oracle.dim": args.dim})
    if failed:
        print("oracle check FAILED", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qiopa",
        description="Simulator and analysis toolkit for high-gain amplification "
                    "of an injected polarization qubit")
    parser.add_argument("--version", action="version",
                        version=f"qiopa {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", type=Path, default=None,
                       help="flat key-value config file")
        p.add_argument("--out", type=Path, default=Path("."),
                       help="output directory")
        p.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
        p.add_argument("--threads", type=int, default=1,
                       help="worker threads for the phase points")
        p.add_argument("--preset", choices=sorted(PRESETS), default="paper",
                       help="base parameter preset")

    p = sub.add_parser("fringe", help="mean signals versus input phase")
    common(p)
    p.set_defaults(func=cmd_fringe)

    p = sub.add_parser("gain-sweep", help="closed forms and simulated "
                                          "visibility over a gain list")
    common(p)
    p.add_argument("--g-values", required=True,
                   help="comma-separated gain values")
    p.set_defaults(func=cmd_gain_sweep)

    p = sub.add_parser("distribution", help="joint photon-number table")
    common(p)
    p.add_argument("--g", type=float, default=None, help="gain (default: config)")
    p.add_argument("--kind", choices=sorted(DIST_KINDS), default="phi-plus")
    p.add_argument("--tail-eps", type=float, default=None)
    p.set_defaults(func=cmd_distribution)

    p = sub.add_parser("filter-sweep", help="visibility versus retained "
                                            "fraction under the signal filter")
    common(p)
    p.add_argument("--q-values", required=True,
                   help="comma-separated filter thresholds")
    p.set_defaults(func=cmd_filter_sweep)

    p = sub.add_parser("oracle-check", help="validate closed forms against "
                                            "truncated-Fock evolution")
    common(p)
    p.add_argument("--g-values", default="0.2,0.5,0.8,1.0")
    p.add_argument("--dim", type=int, default=60, help="per-mode Fock cutoff")
    p.set_defaults(func=cmd_oracle_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (TruncationError, CutoffError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except InsufficientDataError as exc:
        print(f"insufficient data: {exc}", file=sys.stderr)
        return EXIT_INSUFFICIENT
    except QiopaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
