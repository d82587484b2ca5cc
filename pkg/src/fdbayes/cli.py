"""Command-line front end: ``simulate``, ``identify``, ``theodorsen``, ``diagnose``.

Exit codes: 0 success, 2 configuration error, 3 data error,
4 non-convergence, 5 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .aeroelastic import THETA_NAMES, SingularSystemError, reduced_frequencies
from .config import ConfigError, load_config
from .likelihood import SingularExpectedError
from .pipeline import identify, simulate_from_config
from .records import (
    DataError,
    read_chain_csv,
    read_timeseries_csv,
    write_autocorrelation_csv,
    write_chain_csv,
    write_json,
    write_overlay_csv,
    write_theodorsen_csv,
    write_timeseries_csv,
)
from .sampler import InitializationError, chain_diagnostics
from .spectral import write_band_psd_csv
from .synth import UnstableSystemError
from .theodorsen import fg, flat_plate_arrays, k_from_reduced

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NOT_CONVERGED = 4
EXIT_NUMERICAL = 5

log = logging.getLogger("fdbayes")

NUMERICAL_ERRORS = (
    SingularSystemError, SingularExpectedError, UnstableSystemError,
    InitializationError, FloatingPointError, np.linalg.LinAlgError,
)


def _seed_arg(text):
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _config(args):
    if args.config is None:
        raise ConfigError("--config is required")
    cfg = load_config(args.config)
    return cfg.with_seed(args.seed) if args.seed is not None else cfg


def sidecar(path, suffix):
    p = Path(path)
    return p.with_name(p.stem + suffix)


def cmd_simulate(args):
    cfg = _config(args)
    if cfg.simulation is None:
        raise ConfigError("config has no 'simulation' section")
    try:
        ts = simulate_from_config(cfg)
    except ValueError as exc:
        raise ConfigError(f"simulation: {exc}") from exc
    write_timeseries_csv(args.out, ts)
    write_json(sidecar(args.out, ".meta.json"), {
        "n_samples": len(ts), "dt_s": ts.dt, "seed": cfg.seed,
        "truth_fds": cfg.truth_fds().as_dict(), "config": cfg.echo(),
    })
    log.info("wrote %d samples to %s", len(ts), args.out)
    return EXIT_OK


def cmd_identify(args):
    cfg = _config(args)
    cfg.require_bands()
    if args.data is None:
        raise ConfigError("--data is required")
    ts = read_timeseries_csv(args.data, dt=cfg.record_dt())
    try:
        result = identify(ts, cfg)
    except NUMERICAL_ERRORS:
        raise
    except RuntimeError as exc:
        raise FloatingPointError(str(exc)) from exc
    except ValueError as exc:
        # segment-length and band-range problems stem from the record
        raise DataError(str(exc)) from exc
    doc = result.to_document()
    write_json(args.out, doc)
    write_overlay_csv(sidecar(args.out, ".overlay.csv"), result.reconstruction())
    write_band_psd_csv(sidecar(args.out, ".psd.csv"), result.psd, result.ctx.bands)
    if args.chains:
        write_chain_csv(args.chains, result.chain)
    for name in THETA_NAMES[:8]:
        s = result.summary.params[name]
        log.info("%s: mpv %.4f  95%% [%.4f, %.4f]", name, s.mpv, s.q025, s.q975)
    if not result.converged:
        log.warning("autocorrelation criterion not met; results flagged")
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def _k_grid(args):
    ks = []
    if args.k:
        ks.extend(float(v) for v in args.k.split(","))
    if args.k_log:
        lo, hi, n = args.k_log
        ks.extend(np.geomspace(float(lo), float(hi), int(n)))
    for triple in args.ubf or ():
        try:
            U, B, f = (float(v) for v in triple.split(","))
        except ValueError:
            raise ConfigError(f"--ubf expects U,B,f, got {triple!r}") from None
        if not (U > 0 and B > 0 and f > 0):
            raise ConfigError(f"--ubf values must be > 0, got {triple!r}")
        ks.append(float(k_from_reduced(2 * np.pi * f * B / U)))
    if not ks and args.config:
        cfg = _config(args)
        ks.extend(k_from_reduced(reduced_frequencies(cfg.structural, cfg.flow)))
    if not ks:
        raise ConfigError("give --k, --k-log, --ubf or --config")
    return np.asarray(ks)


def cmd_theodorsen(args):
    k = _k_grid(args)
    try:
        F, G = fg(k)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    write_theodorsen_csv(args.out, k, F, G, flat_plate_arrays(k))
    return EXIT_OK


def cmd_diagnose(args):
    if args.data is None:
        raise ConfigError("--data (chain CSV) is required")
    chain = read_chain_csv(args.data)
    max_lag = args.max_lag
    curves, lags, converged = chain_diagnostics(chain, max_lag)
    zero_var = [n for n, c in zip(THETA_NAMES, curves) if c is None]
    write_autocorrelation_csv(args.out, curves)
    verdict = "converged" if converged else "not converged"
    write_json(sidecar(args.out, ".json"), {
        "verdict": verdict,
        "convergence_lags": dict(zip(THETA_NAMES, lags)),
        "zero_variance": zero_var,
        "threshold": 0.05,
        "n_kept": int(chain.positions.shape[0]),
        "n_walkers": int(chain.positions.shape[1]),
    })
    log.info("verdict: %s", verdict)
    return EXIT_OK if converged else EXIT_NOT_CONVERGED


def build_parser():
    parser = argparse.ArgumentParser(prog="fdbayes", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--out", required=True, help="output path")
    common.add_argument("--seed", type=_seed_arg, help="override the config seed")
    common.add_argument("--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="synthetic buffeting record (CSV t,h,alpha)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("identify", parents=[common], help="posterior of FDs and force PSDs")
    p.add_argument("--data", help="CSV time series")
    p.add_argument("--chains", help="optional chain CSV dump")
    p.set_defaults(func=cmd_identify)

    p = sub.add_parser("theodorsen", parents=[common], help="flat-plate FD table")
    p.add_argument("--k", help="comma-separated half reduced frequencies")
    p.add_argument("--k-log", nargs=3, metavar=("LO", "HI", "N"), help="log-spaced k grid")
    p.add_argument("--ubf", action="append", metavar="U,B,F", help="k from wind speed, width, frequency (Hz)")
    p.set_defaults(func=cmd_theodorsen)

    p = sub.add_parser("diagnose", parents=[common], help="autocorrelation diagnostics of a chain CSV")
    p.add_argument("--data", help="chain CSV written by identify --chains")
    p.add_argument("--max-lag", type=int, default=200)
    p.set_defaults(func=cmd_diagnose)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
