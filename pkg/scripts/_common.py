"""Shared helpers for the experiment scripts."""

import json
from pathlib import Path

import numpy as np

from fdbayes.aeroelastic import FD_NAMES, FlowCondition, system_matrices, to_modified
from fdbayes.records import write_json, write_overlay_csv
from fdbayes.synth import stability_check
from fdbayes.theodorsen import band_scale, flat_plate_fds_at, recovery_tolerance
from fdbayes.pipeline import truth_vector


def aeroelastic_modes(p, U):
    """Damped frequencies (Hz) and damping ratios of the flat-plate coupled system."""
    sm = system_matrices(to_modified(flat_plate_fds_at(p, FlowCondition(U)), p), p)
    eig = stability_check(sm).eigenvalues
    eig = eig[eig.imag > 0]
    eig = eig[np.argsort(eig.imag)]
    return eig.imag / (2 * np.pi), -eig.real / np.abs(eig)


def recovery_report(cfg, result, U_range):
    truth = dict(zip(FD_NAMES, truth_vector(cfg)[:8]))
    tol = recovery_tolerance(truth, band_scale(cfg.structural, *U_range))
    rows = []
    for n in FD_NAMES:
        s = result.summary.params[n]
        rows.append({
            "fd": n, "truth": truth[n], "mpv": s.mpv, "sd": s.sd, "q025": s.q025, "q975": s.q975,
            "tolerance": tol[n], "within": abs(s.mpv - truth[n]) <= tol[n],
            "covered": s.q025 <= truth[n] <= s.q975,
        })
    return rows


def print_report(rows, result):
    print(f"{'fd':>3} {'truth':>9} {'mpv':>9} {'sd':>8} {'95% interval':>21} {'tol':>7}  ok cov")
    for r in rows:
        print(f"{r['fd']:>3} {r['truth']:9.4f} {r['mpv']:9.4f} {r['sd']:8.4f} "
              f"[{r['q025']:8.4f}, {r['q975']:8.4f}] {r['tolerance']:7.4f}  "
              f"{'y' if r['within'] else 'n':>2} {'y' if r['covered'] else 'n':>3}")
    rec = result.reconstruction()
    errs = [rec.band_relative_error(b, c) for b in (1, 2) for c in (0, 1)]
    print("reconstruction error (band1 hh, aa; band2 hh, aa):", " ".join(f"{e:.3f}" for e in errs))
    print(f"acceptance {result.chain.acceptanceRate:.3f}; converged {result.converged}; "
          f"lags {result.summary.convergenceLags}")
    return errs


def save(out_dir, stem, cfg, result, rows, errs):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    doc = result.to_document()
    doc["recovery"] = rows
    doc["reconstruction_error"] = errs
    write_json(out / f"{stem}.json", doc)
    write_overlay_csv(out / f"{stem}.overlay.csv", result.reconstruction())
    print(f"wrote {out / (stem + '.json')}")
