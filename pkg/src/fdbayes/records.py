"""CSV readers and writers for time series, chains, oracle tables and PSD
overlays. Floats are written with ``repr`` so every file round-trips exactly."""

from __future__ import annotations

import csv
import json

import numpy as np

from .aeroelastic import THETA_NAMES
from .sampler import EnsembleChain
from .synth import TimeSeries

DT_TOLERANCE = 1e-9


class DataError(ValueError):
    """Malformed or inconsistent input data."""


def _fmt(v):
    return repr(float(v))


def _read_rows(path, expected_headers):
    """Header plus numeric rows; errors name the offending line and column."""
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if tuple(header) not in expected_headers:
            options = " or ".join(",".join(h) for h in expected_headers)
            raise DataError(f"{path}, line 1: header {','.join(header)!r}, expected {options}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DataError(
                    f"{path}, line {lineno}: expected {len(header)} fields, got {len(row)}"
                )
            try:
                rows.append([float(v) for v in row])
            except ValueError:
                col = next(i for i, v in enumerate(row) if not _is_float(v))
                raise DataError(
                    f"{path}, line {lineno}, column {col + 1} ({header[col]}): "
                    f"not a number: {row[col]!r}"
                ) from None
    data = np.array(rows, dtype=float).reshape(-1, len(header))
    if not np.all(np.isfinite(data)):
        bad = int(np.nonzero(~np.isfinite(data).all(axis=1))[0][0])
        raise DataError(f"{path}, line {bad + 2}: non-finite value")
    return header, data


def _is_float(v):
    try:
        float(v)
    except ValueError:
        return False
    return True


# -------------------------------------------------------------- time series

TS_HEADERS = (("t", "h", "alpha"), ("h", "alpha"))


def write_timeseries_csv(path, ts: TimeSeries):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TS_HEADERS[0])
        for t, h, a in zip(ts.t, ts.h, ts.alpha):
            w.writerow((_fmt(t), _fmt(h), _fmt(a)))


def read_timeseries_csv(path, dt=None) -> TimeSeries:
    """Read ``t,h,alpha`` (or ``h,alpha`` with ``dt`` given).

    With a time column, its uniform spacing sets dt; a configured ``dt`` that
    differs by more than 1e-9 s is an error.
    """
    header, data = _read_rows(path, TS_HEADERS)
    if data.shape[0] < 2:
        raise DataError(f"{path}: need at least 2 samples")
    if header[0] == "t":
        steps = np.diff(data[:, 0])
        csv_dt = (data[-1, 0] - data[0, 0]) / (data.shape[0] - 1)
        if not csv_dt > 0:
            raise DataError(f"{path}: time column is not increasing")
        bad = np.nonzero(np.abs(steps - csv_dt) > DT_TOLERANCE + 1e-12 * abs(data[-1, 0]))[0]
        if bad.size:
            raise DataError(f"{path}, line {int(bad[0]) + 3}: non-uniform time step")
        if dt is not None and abs(csv_dt - dt) > DT_TOLERANCE:
            raise DataError(f"{path}: time step {csv_dt!r} s differs from configured dt {dt!r} s")
        dt = dt if dt is not None else csv_dt
        h, a = data[:, 1], data[:, 2]
    else:
        if dt is None:
            raise DataError(f"{path}: no time column and no dt configured")
        h, a = data[:, 0], data[:, 1]
    return TimeSeries(dt=float(dt), h=h.copy(), alpha=a.copy())


def write_json(path, doc):
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, default=_json_default)
        fh.write("\n")


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


# ------------------------------------------------------------------- chains

CHAIN_COLUMNS = ("step", "walker") + THETA_NAMES + ("log_post",)


def write_chain_csv(path, chain: EnsembleChain):
    """One row per retained sample: sweep index, walker index, 12 values, log-posterior."""
    n_kept, W, _ = chain.positions.shape
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CHAIN_COLUMNS)
        for s in range(n_kept):
            for k in range(W):
                w.writerow([s, k, *map(_fmt, chain.positions[s, k]), _fmt(chain.logPostTrace[s, k])])


def read_chain_csv(path) -> EnsembleChain:
    _, data = _read_rows(path, (CHAIN_COLUMNS,))
    if data.shape[0] == 0:
        raise DataError(f"{path}: no samples")
    steps = data[:, 0].astype(int)
    walkers = data[:, 1].astype(int)
    W = int(walkers.max()) + 1
    n_kept = int(steps.max()) + 1
    if data.shape[0] != W * n_kept:
        raise DataError(f"{path}: expected {n_kept} x {W} rows, found {data.shape[0]}")
    pos = np.empty((n_kept, W, len(THETA_NAMES)))
    lp = np.empty((n_kept, W))
    pos[steps, walkers] = data[:, 2:-1]
    lp[steps, walkers] = data[:, -1]
    return EnsembleChain(positions=pos, logPostTrace=lp, acceptanceRate=float("nan"))


# ---------------------------------------------------------------- theodorsen

THEODORSEN_COLUMNS = ("k", "F", "G") + tuple(f"H{i}" for i in range(1, 5)) + tuple(
    f"A{i}" for i in range(1, 5)
)


def write_theodorsen_csv(path, k, F, G, fds: dict):
    order = [f"h{i}" for i in range(1, 5)] + [f"a{i}" for i in range(1, 5)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(THEODORSEN_COLUMNS)
        for i in range(len(k)):
            w.writerow([_fmt(k[i]), _fmt(F[i]), _fmt(G[i]), *(_fmt(fds[n][i]) for n in order)])


def read_theodorsen_csv(path):
    """Dict of column arrays keyed by the lower-case FD names plus k, F, G."""
    header, data = _read_rows(path, (THEODORSEN_COLUMNS,))
    out = {}
    for i, name in enumerate(header):
        out[name.lower() if name[0] in "HA" else name] = data[:, i]
    return out


# ------------------------------------------------------------------ overlays

OVERLAY_COLUMNS = (
    "f_hz", "band", "S_hh_meas", "S_hh_rec", "S_aa_meas", "S_aa_rec",
    "Re_S_ha_meas", "Re_S_ha_rec", "Im_S_ha_meas", "Im_S_ha_rec",
)


def write_overlay_csv(path, reconstruction):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(OVERLAY_COLUMNS)
        for row in reconstruction.rows():
            w.writerow([row["band"] if c == "band" else _fmt(row[c]) for c in OVERLAY_COLUMNS])


def read_overlay_csv(path):
    header, data = _read_rows(path, (OVERLAY_COLUMNS,))
    return {name: data[:, i] for i, name in enumerate(header)}


# ----------------------------------------------------------- autocorrelation

def write_autocorrelation_csv(path, curves, names=THETA_NAMES):
    """Columns ``lag`` plus one per parameter; zero-variance chains are blank."""
    n_lags = max((c.size for c in curves if c is not None), default=0)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("lag",) + tuple(names))
        for lag in range(n_lags):
            w.writerow([lag] + ["" if c is None else _fmt(c[lag]) for c in curves])


def read_autocorrelation_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header = rows[0]
    cols = list(zip(*rows[1:])) if len(rows) > 1 else [()] * len(header)
    out = {}
    for name, col in zip(header, cols):
        out[name] = None if col and col[0] == "" else np.array([float(v) for v in col])
    return out
