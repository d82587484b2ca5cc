"""Scaled-FFT spectral density estimator and non-overlapping segment
averaging.

Scaling: X(w_k) = sqrt(dt / (2 pi N)) * sum_m x[m] exp(-i w_k m dt), so the
estimate X X^* is a two-sided density in rad/s. Unit-variance discrete white
noise therefore has expected level dt / (2 pi).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .synth import TimeSeries

MIN_SEGMENT = 16


@dataclass(frozen=True)
class FrequencyGrid:
    dOmega: float
    n1: int
    # segment length and sampling interval, when known
    n: int | None = None
    dt: float | None = None

    def __post_init__(self):
        if not self.dOmega > 0:
            raise ValueError("frequency resolution must be > 0")
        if self.n1 < 2:
            raise ValueError("grid needs at least 2 ordinates")

    @classmethod
    def for_segment(cls, n, dt):
        return cls(dOmega=2 * np.pi / (n * dt), n1=(n + 1) // 2, n=n, dt=dt)

    @property
    def omega(self):
        return np.arange(self.n1) * self.dOmega

    @property
    def df(self):
        return self.dOmega / (2 * np.pi)


@dataclass(frozen=True)
class FrequencyBand:
    kLo: int
    kHi: int

    def __post_init__(self):
        if not 0 < self.kLo <= self.kHi:
            raise ValueError(f"invalid band indices ({self.kLo}, {self.kHi})")

    @property
    def indices(self):
        return np.arange(self.kLo, self.kHi + 1)

    def __len__(self):
        return self.kHi - self.kLo + 1


@dataclass(frozen=True)
class AveragedPsdSet:
    grid: FrequencyGrid
    mSegments: int
    matrices: np.ndarray  # (n1, 2, 2) complex

    def __post_init__(self):
        if self.mSegments < 2:
            raise ValueError("averaging needs M >= 2 segments")
        if self.matrices.shape != (self.grid.n1, 2, 2):
            raise ValueError("matrices must have shape (n1, 2, 2)")

    def band(self, band: FrequencyBand):
        """(omega, matrices) restricted to ``band``."""
        idx = band.indices
        return self.grid.omega[idx], self.matrices[idx]


def _as_array(segment):
    if isinstance(segment, TimeSeries):
        return segment.stacked(), segment.dt
    raise TypeError("expected a TimeSeries")


def scaled_fft(segment: TimeSeries) -> np.ndarray:
    """Scaled DFT at k = 0 .. n1-1, shape (n1, 2)."""
    x, dt = _as_array(segment)
    n = x.shape[0]
    if n < MIN_SEGMENT:
        raise ValueError(f"segment length {n} < {MIN_SEGMENT}")
    n1 = (n + 1) // 2
    return np.sqrt(dt / (2 * np.pi * n)) * np.fft.rfft(x, axis=0)[:n1]


def _outer(X):
    S = X[:, :, None] * np.conj(X[:, None, :])
    # exact Hermitian symmetry (real diagonal) against rounding
    return 0.5 * (S + np.conj(np.swapaxes(S, -1, -2)))


def segment_psd(segment: TimeSeries, demean: bool = True) -> np.ndarray:
    """Rank-one estimates X X^* per ordinate, shape (n1, 2, 2)."""
    if demean:
        segment = TimeSeries(
            dt=segment.dt,
            h=segment.h - segment.h.mean(),
            alpha=segment.alpha - segment.alpha.mean(),
        )
    return _outer(scaled_fft(segment))


def split_segments(ts: TimeSeries, mSegments: int):
    if mSegments < 2:
        raise ValueError("mSegments must be >= 2")
    n_seg = len(ts) // mSegments
    if n_seg < MIN_SEGMENT:
        raise ValueError(
            f"insufficient data: {len(ts)} samples cannot give {mSegments} "
            f"segments of >= {MIN_SEGMENT}"
        )
    return [
        TimeSeries(ts.dt, ts.h[i * n_seg:(i + 1) * n_seg], ts.alpha[i * n_seg:(i + 1) * n_seg])
        for i in range(mSegments)
    ], n_seg


def averaged_psd(ts: TimeSeries, mSegments: int, demean: bool = True) -> AveragedPsdSet:
    """Average of M non-overlapping segment estimates; the tail remainder is dropped."""
    segments, n_seg = split_segments(ts, mSegments)
    total = np.zeros(((n_seg + 1) // 2, 2, 2), dtype=complex)
    for seg in segments:  # fixed order keeps the sum bit-reproducible
        total += segment_psd(seg, demean=demean)
    return AveragedPsdSet(
        grid=FrequencyGrid.for_segment(n_seg, ts.dt),
        mSegments=mSegments,
        matrices=total / mSegments,
    )


def band_indices(grid: FrequencyGrid, fLo: float, fHi: float) -> FrequencyBand:
    """Inclusive band k = round(f / df) for both edges (f in Hz)."""
    nyquist = (grid.n1 - 1) * grid.df
    if not 0 < fLo <= fHi < nyquist:
        raise ValueError(f"band [{fLo}, {fHi}] Hz outside (0, {nyquist:g}) Hz")
    kLo = int(np.round(fLo / grid.df))
    kHi = int(np.round(fHi / grid.df))
    if kLo < 1 or kHi >= grid.n1:
        raise ValueError(f"band [{fLo}, {fHi}] Hz maps outside the grid")
    return FrequencyBand(kLo, kHi)


BAND_CSV_COLUMNS = ("f_hz", "S_hh", "Re(S_ha)", "Im(S_ha)", "S_aa")


def write_band_psd_csv(path, psd: AveragedPsdSet, bands):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(BAND_CSV_COLUMNS)
        for band in bands:
            omega, S = psd.band(band)
            for wk, Sk in zip(omega, S):
                w.writerow(
                    [repr(float(wk / (2 * np.pi))), repr(float(Sk[0, 0].real)),
                     repr(float(Sk[0, 1].real)), repr(float(Sk[0, 1].imag)),
                     repr(float(Sk[1, 1].real))]
                )


def read_band_psd_csv(path):
    """Inverse of :func:`write_band_psd_csv`: (f_hz, matrices (n, 2, 2))."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if tuple(rows[0]) != BAND_CSV_COLUMNS:
        raise ValueError(f"unexpected header {rows[0]}")
    data = np.array([[float(v) for v in r] for r in rows[1:]])
    S = np.empty((data.shape[0], 2, 2), dtype=complex)
    S[:, 0, 0] = data[:, 1]
    S[:, 0, 1] = data[:, 2] + 1j * data[:, 3]
    S[:, 1, 0] = data[:, 2] - 1j * data[:, 3]
    S[:, 1, 1] = data[:, 4]
    return data[:, 0], S
