"""Synthetic buffeting response of the coupled 2-DOF section under
white-noise forcing, using an exact zero-order-hold discretization."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.signal

from .aeroelastic import (
    FlowCondition,
    FlutterDerivatives,
    StructuralParams,
    SystemMatrices,
    system_matrices,
    to_modified,
)


class UnstableSystemError(RuntimeError):
    """The coupled system has an eigenvalue with non-negative real part."""


@dataclass(frozen=True)
class TimeSeries:
    dt: float
    h: np.ndarray
    alpha: np.ndarray

    def __post_init__(self):
        h = np.asarray(self.h, dtype=float)
        a = np.asarray(self.alpha, dtype=float)
        if h.ndim != 1 or h.shape != a.shape:
            raise ValueError("h and alpha must be 1-D arrays of equal length")
        if h.size < 2:
            raise ValueError("time series needs at least 2 samples")
        if not self.dt > 0:
            raise ValueError("dt must be > 0")
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "alpha", a)

    def __len__(self):
        return self.h.size

    @property
    def t(self):
        return np.arange(self.h.size) * self.dt

    def stacked(self):
        """Samples as an (N, 2) array with columns (h, alpha)."""
        return np.column_stack([self.h, self.alpha])


@dataclass(frozen=True)
class ForcingSpec:
    sL: float
    sM: float
    seed: int = 0

    def __post_init__(self):
        if self.sL < 0 or self.sM < 0:
            raise ValueError("forcing PSDs must be non-negative")


@dataclass(frozen=True)
class StabilityReport:
    stable: bool
    eigenvalues: np.ndarray

    @property
    def max_real(self):
        return float(np.max(self.eigenvalues.real))

    def __bool__(self):
        return self.stable


def state_matrix(sm: SystemMatrices) -> np.ndarray:
    """First-order 4x4 state matrix for z = [h, alpha, h', alpha']."""
    A = np.zeros((4, 4))
    A[:2, 2:] = np.eye(2)
    A[2:, :2] = -sm.K
    A[2:, 2:] = -sm.C
    return A


def stability_check(sm: SystemMatrices) -> StabilityReport:
    eig = np.linalg.eigvals(state_matrix(sm))
    return StabilityReport(stable=bool(np.all(eig.real < 0)), eigenvalues=eig)


def zoh_discretize(sm: SystemMatrices, dt: float):
    """Exact ZOH pair (Ad, Bd) for inputs entering the acceleration rows."""
    A = state_matrix(sm)
    aug = np.zeros((6, 6))
    aug[:4, :4] = A
    aug[2:4, 4:6] = np.eye(2)
    E = scipy.linalg.expm(aug * dt)
    return E[:4, :4], E[:4, 4:6]


def _propagate(Ad, Bd, u, rows=(0, 1)):
    """x[n+1] = Ad x[n] + Bd u[n] from x[0] = 0; returns x[1..N] restricted
    to the state ``rows``."""
    rows = list(rows)
    lam, V = np.linalg.eig(Ad)
    if np.linalg.cond(V) < 1e8:
        # decoupled modal recursions, each a first-order IIR filter
        Bm = np.linalg.solve(V, Bd.astype(complex))
        out = np.zeros((u.shape[0], len(rows)))
        for j in range(lam.size):
            q = scipy.signal.lfilter([1.0], [1.0, -lam[j]], u @ Bm[j])
            out += (q[:, None] * V[rows, j]).real
        return out
    x = np.zeros(4)
    out = np.empty((u.shape[0], len(rows)))
    for n in range(u.shape[0]):
        x = Ad @ x + Bd @ u[n]
        out[n] = x[rows]
    return out


def transient_time(p: StructuralParams) -> float:
    return 10.0 / min(p.xi_h * p.omega_h, p.xi_alpha * p.omega_alpha)


def simulate_response(
    p: StructuralParams,
    fds: FlutterDerivatives,
    flow: FlowCondition,
    forcing: ForcingSpec,
    duration: float,
    dt: float,
) -> TimeSeries:
    """Stationary displacement response over ``duration`` seconds.

    Each forcing channel is held constant over a step with variance
    ``2*pi*S/dt``, so its estimated PSD (1/(2 pi) scaling) is flat at S.
    ``flow`` fixes the operating point that ``fds`` belong to.
    """
    if duration <= 0 or dt <= 0:
        raise ValueError("duration and dt must be > 0")
    n_out = int(round(duration / dt))
    if n_out < 2:
        raise ValueError("duration/dt yields fewer than 2 samples")
    f_lo = min(p.omega_h, p.omega_alpha) / (2 * np.pi)
    f_hi = max(p.omega_h, p.omega_alpha) / (2 * np.pi)
    if duration < 100.0 / f_lo:
        raise ValueError(f"duration must cover at least 100 periods ({100.0 / f_lo:g} s)")
    if 1.0 / dt < 20.0 * f_hi:
        raise ValueError("sampling rate must be >= 20 x the highest modal frequency")
    sm = system_matrices(to_modified(fds, p), p)
    report = stability_check(sm)
    if not report.stable:
        raise UnstableSystemError(
            f"coupled system unstable at U={flow.U} m/s "
            f"(max eigenvalue real part {report.max_real:.3e})"
        )
    n_skip = int(np.ceil(transient_time(p) / dt))
    n_total = n_skip + n_out
    rng = np.random.default_rng(forcing.seed)
    std = np.sqrt(2 * np.pi * np.array([forcing.sL, forcing.sM]) / dt)
    u = rng.standard_normal((n_total, 2)) * std
    Ad, Bd = zoh_discretize(sm, dt)
    states = _propagate(Ad, Bd, u)[n_skip:]
    return TimeSeries(dt=dt, h=states[:, 0].copy(), alpha=states[:, 1].copy())
