"""Two-DOF aeroelastic section model: parameters, modified flutter
derivatives, coupled system matrices, FRF and response PSD.

All frequencies are circular (rad/s). Forces are mass-normalized, so the
mass matrix is the identity.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

FD_NAMES = ("a1", "a2", "a3", "a4", "h1", "h2", "h3", "h4")
PSD_NAMES = ("sl1", "sm1", "sl2", "sm2")
THETA_NAMES = FD_NAMES + PSD_NAMES


class SingularSystemError(ValueError):
    """The impedance matrix K - w^2 M + i w C is (numerically) singular."""


@dataclass(frozen=True)
class StructuralParams:
    m: float
    I: float
    omega_h: float
    omega_alpha: float
    xi_h: float
    xi_alpha: float
    B: float
    rho: float = 1.225

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not np.isfinite(v) or v <= 0:
                raise ValueError(f"{f.name} must be finite and > 0, got {v!r}")
        if self.xi_h >= 1 or self.xi_alpha >= 1:
            raise ValueError("damping ratios must be < 1")

    @classmethod
    def from_hz(cls, m, I, f_h, f_alpha, xi_h, xi_alpha, B, rho=1.225):
        return cls(m, I, 2 * np.pi * f_h, 2 * np.pi * f_alpha, xi_h, xi_alpha, B, rho)


@dataclass(frozen=True)
class FlowCondition:
    U: float

    def __post_init__(self):
        if not np.isfinite(self.U) or self.U <= 0:
            raise ValueError(f"mean wind speed must be > 0, got {self.U!r}")


@dataclass(frozen=True)
class FlutterDerivatives:
    """Dimensionless H*_1..H*_4 and A*_1..A*_4."""

    h1: float = 0.0
    h2: float = 0.0
    h3: float = 0.0
    h4: float = 0.0
    a1: float = 0.0
    a2: float = 0.0
    a3: float = 0.0
    a4: float = 0.0

    def __post_init__(self):
        for f in fields(self):
            if not np.isfinite(getattr(self, f.name)):
                raise ValueError(f"flutter derivative {f.name} is not finite")

    def as_dict(self):
        return {name: getattr(self, name) for name in FD_NAMES}


@dataclass(frozen=True)
class ModifiedFDs:
    """Dimensional FDs entering C (1/s) and K (1/s^2) directly."""

    H1: float = 0.0
    H2: float = 0.0
    H3: float = 0.0
    H4: float = 0.0
    A1: float = 0.0
    A2: float = 0.0
    A3: float = 0.0
    A4: float = 0.0


@dataclass(frozen=True)
class SystemMatrices:
    Mm: np.ndarray
    C: np.ndarray
    K: np.ndarray


@dataclass(frozen=True)
class ThetaVector:
    fds: FlutterDerivatives
    sl1: float
    sm1: float
    sl2: float
    sm2: float

    def __post_init__(self):
        for name in PSD_NAMES:
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ValueError(f"force PSD {name} must be > 0, got {v!r}")

    def band_forcing(self, band):
        """(S_L, S_M) attached to band 1 or band 2."""
        if band == 1:
            return self.sl1, self.sm1
        if band == 2:
            return self.sl2, self.sm2
        raise ValueError(f"band must be 1 or 2, got {band!r}")


def reduced_frequencies(p: StructuralParams, flow: FlowCondition):
    """K_h = w_h B / U and K_alpha = w_alpha B / U."""
    return p.omega_h * p.B / flow.U, p.omega_alpha * p.B / flow.U


def _fd_scales(p: StructuralParams):
    # factor mapping each dimensionless FD onto its modified counterpart
    r, B, wh, wa = p.rho, p.B, p.omega_h, p.omega_alpha
    return {
        "h1": r * B**2 * wh / p.m,
        "h2": r * B**3 * wa / p.m,
        "h3": r * B**3 * wa**2 / p.m,
        "h4": r * B**2 * wh**2 / p.m,
        "a1": r * B**3 * wh / p.I,
        "a2": r * B**4 * wa / p.I,
        "a3": r * B**4 * wa**2 / p.I,
        "a4": r * B**3 * wh**2 / p.I,
    }


def to_modified(fds: FlutterDerivatives, p: StructuralParams) -> ModifiedFDs:
    s = _fd_scales(p)
    return ModifiedFDs(**{n.upper(): s[n] * getattr(fds, n) for n in FD_NAMES})


def from_modified(mfds: ModifiedFDs, p: StructuralParams) -> FlutterDerivatives:
    s = _fd_scales(p)
    return FlutterDerivatives(**{n: getattr(mfds, n.upper()) / s[n] for n in FD_NAMES})


def fd_scale_vector(p: StructuralParams) -> np.ndarray:
    """Modified-FD scale factors in flattened-theta order (a1..a4, h1..h4)."""
    s = _fd_scales(p)
    return np.array([s[n] for n in FD_NAMES])


def system_matrices(mfds: ModifiedFDs, p: StructuralParams) -> SystemMatrices:
    C = np.array(
        [
            [2 * p.xi_h * p.omega_h - mfds.H1, -mfds.H2],
            [-mfds.A1, 2 * p.xi_alpha * p.omega_alpha - mfds.A2],
        ]
    )
    K = np.array(
        [
            [p.omega_h**2 - mfds.H4, -mfds.H3],
            [-mfds.A4, p.omega_alpha**2 - mfds.A3],
        ]
    )
    return SystemMatrices(Mm=np.eye(2), C=C, K=K)


def impedance(sm: SystemMatrices, omega) -> np.ndarray:
    """Dynamic stiffness K - w^2 M + i w C, shape (..., 2, 2)."""
    w = np.asarray(omega, dtype=float)[..., None, None]
    return sm.K - w**2 * sm.Mm + 1j * w * sm.C


def _inv2(Z):
    det = Z[..., 0, 0] * Z[..., 1, 1] - Z[..., 0, 1] * Z[..., 1, 0]
    adj = np.empty_like(Z)
    adj[..., 0, 0] = Z[..., 1, 1]
    adj[..., 1, 1] = Z[..., 0, 0]
    adj[..., 0, 1] = -Z[..., 0, 1]
    adj[..., 1, 0] = -Z[..., 1, 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        return adj / det[..., None, None], det


def frf(sm: SystemMatrices, omega) -> np.ndarray:
    """H(w) = (K - w^2 M + i w C)^-1 for scalar or array ``omega``."""
    Z = impedance(sm, omega)
    Hw, det = _inv2(Z)
    scale = np.max(np.abs(Z), axis=(-2, -1)) ** 2
    if np.any(np.abs(det) < 1e-14 * scale) or not np.all(np.isfinite(Hw)):
        raise SingularSystemError("impedance matrix is singular at the requested frequency")
    return Hw


def theoretical_psd(theta: ThetaVector, p: StructuralParams, omega, band) -> np.ndarray:
    """Response PSD H diag(S_L, S_M) H^* using the band's constant forcing."""
    sl, sms = theta.band_forcing(band)
    sm = system_matrices(to_modified(theta.fds, p), p)
    Hw = frf(sm, omega)
    D = np.array([sl, sms])
    S = (Hw * D) @ np.conj(np.swapaxes(Hw, -1, -2))
    # enforce exact Hermitian structure against rounding
    return 0.5 * (S + np.conj(np.swapaxes(S, -1, -2)))


def characteristic_coefficients(C, K):
    """Coefficients (c3, c2, c1, c0) of det(s^2 I + s C + K) = s^4 + c3 s^3 + ..."""
    c3 = C[0, 0] + C[1, 1]
    c2 = K[0, 0] + K[1, 1] + C[0, 0] * C[1, 1] - C[0, 1] * C[1, 0]
    c1 = C[0, 0] * K[1, 1] + C[1, 1] * K[0, 0] - C[0, 1] * K[1, 0] - C[1, 0] * K[0, 1]
    c0 = K[0, 0] * K[1, 1] - K[0, 1] * K[1, 0]
    return c3, c2, c1, c0


def is_asymptotically_stable(C, K) -> bool:
    """Routh-Hurwitz test for the quartic characteristic polynomial."""
    c3, c2, c1, c0 = characteristic_coefficients(C, K)
    if min(c3, c2, c1, c0) <= 0:
        return False
    return c3 * c2 > c1 and c3 * c2 * c1 > c1 * c1 + c3 * c3 * c0
