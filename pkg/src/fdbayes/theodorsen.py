"""Flat-plate flutter derivatives from the rational (Jones-type)
approximation of the Theodorsen circulation function.

The half reduced frequency ``k = w B / (2 U)`` is used throughout; use
:func:`k_from_reduced` when starting from ``K = w B / U``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .aeroelastic import FlutterDerivatives, FlowCondition, StructuralParams, reduced_frequencies

# rational approximation constants
_C1, _B1 = 0.165, 0.0455
_C2, _B2 = 0.335, 0.3


@dataclass(frozen=True)
class TheodorsenValue:
    F: float
    G: float
    k: float


def _check_k(k):
    k = np.asarray(k, dtype=float)
    if np.any(~np.isfinite(k)) or np.any(k <= 0):
        raise ValueError("half reduced frequency k must be finite and > 0")
    return k


def k_from_reduced(K):
    return np.asarray(K, dtype=float) / 2.0


def fg(k):
    """Real and imaginary parts (F, G) of the approximate C(k); vectorized."""
    k = _check_k(k)
    r1 = 1.0 + (_B1 / k) ** 2
    r2 = 1.0 + (_B2 / k) ** 2
    F = 1.0 - _C1 / r1 - _C2 / r2
    G = -(_C1 * _B1 / k) / r1 - (_C2 * _B2 / k) / r2
    return F, G


def theodorsen_fg(k: float) -> TheodorsenValue:
    F, G = fg(k)
    return TheodorsenValue(F=float(F), G=float(G), k=float(k))


def flat_plate_arrays(k):
    """All eight flat-plate FDs as arrays keyed by name (vectorized in k)."""
    k = _check_k(k)
    F, G = fg(k)
    pi = np.pi
    return {
        "h1": -pi * F / (2 * k),
        "h2": -pi / (8 * k) * (1 + F + 2 * G / k),
        "h3": -pi / (4 * k**2) * (F - k * G / 2),
        "h4": pi / 4 * (1 + 2 * G / k),
        "a1": pi * F / (8 * k),
        "a2": -pi / (32 * k) * (1 - F - 2 * G / k),
        "a3": pi / (16 * k**2) * (k**2 / 8 + F - k * G / 2),
        "a4": -pi * G / (8 * k),
    }


def flat_plate_fds(k: float) -> FlutterDerivatives:
    """Flat-plate FDs with every derivative evaluated at the same ``k``."""
    return FlutterDerivatives(**{n: float(v) for n, v in flat_plate_arrays(k).items()})


def flat_plate_fds_at(p: StructuralParams, flow: FlowCondition) -> FlutterDerivatives:
    """Flat-plate FDs at the operating point of a 2-DOF section.

    H*_1, H*_4, A*_1, A*_4 multiply heave terms and are taken at K_h;
    the remaining four at K_alpha.
    """
    K_h, K_a = reduced_frequencies(p, flow)
    at_h = flat_plate_arrays(k_from_reduced(K_h))
    at_a = flat_plate_arrays(k_from_reduced(K_a))
    heave = ("h1", "h4", "a1", "a4")
    return FlutterDerivatives(
        **{n: float(at_h[n] if n in heave else at_a[n]) for n in at_h}
    )


def band_scale(p: StructuralParams, U_lo, U_hi, n=201) -> dict:
    """Range (max - min) of each flat-plate FD over wind speeds ``U_lo..U_hi``."""
    rows = [flat_plate_fds_at(p, FlowCondition(float(U))).as_dict() for U in np.linspace(U_lo, U_hi, n)]
    return {name: float(np.ptp([r[name] for r in rows])) for name in rows[0]}


def recovery_tolerance(truth: dict, scale: dict, rel=0.15, frac=0.1) -> dict:
    """Per-FD tolerance ``max(rel |truth|, frac * scale)``."""
    return {n: max(rel * abs(truth[n]), frac * scale[n]) for n in truth}
