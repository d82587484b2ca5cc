"""Complex-Wishart likelihood of band-limited averaged PSDs and the
unnormalized log-posterior used by the sampler."""

from __future__ import annotations

from dataclasses import dataclass
from math import lgamma, log, pi

import numpy as np

from .aeroelastic import (
    FD_NAMES,
    THETA_NAMES,
    FlowCondition,
    FlutterDerivatives,
    StructuralParams,
    ThetaVector,
    fd_scale_vector,
    frf,
    is_asymptotically_stable,
    system_matrices,
    to_modified,
)
from .spectral import AveragedPsdSet, FrequencyBand
from .theodorsen import flat_plate_fds_at

NDIM = len(THETA_NAMES)


class SingularExpectedError(ValueError):
    pass


# ---------------------------------------------------------------- theta I/O

def theta_flatten(theta: ThetaVector) -> np.ndarray:
    fds = theta.fds
    return np.array(
        [getattr(fds, n) for n in FD_NAMES] + [theta.sl1, theta.sm1, theta.sl2, theta.sm2],
        dtype=float,
    )


def theta_unflatten(x) -> ThetaVector:
    x = np.asarray(x, dtype=float)
    if x.shape != (NDIM,):
        raise ValueError(f"theta vector must have length {NDIM}, got shape {x.shape}")
    fds = FlutterDerivatives(**dict(zip(FD_NAMES, x[:8].tolist())))
    return ThetaVector(fds, *x[8:].tolist())


# ------------------------------------------------------------------ Wishart

def wishart_log_pdf(observed, expected, mSegments: int) -> float:
    """Log of the central complex Wishart density of an M-segment average.

    Constants are kept exactly as written in the source formulation:
    pi^(-d(d-1)/2) M^(M-d+d^2) |S|^(M-d) / (prod_p (M-p)! |E|^M) exp(-M tr(E^-1 S)).
    """
    S = np.asarray(observed, dtype=complex)
    E = np.asarray(expected, dtype=complex)
    d = S.shape[-1]
    M = int(mSegments)
    if M < d:
        raise ValueError(f"M={M} must be >= d={d}")
    det_E = np.linalg.det(E).real
    if not det_E > 1e-300 * max(np.abs(E).max(), 1e-300) ** d:
        raise SingularExpectedError("expected spectral matrix is singular or not positive definite")
    det_S = np.linalg.det(S).real
    if M == d:
        log_det_S_term = 0.0
    elif det_S <= 0:
        return -np.inf
    else:
        log_det_S_term = (M - d) * log(det_S)
    tr = np.trace(np.linalg.solve(E, S)).real
    const = (
        -d * (d - 1) / 2 * log(pi)
        + (M - d + d * d) * log(M)
        - sum(lgamma(M - p + 1) for p in range(1, d + 1))
    )
    return const + log_det_S_term - M * log(det_E) - M * tr


# -------------------------------------------------------------------- prior

@dataclass(frozen=True)
class PriorSpec:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=float)
        hi = np.asarray(self.upper, dtype=float)
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ValueError("prior bounds must be 1-D and of equal length")
        if not np.all(lo < hi):
            raise ValueError("prior lower bounds must be < upper bounds")
        if lo.size == NDIM and not np.all(lo[8:] > 0):
            raise ValueError("force-PSD lower bounds must be > 0")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        object.__setattr__(self, "_log_density", -float(np.sum(np.log(hi - lo))))

    @property
    def ndim(self):
        return self.lower.size

    @property
    def width(self):
        return self.upper - self.lower

    @property
    def midpoint(self):
        return 0.5 * (self.lower + self.upper)

    def contains(self, x):
        x = np.asarray(x)
        return bool(np.all(x >= self.lower) and np.all(x <= self.upper))

    def log_pdf(self, x):
        return self._log_density if self.contains(x) else -np.inf

    def sample(self, rng, size=None):
        return rng.uniform(self.lower, self.upper, size=None if size is None else (size, self.ndim))

    def to_dict(self):
        return {
            name: [float(lo), float(hi)]
            for name, lo, hi in zip(THETA_NAMES, self.lower, self.upper)
        }

    @classmethod
    def from_dict(cls, d):
        missing = [n for n in THETA_NAMES if n not in d]
        if missing:
            raise ValueError(f"prior is missing bounds for {missing}")
        return cls(
            lower=np.array([d[n][0] for n in THETA_NAMES], dtype=float),
            upper=np.array([d[n][1] for n in THETA_NAMES], dtype=float),
        )


# --------------------------------------------------------------- likelihood

EXPECTATIONS = ("asymptotic", "finite")


@dataclass(frozen=True)
class LikelihoodContext:
    """Band-restricted data; ``omega``/``S``/``band_id`` are concatenated
    over both bands.

    ``expectation`` selects the model for E[S_N | theta]: "asymptotic" uses
    the continuous response PSD H S_f H^*; "finite" uses the exact mean of the
    rectangular-window periodogram of an N-sample record (leakage included).
    """

    params: StructuralParams
    bands: tuple
    mSegments: int
    omega: np.ndarray
    S: np.ndarray
    band_id: np.ndarray
    fd_scales: np.ndarray
    expectation: str = "asymptotic"
    dt: float | None = None
    nSegment: int | None = None

    def __post_init__(self):
        if self.expectation not in EXPECTATIONS:
            raise ValueError(f"expectation must be one of {EXPECTATIONS}")
        if self.mSegments < 2:
            raise ValueError("M must be >= 2")
        if self.expectation == "finite" and (self.dt is None or self.nSegment is None):
            raise ValueError("finite-record expectation needs dt and the segment length")

    @classmethod
    def from_psd(cls, psd: AveragedPsdSet, bands, params: StructuralParams, expectation="asymptotic"):
        b1, b2 = bands
        if not isinstance(b1, FrequencyBand) or not isinstance(b2, FrequencyBand):
            raise TypeError("bands must be FrequencyBand instances")
        if b1.kHi >= b2.kLo:
            raise ValueError("band 1 must lie entirely below band 2")
        if b2.kHi >= psd.grid.n1:
            raise ValueError("band exceeds the frequency grid")
        w1, S1 = psd.band(b1)
        w2, S2 = psd.band(b2)
        return cls(
            params=params,
            bands=(b1, b2),
            mSegments=psd.mSegments,
            omega=np.concatenate([w1, w2]),
            S=np.concatenate([S1, S2]),
            band_id=np.concatenate([np.ones(len(b1), int), np.full(len(b2), 2)]),
            fd_scales=fd_scale_vector(params),
            expectation=expectation,
            dt=psd.grid.dt,
            nSegment=psd.grid.n,
        )

    @property
    def n_freq(self):
        return self.omega.size

    def band_data(self, band):
        sel = self.band_id == band
        return self.omega[sel], self.S[sel]

    def forcing(self, x):
        """Per-ordinate force PSDs (d0, d1) from a flat theta vector."""
        b1 = self.band_id == 1
        return np.where(b1, x[8], x[10]), np.where(b1, x[9], x[11])


def coupled_matrices(x, ctx: LikelihoodContext):
    """(C, K) of the coupled system for a flat theta vector."""
    p = ctx.params
    A1, A2, A3, A4, H1, H2, H3, H4 = x[:8] * ctx.fd_scales
    C = np.array([[2 * p.xi_h * p.omega_h - H1, -H2], [-A1, 2 * p.xi_alpha * p.omega_alpha - A2]])
    K = np.array([[p.omega_h**2 - H4, -H3], [-A4, p.omega_alpha**2 - A3]])
    return C, K


def _asymptotic_terms(x, ctx: LikelihoodContext):
    """Per-frequency ln|E| and tr(E^-1 S) from the impedance Z = H^-1.

    With E = Z^-1 D Z^-H: ln|E| = ln d0 + ln d1 - 2 ln|det Z| and
    tr(E^-1 S) = sum_r (Z S Z^H)_rr / d_r.
    """
    C, K = coupled_matrices(x, ctx)
    w = ctx.omega
    w2 = w * w
    z00 = (K[0, 0] - w2) + 1j * w * C[0, 0]
    z01 = K[0, 1] + 1j * w * C[0, 1]
    z10 = K[1, 0] + 1j * w * C[1, 0]
    z11 = (K[1, 1] - w2) + 1j * w * C[1, 1]
    detZ = z00 * z11 - z01 * z10
    d0, d1 = ctx.forcing(x)
    S = ctx.S
    s00 = S[:, 0, 0].real
    s11 = S[:, 1, 1].real
    s01 = S[:, 0, 1]

    def quad(za, zb):
        return (za * za.conjugate()).real * s00 + (zb * zb.conjugate()).real * s11 + 2 * (
            za * s01 * zb.conjugate()
        ).real

    with np.errstate(divide="ignore"):
        logdet = np.log(d0) + np.log(d1) - 2 * np.log(np.abs(detZ))
    trace = quad(z00, z01) / d0 + quad(z10, z11) / d1
    return logdet, trace


def finite_record_psd(C, K, d0, d1, omega, dt, n):
    """Exact mean of the scaled periodogram of an n-sample record.

    The response is the ZOH-sampled system driven by piecewise-constant
    white forcing of level (d0, d1) per ordinate. With the stationary output
    autocovariance R(tau), the mean is dt/(2 pi n) * sum_|tau|<n (n - |tau|)
    R(tau) exp(-i w tau dt), summed in closed form over the four modes.
    """
    A = np.zeros((4, 4))
    A[:2, 2:] = np.eye(2)
    A[2:, :2] = -K
    A[2:, 2:] = -C
    mu, V = np.linalg.eig(A)
    lam = np.exp(mu * dt)
    Vi = np.linalg.inv(V)
    # modal ZOH input matrix (inputs act on the velocity rows)
    Bm = ((lam - 1) / mu)[:, None] * Vi[:, 2:]
    F = V[:2, :]
    coh = 1.0 / (1.0 - lam[:, None] * lam.conj()[None, :])
    q = 2 * np.pi / dt * np.stack([np.broadcast_to(d0, omega.shape), np.broadcast_to(d1, omega.shape)], -1)
    # modal stationary covariance per ordinate: (n_w, 4, 4)
    Pm = np.einsum("ir,wr,jr->wij", Bm, q, Bm.conj()) * coh
    G = Pm @ F.conj().T  # (n_w, 4, 2)
    R0 = F @ G  # (n_w, 2, 2)
    r = lam[None, :] * np.exp(-1j * omega * dt)[:, None]
    g = (n * (1 - r) - r * (1 - r**n)) / (1 - r) ** 2
    Asum = np.einsum("ai,wi,wib->wab", F, g, G)
    tot = Asum + np.conj(np.swapaxes(Asum, -1, -2)) - n * R0
    E = dt / (2 * np.pi * n) * tot
    return 0.5 * (E + np.conj(np.swapaxes(E, -1, -2)))


def _matrix_terms(E, S):
    """ln|E| and tr(E^-1 S) for stacks of 2x2 Hermitian matrices."""
    e00 = E[:, 0, 0].real
    e11 = E[:, 1, 1].real
    e01 = E[:, 0, 1]
    det = e00 * e11 - (e01 * e01.conjugate()).real
    if np.any(det <= 0) or np.any(e00 <= 0):
        return None, None
    tr = (
        e11 * S[:, 0, 0].real + e00 * S[:, 1, 1].real - 2 * (e01.conjugate() * S[:, 0, 1]).real
    ) / det
    # tr(adj(E) S)/det with adj(E) = [[e11, -e01], [-conj(e01), e00]]
    return np.log(det), tr


def negative_log_likelihood(x, ctx: LikelihoodContext) -> float:
    """M * sum_k [ln|E_k| + tr(E_k^-1 S_k)] with theta-independent constants dropped.

    Unstable coupled systems have no stationary response PSD and map to +inf.
    """
    x = np.asarray(x, dtype=float)
    if x[8:].min() <= 0:
        return np.inf
    C, K = coupled_matrices(x, ctx)
    if not is_asymptotically_stable(C, K):
        return np.inf
    if ctx.expectation == "asymptotic":
        logdet, trace = _asymptotic_terms(x, ctx)
    else:
        d0, d1 = ctx.forcing(x)
        E = finite_record_psd(C, K, d0, d1, ctx.omega, ctx.dt, ctx.nSegment)
        logdet, trace = _matrix_terms(E, ctx.S)
        if logdet is None:
            return np.inf
    val = ctx.mSegments * float(np.sum(logdet) + np.sum(trace))
    return val if np.isfinite(val) else np.inf


def negative_log_posterior(theta, ctx: LikelihoodContext, prior: PriorSpec) -> float:
    """L(theta) = NLL - ln p(theta); +inf outside the prior support."""
    x = theta_flatten(theta) if isinstance(theta, ThetaVector) else np.asarray(theta, dtype=float)
    if x.shape != (NDIM,):
        raise ValueError(f"theta vector must have length {NDIM}")
    lp = prior.log_pdf(x)
    if not np.isfinite(lp):
        return np.inf
    return negative_log_likelihood(x, ctx) - lp


def log_posterior_fn(ctx: LikelihoodContext, prior: PriorSpec):
    """Closure returning -L(theta) for the sampler."""

    def log_post(x):
        return -negative_log_posterior(x, ctx, prior)

    return log_post


def expected_psd(x, ctx: LikelihoodContext) -> np.ndarray:
    """E[S | theta] at every band ordinate of ``ctx`` under its expectation model."""
    theta = theta_unflatten(x) if not isinstance(x, ThetaVector) else x
    x = theta_flatten(theta)
    d0, d1 = ctx.forcing(x)
    if ctx.expectation == "finite":
        C, K = coupled_matrices(x, ctx)
        return finite_record_psd(C, K, d0, d1, ctx.omega, ctx.dt, ctx.nSegment)
    p = ctx.params
    sm = system_matrices(to_modified(theta.fds, p), p)
    H = frf(sm, ctx.omega)
    D = np.stack([d0, d1], axis=-1)
    E = (H * D[:, None, :]) @ np.conj(np.swapaxes(H, -1, -2))
    return 0.5 * (E + np.conj(np.swapaxes(E, -1, -2)))


# ----------------------------------------------------------- default prior

def force_psd_scale(ctx: LikelihoodContext) -> np.ndarray:
    """Rough per-band force-PSD levels (sl1, sm1, sl2, sm2) from the data,
    dividing measured auto-spectra by the zero-FD structural FRF."""
    p = ctx.params
    sm = system_matrices(to_modified(FlutterDerivatives(), p), p)
    out = []
    for band in (1, 2):
        w, S = ctx.band_data(band)
        H = frf(sm, w)
        out.append(np.mean(S[:, 0, 0].real / np.abs(H[:, 0, 0]) ** 2))
        out.append(np.mean(S[:, 1, 1].real / np.abs(H[:, 1, 1]) ** 2))
    return np.array(out)


def default_prior(ctx: LikelihoodContext, flow: FlowCondition, fd_span=50.0, psd_range=(1e-8, 1e2)):
    """FDs in +/- fd_span * max(1, |flat-plate value|); force PSDs in
    psd_range times the data-derived level."""
    guess = flat_plate_fds_at(ctx.params, flow)
    g = np.array([abs(getattr(guess, n)) for n in FD_NAMES])
    half = fd_span * np.maximum(1.0, g)
    scale = force_psd_scale(ctx)
    lower = np.concatenate([-half, psd_range[0] * scale])
    upper = np.concatenate([half, psd_range[1] * scale])
    return PriorSpec(lower, upper)
