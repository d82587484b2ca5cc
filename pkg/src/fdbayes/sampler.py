"""Affine-invariant ensemble sampler (stretch move) and autocorrelation
diagnostics."""

from __future__ import annotations

import logging
import warnings
from dataclasses import asdict, dataclass

import numpy as np

log = logging.getLogger(__name__)


class InitializationError(RuntimeError):
    pass


class ZeroVarianceError(ValueError):
    """A chain without variance; reported as non-convergence."""


@dataclass(frozen=True)
class SamplerConfig:
    a: float = 2.0
    nWalkers: int = 50
    nSteps: int = 4000
    thin: int = 10
    burnInFraction: float = 0.2
    seed: int = 0
    initSpread: float = 0.01
    maxLag: int = 200

    def __post_init__(self):
        if not self.a > 1:
            raise ValueError("stretch parameter a must be > 1")
        if self.nWalkers < 2:
            raise ValueError("need at least 2 walkers")
        if self.nSteps < 1:
            raise ValueError("nSteps must be >= 1")
        if self.thin < 1:
            raise ValueError("thin must be >= 1")
        if not 0 <= self.burnInFraction < 1:
            raise ValueError("burnInFraction must be in [0, 1)")
        if not self.initSpread > 0:
            raise ValueError("initSpread must be > 0")

    @classmethod
    def from_total_samples(cls, total, nWalkers=50, **kw):
        """Config whose ensemble draws (walkers x sweeps) total ``total``."""
        return cls(nWalkers=nWalkers, nSteps=int(np.ceil(total / nWalkers)), **kw)

    @property
    def total_samples(self):
        return self.nWalkers * self.nSteps

    def to_dict(self):
        return asdict(self)


@dataclass
class EnsembleChain:
    """Retained sweeps after burn-in and thinning.

    ``positions`` has shape (n_kept, nWalkers, dim); ``samples`` flattens it
    sweep-major to (n_kept * nWalkers, dim).
    """

    positions: np.ndarray
    logPostTrace: np.ndarray
    acceptanceRate: float
    nEvaluations: int = 0

    @property
    def samples(self):
        return self.positions.reshape(-1, self.positions.shape[-1])

    @property
    def logPost(self):
        return self.logPostTrace.reshape(-1)

    @property
    def dim(self):
        return self.positions.shape[-1]

    def walker_series(self, i):
        """Parameter ``i`` as an (n_kept, nWalkers) array."""
        return self.positions[:, :, i]


def stretch_draw(a, rng, size=None):
    """z with density proportional to 1/sqrt(z) on [1/a, a] (inverse CDF)."""
    u = rng.random(size)
    return stretch_from_uniform(a, u)


def stretch_from_uniform(a, u):
    sa = np.sqrt(a)
    return ((sa - 1 / sa) * u + 1 / sa) ** 2


def stretch_cdf(z, a):
    sa = np.sqrt(a)
    z = np.clip(z, 1 / a, a)
    return (2 * np.sqrt(z) - 2 / sa) / (2 * sa - 2 / sa)


def stretch_pdf(z, a):
    sa = np.sqrt(a)
    z = np.asarray(z, dtype=float)
    inside = (z >= 1 / a) & (z <= a)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(inside, 1 / (np.sqrt(z) * (2 * sa - 2 / sa)), 0.0)


def propose(walker_i, walker_j, z):
    """Stretch of walker_i away from (z > 1) or toward (z < 1) walker_j.

    The line is anchored at the complementary walker j; this is the form for
    which the z^(n-1) acceptance factor gives detailed balance.
    """
    return walker_j + z * (walker_i - walker_j)


def log_accept_probability(logPostStar, logPostCurrent, z, n):
    if logPostStar == -np.inf or np.isnan(logPostStar):
        return -np.inf
    return min(0.0, (n - 1) * np.log(z) + logPostStar - logPostCurrent)


def accept_probability(logPostStar, logPostCurrent, z, n):
    """min{1, z^(n-1) p*/p} with the densities given as logs."""
    return float(np.exp(log_accept_probability(logPostStar, logPostCurrent, z, n)))


def initial_ensemble(log_prob, prior, cfg: SamplerConfig, start=None, rng=None, max_draws=10_000):
    """Walkers uniform in a box of ``initSpread`` x prior width around ``start``
    (default: prior midpoint), redrawn until every walker has finite density."""
    rng = np.random.default_rng(cfg.seed) if rng is None else rng
    center = prior.midpoint if start is None else np.asarray(start, dtype=float)
    half = 0.5 * cfg.initSpread * prior.width
    pos = np.empty((cfg.nWalkers, prior.ndim))
    lp = np.empty(cfg.nWalkers)
    draws = 0
    for i in range(cfg.nWalkers):
        while True:
            if draws >= max_draws:
                raise InitializationError(
                    f"no finite-posterior starting ensemble after {max_draws} draws"
                )
            draws += 1
            x = center + rng.uniform(-half, half)
            if not prior.contains(x):
                continue
            val = log_prob(x)
            if np.isfinite(val):
                pos[i], lp[i] = x, val
                break
    return pos, lp


def run_ensemble(log_prob, prior, cfg: SamplerConfig, init=None) -> EnsembleChain:
    """Sequential stretch-move sweeps.

    Each walker in turn proposes along the line through a complementary
    walker drawn uniformly from the others (already-updated positions
    included). ``init`` is None (prior midpoint), a start vector, or a full
    (nWalkers, dim) ensemble.
    """
    rng = np.random.default_rng(cfg.seed)
    W, n = cfg.nWalkers, prior.ndim
    if W < 2 * n:
        raise ValueError(f"nWalkers={W} must be >= 2*dim={2 * n}")
    init_arr = None if init is None else np.asarray(init, dtype=float)
    if init_arr is not None and init_arr.ndim == 2:
        if init_arr.shape != (W, n):
            raise ValueError(f"initial ensemble must have shape {(W, n)}")
        pos = init_arr.copy()
        lp = np.array([log_prob(x) if prior.contains(x) else -np.inf for x in pos])
        if not np.all(np.isfinite(lp)):
            raise InitializationError("initial ensemble has non-finite log-posterior")
    else:
        pos, lp = initial_ensemble(log_prob, prior, cfg, start=init_arr, rng=rng)

    n_burn = int(np.floor(cfg.burnInFraction * cfg.nSteps))
    keep = np.arange(n_burn, cfg.nSteps, cfg.thin)
    kept_pos = np.empty((keep.size, W, n))
    kept_lp = np.empty((keep.size, W))
    slot = 0
    accepted = 0
    evals = 0
    lower, upper = prior.lower, prior.upper
    for step in range(cfg.nSteps):
        partners = rng.integers(0, W - 1, size=W)
        zs = stretch_draw(cfg.a, rng, size=W)
        log_u = np.log(rng.random(W))
        for i in range(W):
            j = partners[i] + (partners[i] >= i)
            z = zs[i]
            prop = pos[j] + z * (pos[i] - pos[j])
            if np.any(prop < lower) or np.any(prop > upper):
                continue
            lp_star = log_prob(prop)
            evals += 1
            if log_u[i] < log_accept_probability(lp_star, lp[i], z, n):
                pos[i] = prop
                lp[i] = lp_star
                accepted += 1
        if slot < keep.size and step == keep[slot]:
            kept_pos[slot] = pos
            kept_lp[slot] = lp
            slot += 1

    rate = accepted / (W * cfg.nSteps)
    if not 0.05 < rate < 0.9:
        warnings.warn(f"acceptance rate {rate:.3f} outside (0.05, 0.9)", RuntimeWarning, stacklevel=2)
    log.info("ensemble finished: %d sweeps, acceptance %.3f", cfg.nSteps, rate)
    return EnsembleChain(kept_pos, kept_lp, rate, evals)


# -------------------------------------------------------------- diagnostics

def _autocov(x, max_lag):
    """Biased autocovariance of each column of ``x`` (L, k) up to max_lag."""
    L = x.shape[0]
    nfft = 1 << int(np.ceil(np.log2(2 * L)))
    f = np.fft.rfft(x, n=nfft, axis=0)
    acov = np.fft.irfft(f * np.conj(f), n=nfft, axis=0)[: max_lag + 1] / L
    return acov


def chain_autocorrelation(chain, maxLag) -> np.ndarray:
    """Normalized autocorrelation rho(0..maxLag) of a scalar chain.

    A 2-D input (L, nWalkers) is treated as parallel walker chains: their
    mean-removed autocovariances are averaged before normalization.
    """
    x = np.asarray(chain, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    L = x.shape[0]
    if L <= 4 * maxLag:
        raise ValueError(f"chain length {L} must exceed 4*maxLag={4 * maxLag}")
    x = x - x.mean(axis=0)
    acov = _autocov(x, maxLag).mean(axis=1)
    if not acov[0] > 0:
        raise ZeroVarianceError("chain has zero variance (stuck or degenerate)")
    return acov / acov[0]


def convergence_lag(rho, threshold=0.05):
    """First lag with |rho| < threshold, or None."""
    hits = np.nonzero(np.abs(rho) < threshold)[0]
    return int(hits[0]) if hits.size else None


def effective_max_lag(n_kept, maxLag):
    return max(1, min(maxLag, (n_kept - 1) // 4))


def chain_diagnostics(chain: EnsembleChain, maxLag=200, threshold=0.05):
    """Per-parameter autocorrelation curves and convergence lags.

    Returns (rho array (dim, lags+1) or None rows, lags list, converged flag).
    The lag cap shrinks to keep the chain longer than 4x the lag.
    """
    n_kept = chain.positions.shape[0]
    lag_cap = effective_max_lag(n_kept, maxLag)
    curves, lags = [], []
    for i in range(chain.dim):
        try:
            rho = chain_autocorrelation(chain.walker_series(i), lag_cap)
        except ZeroVarianceError:
            curves.append(None)
            lags.append(None)
            continue
        curves.append(rho)
        lags.append(convergence_lag(rho, threshold))
    converged = all(lag is not None for lag in lags)
    return curves, lags, converged
