import dataclasses

import mpmath as mp
import numpy as np
import pytest
import scipy.linalg
import scipy.stats
from hypothesis import given
from hypothesis import strategies as st

from fdbayes.aeroelastic import FlowCondition, FlutterDerivatives, ThetaVector
from fdbayes.config import bridge_simulation_doc, parse_config
from fdbayes.likelihood import (
    LikelihoodContext,
    PriorSpec,
    SingularExpectedError,
    coupled_matrices,
    default_prior,
    expected_psd,
    finite_record_psd,
    force_psd_scale,
    negative_log_likelihood,
    negative_log_posterior,
    theta_flatten,
    theta_unflatten,
    wishart_log_pdf,
)
from fdbayes.pipeline import build_context, simulate_from_config, truth_vector
from fdbayes.spectral import FrequencyBand
from fdbayes.synth import zoh_discretize
from fdbayes.aeroelastic import SystemMatrices

mp.mp.dps = 50


def _random_hpd(rng, d=2):
    A = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return A @ A.conj().T + 0.1 * np.eye(d)


def _mp_wishart(S, E, M):
    d = S.shape[0]
    Sm = mp.matrix([[mp.mpc(complex(v)) for v in row] for row in S])
    Em = mp.matrix([[mp.mpc(complex(v)) for v in row] for row in E])
    detS = mp.re(mp.det(Sm))
    detE = mp.re(mp.det(Em))
    tr = mp.re(sum((Em**-1 * Sm)[i, i] for i in range(d)))
    log_const = (-mp.mpf(d * (d - 1)) / 2 * mp.log(mp.pi) + (M - d + d * d) * mp.log(M)
                 - sum(mp.log(mp.factorial(M - p)) for p in range(1, d + 1)))
    return log_const + (M - d) * mp.log(detS) - M * mp.log(detE) - M * tr


def test_wishart_matches_arbitrary_precision(rng):
    for _ in range(100):
        M = int(rng.integers(2, 60))
        E = _random_hpd(rng)
        S = _random_hpd(rng)
        ours = wishart_log_pdf(S, E, M)
        ref = float(_mp_wishart(S, E, M))
        assert abs(ours - ref) <= 1e-10 * abs(ref)


@given(st.integers(1, 50), st.floats(1e-3, 1e3), st.floats(1e-3, 1e3))
def test_wishart_scalar_is_gamma(M, s, e):
    """d = 1: the average of M exponentials is Gamma(M, e/M)."""
    ref = scipy.stats.gamma.logpdf(s, a=M, scale=e / M)
    assert wishart_log_pdf([[s]], [[e]], M) == pytest.approx(ref, rel=1e-10, abs=1e-10)


def test_wishart_edge_cases():
    E = np.eye(2, dtype=complex)
    S = np.array([[1.0, 1.0], [1.0, 1.0]], dtype=complex)
    assert wishart_log_pdf(S, E, 3) == -np.inf
    assert np.isfinite(wishart_log_pdf(S, E, 2))
    with pytest.raises(SingularExpectedError):
        wishart_log_pdf(np.eye(2), S, 5)
    with pytest.raises(ValueError):
        wishart_log_pdf(np.eye(2), np.eye(2), 1)


# ----------------------------------------------------------- shared context

@pytest.fixture(scope="module")
def ctx_truth():
    cfg = parse_config(bridge_simulation_doc(seed=2))
    ts = simulate_from_config(cfg)
    _, ctx = build_context(ts, cfg)
    return cfg, ctx, truth_vector(cfg)


def _perturbed(truth, rng, scale=0.2):
    x = truth.copy()
    x[:8] += scale * rng.standard_normal(8)
    x[8:] *= np.exp(0.3 * rng.standard_normal(4))
    return x


def test_nll_equals_negative_wishart_sum_up_to_constant(ctx_truth, rng):
    _, ctx, truth = ctx_truth
    offsets = []
    while len(offsets) < 10:
        x = _perturbed(truth, rng)
        if not np.isfinite(negative_log_likelihood(x, ctx)):
            continue
        E = expected_psd(x, ctx)
        wsum = sum(wishart_log_pdf(S, Ek, ctx.mSegments) for S, Ek in zip(ctx.S, E))
        offsets.append(negative_log_likelihood(x, ctx) + wsum)
    assert np.ptp(offsets) < 1e-8 * abs(offsets[0])


def test_closed_form_terms_match_matrix_algebra(ctx_truth, rng):
    _, ctx, truth = ctx_truth
    x = _perturbed(truth, rng, scale=0.05)
    E = expected_psd(x, ctx)
    direct = ctx.mSegments * sum(
        np.log(np.linalg.det(Ek).real) + np.trace(np.linalg.solve(Ek, Sk)).real
        for Ek, Sk in zip(E, ctx.S)
    )
    assert negative_log_likelihood(x, ctx) == pytest.approx(direct, rel=1e-11)


def test_finite_record_psd_matches_brute_force(bridge, flow30):
    from fdbayes.theodorsen import flat_plate_fds_at
    from fdbayes.aeroelastic import system_matrices, to_modified

    sm = system_matrices(to_modified(flat_plate_fds_at(bridge, flow30), bridge), bridge)
    dt, n, d0, d1 = 0.5, 64, 2e-3, 5e-4
    Ad, Bd = zoh_discretize(sm, dt)
    Q = 2 * np.pi / dt * np.diag([d0, d1])
    P = scipy.linalg.solve_discrete_lyapunov(Ad, Bd @ Q @ Bd.T)
    omega = 2 * np.pi * np.arange(1, 20) / (n * dt)
    ref = np.zeros((omega.size, 2, 2), complex)
    Apow = np.eye(4)
    for tau in range(n):
        R = (Apow @ P)[:2, :2]
        ph = np.exp(-1j * omega * tau * dt)[:, None, None]
        ref += (n - tau) * R * ph
        if tau:
            ref += (n - tau) * R.T * np.conj(ph)
        Apow = Ad @ Apow
    ref *= dt / (2 * np.pi * n)
    E = finite_record_psd(sm.C, sm.K, np.full(omega.size, d0), np.full(omega.size, d1), omega, dt, n)
    np.testing.assert_allclose(E, ref, rtol=1e-9, atol=1e-12 * np.abs(ref).max())


def test_finite_and_asymptotic_agree_for_well_resolved_peaks(ctx_truth):
    """With fine sampling and long segments leakage vanishes."""
    _, ctx, truth = ctx_truth
    long = dataclasses.replace(ctx, expectation="finite", dt=0.01, nSegment=10**6)
    ea = expected_psd(truth, dataclasses.replace(long, expectation="asymptotic"))
    ef = expected_psd(truth, long)
    for ch in (0, 1):
        np.testing.assert_allclose(ef[:, ch, ch].real, ea[:, ch, ch].real, rtol=0.02)


@pytest.mark.parametrize("expectation", ["asymptotic", "finite"])
def test_h3_grid_argmin_near_truth(expectation):
    doc = bridge_simulation_doc(seed=11)
    doc["simulation"]["duration_s"] = 20000.0
    doc["spectral"]["expectation"] = expectation
    cfg = parse_config(doc)
    _, ctx = build_context(simulate_from_config(cfg), cfg)
    truth = truth_vector(cfg)
    i = 6  # h3
    grid = truth[i] + np.linspace(-0.25, 0.25, 201)
    values = []
    for g in grid:
        x = truth.copy()
        x[i] = g
        values.append(negative_log_likelihood(x, ctx))
    best = grid[int(np.argmin(values))]
    assert abs(best - truth[i]) <= (grid[1] - grid[0]) * (1 + 1e-9)


def test_unstable_and_nonpositive_map_to_inf(ctx_truth):
    _, ctx, truth = ctx_truth
    x = truth.copy()
    x[4] = 200.0  # h1: negative net heave damping
    C, K = coupled_matrices(x, ctx)
    assert C[0, 0] < 0
    assert negative_log_likelihood(x, ctx) == np.inf
    x = truth.copy()
    x[9] = -1e-3
    assert negative_log_likelihood(x, ctx) == np.inf


def test_posterior_outside_prior_is_inf(ctx_truth):
    cfg, ctx, truth = ctx_truth
    prior = default_prior(ctx, cfg.flow)
    assert np.isfinite(negative_log_posterior(truth, ctx, prior))
    x = truth.copy()
    x[0] = prior.upper[0] + 1.0
    assert negative_log_posterior(x, ctx, prior) == np.inf
    th = theta_unflatten(truth)
    assert negative_log_posterior(th, ctx, prior) == negative_log_posterior(truth, ctx, prior)


def test_default_prior_contains_truth_and_psd_scale(ctx_truth):
    cfg, ctx, truth = ctx_truth
    prior = default_prior(ctx, cfg.flow)
    assert prior.contains(truth)
    scale = force_psd_scale(ctx)
    np.testing.assert_allclose(prior.lower[8:], 1e-8 * scale)
    # rough but well inside the prior's ten decades
    assert np.all(np.abs(np.log10(scale / 1e-3)) < 3)


@given(st.lists(st.floats(-10, 10), min_size=8, max_size=8), st.lists(st.floats(1e-6, 1.0), min_size=4, max_size=4))
def test_theta_roundtrip(fd, psd):
    x = np.array(fd + psd)
    np.testing.assert_array_equal(theta_flatten(theta_unflatten(x)), x)


def test_theta_unflatten_length():
    with pytest.raises(ValueError):
        theta_unflatten(np.ones(11))


def test_prior_spec_roundtrip_and_density():
    lo = np.r_[-np.ones(8), 1e-3 * np.ones(4)]
    hi = np.r_[np.ones(8) * 3, np.ones(4)]
    p = PriorSpec(lo, hi)
    q = PriorSpec.from_dict(p.to_dict())
    np.testing.assert_array_equal(q.lower, lo)
    assert p.log_pdf(p.midpoint) == pytest.approx(-np.sum(np.log(hi - lo)))
    assert p.log_pdf(hi + 1) == -np.inf
    with pytest.raises(ValueError):
        PriorSpec(hi, lo)
    with pytest.raises(ValueError):
        PriorSpec(np.r_[lo[:8], -np.ones(4)], hi)


def test_context_band_order(ctx_truth):
    from fdbayes.spectral import averaged_psd
    from fdbayes.synth import TimeSeries

    cfg, _, _ = ctx_truth
    x = np.random.default_rng(0).standard_normal((4000, 2))
    psd = averaged_psd(TimeSeries(0.01, x[:, 0], x[:, 1]), 4)
    with pytest.raises(ValueError):
        LikelihoodContext.from_psd(psd, (FrequencyBand(5, 9), FrequencyBand(8, 12)), cfg.structural)
    with pytest.raises(ValueError):
        LikelihoodContext.from_psd(psd, (FrequencyBand(1, 2), FrequencyBand(3, 4)), cfg.structural, expectation="exact")
