import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from fdbayes.aeroelastic import (
    FD_NAMES,
    FlowCondition,
    FlutterDerivatives,
    SingularSystemError,
    StructuralParams,
    SystemMatrices,
    ThetaVector,
    characteristic_coefficients,
    from_modified,
    frf,
    impedance,
    is_asymptotically_stable,
    reduced_frequencies,
    system_matrices,
    theoretical_psd,
    to_modified,
)
from fdbayes.synth import state_matrix

fd_values = st.floats(-20, 20, allow_nan=False)
fd_sets = st.builds(FlutterDerivatives, *[fd_values] * 8)


def test_reduced_frequencies_bridge(bridge, flow30):
    K_h, K_a = reduced_frequencies(bridge, flow30)
    assert round(K_h, 4) == 0.7540
    assert round(K_a, 4) == 1.8850


def test_reduced_frequencies_thin_plate(thin_plate):
    K_h, K_a = reduced_frequencies(thin_plate, FlowCondition(8.6))
    assert round(K_h, 4) == 0.6247
    assert round(K_a, 4) == 1.0028


@pytest.mark.parametrize("field", ["m", "I", "omega_h", "B"])
def test_structural_params_reject_nonpositive(field):
    kw = dict(m=1.0, I=1.0, omega_h=1.0, omega_alpha=2.0, xi_h=0.01, xi_alpha=0.01, B=1.0)
    kw[field] = 0.0
    with pytest.raises(ValueError):
        StructuralParams(**kw)


def test_flow_rejects_zero_speed():
    with pytest.raises(ValueError):
        FlowCondition(0.0)


def test_theta_band_forcing():
    th = ThetaVector(FlutterDerivatives(), 1.0, 2.0, 3.0, 4.0)
    assert th.band_forcing(1) == (1.0, 2.0)
    assert th.band_forcing(2) == (3.0, 4.0)
    with pytest.raises(ValueError):
        th.band_forcing(3)
    with pytest.raises(ValueError):
        ThetaVector(FlutterDerivatives(), 0.0, 1.0, 1.0, 1.0)


@given(fd_sets)
def test_modified_roundtrip(bridge, fds):
    back = from_modified(to_modified(fds, bridge), bridge)
    for n in FD_NAMES:
        assert getattr(back, n) == pytest.approx(getattr(fds, n), rel=1e-12, abs=1e-12)


def test_modified_scaling_by_hand(bridge):
    m = to_modified(FlutterDerivatives(h3=1.0, a1=1.0), bridge)
    r, B = bridge.rho, bridge.B
    assert m.H3 == pytest.approx(r * B**3 * bridge.omega_alpha**2 / bridge.m)
    assert m.A1 == pytest.approx(r * B**3 * bridge.omega_h / bridge.I)
    assert m.H1 == 0.0


def test_zero_fds_give_structural_matrices(bridge):
    sm = system_matrices(to_modified(FlutterDerivatives(), bridge), bridge)
    np.testing.assert_allclose(sm.C, np.diag([2 * 0.005 * bridge.omega_h, 2 * 0.005 * bridge.omega_alpha]))
    np.testing.assert_allclose(sm.K, np.diag([bridge.omega_h**2, bridge.omega_alpha**2]))


@given(fd_sets, st.floats(0.01, 5.0))
def test_frf_inverts_impedance(bridge, fds, w):
    sm = system_matrices(to_modified(fds, bridge), bridge)
    try:
        H = frf(sm, w)
    except SingularSystemError:
        return
    np.testing.assert_allclose(H @ impedance(sm, w), np.eye(2), atol=1e-8 * np.abs(H).max() * np.abs(impedance(sm, w)).max())


def test_frf_singular_at_undamped_resonance():
    sm = SystemMatrices(np.eye(2), np.zeros((2, 2)), np.diag([1.0, 4.0]))
    with pytest.raises(SingularSystemError):
        frf(sm, 1.0)


@given(fd_sets, st.floats(1e-4, 1.0), st.floats(1e-4, 1.0))
def test_theoretical_psd_hermitian_psd(bridge, fds, sl, sm_):
    omega = np.linspace(0.4, 1.8, 40)
    try:
        S = theoretical_psd(ThetaVector(fds, sl, sm_, sl, sm_), bridge, omega, 1)
    except SingularSystemError:
        return
    np.testing.assert_array_equal(S, np.conj(np.swapaxes(S, -1, -2)))
    eig = np.linalg.eigvalsh(S)
    assert np.all(eig >= -1e-9 * np.abs(S).max())


def test_uncoupled_sdof_psd(bridge):
    omega = np.linspace(0.3, 2.0, 50)
    th = ThetaVector(FlutterDerivatives(), 2e-3, 3e-3, 2e-3, 3e-3)
    S = theoretical_psd(th, bridge, omega, 1)
    wh, wa = bridge.omega_h, bridge.omega_alpha
    sdof_h = 2e-3 / np.abs(wh**2 - omega**2 + 2j * 0.005 * wh * omega) ** 2
    sdof_a = 3e-3 / np.abs(wa**2 - omega**2 + 2j * 0.005 * wa * omega) ** 2
    np.testing.assert_allclose(S[:, 0, 0].real, sdof_h, rtol=1e-12)
    np.testing.assert_allclose(S[:, 1, 1].real, sdof_a, rtol=1e-12)
    np.testing.assert_allclose(S[:, 0, 1], 0.0, atol=0)


@given(st.lists(st.floats(-3, 3), min_size=8, max_size=8))
def test_characteristic_polynomial_matches_state_matrix(v):
    C = np.array(v[:4]).reshape(2, 2)
    K = np.array(v[4:]).reshape(2, 2)
    A = state_matrix(SystemMatrices(np.eye(2), C, K))
    np.testing.assert_allclose(np.poly(A)[1:], characteristic_coefficients(C, K), atol=1e-9)


@given(st.lists(st.floats(-3, 3), min_size=8, max_size=8))
def test_routh_hurwitz_agrees_with_eigenvalues(v):
    C = np.array(v[:4]).reshape(2, 2)
    K = np.array(v[4:]).reshape(2, 2)
    ev = np.linalg.eigvals(state_matrix(SystemMatrices(np.eye(2), C, K)))
    # stay away from the stability boundary where rounding decides
    assume(np.abs(ev.real).min() > 1e-6)
    assert is_asymptotically_stable(C, K) == bool(np.all(ev.real < 0))
