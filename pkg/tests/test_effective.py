import numpy as np
import pytest

from cavitychain import fock
from cavitychain.effective import (build_couplings, energy_and_gradient,
                                   frame_equality_check)
from cavitychain.models import ModelSpec, effective_single_coupling
from cavitychain.photon import PhotonFrame
from cavitychain.scf import fd_gradient


def test_identity_frame_reproduces_bare_model():
    spec = ModelSpec(N=4, omega=1.3, epsilon=0.9, g=0.4, J=(0.2, -0.5, 0.7))
    c = build_couplings(spec, PhotonFrame())
    assert c.e_photon == pytest.approx(spec.omega / 2)
    assert c.h_z == pytest.approx(spec.epsilon)
    assert c.h_x == 0.0 and c.h_y == 0.0
    assert c.k_xx == 0.0
    assert (c.jt_xx, c.jt_yy, c.jt_zz, c.jt_yz) == pytest.approx(spec.J + (0.0,))


def test_kxx_value_and_polaron_minimum():
    # gp = 0.5, lam = -1: k_xx = 0.25 * (-1 + 0.5) = -0.125
    spec = ModelSpec(N=8, g=0.5)
    assert effective_single_coupling(spec) == pytest.approx(0.5)
    c = build_couplings(spec, PhotonFrame(lam=-1.0))
    assert c.k_xx == pytest.approx(-0.125, abs=1e-14)
    # stationarity at the polaron point
    h = 1e-6
    k_plus = build_couplings(spec, PhotonFrame(lam=-1.0 + h)).k_xx
    k_minus = build_couplings(spec, PhotonFrame(lam=-1.0 - h)).k_xx
    assert (k_plus - k_minus) / (2 * h) == pytest.approx(0.0, abs=1e-9)
    assert c.k_xx == pytest.approx(-effective_single_coupling(spec) ** 2 / (2 * spec.omega))


def test_yy_zz_trace_conservation():
    rng = np.random.default_rng(1)
    spec = ModelSpec(N=6, g=0.6, J=(0.4, -1.1, 2.3))
    for _ in range(40):
        frame = PhotonFrame(delta_x=rng.uniform(-2, 2), delta_p=rng.uniform(-2, 2),
                            r=rng.uniform(-1, 1), lam=rng.uniform(-2, 2))
        c = build_couplings(spec, frame)
        assert c.jt_yy + c.jt_zz == pytest.approx(spec.J[1] + spec.J[2], abs=1e-14)


def test_dressed_limit_with_c2_zero():
    # squeezing x (r < 0) blows up v_p and kills C2: yy and zz mix equally
    spec = ModelSpec(N=4, g=0.7, J=(0.0, 0.0, 1.0))
    frame = PhotonFrame(r=-2.5, lam=1.0)
    c = build_couplings(spec, frame)
    assert c.jt_yy == pytest.approx(0.5, abs=1e-3)
    assert c.jt_zz == pytest.approx(0.5, abs=1e-3)


def test_frame_equality_trivial_frame():
    spec = ModelSpec(N=3, g=0.5, J=(0.3, -0.4, 0.8))
    rng = np.random.default_rng(0)
    phi = rng.normal(size=8)
    res = frame_equality_check(spec, PhotonFrame(), phi, n_max=60)
    assert res < 1e-10


def test_frame_equality_random_frames():
    rng = np.random.default_rng(42)
    spec = ModelSpec(N=3, g=0.5, J=(0.3, -0.4, 0.8))
    for _ in range(30):
        frame = PhotonFrame(delta_x=rng.uniform(-2, 2), delta_p=rng.uniform(-2, 2),
                            r=rng.uniform(-0.5, 0.5), lam=rng.uniform(-1, 1))
        phi = rng.normal(size=8) + 1j * rng.normal(size=8)
        res = frame_equality_check(spec, frame, phi, n_max=60)
        assert res < 1e-8


def test_frame_equality_exercises_s_terms():
    # nonzero mean_p switches on the S1/S2 dressing channels
    spec = ModelSpec(N=2, g=0.8, J=(0.0, 0.7, -0.9))
    rng = np.random.default_rng(9)
    frame = PhotonFrame(delta_x=0.5, delta_p=1.4, r=0.2, lam=0.8)
    phi = rng.normal(size=4) + 1j * rng.normal(size=4)
    assert frame_equality_check(spec, frame, phi, n_max=60) < 1e-8


def test_frame_equality_detects_wrong_signs():
    # mutating the S1 sign must produce a visible residual: the check is sharp
    from cavitychain.effective import EffectiveCouplings
    import cavitychain.effective as eff

    spec = ModelSpec(N=2, g=0.8, J=(0.0, 0.7, -0.9))
    frame = PhotonFrame(delta_x=0.5, delta_p=1.4, r=0.2, lam=0.8)
    # complex state: the y-sector couplings are invisible on real states
    phi = np.array([0.3 + 0.4j, -0.5, 0.7 - 0.2j, 0.2j])
    orig = eff.build_couplings

    def flipped(s, f):
        c = orig(s, f)
        return EffectiveCouplings(e_photon=c.e_photon, h_x=c.h_x, h_y=-c.h_y,
                                  h_z=c.h_z, k_xx=c.k_xx, jt_xx=c.jt_xx,
                                  jt_yy=c.jt_yy, jt_zz=c.jt_zz, jt_yz=-c.jt_yz)

    eff.build_couplings = flipped
    try:
        res = frame_equality_check(spec, frame, phi, n_max=60)
    finally:
        eff.build_couplings = orig
    assert res > 1e-4


def test_entangler_spectral_application_matches_expm():
    # the structured U application equals the direct matrix exponential
    rng = np.random.default_rng(5)
    N, n_max, eta = 2, 30, 0.6
    state = rng.normal(size=(n_max + 1) * 2 ** N) + 1j * rng.normal(size=(n_max + 1) * 2 ** N)
    state /= np.linalg.norm(state)
    fast = fock.apply_entangler(state, eta, N, n_max)
    direct = fock.entangler_matrix(eta, N, n_max) @ state
    assert np.max(np.abs(fast - direct)) < 1e-10


def test_analytic_gradient_matches_finite_differences():
    from cavitychain.effective import SpinSums

    rng = np.random.default_rng(19)
    spec = ModelSpec(N=8, g=0.7, J=(0.5, -0.3, 1.2))
    for _ in range(20):
        frame = PhotonFrame(delta_x=rng.uniform(-2, 2), delta_p=rng.uniform(-2, 2),
                            r=rng.uniform(-0.6, 0.6), lam=rng.uniform(-1.5, 0.5))
        sums = SpinSums(X=rng.uniform(-4, 4), Y=rng.uniform(-4, 4),
                        Z=rng.uniform(-4, 4), X2=rng.uniform(0, 16),
                        Bxx=rng.uniform(-2, 2), Byy=rng.uniform(-2, 2),
                        Bzz=rng.uniform(-2, 2), Byz=rng.uniform(-2, 2))
        _, grad = energy_and_gradient(spec, frame, sums)
        fd = fd_gradient(spec, frame, sums, h=1e-5)
        assert np.max(np.abs(grad - fd)) / max(1.0, np.max(np.abs(fd))) < 1e-6
