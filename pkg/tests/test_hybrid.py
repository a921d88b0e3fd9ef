import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import MHZ, fig4_config
from kerrhybrid.config import (
    ConstantDrive,
    DimensionlessConfig,
    KerrNonlinearity,
    PiecewiseConstantDrive,
    SimConfig,
    rescale,
)
from kerrhybrid.errors import IntegrationFailure
from kerrhybrid.gaussian_state import GaussianState
from kerrhybrid.hybrid import (
    HybridState,
    PhaseShapeState,
    evolve,
    evolve_lab_frame,
    evolve_phase_space,
    hybrid_rhs,
    linear_center,
    linear_lab_frame_rhs,
    phase_rhs,
    re_eps_over_beta,
)
from kerrhybrid.steady_state import steady_branches, steady_shape


def dimensionless(eps, delta=0.0, n_b=0.0, **kw):
    return DimensionlessConfig(eps, delta).to_config(**kw).with_(n_b=n_b)


# -- right-hand side ------------------------------------------------------------


def test_damping_keeps_vacuum_shape():
    cfg = SimConfig(kappa=2.0, detuning=0.7)
    d = hybrid_rhs(0.0, HybridState(1.5 - 0.5j), cfg)
    assert (d.w1, d.w2, d.k) == (0.0, 0.0, 0.0)
    assert d.beta == pytest.approx(-(0.7j + 1.0) * (1.5 - 0.5j), rel=1e-15)


def test_kerr_shear_rate_without_drive():
    eta = -0.3
    cfg = SimConfig(kappa=1.0, nonlinearity=KerrNonlinearity(eta))
    beta = 2.0 + 1.0j
    d = hybrid_rhs(0.0, HybridState(beta), cfg)
    assert d.k == pytest.approx(0.5 * eta * abs(beta) ** 2, rel=1e-15)


def test_regularized_ratio_is_finite_at_zero_center():
    assert re_eps_over_beta(3.0, 0j, 1.0) == 0.0
    assert re_eps_over_beta(3.0, 1.0 + 0j, 1.0) == pytest.approx(3.0, rel=1e-20)


def test_vacuum_seed_is_orthogonal_to_drive():
    cfg = dimensionless(2.0 + 1.0j)
    seed = HybridState.vacuum(cfg)
    assert abs(seed.beta) == pytest.approx(1e-15)
    assert re_eps_over_beta(cfg.drive(0.0), seed.beta, cfg.kappa) == pytest.approx(0.0, abs=1e-12)


# -- evolution --------------------------------------------------------------------


def test_linear_resonator_matches_closed_form():
    # dense-output interpolation at the default tolerance is accurate to ~1e-8 only
    cfg = SimConfig(kappa=1.0, detuning=0.8, drive=ConstantDrive(3.0 - 1.0j), t_final=10.0, dt_out=0.1)
    traj = evolve(HybridState.vacuum(cfg), cfg, rtol=1e-11)
    exact = linear_center(cfg, traj.times)
    assert np.abs(traj.beta - exact).max() < 1e-9
    assert np.abs(traj.w1 - 1.0).max() < 1e-9
    assert np.abs(traj.w2 - 1.0).max() < 1e-9
    assert np.abs(traj.k).max() < 1e-9


def test_reference_drive_reaches_one_hundred_photons(fig4):
    traj = evolve(HybridState.vacuum(fig4), fig4)
    assert traj.photons[-1] == pytest.approx(100.0, rel=0.01)


def test_hundred_photon_run_relaxes_to_closed_form_steady_shape():
    cfg = fig4_config(t_final_kappa=40.0, dt_kappa=1.0)
    traj = evolve(HybridState.vacuum(cfg), cfg)
    (branch,) = steady_branches(cfg)
    state, _, _ = steady_shape(branch.beta, cfg)
    final = traj.gaussians[-1]
    assert final.center == pytest.approx(branch.beta, rel=1e-6)
    assert final.d0 == pytest.approx(state.d0, rel=1e-6)
    assert final.b == pytest.approx(state.b, rel=1e-6)


def test_strong_drive_photon_peak():
    kappa = 5.0 * MHZ
    cfg = SimConfig(
        kappa=kappa,
        nonlinearity=KerrNonlinearity(-0.15 * MHZ),
        drive=ConstantDrive(290.0 * MHZ),
        t_final=2.0 / kappa,
        dt_out=0.001 / kappa,
    )
    traj = evolve(HybridState.vacuum(cfg), cfg)
    i = int(np.argmax(traj.nbar))
    assert traj.nbar[i] == pytest.approx(350.0, rel=0.03)
    assert kappa * traj.times[i] == pytest.approx(0.4, abs=0.05)


def test_piecewise_drive_switch_off_decays():
    cfg = SimConfig(
        kappa=1.0,
        drive=PiecewiseConstantDrive((2.0,), (1.0, 0.0)),
        t_final=6.0,
        dt_out=0.5,
    )
    traj = evolve(HybridState.vacuum(cfg), cfg, rtol=1e-11)
    beta2 = traj.beta[traj.times == 2.0][0]
    late = traj.times > 2.0
    expected = beta2 * np.exp(-0.5 * (traj.times[late] - 2.0))
    assert np.abs(traj.beta[late] - expected).max() < 1e-9


def test_rejects_unsorted_sample_times(fig4):
    with pytest.raises(ValueError):
        evolve(HybridState.vacuum(fig4), fig4, [0.0, 2e-8, 1e-8])


def test_shape_violation_is_reported():
    cfg = SimConfig(kappa=1.0)
    with pytest.raises(IntegrationFailure):
        evolve(HybridState(1.0, w1=1.0, w2=2.0), cfg, [0.0, 0.1])


def test_center_is_independent_of_shape_equations(fig4):
    seed = HybridState.vacuum(fig4)
    step = 0.01 / fig4.kappa
    full = evolve(seed, fig4, fixed_step=step)
    frozen = evolve(seed, fig4, fixed_step=step, freeze_shape=True)
    assert np.array_equal(full.beta, frozen.beta)


def test_fixed_step_is_deterministic(fig4):
    seed = HybridState.vacuum(fig4)
    a = evolve(seed, fig4, fixed_step=0.01 / fig4.kappa)
    b = evolve(seed, fig4, fixed_step=0.01 / fig4.kappa)
    assert np.array_equal(a.beta, b.beta) and np.array_equal(a.k, b.k)
    adaptive = evolve(seed, fig4)
    assert np.abs(a.beta - adaptive.beta).max() < 1e-6 * np.abs(adaptive.beta).max()


def test_pure_nonlinearity_conserves_shape_and_amplitude():
    # kappa is tiny but positive, so damping terms are far below tolerance
    eta, detuning = 0.4, 0.3
    cfg = SimConfig(kappa=1e-12, detuning=detuning, nonlinearity=KerrNonlinearity(eta))
    beta0 = 1.2 + 0.5j
    times = np.linspace(0.0, 5.0, 51)
    traj = evolve(HybridState(beta0), cfg, times, rtol=1e-12, atol=1e-14)
    n = abs(beta0) ** 2
    assert np.abs(np.abs(traj.beta) - abs(beta0)).max() < 1e-9
    assert np.abs(traj.w1 - 1.0).max() < 1e-9 and np.abs(traj.w2 - 1.0).max() < 1e-9
    assert np.abs(traj.k - 0.5 * eta * n * times).max() < 1e-8
    phase = np.unwrap(np.angle(traj.beta))
    assert np.abs(phase - phase[0] + (detuning + eta * n) * times).max() < 1e-8


def test_rhs_matches_finite_differences(fig4):
    kappa = fig4.kappa
    dt = 1e-4 / kappa
    centers = np.array([0.5, 1.0, 3.0, 8.0]) / kappa
    times = np.sort(np.concatenate([centers - dt, centers, centers + dt]))
    traj = evolve(HybridState.vacuum(fig4), fig4, np.concatenate([[0.0], times]), rtol=1e-12, atol=1e-14)
    y = np.array([s.as_array() for s in traj.states[1:]])
    for j in range(len(centers)):
        lo, mid, hi = y[3 * j], y[3 * j + 1], y[3 * j + 2]
        fd = (hi - lo) / (2 * dt)
        exact = hybrid_rhs(0.0, HybridState.from_array(mid), fig4).as_array()
        assert np.abs(fd - exact).max() < 1e-6 * np.abs(exact).max()


@settings(max_examples=25)
@given(
    eps=st.floats(0.0, 3.0),
    delta=st.floats(-3.0, 3.0),
    beta_re=st.floats(-3.0, 3.0),
    beta_im=st.floats(-3.0, 3.0),
)
def test_linear_limit_never_squeezes(eps, delta, beta_re, beta_im):
    cfg = SimConfig(kappa=1.0, detuning=delta, drive=ConstantDrive(eps))
    traj = evolve(HybridState(complex(beta_re, beta_im) + 1e-15), cfg, np.linspace(0.0, 5.0, 11))
    assert np.abs(traj.w1 - 1.0).max() < 1e-9
    assert np.abs(traj.w2 - 1.0).max() < 1e-9
    assert np.abs(traj.k).max() < 1e-9


@settings(max_examples=25)
@given(eps=st.floats(0.1, 12.0), delta=st.floats(-3.0, 3.0), n_b=st.floats(0.0, 1.0))
def test_heisenberg_bound_along_trajectories(eps, delta, n_b):
    cfg = dimensionless(eps, delta, n_b)
    traj = evolve(HybridState.vacuum(cfg), cfg, np.linspace(0.0, 4.0, 81))
    assert np.all(16.0 * (traj.d0**2 - traj.b**2) >= 1.0 - 1e-9)


# -- phase-space form ------------------------------------------------------------------


def test_phase_rhs_linear_limit():
    cfg = SimConfig(kappa=2.0, drive=ConstantDrive(1.0), n_b=0.3)
    dd0, db, _ = phase_rhs(0.0, 1.0 + 1.0j, PhaseShapeState(0.5, 0.1, 0.4), cfg)
    assert dd0 == pytest.approx(-2.0 * 0.5 + 0.5 * cfg.coth_b, rel=1e-15)
    assert db == pytest.approx(-2.0 * 0.1, rel=1e-15)


@given(
    d0=st.floats(0.3, 2.0),
    ratio=st.floats(0.0, 0.9),
    dth=st.floats(-math.pi, math.pi),
    beta_re=st.floats(0.5, 5.0),
    eta=st.floats(-1.0, 1.0),
)
def test_effective_rates_of_principal_variances(d0, ratio, dth, beta_re, eta):
    cfg = SimConfig(kappa=1.0, nonlinearity=KerrNonlinearity(eta), drive=ConstantDrive(1.0), n_b=0.2)
    b = ratio * d0
    beta = complex(beta_re, 0.3)
    dd0, db, _ = phase_rhs(0.0, beta, PhaseShapeState(d0, b, dth), cfg)
    g = 2.0 * eta * abs(beta) ** 2 * math.sin(dth)
    for sign in (1.0, -1.0):
        rate = -(1.0 - sign * g) * (d0 + sign * b) + 0.25 * cfg.coth_b
        assert dd0 + sign * db == pytest.approx(rate, rel=1e-12, abs=1e-13)


@pytest.mark.parametrize("eps,delta", [(0.40, 0.0), (2.0, 1.0), (10.0, 0.0)])
def test_phase_space_form_is_equivalent(eps, delta):
    cfg = dimensionless(eps, delta, n_b=0.1)
    times = np.linspace(0.0, 10.0, 101)
    # start from a mildly squeezed state so the angle equation is regular
    start = HybridState(0.5 - 0.2j, 1.3, 0.9, 0.05)
    g0 = start.to_gaussian()
    shape0 = PhaseShapeState(g0.d0, g0.b, g0.theta - 2.0 * math.atan2(g0.center.imag, g0.center.real))
    hyb = evolve(start, cfg, times, rtol=1e-12, atol=1e-14)
    betas, states = evolve_phase_space(start.beta, shape0, cfg, times)
    assert np.abs(betas - hyb.beta).max() < 1e-8 * max(1.0, np.abs(hyb.beta).max())
    d0 = np.array([s.d0 for s in states])
    b = np.array([s.b for s in states])
    assert np.abs(d0 - hyb.d0).max() < 1e-8
    assert np.abs(b - hyb.b).max() < 1e-8
    angle = np.angle(np.exp(1j * (np.array([s.theta for s in states]) - hyb.theta)))
    assert np.abs(angle * hyb.b).max() < 1e-8


# -- laboratory frame -------------------------------------------------------------------


def test_lab_frame_free_rotation_conserves_shape():
    w = 50.0
    cfg = SimConfig(kappa=1e-300, omega_r0=w)
    times = np.linspace(0.0, 1.0, 201)
    cov0 = (0.15, 0.45, 0.1)
    y = evolve_lab_frame(cfg, times, (1.0, 0.0), cov0)
    d0 = 0.5 * (y[:, 2] + y[:, 3])
    b = np.hypot(0.5 * (y[:, 3] - y[:, 2]), y[:, 4])
    assert np.abs(d0 - d0[0]).max() < 1e-8
    assert np.abs(b - b[0]).max() < 1e-8
    # shape angle: D_x - D_p = -2 b cos(Theta), D_xp = -b sin(Theta)
    angle = np.unwrap(np.arctan2(-y[:, 4], -0.5 * (y[:, 2] - y[:, 3])))
    assert np.abs(angle - angle[0] + 2.0 * w * times).max() < 1e-6


def test_lab_frame_relaxes_to_vacuum():
    cfg = SimConfig(kappa=1.0, omega_r0=20.0)
    y = evolve_lab_frame(cfg, np.linspace(0.0, 70.0, 3), (2.0, -1.0), (0.6, 0.1, 0.2))
    assert y[-1, 2:] == pytest.approx([0.25, 0.25, 0.0], abs=1e-10)
    assert y[-1, :2] == pytest.approx([0.0, 0.0], abs=1e-10)


def test_lab_frame_rhs_needs_resonator_frequency():
    with pytest.raises(ValueError):
        linear_lab_frame_rhs(0.0, (0, 0), (0.25, 0.25, 0), SimConfig(kappa=1.0))


def test_rotating_wave_approximation():
    # omega_r0 / kappa = 1e3: lab-frame center demodulated at the drive matches the RWA center
    kappa, w, detuning = 1.0, 1000.0, 0.5
    cfg = SimConfig(kappa=kappa, detuning=detuning, drive=ConstantDrive(2.0 + 1.0j), omega_r0=w, n_b=0.1)
    times = np.linspace(0.0, 6.0, 601)
    y = evolve_lab_frame(cfg, times, rtol=1e-11, atol=1e-13)
    wd = w - detuning
    rwa = linear_center(cfg, times)
    lab = (y[:, 0] + 1j * y[:, 1]) * np.exp(1j * wd * times)
    scale = np.abs(rwa).max()
    assert np.abs(lab - rwa).max() < 5.0 * kappa / w * scale
    d0 = 0.5 * (y[:, 2] + y[:, 3])
    rwa_d0 = 0.25 * cfg.coth_b + (0.25 - 0.25 * cfg.coth_b) * np.exp(-kappa * times)
    assert np.abs(d0 - rwa_d0).max() < 5.0 * kappa / w


# -- rescaling ------------------------------------------------------------------------------


def test_reference_dimensionless_drive(fig4):
    dim = rescale(fig4)
    assert abs(dim.eps_tilde) == pytest.approx(0.40, abs=0.005)
    assert dim.delta_omega_tilde == 0.0


def test_photon_number_scales_with_inverse_nonlinearity():
    base = fig4_config(t_final_kappa=30.0, dt_kappa=1.0)
    half = fig4_config(t_final_kappa=30.0, dt_kappa=1.0, eta_mhz=-0.01, eps_mhz=32.0 * math.sqrt(2.0))
    assert rescale(half).eps_tilde == pytest.approx(rescale(base).eps_tilde, rel=1e-14)
    assert rescale(half).delta_omega_tilde == rescale(base).delta_omega_tilde
    n1 = evolve(HybridState.vacuum(base), base).photons[-1]
    n2 = evolve(HybridState.vacuum(half), half).photons[-1]
    assert n2 / n1 == pytest.approx(2.0, rel=1e-6)


@pytest.mark.parametrize("n_b", [0.05, 0.5])
def test_temperature_rescaling(n_b):
    cold = dimensionless(3.0, 1.0, 0.0)
    warm = cold.with_(n_b=n_b)
    cb = warm.coth_b
    times = np.linspace(0.0, 5.0, 51)
    start = HybridState(0.3 + 0.1j, 1.2, 0.9, 0.02)
    warm_start = HybridState(start.beta, start.w1 * cb, start.w2 / cb, start.k)
    a = evolve(start, cold, times, rtol=1e-12, atol=1e-14)
    b = evolve(warm_start, warm, times, rtol=1e-12, atol=1e-14)
    assert np.abs(a.beta - b.beta).max() < 1e-10 * np.abs(a.beta).max()
    assert np.abs(a.w1 * cb - b.w1).max() < 1e-10 * cb
    assert np.abs(a.w2 / cb - b.w2).max() < 1e-10
    assert np.abs(a.k - b.k).max() < 1e-10


def test_trajectory_gaussians_are_conversions(fig4):
    traj = evolve(HybridState.vacuum(fig4), fig4, fig4.sample_times()[:20])
    for s, g in zip(traj.states, traj.gaussians):
        assert isinstance(g, GaussianState)
        assert g.center == pytest.approx(s.beta, rel=1e-15)
