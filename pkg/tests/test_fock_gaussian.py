import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kerrhybrid.errors import DegenerateCenter, NonPhysicalState
from kerrhybrid.fock_gaussian import (
    FockGaussianParams,
    corrected_center,
    density_element,
    density_matrix,
    fock_window,
    from_phase_space,
    thermal_photons,
    to_phase_space,
)
from kerrhybrid.gaussian_state import DstsShape, GaussianState
from kerrhybrid.lindblad import FockDensityMatrix, moments
from kerrhybrid.metrics import conversion_infidelity


@st.composite
def params(draw):
    w1 = draw(st.floats(0.2, 6.0))
    w2 = w1 * draw(st.floats(0.05, 1.0))
    return FockGaussianParams(
        draw(st.floats(1.0, 50.0)), draw(st.floats(-4.0, 4.0)), w1, w2, draw(st.floats(-1.0, 1.0))
    )


def test_rejects_invalid_params():
    with pytest.raises(NonPhysicalState):
        FockGaussianParams(10.0, 0.0, 1.0, 1.5)
    with pytest.raises(NonPhysicalState):
        FockGaussianParams(0.0, 0.0, 1.0, 1.0)


def test_diagonal_peak_value():
    p = FockGaussianParams(10.0, 0.3, 1.7, 0.9, 0.4)
    val = density_element(p, 100, 100)
    assert val.imag == 0.0
    assert val.real == pytest.approx(1.0 / math.sqrt(2 * math.pi * 1.7 * 100.0))


def test_hermitian_elements():
    p = FockGaussianParams(7.0, 1.1, 2.0, 0.5, -0.3)
    rng = np.random.default_rng(1)
    n, m = rng.integers(0, 120, size=(2, 50))
    assert np.allclose(density_element(p, n, m), np.conj(density_element(p, m, n)), rtol=0, atol=1e-15)


def test_trace_close_to_one():
    p = FockGaussianParams(10.0, 0.0, 1.0, 1.0, 0.0)
    n = np.arange(0, int(100 + 10 * 10) + 1)
    assert density_element(p, n, n).real.sum() == pytest.approx(1.0, abs=1e-8)


def test_window_covers_populations():
    p = FockGaussianParams(20.0, 0.0, 3.0, 1.0, 0.0)
    lo, hi = fock_window(p)
    full = density_element(p, np.arange(0, 2000), np.arange(0, 2000)).real.sum()
    assert density_matrix(p, lo, hi).trace().real == pytest.approx(full, abs=1e-14)


def test_to_phase_space_examples():
    coh = to_phase_space(FockGaussianParams(3.0, 0.2, 1.0, 1.0, 0.0))
    assert (coh.d0, coh.b) == pytest.approx((0.25, 0.0))
    thermal = to_phase_space(FockGaussianParams(3.0, 0.0, 2.0, 0.5, 0.0))
    assert (thermal.d0, thermal.b) == pytest.approx((0.5, 0.0))
    assert thermal.n_th == pytest.approx(0.5)
    sheared = to_phase_space(FockGaussianParams(3.0, 0.4, 1.0, 1.0, 0.25))
    assert sheared.d0 == pytest.approx(3.0 / 8.0)
    assert sheared.b == pytest.approx(math.sqrt(5.0) / 8.0)
    assert (sheared.theta - 0.8) % (2 * math.pi) == pytest.approx(math.atan(2.0))


def test_from_phase_space_examples():
    p = from_phase_space(GaussianState(5.0, 0.25, 0.0))
    assert (p.w1, p.w2, p.k) == pytest.approx((1.0, 1.0, 0.0))
    p = from_phase_space(GaussianState(3.0, 0.5, 0.25, math.pi / 2))
    assert (p.w1, p.w2, p.k) == pytest.approx((2.0, 2.0 / 3.0, 1.0 / 8.0))
    with pytest.raises(DegenerateCenter):
        from_phase_space(GaussianState(0j, 0.5, 0.25, 1.0))


def test_round_trip_many_states():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(1000):
        shape = DstsShape(rng.uniform(0, 1.5), rng.uniform(0, 2 * math.pi), rng.uniform(0, 3))
        center = rng.uniform(1, 30) * np.exp(1j * rng.uniform(-math.pi, math.pi))
        s = GaussianState.from_dsts(shape, center)
        back = to_phase_space(from_phase_space(s))
        dtheta = abs(math.remainder(back.theta - s.theta, 2 * math.pi)) * s.b
        worst = max(worst, abs(back.d0 - s.d0), abs(back.b - s.b), dtheta, abs(back.center - s.center))
    assert worst < 1e-12


def test_corrected_center_examples():
    assert corrected_center(FockGaussianParams(4.0, 0.7, 1.0, 1.0, 0.0)) == pytest.approx(4.0 * np.exp(0.7j))
    assert corrected_center(FockGaussianParams(10.0, 0.0, 4.0, 0.25, 0.0)) == pytest.approx(9.925)


def test_thermal_photon_examples():
    assert thermal_photons(FockGaussianParams(5.0, 0.0, 1.3, 1.3)) == 0.0
    assert thermal_photons(FockGaussianParams(5.0, 0.0, 2.0, 0.5)) == pytest.approx(0.5)


@given(params())
def test_thermal_photons_consistent(p):
    assert thermal_photons(p) == pytest.approx(to_phase_space(p).to_dsts().n_th, abs=1e-12 * (1 + p.w1 / p.w2))


@given(params())
def test_axis_variances(p):
    s = to_phase_space(p)
    assert s.quadrature_variance(p.phi_beta) == pytest.approx(p.w1 / 4.0, rel=1e-10)
    orth = 1.0 / (4.0 * p.w2) + 4.0 * p.k**2 * p.w1
    assert s.quadrature_variance(p.phi_beta + math.pi / 2) == pytest.approx(orth, rel=1e-10)


@given(st.floats(0.2, 1.5), st.floats(-0.8, 0.8), st.floats(1.0, 4.0))
def test_shape_depends_on_product_and_shear(product, k, scale):
    def ratio_and_angle(w1):
        s = to_phase_space(FockGaussianParams(10.0, 0.0, w1, product / w1, k))
        return (s.d0 + s.b) / (s.d0 - s.b), s.theta

    w1 = math.sqrt(product) * 1.01
    ra, ta = ratio_and_angle(w1)
    rb, tb = ratio_and_angle(w1 * scale)
    assert ra == pytest.approx(rb, rel=1e-10)
    assert math.remainder(ta - tb, 2 * math.pi) == pytest.approx(0.0, abs=1e-10)


@given(st.floats(1.0, 30.0), st.floats(-3.0, 3.0), st.floats(0.2, 4.0), st.floats(0.05, 1.0))
def test_unsheared_axis_alignment(beta_abs, phi, w1, frac):
    p = FockGaussianParams(beta_abs, phi, w1, w1 * frac, 0.0)
    s = to_phase_space(p)
    if s.b < 1e-12:
        return
    rel = math.remainder(s.theta / 2 - phi, math.pi)
    short_along_beta = abs(rel) < 1e-9
    assert short_along_beta or abs(abs(rel) - math.pi / 2) < 1e-9
    assert short_along_beta == (p.w1 * p.w2 < 1.0)


@pytest.mark.parametrize("phi", [0.0, 0.7])
def test_matrix_moments_match_conversion(phi):
    p = FockGaussianParams(30.0, phi, 1.5, 0.8, 0.1)
    lo, hi = fock_window(p, 10.0)
    rho = np.zeros((hi, hi), dtype=complex)
    rho[lo:, lo:] = density_matrix(p, lo, hi)
    fit = GaussianState.from_moments(*moments(FockDensityMatrix(rho)))
    conv = to_phase_space(p)
    assert abs(fit.center - corrected_center(p)) < 2e-3
    assert math.remainder(fit.theta - conv.theta, 2 * math.pi) == pytest.approx(0.0, abs=2e-3)
    assert fit.d0 == pytest.approx(conv.d0, rel=5e-3)
    assert fit.b == pytest.approx(conv.b, rel=5e-3)


def test_conversion_infidelity_scales_as_inverse_photon_number():
    betas = np.array([10.0, 20.0, 40.0, 60.0])
    infid = [conversion_infidelity(FockGaussianParams(b, 0.3, 1.5, 1.5, 0.2)) for b in betas]
    slope = np.polyfit(np.log(betas), np.log(infid), 1)[0]
    assert slope == pytest.approx(-2.0, abs=0.15)


def test_center_correction_helps_about_twofold():
    p = FockGaussianParams(30.0, 0.0, 1.5, 1.5, 0.3)
    plain = conversion_infidelity(p)
    corrected = conversion_infidelity(p, center_correction=True)
    assert 1.3 < plain / corrected < 4.0
