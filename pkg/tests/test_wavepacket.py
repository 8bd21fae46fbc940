import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from apinem.physcore import HBAR, kinematics_from_beta
from apinem.wavepacket import (
    AliasingError,
    BeamParams,
    GridError,
    GridSpec,
    analytic_sigma_z,
    check_aliasing,
    default_grid,
    drift,
    gaussian_waist,
    moments,
)

KIN = kinematics_from_beta(0.7)


def waist(sigma_z0, L_D=0.0, N=None):
    beam = BeamParams(0.7, sigma_z0, L_D)
    sz = analytic_sigma_z(sigma_z0, beam.t_D(KIN), KIN)
    g = default_grid(sz, sigma_z0, n_min=N or 2048)
    return beam, gaussian_waist(beam, g, p0=KIN.p0)


def test_drift_example_values():
    assert analytic_sigma_z(0.04e-6, 0.6 / KIN.v0, KIN) == pytest.approx(1.50743e-6, rel=1e-5)
    assert analytic_sigma_z(0.06e-6, 0.6 / KIN.v0, KIN) == pytest.approx(1.0064e-6, rel=1e-4)
    assert analytic_sigma_z(0.4e-6, 0.0, KIN) == 0.4e-6


def test_drift_is_even_in_time():
    t = 0.3 / KIN.v0
    assert analytic_sigma_z(0.05e-6, t, KIN) == analytic_sigma_z(0.05e-6, -t, KIN)


def test_waist_is_normalised_and_minimum_uncertainty():
    beam, psi = waist(0.1e-6)
    assert psi.norm() == pytest.approx(1.0, abs=1e-12)
    m = moments(psi)
    assert m.sigma_z == pytest.approx(0.1e-6, rel=1e-9)
    assert m.sigma_p == pytest.approx(beam.sigma_p0, rel=1e-9)
    assert m.area_over_half_h == pytest.approx(1.0, abs=1e-9)
    assert m.cov_zp == pytest.approx(0.0, abs=1e-6 * m.sigma_z * m.sigma_p)


def test_grid_guards_name_the_bound():
    beam = BeamParams(0.7, 0.04e-6)
    with pytest.raises(GridError, match="sigma_z0/8"):
        gaussian_waist(beam, GridSpec(256, 10e-6))
    with pytest.raises(GridError, match="16\\*sigma_z0"):
        gaussian_waist(beam, GridSpec(4096, 0.5e-6))
    with pytest.raises(GridError, match="power of two"):
        GridSpec(1000, 1e-6)
    with pytest.raises(GridError):
        BeamParams(0.7, -1e-9)


def test_default_grid_respects_period():
    g = default_grid(1.5e-6, 0.04e-6, beta_lambda=1.2e-6, period=1.2e-6)
    assert g.z_span / 1.2e-6 == pytest.approx(round(g.z_span / 1.2e-6), abs=1e-9)
    assert g.z_span >= 32 * 1.5e-6
    assert g.dz <= 0.04e-6 / 8


def test_drift_matches_analytic_width():
    beam, psi = waist(0.04e-6, 0.6)
    out = drift(psi, beam.t_D(KIN), KIN)
    m = moments(out)
    assert m.sigma_z == pytest.approx(analytic_sigma_z(0.04e-6, beam.t_D(KIN), KIN), rel=1e-9)
    assert out.norm() == pytest.approx(1.0, abs=1e-12)
    # chirp sign: faster components move ahead
    assert m.cov_zp > 0


def test_drift_composes():
    beam, psi = waist(0.05e-6, 0.5)
    t = beam.t_D(KIN)
    once = drift(psi, t, KIN)
    twice = drift(drift(psi, 0.4 * t, KIN), 0.6 * t, KIN)
    assert np.max(np.abs(once.samples - twice.samples)) < 1e-9 * np.max(np.abs(once.samples))


def test_zero_drift_is_identity():
    _, psi = waist(0.2e-6)
    assert np.array_equal(drift(psi, 0.0, KIN).samples, psi.samples)


def test_drift_back_restores_waist():
    beam, psi = waist(0.05e-6, 0.4)
    t = beam.t_D(KIN)
    back = drift(drift(psi, t, KIN), -t, KIN)
    assert abs(back.overlap(psi)) == pytest.approx(1.0, abs=1e-10)


def test_aliasing_guard_trips():
    beam = BeamParams(0.7, 0.04e-6, 0.6)
    g = GridSpec(2048, 2e-6)
    psi = gaussian_waist(beam, g, p0=KIN.p0)
    with pytest.raises(AliasingError):
        drift(psi, beam.t_D(KIN), KIN)
    shifted = replace(psi, samples=np.roll(psi.samples, g.N // 2))
    with pytest.raises(AliasingError):
        check_aliasing(shifted)


@settings(max_examples=15, deadline=None)
@given(
    st.floats(min_value=math.log(0.02e-6), max_value=math.log(1e-6)),
    st.floats(min_value=0.0, max_value=1.0),
)
def test_numerical_drift_follows_analytic_curve(log_s0, L_D):
    s0 = math.exp(log_s0)
    beam, psi = waist(s0, L_D)
    out = drift(psi, beam.t_D(KIN), KIN)
    target = analytic_sigma_z(s0, beam.t_D(KIN), KIN)
    assert moments(out).sigma_z == pytest.approx(target, rel=5e-3)


@settings(max_examples=15, deadline=None)
@given(
    st.floats(min_value=math.log(0.02e-6), max_value=math.log(1e-6)),
    st.floats(min_value=-1.0, max_value=1.0),
)
def test_phase_space_area_conserved(log_s0, L_D):
    beam, psi = waist(math.exp(log_s0), L_D)
    out = drift(psi, beam.t_D(KIN), KIN)
    assert moments(out).area_over_half_h == pytest.approx(1.0, abs=1e-6)
    assert moments(out).area == pytest.approx(HBAR / 2, rel=1e-6)
